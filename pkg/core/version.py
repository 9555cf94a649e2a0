"""
Version information for the conformal-blocks toolkit.

The version string is stamped into every machine report, so reports are
reproducible per release.
"""

# Version information
VERSION = "1.0.0"
RELEASE_DATE = "2026-10-16"
TOOL_NAME = "cblocks"


def get_version_string() -> str:
    """
    Get formatted version string.

    Returns:
        Version string like "cblocks v1.0.0"
    """
    return f"{TOOL_NAME} v{VERSION}"
