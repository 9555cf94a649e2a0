"""
Configuration Management Module

Optional options file for the command-line tool, given explicitly with
--config PATH (JSON, or YAML for .yaml/.yml). There is no implicit per-user
config file and no environment variable: command-line flags always win over
the file, and the file is itself a flag.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import yaml

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("table", "machine")


def get_default_config() -> Dict:
    """
    Get default configuration.

    Returns:
        Dictionary with default configuration values
    """
    return {
        "version": "1.0",
        "workers": 1,
        "exhaustive_limit": 15,
        "output_format": "table",
        "zhu_max_level": 10,
    }


def load_config(path: Optional[Union[str, Path]] = None) -> Dict:
    """
    Load an options file and fill missing keys from the defaults.

    An unreadable or malformed file logs a warning and yields the defaults.

    Args:
        path: Options file; None means defaults only

    Returns:
        Dictionary containing configuration
    """
    default_config = get_default_config()
    if path is None:
        return default_config

    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            if path.suffix.lower() in (".yaml", ".yml"):
                config = yaml.safe_load(f) or {}
            else:
                config = json.load(f)
        if not isinstance(config, dict):
            raise ValueError("options file must hold a single object")
    except Exception as e:
        logger.warning("Error loading config from %s: %s; using default configuration", path, e)
        return default_config

    for key in default_config:
        if key not in config:
            config[key] = default_config[key]
    return config


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate_config(config: Dict) -> Tuple[bool, str]:
    """
    Validate option values.

    Args:
        config: Configuration as returned by load_config

    Returns:
        Tuple of (is_valid, error_message)
    """
    unknown = sorted(set(config) - set(get_default_config()))
    if unknown:
        return False, f"Unknown option(s): {', '.join(unknown)}"

    if not _is_int(config["workers"]) or config["workers"] < 1:
        return False, f"workers must be a positive integer, got {config['workers']!r}"

    if not _is_int(config["exhaustive_limit"]) or config["exhaustive_limit"] < 4:
        return False, f"exhaustive_limit must be an integer >= 4, got {config['exhaustive_limit']!r}"

    if config["output_format"] not in OUTPUT_FORMATS:
        return False, f"output_format must be one of {', '.join(OUTPUT_FORMATS)}"

    if not _is_int(config["zhu_max_level"]) or config["zhu_max_level"] < 0:
        return False, f"zhu_max_level must be a nonnegative integer, got {config['zhu_max_level']!r}"

    return True, ""
