"""
Report Writer Module

Renders command results as a human-readable table or as the machine report,
a JSON envelope that is byte-for-byte deterministic for a fixed job and
tool version.
"""

import json
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Tuple

from core.divisor_calc import DivisorClass, SymmetricDivisor
from core.fnef import GlobalGenerationReport, NefCertificate
from core.version import get_version_string

Row = Tuple[str, Any]


def to_jsonable(value: Any) -> Any:
    """Fractions become "p/q" strings; tuples and sets become lists."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, (set, frozenset)):
        return sorted(to_jsonable(item) for item in value)
    return value


def machine_report(command: str, data: Dict, status: str = "success") -> str:
    """
    Machine report envelope: {"command", "data", "status", "tool_version"}.

    Keys are sorted and no timestamps are written.
    """
    envelope = {
        "status": status,
        "command": command,
        "tool_version": get_version_string(),
        "data": to_jsonable(data),
    }
    return json.dumps(envelope, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if value is None:
        return "-"
    return str(value)


def render_table(title: str, rows: Iterable[Row]) -> str:
    """Two-column table with the keys left-aligned."""
    rows = [(key, _cell(value)) for key, value in rows]
    width = max((len(key) for key, _ in rows), default=0)
    lines = [title, "=" * len(title)]
    lines.extend(f"{key.ljust(width)}  {value}" for key, value in rows)
    return "\n".join(lines) + "\n"


def divisor_rows(divisor: DivisorClass) -> List[Row]:
    report = divisor.to_report()
    if not report:
        return [("(class)", "0")]
    return list(report.items())


def symmetric_rows(divisor: SymmetricDivisor) -> List[Row]:
    rows: List[Row] = [("psi (each point)", divisor.psi_coeff)]
    rows.extend((f"B_{size}", value) for size, value in sorted(divisor.boundary_by_size.items()))
    return rows


def symmetric_to_dict(divisor: SymmetricDivisor) -> Dict:
    return {
        "n": divisor.n,
        "psi": divisor.psi_coeff,
        "boundary_by_size": {str(size): value for size, value in sorted(divisor.boundary_by_size.items())},
    }


def certificate_rows(certificate: NefCertificate) -> List[Row]:
    rows: List[Row] = [
        ("status", certificate.status.value),
        ("nef concluded", certificate.nef_concluded),
        ("curves checked", certificate.curves_checked),
        ("min value", certificate.min_value),
    ]
    if certificate.witness is not None:
        curve, value = certificate.witness
        rows.append(("witness", f"{curve.to_lists()} -> {value}"))
    return rows


def gg_report_to_dict(report: GlobalGenerationReport) -> Dict:
    return {
        "model": report.model,
        "genus": report.genus,
        "labels": report.labels,
        "rank": report.rank,
        "conformal_sum": report.conformal_sum,
        "integral": report.integral,
        "central_charge": report.central_charge,
        "kind": "formal_c1",
        "c1": None if report.chern_class is None else report.chern_class.to_report(),
        "degree": report.degree,
        "fnef": None if report.fnef is None else report.fnef.to_dict(),
        "constant_bundle_rank": report.constant_rank,
        "verdicts": report.verdicts,
        "obstructions": report.obstructions,
        "notes": report.notes,
        "obstructed": report.obstructed,
    }


def gg_report_rows(report: GlobalGenerationReport) -> List[Row]:
    rows: List[Row] = [
        ("model", report.model),
        ("genus", report.genus),
        ("labels", ",".join(report.labels)),
        ("rank", report.rank),
        ("sum of a_i", report.conformal_sum),
        ("integral", report.integral),
        ("central charge", report.central_charge),
    ]
    if report.constant_rank is not None:
        rows.append(("constant bundle rank", report.constant_rank))
    if report.chern_class is not None:
        rows.extend((f"c1 {key}", value) for key, value in divisor_rows(report.chern_class))
    if report.degree is not None:
        rows.append(("degree on M̄_0,4", report.degree))
    if report.fnef is not None:
        rows.extend((f"F-nef {key}", value) for key, value in certificate_rows(report.fnef))
    rows.extend(("obstruction", text) for text in report.obstructions)
    rows.extend(("verdict", text) for text in report.verdicts)
    rows.extend(("note", text) for text in report.notes)
    return rows
