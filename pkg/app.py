"""
cblocks - Conformal Blocks Toolkit
Main application entry point

Command-line front end: ranks, Chern classes, degrees and F-nef checks of
sheaves of coinvariants, plus Zhu-series data for lattice VOAs.
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from core.config_manager import get_default_config, load_config, validate_config
from core.divisor_calc import Asymmetry, DimensionError, chern_class, degree_m04, symmetrize
from core.fnef import FNefStatus, fnef_check, fnef_check_symmetric, gg_report
from core.fusion_ring import RankCalculator, label_name
from core.model_io import dump_model, parse_labels, parse_model, split_top_level
from core.report_writer import (
    certificate_rows, divisor_rows, gg_report_rows, gg_report_to_dict, machine_report,
    render_table, symmetric_rows, symmetric_to_dict,
)
from core.version import get_version_string
from core.voa_models import LatticeModel, integrality_check, minimal_series_spectrum
from core.zhu_series import conformal_weight, graded_dims, lowest_weight_dim

logger = logging.getLogger(__name__)

COMMANDS = ("rank", "c1", "degree4", "fnef", "zhu-dim", "zhu-series",
            "integrality", "report", "validate", "spectrum")

EXIT_OK = 0
EXIT_OBSTRUCTION = 1
EXIT_INPUT_ERROR = 2


@dataclass
class JobSpec:
    """One command-line invocation, after options-file defaults are applied."""

    command: str
    model: Optional[str] = None
    genus: int = 0
    labels: Optional[str] = None
    label: Optional[str] = None
    gram: Optional[str] = None
    coset: Optional[str] = None
    n_max: int = 10
    output_format: str = "table"
    symmetric: bool = False
    workers: int = 1
    exhaustive_limit: int = 15
    p: Optional[int] = None
    q: Optional[int] = None
    export: Optional[str] = None


@dataclass
class Outcome:
    """What a command produced: data for the machine report and rows for the table."""

    title: str
    data: Dict
    rows: List[Tuple[str, object]]
    exit_code: int = EXIT_OK
    text: Optional[str] = None


# ===== Input Helpers =====

def _require(value, flag: str, command: str):
    if value is None:
        raise ValueError(f"{command} needs {flag}")
    return value


def _model(job: JobSpec):
    return parse_model(_require(job.model, "--model", job.command))


def _parse_gram(text: str) -> Tuple[Tuple[int, ...], ...]:
    """Rows separated by ';', entries by ',': "2,-1;-1,2"."""
    try:
        return tuple(tuple(int(x) for x in row.split(",")) for row in text.split(";"))
    except ValueError:
        raise ValueError(f"--gram must be integer rows like 2,-1;-1,2, got {text!r}") from None


def _parse_coset(text: str) -> Tuple[Fraction, ...]:
    try:
        return tuple(Fraction(x.strip()) for x in split_top_level(text))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"--coset must be rationals like 2/3,1/3, got {text!r}") from None


def _lattice_and_label(job: JobSpec):
    """Lattice from --gram or a lattice model; label from --coset or --label."""
    if job.gram is not None:
        lattice = LatticeModel.from_gram(_parse_gram(job.gram))
    else:
        model = _model(job)
        if model.lattice is None:
            raise ValueError(f"{job.command} needs a lattice model (lattice:m) or --gram, got {model.name}")
        lattice = model.lattice

    if job.coset is not None:
        return lattice, lattice.coset(_parse_coset(job.coset))
    label = _require(job.label, "--label or --coset", job.command)
    if lattice.rank != 1:
        raise ValueError("--label only names cosets of rank-1 lattices; use --coset")
    try:
        return lattice, int(label)
    except ValueError:
        raise ValueError(f"--label must be an integer 0..{lattice.m - 1}, got {label!r}") from None


# ===== Commands =====

def cmd_rank(job: JobSpec) -> Outcome:
    model = _model(job)
    labels = parse_labels(model, job.labels)
    calc = RankCalculator(model)
    rank = calc.rank_genus(job.genus, labels)
    data = {"model": model.name, "genus": job.genus,
            "labels": [label_name(x) for x in labels], "rank": rank}
    if calc.diagnostics:
        data["diagnostics"] = calc.diagnostics
    return Outcome("rank", data, [("model", model.name), ("genus", job.genus), ("rank", rank)])


def cmd_c1(job: JobSpec) -> Outcome:
    model = _model(job)
    labels = parse_labels(model, job.labels)
    calc = RankCalculator(model)
    divisor = chern_class(model, job.genus, labels, calculator=calc)
    data = {"model": model.name, "genus": job.genus, "n": divisor.n,
            "rank": calc.rank_genus(job.genus, labels), "kind": "formal_c1",
            "class": divisor.to_report()}
    rows = [("model", model.name), ("genus", job.genus), ("rank", data["rank"])]
    rows.extend(divisor_rows(divisor))
    if job.symmetric and divisor.g == 0:
        compact = symmetrize(divisor)
        if isinstance(compact, Asymmetry):
            data["symmetric"] = None
            rows.append(("symmetric", f"no ({compact.reason} differs at {compact.witness})"))
        else:
            data["symmetric"] = symmetric_to_dict(compact)
            rows.extend(symmetric_rows(compact))
    return Outcome("first Chern class (formal)", data, rows)


def cmd_degree4(job: JobSpec) -> Outcome:
    model = _model(job)
    labels = parse_labels(model, job.labels)
    if job.genus != 0 or len(labels) != 4:
        raise DimensionError(f"degree4 needs genus 0 and 4 labels, got genus {job.genus} with {len(labels)}")
    degree = degree_m04(chern_class(model, 0, labels))
    data = {"model": model.name, "labels": [label_name(x) for x in labels], "degree": degree}
    code = EXIT_OBSTRUCTION if degree < 0 else EXIT_OK
    return Outcome("degree on M̄_0,4", data, [("model", model.name), ("degree", degree)], code)


def cmd_fnef(job: JobSpec) -> Outcome:
    model = _model(job)
    labels = parse_labels(model, job.labels)
    if job.genus != 0:
        raise DimensionError("fnef only checks classes on M̄_0,n")
    divisor = chern_class(model, 0, labels)
    if job.symmetric:
        compact = symmetrize(divisor)
        if isinstance(compact, Asymmetry):
            raise ValueError(f"class is not S_n-invariant: {compact.reason} differs at {compact.witness}")
        certificate = fnef_check_symmetric(compact)
    else:
        certificate = fnef_check(divisor, workers=job.workers, max_points=job.exhaustive_limit)
    data = {"model": model.name, "labels": [label_name(x) for x in labels],
            "kind": "formal_c1", "certificate": certificate.to_dict()}
    code = EXIT_OBSTRUCTION if certificate.status is FNefStatus.NOT_F_NEF else EXIT_OK
    return Outcome("F-nef check", data, [("model", model.name)] + certificate_rows(certificate), code)


def cmd_zhu_dim(job: JobSpec) -> Outcome:
    lattice, label = _lattice_and_label(job)
    coset = lattice.coset(label)
    weight = conformal_weight(lattice, coset)
    dim = lowest_weight_dim(lattice, coset)
    data = {"gram": lattice.gram_matrix, "coset": coset, "conformal_weight": weight,
            "lowest_weight_dim": dim}
    return Outcome("lowest weight space", data,
                   [("coset", ",".join(str(x) for x in coset)),
                    ("conformal weight", weight), ("dim W_0", dim)])


def cmd_zhu_series(job: JobSpec) -> Outcome:
    lattice, label = _lattice_and_label(job)
    series = graded_dims(lattice, label, job.n_max)
    data = {"gram": lattice.gram_matrix, "coset": lattice.coset(label),
            "base_weight": series.base_weight, "coeffs": series.coeffs}
    return Outcome("graded dimensions", data, [], text=series.to_csv())


def cmd_integrality(job: JobSpec) -> Outcome:
    model = _model(job)
    labels = parse_labels(model, job.labels)
    result = integrality_check(model, labels)
    data = {"model": model.name, "labels": [label_name(x) for x in labels],
            "total": result.total, "integral": result.integral}
    return Outcome("integrality condition", data,
                   [("sum of a_i", result.total), ("integral", result.integral)])


def cmd_report(job: JobSpec) -> Outcome:
    model = _model(job)
    labels = parse_labels(model, job.labels)
    report = gg_report(model, job.genus, labels, workers=job.workers, max_points=job.exhaustive_limit)
    code = EXIT_OBSTRUCTION if report.obstructed else EXIT_OK
    return Outcome("global generation report", gg_report_to_dict(report), gg_report_rows(report), code)


def cmd_validate(job: JobSpec) -> Outcome:
    # parse_model raises with diagnostics when a law fails
    model = _model(job)
    data = {"model": model.name, "labels": [label_name(x) for x in model.labels],
            "central_charge": model.central_charge, "valid": True}
    rows = [("model", model.name), ("labels", len(model.labels)),
            ("central charge", model.central_charge), ("valid", True)]
    if job.export:
        dump_model(model, job.export)
        data["exported_to"] = job.export
        rows.append(("exported to", job.export))
    return Outcome("model validation", data, rows)


def cmd_spectrum(job: JobSpec) -> Outcome:
    spectrum = minimal_series_spectrum(_require(job.p, "--p", job.command),
                                       _require(job.q, "--q", job.command))
    data = {"p": job.p, "q": job.q, "central_charge": spectrum.central_charge,
            "unitary": spectrum.is_unitary,
            "weights": [{"kac": list(pair), "weight": weight} for pair, weight in spectrum.weights]}
    rows = [("central charge", spectrum.central_charge), ("unitary", spectrum.is_unitary)]
    rows.extend((f"h{pair}", weight) for pair, weight in spectrum.weights)
    return Outcome("discrete series spectrum", data, rows)


HANDLERS: Dict[str, Callable[[JobSpec], Outcome]] = {
    "rank": cmd_rank,
    "c1": cmd_c1,
    "degree4": cmd_degree4,
    "fnef": cmd_fnef,
    "zhu-dim": cmd_zhu_dim,
    "zhu-series": cmd_zhu_series,
    "integrality": cmd_integrality,
    "report": cmd_report,
    "validate": cmd_validate,
    "spectrum": cmd_spectrum,
}


def run(job: JobSpec) -> Tuple[int, str]:
    """
    Dispatch a job to its command.

    Returns:
        (exit code, text for stdout); input errors give exit 2 and an
        error report instead of raising
    """
    if job.command not in HANDLERS:
        return EXIT_INPUT_ERROR, f"Error: unknown command {job.command!r}\n"
    try:
        outcome = HANDLERS[job.command](job)
    except (ValueError, OSError) as e:
        logger.debug("input error in %s", job.command, exc_info=True)
        if job.output_format == "machine":
            return EXIT_INPUT_ERROR, machine_report(job.command, {"message": str(e)}, status="error")
        return EXIT_INPUT_ERROR, f"Error: {e}\n"

    if job.output_format == "machine":
        status = "obstructed" if outcome.exit_code == EXIT_OBSTRUCTION else "success"
        return outcome.exit_code, machine_report(job.command, outcome.data, status=status)
    if outcome.text is not None:
        return outcome.exit_code, outcome.text
    return outcome.exit_code, render_table(outcome.title, outcome.rows)


# ===== Argument Parsing =====

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model expression, e.g. ising, lattice:8, 'ising x lattice:4'")
    common.add_argument("--genus", type=int, default=0)
    common.add_argument("--labels", help="comma-separated insertion, e.g. s,s,s,s")
    common.add_argument("--label", help="single rank-1 lattice label")
    common.add_argument("--gram", help="Gram matrix rows, e.g. 2,-1;-1,2")
    common.add_argument("--coset", help="coset vector, e.g. 2/3,1/3")
    common.add_argument("--n-max", type=int, dest="n_max")
    common.add_argument("--format", choices=("table", "machine"), dest="output_format")
    common.add_argument("--symmetric", action="store_true", help="use the S_n-invariant scan")
    common.add_argument("--workers", type=int)
    common.add_argument("--exhaustive-limit", type=int, dest="exhaustive_limit")
    common.add_argument("--config", help="options file (JSON or YAML)")
    common.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    parser = argparse.ArgumentParser(prog="cblocks", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=get_version_string())
    commands = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = commands.add_parser(name, parents=[common])
        if name == "validate":
            sub.add_argument("--export", help="write the model document to this path")
        if name == "spectrum":
            sub.add_argument("--p", type=int, required=True)
            sub.add_argument("--q", type=int, required=True)
    return parser


def job_from_args(args: argparse.Namespace, config: Dict) -> JobSpec:
    """Flags override options-file values."""

    def pick(value, key):
        return config[key] if value is None else value

    return JobSpec(
        command=args.command,
        model=args.model,
        genus=args.genus,
        labels=args.labels,
        label=args.label,
        gram=args.gram,
        coset=args.coset,
        n_max=pick(args.n_max, "zhu_max_level"),
        output_format=pick(args.output_format, "output_format"),
        symmetric=args.symmetric,
        workers=pick(args.workers, "workers"),
        exhaustive_limit=pick(args.exhaustive_limit, "exhaustive_limit"),
        p=getattr(args, "p", None),
        q=getattr(args, "q", None),
        export=getattr(args, "export", None),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the job, print the report; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")

    config = load_config(Path(args.config)) if args.config else get_default_config()
    is_valid, error_msg = validate_config(config)
    if not is_valid:
        print(f"Error: invalid options file {args.config}: {error_msg}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    code, output = run(job_from_args(args, config))
    stream = sys.stderr if code == EXIT_INPUT_ERROR and output.startswith("Error:") else sys.stdout
    stream.write(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
