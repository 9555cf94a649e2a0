"""
F-Nef Module

F-curves on M̄_{0,n}, their intersection numbers with divisor classes, and
F-nefness certificates:
- exhaustive scan over all 4-block set partitions (any class, n <= limit)
- composition scan for S_n-invariant classes (nef follows for n <= 24)
- the global-generation report collecting every necessary condition
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from multiprocessing import Pool
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from core.divisor_calc import (
    Asymmetry, DivisorClass, SymmetricDivisor, chern_class, degree_m04, symmetrize,
)
from core.fusion_ring import FusionModel, Label, RankCalculator, label_name
from core.voa_models import integrality_check
from core.zhu_series import constant_bundle_rank

logger = logging.getLogger(__name__)

DEFAULT_EXHAUSTIVE_LIMIT = 15
SYMMETRIC_NEF_LIMIT = 24


class ExhaustiveLimitError(ValueError):
    """Raised when a full F-curve scan would be too large."""


class FNefStatus(str, Enum):
    F_NEF = "F-nef"
    NOT_F_NEF = "not-F-nef"


@dataclass(frozen=True)
class FCurve:
    """F-curve F_{N1,N2,N3,N4}: a partition of 1..n into four nonempty blocks."""

    blocks: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        blocks = tuple(sorted((frozenset(b) for b in self.blocks), key=lambda b: min(b) if b else 0))
        if len(blocks) != 4 or any(not b for b in blocks):
            raise ValueError("An F-curve needs exactly four nonempty blocks")
        union = frozenset().union(*blocks)
        if sum(len(b) for b in blocks) != len(union) or union != frozenset(range(1, len(union) + 1)):
            raise ValueError("F-curve blocks must be disjoint and cover 1..n")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "FCurve":
        return cls(tuple(frozenset(b) for b in blocks))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(sorted(len(b) for b in self.blocks))

    def sort_key(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(sorted(b)) for b in self.blocks)

    def to_lists(self) -> List[List[int]]:
        return [sorted(b) for b in self.blocks]


@dataclass(frozen=True)
class NefCertificate:
    """
    Outcome of an F-curve scan.

    `witness` is the lexicographically least F-curve of minimal intersection
    and is present exactly when that minimum is negative.
    """

    status: FNefStatus
    nef_concluded: bool
    witness: Optional[Tuple[FCurve, Fraction]]
    curves_checked: int
    min_value: Optional[Fraction] = None

    def to_dict(self) -> Dict:
        return {
            "status": self.status.value,
            "nef_concluded": self.nef_concluded,
            "curves_checked": self.curves_checked,
            "min_value": None if self.min_value is None else str(self.min_value),
            "witness": None if self.witness is None else {
                "blocks": self.witness[0].to_lists(),
                "value": str(self.witness[1]),
            },
        }


def _coefficient(divisor: DivisorClass, subset: FrozenSet[int]) -> Fraction:
    return divisor.coefficient(0, subset)


def intersect_fcurve(divisor: DivisorClass, curve: FCurve) -> Fraction:
    """
    D · F for a genus-0 class.

    Singleton blocks contribute their ψ, each of the three pairings
    N_1 ∪ N_j contributes its boundary coefficient, and each block of size
    at least 2 subtracts its own.

    Raises:
        ValueError: If D is not genus 0 or lives on a different M̄_{0,n}
    """
    if divisor.g != 0:
        raise ValueError("F-curve intersections are only implemented on M̄_{0,n}")
    if divisor.n != curve.n:
        raise ValueError(f"Class on M̄_0,{divisor.n} against an F-curve with {curve.n} points")

    blocks = curve.blocks
    value = Fraction(0)
    for block in blocks:
        if len(block) == 1:
            (point,) = block
            value += divisor.psi[point - 1]
        else:
            value -= _coefficient(divisor, block)
    for other in blocks[1:]:
        value += _coefficient(divisor, blocks[0] | other)
    return value


def _set_partitions(elements: Sequence[int], k: int) -> Iterator[List[List[int]]]:
    """Partitions of `elements` into exactly k nonempty blocks, in a fixed order."""
    if k == 0:
        if not elements:
            yield []
        return
    if len(elements) < k:
        return
    first, rest = elements[0], elements[1:]
    # first element alone
    for partition in _set_partitions(rest, k - 1):
        yield [[first]] + partition
    # first element joins a block
    for partition in _set_partitions(rest, k):
        for pos in range(len(partition)):
            yield partition[:pos] + [[first] + partition[pos]] + partition[pos + 1:]


def _heads(n: int) -> List[Tuple[int, ...]]:
    """Possible blocks containing point 1 (at least three points left for the other blocks)."""
    others = range(2, n + 1)
    return [(1,) + extra
            for size in range(0, n - 3)
            for extra in itertools.combinations(others, size)]


def enumerate_fcurves(n: int) -> Iterator[FCurve]:
    """Every F-curve on M̄_{0,n}, grouped by the block containing 1."""
    for head in _heads(n):
        rest = [p for p in range(2, n + 1) if p not in head]
        for partition in _set_partitions(rest, 3):
            yield FCurve.from_blocks([head] + partition)


def stirling_four_blocks(n: int) -> int:
    """S(n, 4), the number of F-curves on M̄_{0,n}."""
    return (4 ** n - 4 * 3 ** n + 6 * 2 ** n - 4) // 24


def _better(candidate, best):
    if best is None:
        return True
    return (candidate[1], candidate[0].sort_key()) < (best[1], best[0].sort_key())


def _scan_head(args: Tuple[DivisorClass, Tuple[int, ...]]):
    """Worker: minimum over all F-curves whose first block is `head`."""
    divisor, head = args
    rest = [p for p in range(2, divisor.n + 1) if p not in head]
    best = None
    count = 0
    for partition in _set_partitions(rest, 3):
        curve = FCurve.from_blocks([head] + partition)
        candidate = (curve, intersect_fcurve(divisor, curve))
        count += 1
        if _better(candidate, best):
            best = candidate
    return best, count


def _certificate(best, count: int, nef_allowed: bool) -> NefCertificate:
    min_value = best[1] if best else None
    negative = min_value is not None and min_value < 0
    return NefCertificate(
        status=FNefStatus.NOT_F_NEF if negative else FNefStatus.F_NEF,
        nef_concluded=nef_allowed and not negative,
        witness=best if negative else None,
        curves_checked=count,
        min_value=min_value,
    )


def fnef_check(divisor: DivisorClass, workers: int = 1,
               max_points: int = DEFAULT_EXHAUSTIVE_LIMIT) -> NefCertificate:
    """
    Intersect a genus-0 class with every F-curve.

    F-nefness is only a necessary condition for nefness here, so
    nef_concluded is always False.

    Args:
        divisor: Class on M̄_{0,n}, n >= 4
        workers: Processes to split the scan over (by the block containing 1)
        max_points: Largest n accepted for the exhaustive scan

    Raises:
        ExhaustiveLimitError: If n exceeds max_points
    """
    n = divisor.n
    if divisor.g != 0:
        raise ValueError("F-nef checks are only implemented on M̄_{0,n}")
    if n < 4:
        raise ValueError(f"M̄_0,{n} has no F-curves; need n >= 4")
    if n > max_points:
        raise ExhaustiveLimitError(
            f"Exhaustive scan on M̄_0,{n} needs {stirling_four_blocks(n)} F-curves; "
            f"limit is n <= {max_points}"
        )

    tasks = [(divisor, head) for head in _heads(n)]
    logger.info("scanning %d F-curves on M̄_0,%d with %d worker(s)",
                stirling_four_blocks(n), n, workers)
    if workers > 1:
        with Pool(workers) as pool:
            results = pool.map(_scan_head, tasks)
    else:
        results = [_scan_head(task) for task in tasks]

    best = None
    count = 0
    for candidate, scanned in results:
        count += scanned
        if candidate is not None and _better(candidate, best):
            best = candidate
    return _certificate(best, count, nef_allowed=False)


def compositions(n: int) -> Iterator[Tuple[int, int, int, int]]:
    """Block sizes a <= b <= c <= d with a + b + c + d = n."""
    for a in range(1, n // 4 + 1):
        for b in range(a, (n - a) // 3 + 1):
            for c in range(b, (n - a - b) // 2 + 1):
                yield a, b, c, n - a - b - c


def _symmetric_value(divisor: SymmetricDivisor, sizes: Tuple[int, int, int, int]) -> Fraction:
    value = Fraction(0)
    for size in sizes:
        value += divisor.psi_coeff if size == 1 else -divisor.coefficient(size)
    for other in sizes[1:]:
        value += divisor.coefficient(sizes[0] + other)
    return value


def _consecutive_curve(sizes: Sequence[int]) -> FCurve:
    blocks = []
    start = 1
    for size in sizes:
        blocks.append(range(start, start + size))
        start += size
    return FCurve.from_blocks(blocks)


def fnef_check_symmetric(divisor: SymmetricDivisor) -> NefCertificate:
    """
    F-nef check of an S_n-invariant class, one F-curve per size composition.

    An S_n-invariant F-nef class on M̄_{0,n} is nef for n <= 24, so then
    nef_concluded is True.
    """
    n = divisor.n
    if n < 4:
        raise ValueError(f"M̄_0,{n} has no F-curves; need n >= 4")
    best = None
    count = 0
    for sizes in compositions(n):
        count += 1
        candidate = (_consecutive_curve(sizes), _symmetric_value(divisor, sizes))
        if _better(candidate, best):
            best = candidate
    return _certificate(best, count, nef_allowed=n <= SYMMETRIC_NEF_LIMIT)


@dataclass
class GlobalGenerationReport:
    """
    Necessary conditions for global generation of V_g(V; W•).

    Verdicts and obstructions are necessary-condition statements only.
    """

    model: str
    genus: int
    labels: List[str]
    rank: int
    conformal_sum: Fraction
    integral: bool
    central_charge: Fraction
    chern_class: Optional[DivisorClass] = None
    degree: Optional[Fraction] = None
    fnef: Optional[NefCertificate] = None
    constant_rank: Optional[int] = None
    verdicts: List[str] = field(default_factory=list)
    obstructions: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def obstructed(self) -> bool:
        return bool(self.obstructions)


def _is_lambda_multiple(divisor: DivisorClass) -> bool:
    return not (any(divisor.psi) or divisor.delta_irr or divisor.boundary) and divisor.lam >= 0


def gg_report(model: FusionModel, g: int, ins: Iterable[Label], workers: int = 1,
              max_points: int = DEFAULT_EXHAUSTIVE_LIMIT) -> GlobalGenerationReport:
    """
    Collect rank, integrality, c1 and F-nefness for one sheaf of coinvariants.

    The report never claims global generation beyond the line-bundle case
    where c1 is a nonnegative multiple of the base point free class λ.
    """
    labels = tuple(ins)
    calc = RankCalculator(model)
    rank = calc.rank_genus(g, labels)
    integrality = integrality_check(model, labels)
    report = GlobalGenerationReport(
        model=model.name,
        genus=g,
        labels=[label_name(label) for label in labels],
        rank=rank,
        conformal_sum=integrality.total,
        integral=integrality.integral,
        central_charge=model.central_charge,
    )
    report.notes.extend(model.advisories)

    if model.lattice is not None and g == 0:
        report.constant_rank = constant_bundle_rank(model.lattice, labels)

    if rank == 0:
        report.verdicts.append("zero sheaf: trivially nef")
        return report

    report.chern_class = chern_class(model, g, labels, calculator=calc)
    n = len(labels)

    if g > 0 and model.central_charge < 0:
        report.obstructions.append(
            f"central charge {model.central_charge} < 0: λ coefficient is negative, c1 is not nef"
        )

    if g == 0 and n == 4:
        report.degree = degree_m04(report.chern_class)
        if report.degree < 0:
            report.obstructions.append(f"degree {report.degree} < 0: not globally generated")

    if g == 0 and n >= 4:
        compact = symmetrize(report.chern_class)
        if not isinstance(compact, Asymmetry):
            report.fnef = fnef_check_symmetric(compact)
        elif n <= max_points:
            report.fnef = fnef_check(report.chern_class, workers=workers, max_points=max_points)
        else:
            report.notes.append(f"F-nef check skipped: n = {n} exceeds the exhaustive limit {max_points}")
        if report.fnef is not None and report.fnef.status is FNefStatus.NOT_F_NEF:
            curve, value = report.fnef.witness
            report.obstructions.append(
                f"c1 · F = {value} < 0 on F-curve {curve.to_lists()}: c1 not nef, not globally generated"
            )

    if report.obstructed:
        return report

    if rank == 1 and _is_lambda_multiple(report.chern_class):
        report.verdicts.append(
            f"line bundle with c1 = {report.chern_class.lam}λ; λ is base point free ⇒ globally generated"
        )
    elif report.fnef is not None and report.fnef.nef_concluded:
        report.verdicts.append("c1 is nef (symmetric F-nef class, n <= 24); no obstruction found")
    else:
        report.verdicts.append("no obstruction found (necessary conditions only)")
    return report
