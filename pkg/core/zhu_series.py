"""
Zhu Series Module

q-series for modules over even lattice VOAs, via Zhu's character formula:

    sum_n dim W_{a+n} q^n = (theta series of the coset) * prod_k (1 - q^k)^(-d)

Everything is exact: shells are enumerated with rational completion of
squares and series are multiplied by integer convolution.
"""

import csv
import io
import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Sequence, Tuple, Union

from core.voa_models import Coset, LatticeModel

logger = logging.getLogger(__name__)

CosetLabel = Union[int, Sequence]


@dataclass(frozen=True)
class ShellQuery:
    """Count of L_j^λ = {α ∈ L : Q(α + λ) = j}."""

    lattice: LatticeModel
    coset: Coset
    level: Fraction

    def __post_init__(self):
        object.__setattr__(self, "coset", self.lattice.coset(self.coset))
        object.__setattr__(self, "level", Fraction(self.level))
        if self.level < 0:
            raise ValueError(f"Shell level must be nonnegative, got {self.level}")


@dataclass(frozen=True)
class GradedSeries:
    """dim W_{a_W + n} for n = 0..len(coeffs)-1."""

    base_weight: Fraction
    coeffs: Tuple[int, ...]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["n", "dimension"])
        for n, dim in enumerate(self.coeffs):
            writer.writerow([n, dim])
        return buffer.getvalue()


@lru_cache(maxsize=None)
def partition_series(n_max: int, colors: int = 1) -> Tuple[int, ...]:
    """
    Coefficients of prod_{k>=1} (1 - q^k)^(-colors) up to q^n_max.

    Each color multiplies by 1/(1 - q^k) for every part size k.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    if colors < 1:
        raise ValueError(f"colors must be >= 1, got {colors}")
    coeffs = [1] + [0] * n_max
    for _ in range(colors):
        for part in range(1, n_max + 1):
            for total in range(part, n_max + 1):
                coeffs[total] += coeffs[total - part]
    return tuple(coeffs)


def partition_count(n: int, colors: int = 1) -> int:
    """P_d(n): number of d-colored partitions of n; P(0) = 1."""
    return partition_series(n, colors)[n]


def _rational_sqrt(x: Fraction):
    """Exact square root of a nonnegative rational, or None if irrational."""
    num, den = x.numerator, x.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def _sqrt_ceiling(x: Fraction) -> int:
    """An integer >= sqrt(x)."""
    return math.isqrt(math.ceil(x)) + 1


def shell_levels(lattice: LatticeModel, coset: Coset, bound: Fraction) -> Dict[Fraction, int]:
    """
    All values Q(α + λ) <= bound over α ∈ L, with multiplicities.

    Enumerates the integer points of the ellipsoid coordinate by coordinate,
    last coordinate first, using the exact completion of squares.

    Args:
        lattice: Positive-definite even lattice
        coset: λ, a rational vector of length rank
        bound: Largest level to report

    Returns:
        Mapping level -> |L_level^λ| for every level that occurs
    """
    bound = Fraction(bound)
    coset = lattice.coset(coset)
    levels: Counter = Counter()
    if bound < 0:
        return {}

    t = lattice.completed_squares
    d = lattice.rank
    x = [Fraction(0)] * d

    def descend(i: int, budget: Fraction) -> None:
        if i < 0:
            levels[bound - budget] += 1
            return
        centre = -sum((t[i][j] * x[j] for j in range(i + 1, d)), Fraction(0))
        # |x_i - centre| <= sqrt(budget / t_ii), widened to whole integers
        reach = _sqrt_ceiling(budget / t[i][i])
        start = math.floor(centre - coset[i]) - reach
        stop = math.ceil(centre - coset[i]) + reach
        for alpha in range(start, stop + 1):
            x[i] = alpha + coset[i]
            used = t[i][i] * (x[i] - centre) ** 2
            if used <= budget:
                descend(i - 1, budget - used)
        x[i] = Fraction(0)

    descend(d - 1, bound)
    return dict(levels)


def shell_count(query: ShellQuery) -> int:
    """
    |L_j^λ|, the number of lattice vectors α with Q(α + λ) = j.

    Rank 1 solves m(α + λ)^2 / 2 = j directly; a level with no rational
    solution gives 0, not an error.
    """
    lattice, coset, level = query.lattice, query.coset, query.level
    if lattice.rank == 1:
        root = _rational_sqrt(2 * level / lattice.m)
        if root is None:
            return 0
        lam = coset[0]
        solutions = {x - lam for x in (root, -root) if (x - lam).denominator == 1}
        return len(solutions)
    return shell_levels(lattice, coset, level).get(level, 0)


def _fractional_part(coset: Coset) -> Coset:
    return tuple(x - math.floor(x) for x in coset)


def conformal_weight(lattice: LatticeModel, label: CosetLabel) -> Fraction:
    """a_W = min over the coset of Q, found by enumerating below Q(frac λ)."""
    coset = _fractional_part(lattice.coset(label))
    levels = shell_levels(lattice, coset, lattice.norm(coset))
    return min(levels)


def lowest_weight_dim(lattice: LatticeModel, label: CosetLabel) -> int:
    """
    dim W_0 = sum_{N=0}^{floor(a_W)} |L_{a_W - N}^λ| P_d(N).

    The sum over N stops at floor(a_W): shell levels are nonnegative, so
    every later term vanishes.
    """
    coset = lattice.coset(label)
    weight = conformal_weight(lattice, coset)
    levels = shell_levels(lattice, coset, weight)
    top = math.floor(weight)
    partitions = partition_series(top, lattice.rank)
    return sum(levels.get(weight - n, 0) * partitions[n] for n in range(top + 1))


def theta_coefficients(lattice: LatticeModel, label: CosetLabel, n_max: int) -> Tuple[Fraction, Tuple[int, ...]]:
    """
    Theta series of the coset shifted to start at its lowest level.

    Returns:
        (a_W, counts) with counts[k] = |L_{a_W + k}^λ| for k = 0..n_max
    """
    coset = lattice.coset(label)
    weight = conformal_weight(lattice, coset)
    counts = [0] * (n_max + 1)
    for level, count in shell_levels(lattice, coset, weight + n_max).items():
        offset = level - weight
        if offset.denominator != 1:
            raise ValueError(f"Shell levels of coset {coset} differ by {offset}; the coset is not in L′")
        counts[int(offset)] += count
    return weight, tuple(counts)


def graded_dims(lattice: LatticeModel, label: CosetLabel, n_max: int) -> GradedSeries:
    """
    Graded dimensions dim W_{a_W + n}, n = 0..n_max.

    Computed as the convolution of the theta coefficients with the
    d-colored partition series.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    weight, theta = theta_coefficients(lattice, label, n_max)
    partitions = partition_series(n_max, lattice.rank)
    coeffs = [sum(theta[k] * partitions[n - k] for k in range(n + 1)) for n in range(n_max + 1)]
    logger.debug("graded dims of %s up to %d: %s", label, n_max, coeffs)
    return GradedSeries(weight, tuple(coeffs))


def constant_bundle_rank(lattice: LatticeModel, labels: Iterable[CosetLabel]) -> int:
    """Rank of the constant sheaf of lowest-weight spaces: prod_i dim W^i_0."""
    rank = 1
    for label in labels:
        rank *= lowest_weight_dim(lattice, label)
    return rank
