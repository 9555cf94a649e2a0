"""
Divisor Calculus Module

Exact divisor classes on M̄_{g,n} in the basis λ, ψ_i, δ_irr, δ_{i:I}, the
first Chern class formula for sheaves of coinvariants, and degrees on M̄_{0,4}.

Boundary keys are canonical: (i, I) and (g-i, I^c) name the same divisor and
only the smaller of the two is stored (for g = 0: the side containing point 1).
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from core.fusion_ring import FusionModel, Label, RankCalculator

logger = logging.getLogger(__name__)

BoundaryKey = Tuple[int, FrozenSet[int]]


class UnsupportedBaseError(ValueError):
    """Raised when (g, n) has no moduli space M̄_{g,n} to work on."""


class DimensionError(ValueError):
    """Raised when a class lives on the wrong M̄_{g,n} for the operation."""


class FactorizationError(ValueError):
    """Raised when b_{i:I} differs from its value computed from the other side of the node."""


def _sort_key(key: BoundaryKey):
    i, subset = key
    return i, tuple(sorted(subset))


def _preference(key: BoundaryKey):
    # smaller genus first, then the side holding point 1
    i, subset = key
    return i, 1 not in subset, tuple(sorted(subset))


def is_stable_boundary(g: int, n: int, i: int, subset: FrozenSet[int]) -> bool:
    """δ_{i:I} exists iff both sides of the node are stable."""
    if not 0 <= i <= g:
        return False
    return (i > 0 or len(subset) >= 2) and (g - i > 0 or n - len(subset) >= 2)


def canonical_boundary_key(g: int, n: int, i: int, subset: Iterable[int]) -> Optional[BoundaryKey]:
    """
    Canonical name of δ_{i:I}, or None when it is not a boundary divisor.

    Args:
        g: Genus
        n: Number of marked points
        i: Genus of the side carrying I
        subset: The marked points I on that side
    """
    subset = frozenset(subset)
    if not subset <= frozenset(range(1, n + 1)):
        raise ValueError(f"Subset {sorted(subset)} is not inside 1..{n}")
    if not is_stable_boundary(g, n, i, subset):
        return None
    other = (g - i, frozenset(range(1, n + 1)) - subset)
    return min((i, subset), other, key=_preference)


def boundary_keys(g: int, n: int) -> List[BoundaryKey]:
    """All canonical boundary keys of M̄_{g,n}, sorted."""
    points = range(1, n + 1)
    keys = set()
    for i in range(g + 1):
        for size in range(n + 1):
            for subset in itertools.combinations(points, size):
                key = canonical_boundary_key(g, n, i, subset)
                if key is not None:
                    keys.add(key)
    return sorted(keys, key=_sort_key)


def boundary_key_name(key: BoundaryKey) -> str:
    i, subset = key
    return f"d:{i}:{{{','.join(str(p) for p in sorted(subset))}}}"


@dataclass(frozen=True)
class DivisorClass:
    """
    Rational class λ·lam + Σ psi_i ψ_i + delta_irr·δ_irr + Σ boundary[k]·δ_k.

    `psi` is indexed by marked point minus one. Zero boundary entries are
    dropped, so two equal classes compare equal.
    """

    g: int
    n: int
    lam: Fraction = Fraction(0)
    psi: Tuple[Fraction, ...] = ()
    delta_irr: Fraction = Fraction(0)
    boundary: Dict[BoundaryKey, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        psi = tuple(Fraction(x) for x in self.psi) or (Fraction(0),) * self.n
        if len(psi) != self.n:
            raise DimensionError(f"Expected {self.n} psi coefficients, got {len(psi)}")
        if self.g == 0 and (self.lam or self.delta_irr):
            raise ValueError("Genus-0 classes have no λ or δ_irr part")

        boundary: Dict[BoundaryKey, Fraction] = {}
        for (i, subset), value in self.boundary.items():
            subset = frozenset(subset)
            key = canonical_boundary_key(self.g, self.n, i, subset)
            if key is None:
                raise ValueError(f"(i={i}, I={sorted(subset)}) is not a boundary divisor of M̄_{self.g},{self.n}")
            if key != (i, subset):
                raise ValueError(f"Boundary key {boundary_key_name((i, subset))} is not canonical; "
                                 f"use {boundary_key_name(key)}")
            value = Fraction(value)
            if value:
                boundary[key] = value

        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "lam", Fraction(self.lam))
        object.__setattr__(self, "delta_irr", Fraction(self.delta_irr))
        object.__setattr__(self, "boundary", boundary)

    @classmethod
    def zero(cls, g: int, n: int) -> "DivisorClass":
        return cls(g, n)

    def coefficient(self, i: int, subset: Iterable[int]) -> Fraction:
        """Coefficient of δ_{i:I}; 0 when (i, I) names no boundary divisor."""
        key = canonical_boundary_key(self.g, self.n, i, subset)
        if key is None:
            return Fraction(0)
        return self.boundary.get(key, Fraction(0))

    def is_zero(self) -> bool:
        return not (self.lam or self.delta_irr or any(self.psi) or self.boundary)

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        if (self.g, self.n) != (other.g, other.n):
            raise DimensionError(f"Cannot add classes on M̄_{self.g},{self.n} and M̄_{other.g},{other.n}")
        boundary = dict(self.boundary)
        for key, value in other.boundary.items():
            boundary[key] = boundary.get(key, Fraction(0)) + value
        return DivisorClass(
            self.g, self.n,
            lam=self.lam + other.lam,
            psi=tuple(a + b for a, b in zip(self.psi, other.psi)),
            delta_irr=self.delta_irr + other.delta_irr,
            boundary=boundary,
        )

    def scaled(self, factor) -> "DivisorClass":
        factor = Fraction(factor)
        return DivisorClass(
            self.g, self.n,
            lam=self.lam * factor,
            psi=tuple(x * factor for x in self.psi),
            delta_irr=self.delta_irr * factor,
            boundary={key: value * factor for key, value in self.boundary.items()},
        )

    def permuted(self, perm: Dict[int, int]) -> "DivisorClass":
        """
        Relabel marked points: point p becomes perm[p].

        Args:
            perm: A bijection of 1..n
        """
        if sorted(perm) != list(range(1, self.n + 1)) or sorted(perm.values()) != sorted(perm):
            raise ValueError("perm must be a bijection of the marked points")
        psi = [Fraction(0)] * self.n
        for p, value in enumerate(self.psi, start=1):
            psi[perm[p] - 1] = value
        boundary = {}
        for (i, subset), value in self.boundary.items():
            key = canonical_boundary_key(self.g, self.n, i, {perm[p] for p in subset})
            boundary[key] = value
        return DivisorClass(self.g, self.n, self.lam, tuple(psi), self.delta_irr, boundary)

    def to_report(self) -> Dict[str, str]:
        """Basis symbol -> "p/q" with canonical key strings; zero terms omitted."""
        report: Dict[str, str] = {}
        if self.lam:
            report["lambda"] = str(self.lam)
        for p, value in enumerate(self.psi, start=1):
            if value:
                report[f"psi:{p}"] = str(value)
        if self.delta_irr:
            report["dirr"] = str(self.delta_irr)
        for key in sorted(self.boundary, key=_sort_key):
            report[boundary_key_name(key)] = str(self.boundary[key])
        return report

    @classmethod
    def from_report(cls, g: int, n: int, report: Dict[str, str]) -> "DivisorClass":
        psi = [Fraction(0)] * n
        lam = delta_irr = Fraction(0)
        boundary: Dict[BoundaryKey, Fraction] = {}
        for symbol, text in report.items():
            value = Fraction(text)
            if symbol == "lambda":
                lam = value
            elif symbol == "dirr":
                delta_irr = value
            elif symbol.startswith("psi:"):
                psi[int(symbol[4:]) - 1] = value
            elif symbol.startswith("d:"):
                _, genus, points = symbol.split(":", 2)
                members = points.strip("{}")
                subset = frozenset(int(p) for p in members.split(",") if p)
                boundary[(int(genus), subset)] = value
            else:
                raise ValueError(f"Unknown basis symbol {symbol!r}")
        return cls(g, n, lam, tuple(psi), delta_irr, boundary)


@dataclass(frozen=True)
class SymmetricDivisor:
    """
    S_n-invariant class on M̄_{0,n}: psi_coeff·Σψ_i + Σ_k boundary_by_size[k]·B_k.

    B_k is the sum of δ_I over |I| = k (or n - k); sizes run over 2..n//2,
    and for k = n/2 the coefficient is stored once.
    """

    n: int
    psi_coeff: Fraction = Fraction(0)
    boundary_by_size: Dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        sizes = {}
        for size, value in self.boundary_by_size.items():
            if not 2 <= size <= self.n // 2:
                raise ValueError(f"Boundary size {size} outside 2..{self.n // 2}")
            sizes[size] = Fraction(value)
        object.__setattr__(self, "psi_coeff", Fraction(self.psi_coeff))
        object.__setattr__(self, "boundary_by_size", sizes)

    def coefficient(self, size: int) -> Fraction:
        """Coefficient of δ_I for |I| = size; 0 outside 2..n-2."""
        if not 2 <= size <= self.n - 2:
            return Fraction(0)
        return self.boundary_by_size.get(min(size, self.n - size), Fraction(0))

    def to_divisor(self) -> DivisorClass:
        boundary = {key: self.coefficient(len(key[1])) for key in boundary_keys(0, self.n)}
        return DivisorClass(0, self.n, psi=(self.psi_coeff,) * self.n, boundary=boundary)


@dataclass(frozen=True)
class Asymmetry:
    """First place where a class fails to be S_n-invariant."""

    reason: str
    witness: Tuple


def _split_coefficient(calc: RankCalculator, genus_a: int, side_a: Tuple[Label, ...],
                       genus_b: int, side_b: Tuple[Label, ...]) -> Fraction:
    """Σ_W a_W rank_{genus_a}(side_a ∪ W) rank_{genus_b}(side_b ∪ W')."""
    model = calc.model
    total = Fraction(0)
    for w in model.labels:
        weight = model.conf_dim[w]
        if not weight:
            continue
        left = calc.rank_genus(genus_a, side_a + (w,))
        if left:
            total += weight * left * calc.rank_genus(genus_b, side_b + (model.dual[w],))
    return total


def chern_class(model: FusionModel, g: int, ins: Iterable[Label],
                calculator: Optional[RankCalculator] = None) -> DivisorClass:
    """
    First Chern class of V_g(V; W•) by the factorization formula.

    c1 = rank·(c/2 λ + Σ a_i ψ_i) - b_irr δ_irr - Σ b_{i:I} δ_{i:I}

    The formula holds for self-contragredient rational C2-cofinite V; for
    other tabulated models the result is the formal class.

    Args:
        model: Fusion data
        g: Genus
        ins: Labels at the marked points 1..n
        calculator: Rank session to reuse, a fresh one by default

    Raises:
        UnsupportedBaseError: If 2g - 2 + n <= 0 (for g = 0: n < 3)
        FactorizationError: If some b_{i:I} depends on which side of the node it is read from
    """
    labels = tuple(ins)
    n = len(labels)
    if 2 * g - 2 + n <= 0:
        raise UnsupportedBaseError(f"M̄_{g},{n} is not a moduli space of stable curves")
    calc = calculator or RankCalculator(model)
    rank = calc.rank_genus(g, labels)

    lam = rank * model.central_charge / 2 if g > 0 else Fraction(0)
    psi = tuple(rank * model.conf_dim[label] for label in labels)

    delta_irr = Fraction(0)
    if g > 0:
        for w in model.labels:
            if model.conf_dim[w]:
                delta_irr -= model.conf_dim[w] * calc.rank_genus(g - 1, labels + (w, model.dual[w]))

    boundary: Dict[BoundaryKey, Fraction] = {}
    for key in boundary_keys(g, n):
        i, subset = key
        side = tuple(labels[p - 1] for p in sorted(subset))
        rest = tuple(labels[p - 1] for p in range(1, n + 1) if p not in subset)
        b = _split_coefficient(calc, i, side, g - i, rest)
        mirrored = _split_coefficient(calc, g - i, rest, i, side)
        if b != mirrored:
            raise FactorizationError(
                f"b for {boundary_key_name(key)} is {b} from one side and {mirrored} from the other"
            )
        boundary[key] = -b

    logger.debug("c1 on M̄_%d,%d: rank %d, %d boundary keys, memo %d",
                 g, n, rank, len(boundary), calc.cache_size)
    return DivisorClass(g, n, lam, psi, delta_irr, boundary)


def degree_m04(divisor: DivisorClass) -> Fraction:
    """Degree on M̄_{0,4}, where every ψ_i and every δ has degree 1."""
    if (divisor.g, divisor.n) != (0, 4):
        raise DimensionError(f"Degree needs a class on M̄_0,4, got M̄_{divisor.g},{divisor.n}")
    return sum(divisor.psi, Fraction(0)) + sum(divisor.boundary.values(), Fraction(0))


def symmetrize(divisor: DivisorClass) -> Union[SymmetricDivisor, Asymmetry]:
    """
    Compact S_n-invariant form of a genus-0 class.

    Returns:
        SymmetricDivisor, or Asymmetry naming the first mismatch
    """
    if divisor.g != 0:
        raise DimensionError("Only genus-0 classes can be symmetrized")
    n = divisor.n
    for p in range(2, n + 1):
        if divisor.psi[p - 1] != divisor.psi[0]:
            return Asymmetry("psi", (1, p))

    by_size: Dict[int, Fraction] = {}
    first_key: Dict[int, BoundaryKey] = {}
    for key in boundary_keys(0, n):
        size = min(len(key[1]), n - len(key[1]))
        value = divisor.boundary.get(key, Fraction(0))
        if size not in by_size:
            by_size[size] = value
            first_key[size] = key
        elif by_size[size] != value:
            return Asymmetry("boundary", (boundary_key_name(first_key[size]), boundary_key_name(key)))

    psi_coeff = divisor.psi[0] if n else Fraction(0)
    return SymmetricDivisor(n, psi_coeff, {k: v for k, v in by_size.items() if v})
