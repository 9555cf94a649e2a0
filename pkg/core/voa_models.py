"""
VOA Models Module

Catalog of the concrete VOAs whose fusion data is fully known:
- ising: the discrete series model Vir_{c_{3,4}}
- lattice: rank-1 even lattice VOAs V_L with L = Ze, q(e,e) = m
- holomorphic: a single module, central charge c
plus the discrete-series spectrum and the integrality condition.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from core.fusion_ring import FusionModel, Label

logger = logging.getLogger(__name__)

Coset = Tuple[Fraction, ...]


class InvalidLatticeError(ValueError):
    """Raised for a pairing or Gram matrix that does not define an even positive lattice."""


class MinimalSeriesError(ValueError):
    """Raised for (p, q) outside the discrete series."""


@dataclass(frozen=True)
class LatticeModel:
    """
    Even positive-definite lattice.

    Rank 1 is given by m = q(e, e); higher rank by a Gram matrix, in which
    case m is q(e_1, e_1). Labels of the rank-1 model are 0..m-1, label j
    being the coset (j/m)·e.
    """

    m: int = 2
    gram: Optional[Tuple[Tuple[int, ...], ...]] = None

    def __post_init__(self):
        if self.gram is None:
            if not isinstance(self.m, int) or self.m < 2 or self.m % 2:
                raise InvalidLatticeError(
                    f"Pairing q(e,e) = {self.m} must be an even integer >= 2"
                )
            return

        gram = tuple(tuple(int(x) for x in row) for row in self.gram)
        d = len(gram)
        if d == 0 or any(len(row) != d for row in gram):
            raise InvalidLatticeError("Gram matrix must be square and nonempty")
        for i in range(d):
            if gram[i][i] % 2:
                raise InvalidLatticeError(f"Gram diagonal entry {i + 1} is odd; lattice not even")
            for j in range(i):
                if gram[i][j] != gram[j][i]:
                    raise InvalidLatticeError("Gram matrix is not symmetric")
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "m", gram[0][0])
        # raises on a nonpositive pivot
        self.completed_squares

    @classmethod
    def from_gram(cls, gram: Sequence[Sequence[int]]) -> "LatticeModel":
        return cls(gram=tuple(tuple(row) for row in gram))

    @property
    def gram_matrix(self) -> Tuple[Tuple[int, ...], ...]:
        return self.gram if self.gram is not None else ((self.m,),)

    @property
    def rank(self) -> int:
        return len(self.gram_matrix)

    @cached_property
    def completed_squares(self) -> Tuple[Tuple[Fraction, ...], ...]:
        """
        Exact completion of squares of Q(x) = x^T G x / 2.

        Returns an upper-triangular table t with
        Q(x) = sum_i t[i][i] * (x_i + sum_{j>i} t[i][j] x_j)^2.
        """
        d = self.rank
        t = [[Fraction(x, 2) for x in row] for row in self.gram_matrix]
        for i in range(d):
            if t[i][i] <= 0:
                raise InvalidLatticeError("Gram matrix is not positive definite")
            for j in range(i + 1, d):
                t[j][i] = t[i][j]
                t[i][j] = t[i][j] / t[i][i]
            for k in range(i + 1, d):
                for col in range(k, d):
                    t[k][col] -= t[k][i] * t[i][col]
        return tuple(tuple(row) for row in t)

    def norm(self, vector: Sequence[Fraction]) -> Fraction:
        """Q(x) = q(x, x) / 2."""
        gram = self.gram_matrix
        total = Fraction(0)
        for i, xi in enumerate(vector):
            for j, xj in enumerate(vector):
                total += gram[i][j] * xi * xj
        return total / 2

    def coset(self, label: Union[int, Sequence]) -> Coset:
        """
        Coset representative λ of a label.

        Args:
            label: j in 0..m-1 for rank 1, or a rational vector of length rank

        Returns:
            λ as a tuple of Fractions

        Raises:
            ValueError: If the label is out of range or λ is not in the dual lattice L′
        """
        if isinstance(label, int) and not isinstance(label, bool):
            if self.rank != 1:
                raise ValueError("Integer labels are only defined for rank-1 lattices")
            if not 0 <= label < self.m:
                raise ValueError(f"Label {label} is outside 0..{self.m - 1}")
            return (Fraction(label, self.m),)
        vector = tuple(Fraction(x) for x in label)
        if len(vector) != self.rank:
            raise ValueError(f"Coset has length {len(vector)}, lattice has rank {self.rank}")
        pairings = [sum(g * x for g, x in zip(row, vector)) for row in self.gram_matrix]
        if any(Fraction(p).denominator != 1 for p in pairings):
            shown = ",".join(str(x) for x in vector)
            raise ValueError(f"Coset ({shown}) is not in the dual lattice: q(λ, e_i) must be integers")
        return vector


@dataclass(frozen=True)
class MinimalSeriesParams:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 2 or self.q < 2:
            raise MinimalSeriesError(f"p and q must be >= 2, got ({self.p}, {self.q})")
        if math.gcd(self.p, self.q) != 1:
            raise MinimalSeriesError(f"p = {self.p} and q = {self.q} are not coprime")

    @property
    def central_charge(self) -> Fraction:
        return 1 - Fraction(6 * (self.p - self.q) ** 2, self.p * self.q)

    @property
    def is_unitary(self) -> bool:
        return abs(self.p - self.q) == 1


@dataclass(frozen=True)
class MinimalSeriesSpectrum:
    """Kac-table weights of Vir_{c_{p,q}}, one entry per class (m,n) ~ (p-m, q-n)."""

    params: MinimalSeriesParams
    central_charge: Fraction
    weights: Tuple[Tuple[Tuple[int, int], Fraction], ...]

    @property
    def is_unitary(self) -> bool:
        return self.params.is_unitary


class IntegralityResult(NamedTuple):
    total: Fraction
    integral: bool


ISING_ALIASES = {
    "v": "1", "V": "1",
    "ε": "e", "W1": "e",
    "σ": "s", "W2": "s",
}


def ising_model() -> FusionModel:
    """
    The Ising model Vir_{c_{3,4}}: labels 1, e (weight 1/2), s (weight 1/16).

    Fusion: e·e = 1, e·s = s, s·s = 1 + e; every label is self-dual.
    """
    labels = ("1", "e", "s")
    mult = {(a, b, c): 0 for a in labels for b in labels for c in labels}
    for x in labels:
        mult[("1", x, x)] = 1
        mult[(x, "1", x)] = 1
    mult[("e", "e", "1")] = 1
    mult[("e", "s", "s")] = 1
    mult[("s", "e", "s")] = 1
    mult[("s", "s", "1")] = 1
    mult[("s", "s", "e")] = 1

    return FusionModel(
        name="ising",
        labels=labels,
        vacuum="1",
        dual={x: x for x in labels},
        mult={key: n for key, n in mult.items() if n},
        conf_dim={"1": Fraction(0), "e": Fraction(1, 2), "s": Fraction(1, 16)},
        central_charge=Fraction(1, 2),
        aliases=dict(ISING_ALIASES),
    )


def lattice_conf_dim(j: int, m: int) -> Fraction:
    """(1/2) min_α q(λ+α, λ+α) for λ = (j/m)e, in closed form."""
    r = min(j % m, m - j % m)
    return Fraction(r * r, 2 * m)


def lattice_model(m: int) -> FusionModel:
    """
    Rank-1 even lattice VOA with q(e, e) = m.

    Labels 0..m-1 form the group ring of Z/m: i·j = (i + j) mod m,
    dual(j) = -j mod m, and the central charge is the rank, 1.

    Raises:
        InvalidLatticeError: If m is odd or below 2
    """
    lattice = LatticeModel(m=m)
    labels = tuple(range(m))
    return FusionModel(
        name=f"lattice:{m}",
        labels=labels,
        vacuum=0,
        dual={j: (-j) % m for j in labels},
        mult={(i, j, (i + j) % m): 1 for i in labels for j in labels},
        conf_dim={j: lattice_conf_dim(j, m) for j in labels},
        central_charge=Fraction(1),
        lattice=lattice,
    )


def holomorphic_model(c: Union[Fraction, int, str]) -> FusionModel:
    """
    Holomorphic VOA: V is its only simple module.

    Every rank is 1. An advisory is recorded when c is not a positive
    multiple of 8, which no holomorphic VOA of CFT-type has.
    """
    c = Fraction(c)
    advisories: Tuple[str, ...] = ()
    if not (c > 0 and c.denominator == 1 and c.numerator % 8 == 0):
        message = f"central charge {c} of a holomorphic VOA should be a positive multiple of 8"
        logger.warning(message)
        advisories = (message,)

    return FusionModel(
        name=f"holomorphic:{c}",
        labels=("1",),
        vacuum="1",
        dual={"1": "1"},
        mult={("1", "1", "1"): 1},
        conf_dim={"1": Fraction(0)},
        central_charge=c,
        aliases={"v": "1", "V": "1"},
        advisories=advisories,
    )


def kac_weight(params: MinimalSeriesParams, m: int, n: int) -> Fraction:
    """h_{m,n} = ((np - mq)^2 - (p - q)^2) / 4pq."""
    p, q = params.p, params.q
    return Fraction((n * p - m * q) ** 2 - (p - q) ** 2, 4 * p * q)


def minimal_series_spectrum(p: int, q: int) -> MinimalSeriesSpectrum:
    """
    Conformal weights of the discrete series Vir_{c_{p,q}}.

    Only the spectrum is produced: fusion constants for these models have to
    come from a model file.

    Args:
        p: First coprime parameter, >= 2
        q: Second coprime parameter, >= 2

    Returns:
        Spectrum with one (m, n) representative per class, in increasing (m, n)
    """
    params = MinimalSeriesParams(p, q)
    seen = set()
    weights: List[Tuple[Tuple[int, int], Fraction]] = []
    for m in range(1, p):
        for n in range(1, q):
            pair = min((m, n), (p - m, q - n))
            if pair in seen:
                continue
            seen.add(pair)
            weights.append((pair, kac_weight(params, *pair)))
    weights.sort()
    return MinimalSeriesSpectrum(params, params.central_charge, tuple(weights))


def integrality_check(model: FusionModel, ins: Iterable[Label]) -> IntegralityResult:
    """
    Integrality condition: the conformal dimensions of the insertion sum to an integer.

    Returns:
        IntegralityResult(total, integral)
    """
    total = Fraction(0)
    for label in ins:
        model.index(label)
        total += model.conf_dim[label]
    return IntegralityResult(total, total.denominator == 1)
