"""
Fusion Ring Module

Holds the fusion data of a VOA's simple-module category and computes ranks of
sheaves of coinvariants on M̄_{g,n} by the factorization recursion:
- genus 0: vacuum coefficient of the iterated fusion product
- genus g: handle recursion, summing over W ⊗ W' insertions
"""

import itertools
import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Dict, Hashable, Iterable, List, Optional, Tuple

if TYPE_CHECKING:
    from core.voa_models import LatticeModel

logger = logging.getLogger(__name__)

Label = Hashable
MultKey = Tuple[Label, Label, Label]


class LabelNotFoundError(ValueError):
    """Raised when a label is not one of the model's simple modules."""


def label_name(label: Label) -> str:
    """
    Display name of a label.

    Tensor-product labels are tuples and render as "(a,b)".
    """
    if isinstance(label, tuple):
        return "(" + ",".join(label_name(part) for part in label) + ")"
    return str(label)


@dataclass(frozen=True)
class FusionModel:
    """
    Tabulated fusion data of a rational VOA.

    Attributes:
        name: Model expression this model was built from
        labels: Simple modules, in a fixed order
        vacuum: The label of V itself
        dual: Contragredient involution on labels
        mult: Sparse fusion multiplicities (a, b, c) -> N_{ab}^c; missing means 0
        conf_dim: Conformal dimension a_W of every label
        central_charge: Central charge c
        aliases: Extra names accepted when resolving labels from text
        advisories: Non-fatal remarks raised while building the model
        lattice: The rank-1 lattice this model came from, if any
    """

    name: str
    labels: Tuple[Label, ...]
    vacuum: Label
    dual: Dict[Label, Label]
    mult: Dict[MultKey, int]
    conf_dim: Dict[Label, Fraction]
    central_charge: Fraction
    aliases: Dict[str, Label] = field(default_factory=dict)
    advisories: Tuple[str, ...] = ()
    lattice: Optional["LatticeModel"] = None

    @cached_property
    def _positions(self) -> Dict[Label, int]:
        return {label: pos for pos, label in enumerate(self.labels)}

    @cached_property
    def _names(self) -> Dict[str, Label]:
        return {label_name(label): label for label in self.labels}

    @cached_property
    def _products(self) -> Dict[Tuple[Label, Label], Dict[Label, int]]:
        table: Dict[Tuple[Label, Label], Dict[Label, int]] = {}
        for (a, b, c), n in self.mult.items():
            if n:
                table.setdefault((a, b), {})[c] = n
        return table

    def __contains__(self, label: Label) -> bool:
        return label in self._positions

    def index(self, label: Label) -> int:
        """Position of a label in `labels`."""
        try:
            return self._positions[label]
        except (KeyError, TypeError):
            raise LabelNotFoundError(
                f"Label {label_name(label)!r} is not a module of {self.name}"
            ) from None

    def multiplicity(self, a: Label, b: Label, c: Label) -> int:
        return self.mult.get((a, b, c), 0)

    def products(self, a: Label, b: Label) -> Dict[Label, int]:
        """Nonzero part of c -> N_{ab}^c (shared, do not mutate)."""
        return self._products.get((a, b), {})

    def resolve_label(self, token: str) -> Label:
        """
        Resolve a textual label (display name or alias) to a label.

        Args:
            token: Text such as "s", "σ", "3" or "(s,e)"

        Returns:
            The matching label

        Raises:
            LabelNotFoundError: If nothing matches
        """
        compact = token.strip().replace(" ", "")
        if compact in self._names:
            return self._names[compact]
        if compact in self.aliases:
            return self.aliases[compact]
        raise LabelNotFoundError(f"Label {token!r} is not a module of {self.name}")

    def names_of(self, label: Label) -> List[str]:
        """Display name first, then every alias pointing at the label."""
        names = [label_name(label)]
        names.extend(alias for alias, target in self.aliases.items()
                     if target == label and alias not in names)
        return names


@dataclass(frozen=True)
class Insertion:
    """Module labels attached to the marked points 1..n, in order."""

    labels: Tuple[Label, ...]

    @classmethod
    def of(cls, model: FusionModel, labels: Iterable[Label]) -> "Insertion":
        labels = tuple(labels)
        for label in labels:
            model.index(label)
        return cls(labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class Diagnostic:
    """One failed model law with the tuple that witnesses it."""

    law: str
    witness: Tuple
    message: str


class RankCalculator:
    """
    Memoized rank computations for one model.

    One instance is one computation session: the memo table lives as long as
    the calculator. Reads are lock-free, writes are serialized.
    """

    def __init__(self, model: FusionModel):
        self.model = model
        self.diagnostics: List[str] = []
        self._cache: Dict[Tuple[int, Tuple[int, ...]], int] = {}
        self._lock = threading.Lock()

    def _checked(self, labels: Iterable[Label]) -> Tuple[Label, ...]:
        return Insertion.of(self.model, labels).labels

    def _key(self, g: int, labels: Tuple[Label, ...]) -> Tuple[int, Tuple[int, ...]]:
        # ranks are symmetric in the insertion, so the sorted multiset is the key
        return g, tuple(sorted(self.model.index(label) for label in labels))

    def _store(self, key, value: int) -> int:
        with self._lock:
            self._cache[key] = value
        return value

    @property
    def cache_size(self) -> int:
        return len(self._cache)

    def fuse(self, a: Label, b: Label) -> Dict[Label, int]:
        """Return c -> N_{ab}^c for the nonzero multiplicities."""
        self._checked((a, b))
        return dict(self.model.products(a, b))

    def fusion_product(self, labels: Iterable[Label]) -> Dict[Label, int]:
        """Expand the product of all labels in the fusion ring."""
        labels = self._checked(labels)
        if not labels:
            return {self.model.vacuum: 1}

        vector = {labels[0]: 1}
        for label in labels[1:]:
            expanded: Dict[Label, int] = {}
            for a, coeff in vector.items():
                for c, n in self.model.products(a, label).items():
                    expanded[c] = expanded.get(c, 0) + coeff * n
            vector = {c: n for c, n in expanded.items() if n}
        return vector

    def rank_genus0(self, labels: Iterable[Label]) -> int:
        """
        Rank on M̄_{0,n}: the vacuum coefficient of the fusion product.

        An empty insertion returns 1 (consistent with propagation of vacua)
        and records a diagnostic, since n = 0 is never a moduli problem.
        """
        labels = self._checked(labels)
        if not labels:
            message = "empty genus-0 insertion evaluated as 1 (pure-vacuum convention)"
            logger.warning(message)
            self.diagnostics.append(message)
            return 1

        key = self._key(0, labels)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        return self._store(key, self.fusion_product(labels).get(self.model.vacuum, 0))

    def rank_genus(self, g: int, labels: Iterable[Label]) -> int:
        """
        Rank on M̄_{g,n} by the handle recursion.

        Args:
            g: Genus, g >= 0
            labels: Module labels at the marked points

        Returns:
            rank V_g(V; W•), a nonnegative integer
        """
        if g < 0:
            raise ValueError(f"Genus must be nonnegative, got {g}")
        labels = self._checked(labels)
        if g == 0:
            return self.rank_genus0(labels)

        key = self._key(g, labels)
        cached = self._cache.get(key)
        if cached is not None:
            return cached

        total = 0
        for w in self.model.labels:
            total += self.rank_genus(g - 1, labels + (w, self.model.dual[w]))
        return self._store(key, total)


def fuse(model: FusionModel, a: Label, b: Label) -> Dict[Label, int]:
    """Fusion product a · b as c -> N_{ab}^c (nonzero entries only)."""
    return RankCalculator(model).fuse(a, b)


def rank_genus0(model: FusionModel, ins: Iterable[Label],
                calculator: Optional[RankCalculator] = None) -> int:
    """
    Genus-0 rank; pass `calculator` to keep its memo table and diagnostics.

    An empty insertion records its diagnostic on the calculator used.
    """
    calc = calculator or RankCalculator(model)
    return calc.rank_genus0(ins)


def rank_genus(model: FusionModel, g: int, ins: Iterable[Label],
               calculator: Optional[RankCalculator] = None) -> int:
    calc = calculator or RankCalculator(model)
    return calc.rank_genus(g, ins)


def tensor_product(m1: FusionModel, m2: FusionModel) -> FusionModel:
    """
    Fusion data of the tensor product VOA V1 ⊗ V2.

    Labels are pairs; multiplicities multiply, conformal dimensions and
    central charges add, vacuum and duality act componentwise.
    """
    labels = tuple(itertools.product(m1.labels, m2.labels))

    mult: Dict[MultKey, int] = {}
    for (a1, b1, c1), n1 in m1.mult.items():
        if not n1:
            continue
        for (a2, b2, c2), n2 in m2.mult.items():
            if n2:
                mult[((a1, a2), (b1, b2), (c1, c2))] = n1 * n2

    aliases: Dict[str, Label] = {}
    for pair in labels:
        for left, right in itertools.product(m1.names_of(pair[0]), m2.names_of(pair[1])):
            text = f"({left},{right})"
            if text != label_name(pair):
                aliases.setdefault(text, pair)

    return FusionModel(
        name=f"{m1.name} ⊗ {m2.name}",
        labels=labels,
        vacuum=(m1.vacuum, m2.vacuum),
        dual={(a, b): (m1.dual[a], m2.dual[b]) for a, b in labels},
        mult=mult,
        conf_dim={(a, b): m1.conf_dim[a] + m2.conf_dim[b] for a, b in labels},
        central_charge=m1.central_charge + m2.central_charge,
        aliases=aliases,
        advisories=m1.advisories + m2.advisories,
    )


def _three_point(model: FusionModel, x: Label, y: Label, z: Label) -> int:
    # rank_0(x, y, z) = N_{xy}^{z'}
    return model.multiplicity(x, y, model.dual[z])


def _structure_diagnostics(model: FusionModel) -> List[Diagnostic]:
    found: List[Diagnostic] = []
    labels = list(model.labels)

    if not labels:
        found.append(Diagnostic("labels", (), "model has no labels"))
        return found
    if len(set(labels)) != len(labels):
        dupes = tuple(sorted({label_name(x) for x in labels if labels.count(x) > 1}))
        found.append(Diagnostic("labels", dupes, "duplicate labels"))
    if model.vacuum not in model:
        found.append(Diagnostic("vacuum", (model.vacuum,), "vacuum is not a label"))
        return found

    missing = [x for x in labels if x not in model.dual]
    if missing:
        found.append(Diagnostic("dual", tuple(missing), "dual is undefined on some labels"))
        return found
    for x in labels:
        if model.dual[x] not in model:
            found.append(Diagnostic("dual", (x,), "dual maps outside the label set"))
            return found
    for x in labels:
        if model.dual[model.dual[x]] != x:
            found.append(Diagnostic("dual-involution", (x,), "dual(dual(x)) != x"))
            break
    if model.dual[model.vacuum] != model.vacuum:
        found.append(Diagnostic("dual-vacuum", (model.vacuum,), "dual(vacuum) != vacuum"))

    for key, n in model.mult.items():
        if any(part not in model for part in key):
            found.append(Diagnostic("mult-domain", key, "multiplicity refers to an unknown label"))
            return found
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            found.append(Diagnostic("mult-domain", key, f"multiplicity {n!r} is not a nonnegative integer"))
            return found

    missing = [x for x in labels if x not in model.conf_dim]
    if missing:
        found.append(Diagnostic("conf_dim", tuple(missing), "conformal dimension missing"))
    else:
        if model.conf_dim[model.vacuum] != 0:
            found.append(Diagnostic("conf_dim-vacuum", (model.vacuum,), "conf_dim(vacuum) != 0"))
        for x in labels:
            if model.conf_dim[x] < 0:
                found.append(Diagnostic("conf_dim-sign", (x,), "negative conformal dimension"))
                break
    return found


def validate_model(model: FusionModel) -> List[Diagnostic]:
    """
    Check every law a fusion model must satisfy.

    Args:
        model: The model to check

    Returns:
        List of diagnostics, empty iff all laws hold. Each law reports its
        first witness only.
    """
    found = _structure_diagnostics(model)
    if any(d.law in ("labels", "vacuum", "dual", "mult-domain") for d in found):
        return found

    labels = model.labels
    vac = model.vacuum

    unit = next(((vac, b, c) for b in labels for c in labels
                 if model.multiplicity(vac, b, c) != (1 if b == c else 0)), None)
    if unit:
        found.append(Diagnostic("unit", unit, "N_{vacuum,b}^c != [c = b]"))

    comm = next(((a, b, c) for a, b, c in itertools.product(labels, repeat=3)
                 if model.multiplicity(a, b, c) != model.multiplicity(b, a, c)), None)
    if comm:
        found.append(Diagnostic("commutativity", comm, "N_{ab}^c != N_{ba}^c"))

    for x, y, z in itertools.product(labels, repeat=3):
        value = _three_point(model, x, y, z)
        images = (
            _three_point(model, y, z, x),
            _three_point(model, x, z, y),
            _three_point(model, model.dual[x], model.dual[y], model.dual[z]),
        )
        if any(image != value for image in images):
            found.append(Diagnostic("s3-symmetry", (x, y, z),
                                    "3-point rank not invariant under permutation/dualization"))
            break

    calc = RankCalculator(model)
    for a, b, c in itertools.product(labels, repeat=3):
        left = calc.fusion_product((a, b, c))
        right: Dict[Label, int] = {}
        for e, n in model.products(b, c).items():
            for d, k in model.products(a, e).items():
                right[d] = right.get(d, 0) + n * k
        if left != {d: n for d, n in right.items() if n}:
            d = next(d for d in labels if left.get(d, 0) != right.get(d, 0))
            found.append(Diagnostic("associativity", (a, b, c, d),
                                    "(a·b)·c and a·(b·c) differ at d"))
            break

    return found
