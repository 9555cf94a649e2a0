"""
Unit tests for fusion_ring.py

Ranks by fusion and by the handle recursion, factorization along every
split, and the fusion-model laws.
"""

import dataclasses
import itertools

import pytest

from core.fusion_ring import (
    Insertion, LabelNotFoundError, RankCalculator, fuse, label_name, rank_genus, rank_genus0,
    tensor_product, validate_model,
)
from core.voa_models import holomorphic_model, ising_model, lattice_model


def ising_rank_closed_form(vac: int, eps: int, sig: int) -> int:
    """rank of 1^vac ε^eps σ^sig on M̄_{0,n}."""
    if sig == 0:
        return 1 if eps % 2 == 0 else 0
    if sig % 2:
        return 0
    return 2 ** (sig // 2 - 1)


def tree_rank(model, labels) -> int:
    """Sum over all comb-shaped fusion trees, edge by edge, from the raw multiplicities."""
    if len(labels) < 3:
        if len(labels) == 2:
            return int(model.dual[labels[0]] == labels[1])
        return int(not labels or labels[0] == model.vacuum)
    first, *middle, last = labels
    total = 0
    for edges in itertools.product(model.labels, repeat=len(middle) - 1):
        path = (first,) + edges + (model.dual[last],)
        term = 1
        for a, b, c in zip(path, middle, path[1:]):
            term *= model.multiplicity(a, b, c)
            if not term:
                break
        total += term
    return total


def split_rank(calc, g_left, left, g_right, right):
    model = calc.model
    return sum(calc.rank_genus(g_left, left + (w,)) * calc.rank_genus(g_right, right + (model.dual[w],))
               for w in model.labels)


def associator(model, a, b, c, d) -> int:
    """Coefficient of d in (a·b)·c - a·(b·c), straight from the multiplicities."""
    labels = model.labels
    left = sum(model.multiplicity(a, b, e) * model.multiplicity(e, c, d) for e in labels)
    right = sum(model.multiplicity(b, c, e) * model.multiplicity(a, e, d) for e in labels)
    return left - right


class TestFuse:
    """Tests for the fusion product."""

    def test_ising_products(self, ising):
        """Test the three nontrivial Ising products."""
        assert fuse(ising, "e", "e") == {"1": 1}
        assert fuse(ising, "e", "s") == {"s": 1}
        assert fuse(ising, "s", "s") == {"1": 1, "e": 1}

    def test_unknown_label_raises(self, ising):
        """Test that fusing an unknown label fails with the label name."""
        with pytest.raises(LabelNotFoundError, match="'x'"):
            fuse(ising, "s", "x")

    def test_lattice_group_law(self, lattice8):
        """Test that lattice fusion is addition mod m."""
        assert fuse(lattice8, 5, 6) == {3: 1}


class TestRankGenus0:
    """Tests for genus-0 ranks."""

    def test_four_sigmas(self, ising):
        """Test rank of σ⁴ is 2."""
        assert rank_genus0(ising, ["s", "s", "s", "s"]) == 2

    def test_ising_table(self, ising_calc):
        """Test every Ising insertion with up to 12 points against the closed form."""
        for vac, eps, sig in itertools.product(range(13), repeat=3):
            if vac + eps + sig > 12:
                continue
            labels = ("1",) * vac + ("e",) * eps + ("s",) * sig
            assert ising_calc.rank_genus0(labels) == ising_rank_closed_form(vac, eps, sig), labels

    @pytest.mark.slow
    def test_fusion_tree_oracle(self, ising, ising_calc):
        """Test every Ising insertion with up to 8 points against a brute-force tree sum."""
        for n in range(9):
            for labels in itertools.combinations_with_replacement(ising.labels, n):
                assert ising_calc.rank_genus0(labels) == tree_rank(ising, labels), labels

    def test_fusion_tree_oracle_lattice(self, lattice8):
        """Test lattice:8 insertions with up to 5 points against the tree sum."""
        calc = RankCalculator(lattice8)
        for labels in itertools.product(range(0, 8, 3), repeat=5):
            assert calc.rank_genus0(labels) == tree_rank(lattice8, labels), labels

    def test_rank_is_symmetric(self, ising_calc):
        """Test that permuting the insertion leaves the rank unchanged."""
        labels = ("s", "e", "s", "1", "s", "s")
        ranks = {ising_calc.rank_genus0(perm) for perm in itertools.permutations(labels)}
        assert ranks == {2}

    def test_empty_insertion_convention(self, ising_calc, caplog):
        """Test that the empty insertion gives 1 and records a diagnostic."""
        assert ising_calc.rank_genus0([]) == 1
        assert len(ising_calc.diagnostics) == 1
        assert "empty genus-0 insertion" in caplog.text

    def test_memo_table_grows_once(self, ising_calc):
        """Test that repeated queries reuse the memo table."""
        ising_calc.rank_genus0(("s",) * 8)
        size = ising_calc.cache_size
        ising_calc.rank_genus0(("s",) * 8)
        assert ising_calc.cache_size == size


class TestRankGenus:
    """Tests for higher-genus ranks."""

    def test_ising_genus_one_and_two(self, ising):
        """Test the Verlinde numbers 3 and 10 of the Ising model."""
        assert rank_genus(ising, 1, []) == 3
        assert rank_genus(ising, 2, []) == 10

    def test_negative_genus_rejected(self, ising):
        """Test that a negative genus is rejected."""
        with pytest.raises(ValueError, match="nonnegative"):
            rank_genus(ising, -1, ["s"])

    @pytest.mark.parametrize("m", [2, 4, 6])
    def test_lattice_closed_form(self, m):
        """Test rank_g = m^g when the labels sum to 0 mod m and 0 otherwise."""
        calc = RankCalculator(lattice_model(m))
        for g in range(3):
            for labels in itertools.product(range(m), repeat=3):
                expected = m ** g if sum(labels) % m == 0 else 0
                assert calc.rank_genus(g, labels) == expected

    @pytest.mark.slow
    @pytest.mark.parametrize("m", [2, 4, 8])
    def test_lattice_closed_form_up_to_genus_three(self, m):
        """Test rank_g = m^g·[Σ labels ≡ 0 mod m] for g <= 3 and n <= 6."""
        calc = RankCalculator(lattice_model(m))
        for n in range(7):
            for labels in itertools.combinations_with_replacement(range(m), n):
                for g in range(4):
                    expected = m ** g if sum(labels) % m == 0 else 0
                    assert calc.rank_genus(g, labels) == expected, (g, labels)


class TestFactorization:
    """Tests for factorization along separating and nonseparating nodes."""

    def test_genus0_partition_independence(self, ising_calc):
        """Test that every split of an Ising insertion gives the same rank."""
        for labels in itertools.product(("1", "e", "s"), repeat=5):
            total = ising_calc.rank_genus0(labels)
            for cut in range(1, 5):
                assert split_rank(ising_calc, 0, labels[:cut], 0, labels[cut:]) == total

    def test_lattice_partition_independence(self):
        """Test split independence for lattice:6."""
        calc = RankCalculator(lattice_model(6))
        for labels in itertools.product(range(6), repeat=4):
            total = calc.rank_genus0(labels)
            assert split_rank(calc, 0, labels[:2], 0, labels[2:]) == total

    def test_genus_splits(self, ising_calc):
        """Test rank_g = Σ_W rank_{g1}(A, W) rank_{g2}(B, W') for g1 + g2 = g."""
        labels = ("s", "s", "e")
        for g in range(1, 3):
            total = ising_calc.rank_genus(g, labels)
            for g_left in range(g + 1):
                for cut in range(len(labels) + 1):
                    left, right = labels[:cut], labels[cut:]
                    assert split_rank(ising_calc, g_left, left, g - g_left, right) == total

    @pytest.mark.slow
    @pytest.mark.parametrize("build", [ising_model, lambda: lattice_model(4), lambda: holomorphic_model(8)],
                             ids=["ising", "lattice:4", "holomorphic:8"])
    def test_every_bipartition_and_genus_split(self, build):
        """Test rank_g(W•) = Σ_W rank_{g1}(W_A, W) rank_{g2}(W_B, W') over all A ⊔ B and g1 + g2 = g."""
        model = build()
        calc = RankCalculator(model)
        for n in range(7):
            for labels in itertools.combinations_with_replacement(model.labels, n):
                for g in range(3):
                    total = calc.rank_genus(g, labels)
                    for mask in range(2 ** n):
                        left = tuple(x for i, x in enumerate(labels) if mask >> i & 1)
                        right = tuple(x for i, x in enumerate(labels) if not mask >> i & 1)
                        for g_left in range(g + 1):
                            assert split_rank(calc, g_left, left, g - g_left, right) == total, (g, left, right)

    def test_duality_invariance(self):
        """Test that dualizing every label keeps the rank."""
        model = lattice_model(6)
        calc = RankCalculator(model)
        for labels in itertools.product(range(6), repeat=3):
            dual = tuple(model.dual[x] for x in labels)
            assert calc.rank_genus(1, labels) == calc.rank_genus(1, dual)

    def test_vacuum_insertion_invariance(self, ising_calc):
        """Test that adding a vacuum point keeps the rank."""
        for labels in itertools.product(("1", "e", "s"), repeat=4):
            for g in range(2):
                assert ising_calc.rank_genus(g, labels + ("1",)) == ising_calc.rank_genus(g, labels)


class TestInsertion:
    """Tests for the Insertion type."""

    def test_of_checks_labels(self, ising):
        """Test that Insertion.of rejects unknown labels."""
        assert Insertion.of(ising, ["s", "e"]).n == 2
        with pytest.raises(LabelNotFoundError):
            Insertion.of(ising, ["s", "q"])

    def test_calculator_accepts_insertion(self, ising_calc, ising):
        """Test that ranks of an Insertion match ranks of its labels."""
        insertion = Insertion.of(ising, ["s"] * 4 + ["e"])
        assert ising_calc.rank_genus0(insertion) == 2
        assert ising_calc.rank_genus(1, insertion) == ising_calc.rank_genus(1, insertion.labels)


class TestFunctionalApi:
    """Tests for the module-level rank functions."""

    def test_shared_calculator_keeps_diagnostics(self, ising):
        """Test that a passed calculator collects the empty-insertion diagnostic and memo entries."""
        calc = RankCalculator(ising)
        assert rank_genus0(ising, [], calculator=calc) == 1
        assert len(calc.diagnostics) == 1
        assert rank_genus(ising, 1, ["s", "s"], calculator=calc) == 2
        assert calc.cache_size > 0

    def test_fresh_calculator_by_default(self, ising, caplog):
        """Test that without a calculator the empty insertion still warns."""
        assert rank_genus0(ising, []) == 1
        assert "empty genus-0 insertion" in caplog.text

class TestValidateModel:
    """Tests for the model laws."""

    def test_builtin_models_are_valid(self):
        """Test that every built-in model passes."""
        for model in (ising_model(), lattice_model(2), lattice_model(10), holomorphic_model(24)):
            assert validate_model(model) == []

    def test_tensor_product_is_valid(self):
        """Test that a tensor product of valid models passes."""
        assert validate_model(tensor_product(ising_model(), lattice_model(4))) == []

    def test_commutativity_violation(self, ising):
        """Test that a one-sided multiplicity is reported with its witness."""
        mult = dict(ising.mult)
        del mult[("s", "e", "s")]
        broken = dataclasses.replace(ising, mult=mult)
        laws = [d.law for d in validate_model(broken)]
        assert "commutativity" in laws

    def test_associativity_violation(self, ising):
        """Test that N_{σσ}^ε = 2 breaks associativity and 3-point symmetry."""
        mult = dict(ising.mult)
        mult[("s", "s", "e")] = 2
        broken = dataclasses.replace(ising, mult=mult)
        found = {d.law: d.witness for d in validate_model(broken)}
        assert "s3-symmetry" in found
        a, b, c, d = found["associativity"]
        assert associator(broken, a, b, c, d) != 0

    def test_s3_violation(self, ising):
        """Test that N_{εσ}^σ = N_{σε}^σ = 2 is reported as an S3 violation with its witness."""
        mult = dict(ising.mult)
        mult[("e", "s", "s")] = mult[("s", "e", "s")] = 2
        broken = dataclasses.replace(ising, mult=mult)
        found = {d.law: d.witness for d in validate_model(broken)}
        x, y, z = found["s3-symmetry"]
        dual = broken.dual
        values = {broken.multiplicity(x, y, dual[z]), broken.multiplicity(y, z, dual[x]),
                  broken.multiplicity(x, z, dual[y])}
        assert len(values) > 1
        assert "commutativity" not in found

    def test_single_entry_mutations(self, ising):
        """Test that every commutative one-entry change of the Ising table is flagged iff non-associative."""
        labels = ising.labels
        for a, b in itertools.combinations_with_replacement(labels, 2):
            for c in labels:
                for delta in (1, -1):
                    value = ising.multiplicity(a, b, c) + delta
                    if value < 0:
                        continue
                    mult = dict(ising.mult)
                    mult[(a, b, c)] = mult[(b, a, c)] = value
                    broken = dataclasses.replace(ising, mult=mult)
                    associative = all(associator(broken, *quad) == 0
                                      for quad in itertools.product(labels, repeat=4))
                    laws = [d.law for d in validate_model(broken)]
                    assert ("associativity" in laws) == (not associative), (a, b, c, delta)

    def test_bad_dual(self, ising):
        """Test that a non-involutive dual is reported."""
        broken = dataclasses.replace(ising, dual={"1": "1", "e": "s", "s": "s"})
        laws = [d.law for d in validate_model(broken)]
        assert "dual-involution" in laws

    def test_vacuum_weight(self, ising):
        """Test that a vacuum of nonzero weight is reported."""
        conf_dim = dict(ising.conf_dim, **{"1": 1})
        broken = dataclasses.replace(ising, conf_dim=conf_dim)
        assert [d.law for d in validate_model(broken)] == ["conf_dim-vacuum"]

    def test_unknown_vacuum(self, ising):
        """Test that a vacuum outside the labels stops further checks."""
        broken = dataclasses.replace(ising, vacuum="v")
        assert [d.law for d in validate_model(broken)] == ["vacuum"]


class TestTensorProduct:
    """Tests for tensor products of models."""

    def test_ranks_multiply(self):
        """Test that ranks of a tensor product are products of ranks."""
        ising = ising_model()
        lattice = lattice_model(4)
        product = tensor_product(ising, lattice)
        calc = RankCalculator(product)
        for left in itertools.product(("e", "s"), repeat=4):
            right = (1, 1, 3, 3)
            pairs = tuple(zip(left, right))
            assert calc.rank_genus0(pairs) == rank_genus0(ising, left) * rank_genus0(lattice, right)

    def test_central_charges_add(self):
        """Test lattice:8 ⊗ holomorphic:8 has 8 labels and c = 9."""
        product = tensor_product(lattice_model(8), holomorphic_model(8))
        assert len(product.labels) == 8
        assert product.central_charge == 9

    def test_labels_resolve_through_aliases(self):
        """Test that component aliases combine into pair aliases."""
        product = tensor_product(ising_model(), ising_model())
        assert product.resolve_label("(σ,v)") == ("s", "1")
        assert product.resolve_label("(s, e)") == ("s", "e")
        assert label_name(("s", "1")) == "(s,1)"
