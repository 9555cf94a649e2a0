"""
Unit tests for divisor_calc.py

Boundary bookkeeping, divisor arithmetic, the first Chern class formula and
degrees on M̄_{0,4}.
"""

import itertools
from fractions import Fraction

import pytest

from core.divisor_calc import (
    Asymmetry, DimensionError, DivisorClass, FactorizationError, SymmetricDivisor,
    UnsupportedBaseError, boundary_keys, canonical_boundary_key, chern_class, degree_m04,
    symmetrize,
)
from core.fusion_ring import FusionModel, RankCalculator, rank_genus
from core.voa_models import holomorphic_model, ising_model, lattice_model


def degree(model, labels):
    return degree_m04(chern_class(model, 0, labels))


class TestBoundaryKeys:
    """Tests for canonical boundary names."""

    def test_genus0_counts(self):
        """Test M̄_{0,n} has 2^(n-1) - n - 1 boundary divisors."""
        for n in range(4, 9):
            assert len(boundary_keys(0, n)) == 2 ** (n - 1) - n - 1
        assert boundary_keys(0, 3) == []

    def test_genus0_side_with_point_one(self):
        """Test that the complement is renamed to the side holding 1."""
        assert canonical_boundary_key(0, 5, 0, {3, 4, 5}) == (0, frozenset({1, 2}))
        assert canonical_boundary_key(0, 5, 0, {1, 2}) == (0, frozenset({1, 2}))

    def test_unstable_sides(self):
        """Test that singletons and one-point complements are not boundary divisors."""
        assert canonical_boundary_key(0, 5, 0, {2}) is None
        assert canonical_boundary_key(0, 5, 0, {1, 2, 3, 4}) is None

    def test_positive_genus_prefers_smaller_genus(self):
        """Test that (g - i, I^c) is renamed to the smaller-genus side."""
        assert canonical_boundary_key(2, 2, 2, set()) == (0, frozenset({1, 2}))
        assert canonical_boundary_key(2, 2, 2, {1}) is None
        assert canonical_boundary_key(1, 1, 1, set()) is None
        assert canonical_boundary_key(2, 0, 1, set()) == (1, frozenset())

    def test_subset_outside_points(self):
        """Test that points beyond n are refused."""
        with pytest.raises(ValueError, match="not inside"):
            canonical_boundary_key(0, 4, 0, {1, 5})


class TestDivisorClass:
    """Tests for divisor class arithmetic and serialization."""

    def test_zero_entries_dropped(self):
        """Test that zero coefficients do not affect equality."""
        key = (0, frozenset({1, 2}))
        assert DivisorClass(0, 4, boundary={key: 0}) == DivisorClass.zero(0, 4)
        assert DivisorClass.zero(0, 4).is_zero()

    def test_non_canonical_key_rejected(self):
        """Test that the complement name is refused."""
        with pytest.raises(ValueError, match="not canonical"):
            DivisorClass(0, 4, boundary={(0, frozenset({3, 4})): 1})

    def test_genus0_has_no_lambda(self):
        """Test that λ is refused on M̄_{0,n}."""
        with pytest.raises(ValueError, match="λ"):
            DivisorClass(0, 4, lam=1)

    def test_psi_length(self):
        """Test that the ψ vector must have n entries."""
        with pytest.raises(DimensionError):
            DivisorClass(0, 4, psi=(1, 2, 3))

    def test_add_and_scale(self):
        """Test that D + D = 2D."""
        divisor = DivisorClass(1, 2, lam=Fraction(1, 3), psi=(1, 2), delta_irr=-1,
                               boundary={(0, frozenset({1, 2})): Fraction(1, 2)})
        assert divisor + divisor == divisor.scaled(2)
        assert (divisor + divisor.scaled(-1)).is_zero()

    def test_add_rejects_other_space(self):
        """Test that classes on different spaces do not add."""
        with pytest.raises(DimensionError):
            DivisorClass.zero(0, 4) + DivisorClass.zero(0, 5)

    def test_report_round_trip(self, ising):
        """Test that to_report and from_report are inverse."""
        divisor = chern_class(ising, 0, ["e", "s", "s", "s", "s"])
        report = divisor.to_report()
        assert DivisorClass.from_report(0, 5, report) == divisor
        assert all(isinstance(value, str) for value in report.values())

    def test_report_keys(self):
        """Test the key format of a report."""
        divisor = DivisorClass(1, 2, lam=Fraction(3, 4), psi=(0, 1), delta_irr=Fraction(-1, 2),
                               boundary={(0, frozenset({1, 2})): -1})
        assert divisor.to_report() == {"lambda": "3/4", "psi:2": "1", "dirr": "-1/2", "d:0:{1,2}": "-1"}

    def test_permuted_relabels(self):
        """Test that relabelling moves ψ and boundary coefficients."""
        divisor = DivisorClass(0, 4, psi=(1, 0, 0, 0), boundary={(0, frozenset({1, 2})): 5})
        moved = divisor.permuted({1: 3, 2: 4, 3: 1, 4: 2})
        assert moved.psi == (0, 0, 1, 0)
        # {3, 4} is renamed to {1, 2}
        assert moved.coefficient(0, {3, 4}) == 5
        assert moved.coefficient(0, {1, 2}) == 5

    def test_permuted_rejects_non_bijection(self):
        """Test that a non-bijective relabelling is refused."""
        with pytest.raises(ValueError, match="bijection"):
            DivisorClass.zero(0, 4).permuted({1: 1, 2: 1, 3: 3, 4: 4})


class TestSymmetricDivisor:
    """Tests for S_n-invariant classes."""

    def test_expand_and_symmetrize(self):
        """Test that to_divisor and symmetrize are inverse."""
        compact = SymmetricDivisor(8, Fraction(1, 2), {2: -1, 3: Fraction(2, 3), 4: 5})
        assert symmetrize(compact.to_divisor()) == compact

    def test_coefficient_by_size(self):
        """Test that sizes k and n - k share a coefficient."""
        compact = SymmetricDivisor(7, 0, {3: 4})
        assert compact.coefficient(4) == 4
        assert compact.coefficient(1) == 0
        assert compact.coefficient(6) == 0

    def test_size_range(self):
        """Test that sizes above n // 2 are refused."""
        with pytest.raises(ValueError):
            SymmetricDivisor(6, 0, {4: 1})

    def test_asymmetry_reported(self):
        """Test that an asymmetric ψ vector is reported."""
        result = symmetrize(DivisorClass(0, 5, psi=(1, 1, 2, 1, 1)))
        assert isinstance(result, Asymmetry)
        assert result.reason == "psi"
        assert result.witness == (1, 3)


class TestDegreeM04:
    """Tests for degrees on M̄_{0,4}."""

    def test_ising_degrees(self, ising):
        """Test the Ising degrees 1, 2 and -1."""
        assert degree(ising, ["e", "e", "s", "s"]) == 1
        assert degree(ising, ["e", "e", "e", "e"]) == 2
        assert degree(ising, ["s", "s", "s", "s"]) == -1

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_lattice_equal_labels(self, k):
        """Test (k, k, k, k) on lattice:4k has degree -k."""
        assert degree(lattice_model(4 * k), [k, k, k, k]) == -k

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_lattice_one_heavy_label(self, k):
        """Test (1, 1, 1, 4k - 3) on lattice:4k has degree 0."""
        assert degree(lattice_model(4 * k), [1, 1, 1, 4 * k - 3]) == 0

    def test_needs_m04(self, ising):
        """Test that a class on M̄_{0,5} has no degree here."""
        with pytest.raises(DimensionError):
            degree_m04(chern_class(ising, 0, ["s"] * 4 + ["1"]))


class TestChernClass:
    """Tests for the first Chern class formula."""

    def test_unstable_base_rejected(self, ising):
        """Test that M̄_{0,2} and M̄_{1,0} are refused."""
        with pytest.raises(UnsupportedBaseError):
            chern_class(ising, 0, ["s", "s"])
        with pytest.raises(UnsupportedBaseError):
            chern_class(ising, 1, [])

    def test_three_points_is_psi_only(self, ising):
        """Test that on M̄_{0,3} only ψ terms appear."""
        divisor = chern_class(ising, 0, ["e", "s", "s"])
        assert divisor.boundary == {}
        assert divisor.psi == (Fraction(1, 2), Fraction(1, 16), Fraction(1, 16))

    def test_ising_genus_one(self, ising):
        """Test c1 on M̄_{1,1} with the vacuum: 3/4 λ - 9/16 δ_irr."""
        divisor = chern_class(ising, 1, ["1"])
        assert divisor.lam == Fraction(3, 4)
        assert divisor.delta_irr == Fraction(-9, 16)
        assert divisor.psi == (0,)
        assert divisor.boundary == {}

    @pytest.mark.parametrize("c", [8, 16, 24])
    @pytest.mark.parametrize("g,labels", [(1, ["1"]), (2, ["1", "1"]), (3, [])])
    def test_holomorphic_is_lambda_multiple(self, c, g, labels):
        """Test c1 = c/2 λ with rank 1 for a holomorphic VOA."""
        model = holomorphic_model(c)
        assert rank_genus(model, g, labels) == 1
        divisor = chern_class(model, g, labels)
        assert divisor.lam == Fraction(c, 2)
        assert not any(divisor.psi)
        assert divisor.delta_irr == 0
        assert divisor.boundary == {}

    def test_sigma_eight_coefficients(self, ising):
        """Test the literal coefficients of c1(ε, σ^8) on odd and even splits."""
        divisor = chern_class(ising, 0, ["e"] + ["s"] * 8)
        assert divisor.psi == (4,) + (Fraction(1, 2),) * 8
        for key in boundary_keys(0, 9):
            sigmas = len(key[1]) - 1
            expected = Fraction(-1, 2) if sigmas % 2 else -2
            assert divisor.boundary[key] == expected

    def test_permutation_equivariance(self, ising):
        """Test c1 of a permuted insertion is the permuted class."""
        labels = ["e", "s", "s", "1", "s", "s"]
        divisor = chern_class(ising, 0, labels)
        for perm in itertools.islice(itertools.permutations(range(1, 7)), 0, 720, 37):
            mapping = {p: perm[p - 1] for p in range(1, 7)}
            permuted_labels = [None] * 6
            for p, label in enumerate(labels, start=1):
                permuted_labels[mapping[p] - 1] = label
            assert chern_class(ising, 0, permuted_labels) == divisor.permuted(mapping)

    def test_shared_calculator(self, ising):
        """Test that passing a rank session reuses its memo table."""
        calc = RankCalculator(ising)
        chern_class(ising, 0, ["s"] * 6, calculator=calc)
        assert calc.cache_size > 0

    def test_factorization_mismatch(self):
        """Test that weights breaking a_W = a_W' are caught."""
        labels = (0, 1, 2)
        model = FusionModel(
            name="z3-skewed",
            labels=labels,
            vacuum=0,
            dual={0: 0, 1: 2, 2: 1},
            mult={(i, j, (i + j) % 3): 1 for i in labels for j in labels},
            conf_dim={0: Fraction(0), 1: Fraction(1, 3), 2: Fraction(2, 3)},
            central_charge=Fraction(2),
        )
        with pytest.raises(FactorizationError):
            chern_class(model, 0, [1, 1, 2, 2])
