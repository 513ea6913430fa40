"""Core types, sorting, quantiles, and the weight/mixture bijection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskcore import (
    Mixture,
    Sample,
    WeightVector,
    empirical_quantile,
    sort_sample,
    t_inverse,
    t_map,
)
from riskcore.core import RepresentingSet, simplex_array
from riskcore.errors import (
    AlphaOutOfRange,
    EmptySet,
    NonFiniteInput,
    NotMonotone,
    NotNormalised,
)
from conftest import draw_monotone_simplex, draw_simplex


class TestSample:
    def test_rejects_nan_and_inf(self):
        with pytest.raises(NonFiniteInput):
            Sample([1.0, float("nan")])
        with pytest.raises(NonFiniteInput):
            Sample([float("inf")])

    def test_rejects_empty(self):
        with pytest.raises(NonFiniteInput):
            Sample([])

    def test_values_are_immutable(self):
        x = Sample([1.0, 2.0])
        with pytest.raises(ValueError):
            x.values[0] = 7.0


class TestSortSample:
    def test_basic(self):
        assert sort_sample(Sample([3, -1, 2])).values.tolist() == [-1, 2, 3]

    def test_singleton(self):
        assert sort_sample(Sample([5])).values.tolist() == [5]

    def test_tie(self):
        assert sort_sample(Sample([2, 2, 1])).values.tolist() == [1, 2, 2]

    def test_stable_provenance_on_ties(self):
        s = sort_sample(Sample([2, 2, 1]))
        assert s.order.tolist() == [2, 0, 1]

    def test_multiset_preserved_and_idempotent(self):
        gen = np.random.default_rng(0)
        for _ in range(50):
            vals = gen.standard_normal(gen.integers(1, 40))
            s = sort_sample(Sample(vals))
            assert sorted(vals.tolist()) == s.values.tolist()
            again = sort_sample(Sample(s.values))
            assert again.values.tolist() == s.values.tolist()


class TestEmpiricalQuantile:
    def test_ceil_rule(self):
        s = sort_sample(Sample([3, -1, 2]))
        assert empirical_quantile(s, 0.5) == 2.0
        assert empirical_quantile(s, 1.0) == 3.0
        assert empirical_quantile(s, 1 / 3) == -1.0

    @pytest.mark.parametrize("alpha", [0.0, -0.1, 1.0000001, 2.0])
    def test_alpha_out_of_range(self, alpha):
        s = sort_sample(Sample([1.0, 2.0]))
        with pytest.raises(AlphaOutOfRange):
            empirical_quantile(s, alpha)

    def test_nondecreasing_in_alpha(self):
        gen = np.random.default_rng(1)
        s = sort_sample(Sample(gen.standard_normal(17)))
        grid = np.linspace(0.01, 1.0, 200)
        vals = [empirical_quantile(s, a) for a in grid]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestWeightVector:
    def test_renormalises_exactly(self):
        w = WeightVector([0.5 + 2e-13, 0.5])
        assert w.weights.sum() == 1.0

    def test_rejects_bad_sum(self):
        with pytest.raises(NotNormalised):
            WeightVector([0.5, 0.6])

    def test_rejects_negative_entry(self):
        with pytest.raises(NotNormalised):
            WeightVector([1.1, -0.1])

    def test_clips_negative_dust(self):
        w = WeightVector([1.0, -1e-16])
        assert w.weights[1] == 0.0

    def test_monotone_certificate_enforced(self):
        with pytest.raises(NotMonotone):
            WeightVector([0.4, 0.6], monotone=True)
        WeightVector([0.6, 0.4], monotone=True)

    def test_simplex_array_rejects_nan(self):
        with pytest.raises(NonFiniteInput):
            simplex_array([float("nan"), 1.0])


class TestRepresentingSet:
    def test_empty_rejected(self):
        with pytest.raises(EmptySet):
            RepresentingSet([])

    def test_sorted_domain_requires_monotone(self):
        with pytest.raises(NotMonotone):
            RepresentingSet([[0.4, 0.6]], sorted_domain=True)
        RepresentingSet([[0.4, 0.6]], sorted_domain=False)

    def test_uncertified_weightvector_rejected_on_sorted_domain(self):
        w = WeightVector([0.6, 0.4])  # numerically monotone, no certificate
        with pytest.raises(NotMonotone):
            RepresentingSet([w], sorted_domain=True)


class TestTMap:
    def test_worked_example(self):
        mu = t_map(WeightVector([1 / 2, 1 / 3, 1 / 6], monotone=True))
        assert np.allclose(mu.masses, [1 / 6, 1 / 3, 1 / 2], atol=1e-15)

    def test_uniform_weights_give_mean_mixture(self):
        mu = t_map(WeightVector([1 / 3] * 3, monotone=True))
        assert np.allclose(mu.masses, [0, 0, 1], atol=1e-15)

    def test_worst_case_weights(self):
        mu = t_map(WeightVector([1.0, 0.0, 0.0], monotone=True))
        assert np.allclose(mu.masses, [1, 0, 0], atol=0)

    def test_requires_certificate(self):
        with pytest.raises(NotMonotone):
            t_map(WeightVector([0.6, 0.4]))


class TestTInverse:
    def test_worked_example(self):
        a = t_inverse(Mixture([1 / 6, 1 / 3, 1 / 2]))
        assert np.allclose(a.weights, [1 / 2, 1 / 3, 1 / 6], atol=1e-15)
        assert a.monotone

    def test_mean_mixture(self):
        a = t_inverse(Mixture([0, 0, 1]))
        assert np.allclose(a.weights, [1 / 3] * 3, atol=1e-15)

    def test_point_mixture(self):
        a = t_inverse(Mixture([1, 0, 0]))
        assert np.allclose(a.weights, [1, 0, 0], atol=0)


@st.composite
def monotone_simplex(draw):
    raw = draw(
        st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=60)
    )
    arr = np.sort(np.asarray(raw))[::-1]
    return arr / arr.sum()


class TestRoundTrip:
    @given(monotone_simplex())
    @settings(max_examples=200, deadline=None)
    def test_t_inverse_of_t_map_is_identity(self, a):
        w = WeightVector(a, monotone=True)
        back = t_inverse(t_map(w))
        assert np.max(np.abs(back.weights - w.weights)) <= 1e-12

    @given(monotone_simplex())
    @settings(max_examples=200, deadline=None)
    def test_t_map_lands_on_simplex(self, a):
        mu = t_map(WeightVector(a, monotone=True))
        assert abs(mu.masses.sum() - 1.0) <= 1e-12
        assert np.all(mu.masses >= 0.0)

    def test_bulk_random_round_trip(self):
        gen = np.random.default_rng(42)
        worst = 0.0
        for _ in range(500):
            n = int(gen.integers(1, 400))
            a = draw_monotone_simplex(gen, n)
            w = WeightVector(a, monotone=True)
            back = t_inverse(t_map(w))
            worst = max(worst, float(np.max(np.abs(back.weights - w.weights))))
        assert worst <= 1e-12

    def test_t_map_of_t_inverse_is_identity(self):
        gen = np.random.default_rng(7)
        for _ in range(200):
            n = int(gen.integers(1, 200))
            mu = Mixture(draw_simplex(gen, n))
            back = t_map(t_inverse(mu))
            assert np.max(np.abs(back.masses - mu.masses)) <= 1e-12
