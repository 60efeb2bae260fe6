"""Distribution samplers: determinism, moments, grid-density agreement."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from support import gig_half_log_density, ks_distance
from tensorfill.rng import RngStream

BIG = 1_000_000


class TestDeterminism:
    def test_same_seed_same_sequence(self):
        a, b = RngStream(42), RngStream(42)
        assert a.gaussian(0.0, 1.0) == b.gaussian(0.0, 1.0)
        np.testing.assert_array_equal(a.gamma(2.0, 1.0, size=10), b.gamma(2.0, 1.0, size=10))
        np.testing.assert_array_equal(a.gig_half(1.0, 1.0, size=10), b.gig_half(1.0, 1.0, size=10))
        np.testing.assert_array_equal(a.dirichlet([1.0, 2.0]), b.dirichlet([1.0, 2.0]))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**63 - 1))
    def test_reproducible_for_any_seed(self, seed):
        a, b = RngStream(seed), RngStream(seed)
        np.testing.assert_array_equal(a.standard_normal(16), b.standard_normal(16))

    def test_jumped_streams_differ(self):
        base = RngStream(7)
        s1, s2 = base.jumped(1), base.jumped(2)
        assert not np.array_equal(s1.standard_normal(8), s2.standard_normal(8))

    def test_state_round_trip(self):
        a = RngStream(3)
        a.standard_normal(5)
        state = a.get_state()
        x = a.standard_normal(4)
        b = RngStream(0)
        b.set_state(state)
        np.testing.assert_array_equal(b.standard_normal(4), x)


class TestGaussian:
    def test_standard_moments(self):
        x = RngStream(1).gaussian(0.0, 1.0, size=BIG)
        assert abs(x.mean()) < 0.01
        assert abs(x.var() - 1.0) < 0.02

    def test_precision_parametrization(self):
        x = RngStream(2).gaussian(5.0, 4.0, size=BIG)
        assert abs(x.mean() - 5.0) < 0.01
        assert abs(x.var() - 0.25) < 0.25 * 0.02

    def test_fresh_streams_identical(self):
        assert RngStream(9).gaussian(1.0, 2.0) == RngStream(9).gaussian(1.0, 2.0)

    def test_rejects_bad_precision(self):
        with pytest.raises(ValueError):
            RngStream(0).gaussian(0.0, 0.0)
        with pytest.raises(ValueError):
            RngStream(0).gaussian(0.0, -1.0)


class TestGamma:
    def test_mean_shape_rate(self):
        x = RngStream(3).gamma(2.0, 2.0, size=BIG)
        assert abs(x.mean() - 1.0) < 0.02

    def test_exponential_tail(self):
        x = RngStream(4).gamma(1.0, 1.0, size=BIG)
        p = (x > 1.0).mean()
        assert abs(p - np.exp(-1.0)) < 0.01 * np.exp(-1.0)

    def test_tiny_shape_never_underflows_to_zero(self):
        x = RngStream(5).gamma(1e-6, 1e-6, size=100_000)
        assert np.isfinite(x).all()
        assert (x > 0).all()

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            RngStream(0).gamma(0.0, 1.0)
        with pytest.raises(ValueError):
            RngStream(0).gamma(1.0, 0.0)

    def test_vector_parameters(self):
        shape = np.array([0.5, 2.0, 40.0])
        rate = np.array([1.0, 4.0, 10.0])
        x = RngStream(6).gamma(shape, rate, size=(50_000, 3))
        np.testing.assert_allclose(x.mean(axis=0), shape / rate, rtol=0.05)


class TestGigHalf:
    # mean of the order-1/2 GIG is sqrt(b/a) + 1/a

    def test_mean_a4_b1(self):
        x = RngStream(7).gig_half(4.0, 1.0, size=BIG)
        assert abs(x.mean() - 0.75) < 0.01 * 0.75

    def test_mean_a1_b4(self):
        x = RngStream(8).gig_half(1.0, 4.0, size=BIG)
        assert abs(x.mean() - 3.0) < 0.01 * 3.0

    def test_boundary_b0_reduces_to_gamma(self):
        # with b = 0 the density is x^(-1/2) exp(-a x / 2): Gamma(1/2, a/2),
        # mean 1/a, matching the general mean formula at b = 0
        x = RngStream(9).gig_half(3.0, 0.0, size=BIG)
        assert abs(x.mean() - 1.0 / 3.0) < 0.02 / 3.0

    @pytest.mark.parametrize("a,b", [(1.0, 1.0), (4.0, 1.0), (1.0, 4.0)])
    def test_density_agreement(self, a, b):
        x = RngStream(10).gig_half(a, b, size=BIG)
        grid = np.linspace(1e-6, max(40.0, 40.0 / a), 400_001)
        assert ks_distance(x, grid, gig_half_log_density(a, b)) < 0.005

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            RngStream(0).gig_half(0.0, 1.0)
        with pytest.raises(ValueError):
            RngStream(0).gig_half(1.0, -1.0)


class TestDirichlet:
    def test_uniform_two_component_means(self):
        draws = np.stack([RngStream(11).dirichlet([1.0, 1.0]) for _ in range(20_000)])
        np.testing.assert_allclose(draws.mean(axis=0), [0.5, 0.5], atol=0.01)

    def test_asymmetric_means(self):
        rng = RngStream(12)
        draws = np.stack([rng.dirichlet([4.0, 6.0]) for _ in range(20_000)])
        np.testing.assert_allclose(draws.mean(axis=0), [0.4, 0.6], atol=0.01)

    def test_simplex_constraint(self):
        rng = RngStream(13)
        for _ in range(200):
            d = rng.dirichlet([0.5, 1.5, 2.0])
            assert abs(d.sum() - 1.0) <= 1e-12
            assert (d >= 0).all()

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            RngStream(0).dirichlet([1.0, 0.0])


class TestCategorical:
    def test_degenerate(self):
        rng = RngStream(14)
        for _ in range(50):
            np.testing.assert_array_equal(rng.categorical([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0])

    def test_frequencies(self):
        rng = RngStream(15)
        probs = np.tile([0.3, 0.7], (BIG, 1))
        labels = rng.categorical_rows(probs)
        assert abs((labels == 1).mean() - 0.7) < 0.01 * 0.7

    def test_one_hot(self):
        rng = RngStream(16)
        for _ in range(100):
            draw = rng.categorical([0.2, 0.5, 0.3])
            assert draw.sum() == 1.0
            assert set(np.unique(draw)) <= {0.0, 1.0}

    def test_rejects_bad_probabilities(self):
        with pytest.raises(ValueError):
            RngStream(0).categorical([-0.1, 1.1])
        with pytest.raises(ValueError):
            RngStream(0).categorical([0.4, 0.4])
