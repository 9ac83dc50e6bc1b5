"""Bootstrap schemes: rates, validation, and agreement with the limit laws."""
import warnings

import numpy as np
import pytest

import oracles
from wasserstat import (
    Counts,
    CostMatrix,
    Measure,
    derivative_bootstrap,
    derivative_map,
    ks_distance,
    limit_sample,
    mofn_bootstrap,
    naive_bootstrap,
    wasserstein,
)
from wasserstat.resampling import (
    SCHEMES,
    BootstrapDraws,
    default_subsample_size,
    two_sample_rate,
)

TWO_POINT = CostMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), exponent=1.0, metric_flag=True)
ONE_POINT = CostMatrix(np.array([[0.0]]), exponent=1.0, metric_flag=True)

# a plausible realization of two size-5000 samples from the balanced
# two-point null; exactly balanced counts would let even the naive scheme
# limp through, so the x side carries a small imbalance
NULL_X = Counts(np.array([2503, 2497]))
NULL_Y = Counts(np.array([2500, 2500]))


class TestRates:
    def test_two_sample_rate(self):
        assert two_sample_rate(3, 6) == pytest.approx(np.sqrt(2.0))

    def test_rate_rejects_empty_sample(self):
        with pytest.raises(ValueError):
            two_sample_rate(0, 6)

    def test_default_subsample_size(self):
        assert default_subsample_size(5000, 5000) == 293
        assert default_subsample_size(1000, 8000) == 100
        assert default_subsample_size(5000, 27) == 9


class TestNaive:
    def test_one_point_degenerate(self):
        out = naive_bootstrap(Counts(np.array([7])), Counts(np.array([7])), ONE_POINT, 1.0, 25, seed=0)
        assert out.values.shape == (25,)
        np.testing.assert_allclose(out.values, 0.0)

    def test_zero_replications(self):
        out = naive_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 0)
        assert out.values.size == 0

    def test_flagged_inconsistent(self):
        assert naive_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 3).inconsistent
        assert not mofn_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 3).inconsistent
        assert not derivative_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 3).inconsistent

    def test_deterministic_across_workers(self):
        a = naive_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 64, seed=5, workers=1)
        b = naive_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 64, seed=5, workers=4)
        np.testing.assert_array_equal(a.values, b.values)
        c = naive_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 64, seed=6)
        assert not np.array_equal(a.values, c.values)


class TestMofn:
    def test_single_observation_resamples(self):
        # k=1 resamples are point masses, so each centered value lands on
        # the finite set { rate * (c(i,j) - wpp_hat) }
        x = Counts(np.array([40, 60, 0]))
        y = Counts(np.array([30, 30, 40]))
        c = CostMatrix(np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]), 1.0, True)
        out = mofn_bootstrap(x, y, c, 1.0, 200, k=1, seed=2)
        wpp = wasserstein(Measure(x.counts / 100.0), Measure(y.counts / 100.0), c, p=1.0)
        allowed = np.unique(np.sqrt(0.5) * (c.entries.ravel() - wpp))
        gaps = np.abs(out.values[:, None] - allowed[None, :]).min(axis=1)
        assert gaps.max() < 1e-12

    def test_reduced_size_reported(self):
        out = mofn_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 4, seed=0)
        assert out.k == 293 and out.scheme == "m-of-n"

    def test_oversized_k_rejected(self):
        with pytest.raises(ValueError):
            mofn_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 4, k=5000)
        with pytest.raises(ValueError):
            mofn_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 4, k=0)

    def test_large_k_warns(self):
        x = Counts(np.array([50, 50]))
        y = Counts(np.array([50, 50]))
        with pytest.warns(UserWarning, match="large"):
            mofn_bootstrap(x, y, TWO_POINT, 1.0, 4, k=70)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            mofn_bootstrap(x, y, TWO_POINT, 1.0, 4, k=21)

    def test_one_point_degenerate(self):
        out = mofn_bootstrap(Counts(np.array([9])), Counts(np.array([9])), ONE_POINT, 1.0, 10, k=3)
        np.testing.assert_allclose(out.values, 0.0)


class TestDerivativeMap:
    def test_homogeneity(self, rng):
        c = oracles.random_cost(rng, 4)
        cm = CostMatrix(c, exponent=1.0)
        h1 = oracles.random_balanced(rng, 4)
        h2 = oracles.random_balanced(rng, 4)
        one = derivative_map(h1, h2, cm)
        two = derivative_map(2 * h1, 2 * h2, cm)
        assert two == pytest.approx(2 * one, abs=1e-9)

    def test_matches_dense_lp(self, rng):
        for _ in range(25):
            n = int(rng.integers(2, 6))
            c = oracles.random_cost(rng, n)
            h1 = oracles.random_balanced(rng, n)
            h2 = oracles.random_balanced(rng, n)
            got = derivative_map(h1, h2, CostMatrix(c, exponent=1.0))
            want = oracles.dual_polytope_max(h2 - h1, c)
            assert got == pytest.approx(want, abs=1e-8)

    def test_unbalanced_direction_rejected(self):
        with pytest.raises(ValueError):
            derivative_map(np.array([0.5, 0.0]), np.array([0.2, -0.2]), TWO_POINT)

    def test_zero_resample_draw(self):
        out = derivative_bootstrap(Counts(np.array([5])), Counts(np.array([5])), ONE_POINT, 1.0, 8)
        np.testing.assert_allclose(out.values, 0.0)


class TestLawAgreement:
    """Monte-Carlo checks against the two-point null limit |N(0, 1/4)|."""

    def test_consistent_schemes_beat_naive(self):
        # same fixture the acceptance gate uses; the naive full-size scheme
        # tracks a folded law with the wrong spread, the other two do not
        mo = mofn_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 2000, seed=3)
        de = derivative_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 2000, seed=3)
        na = naive_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 2000, seed=3)
        ks_mo = oracles.ks_to_half_normal(mo.values, 0.5)
        ks_de = oracles.ks_to_half_normal(de.values, 0.5)
        ks_na = oracles.ks_to_half_normal(na.values, 0.5)
        assert ks_mo <= 0.05
        assert ks_de <= 0.05
        assert ks_na >= 2.0 * ks_de

    def test_mofn_matches_limit_sampler(self):
        mo = mofn_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 2000, seed=3)
        r = Measure(np.array([0.5, 0.5]))
        limit = limit_sample("two-sample-null", r, None, TWO_POINT, 1.0, 20000, seed=1)
        assert ks_distance(mo.values, limit.draws) <= 0.05

    def test_cdf_error_shrinks_with_n(self):
        # fixed balanced instances of growing size; both consistent schemes
        # should close in on the exact limit cdf
        ks_mo, ks_de = [], []
        for n in (200, 1000, 5000):
            half = Counts(np.array([n // 2, n // 2]))
            mo = mofn_bootstrap(half, half, TWO_POINT, 1.0, 4000, seed=13)
            de = derivative_bootstrap(half, half, TWO_POINT, 1.0, 4000, seed=13)
            ks_mo.append(oracles.ks_to_half_normal(mo.values, 0.5))
            ks_de.append(oracles.ks_to_half_normal(de.values, 0.5))
        assert ks_mo[0] > ks_mo[1] > ks_mo[2]
        assert ks_de[0] > ks_de[1] > ks_de[2]


class TestDrawsContainer:
    def test_schemes_tuple(self):
        assert SCHEMES == ("naive", "m-of-n", "derivative")

    def test_wp_scale_clips_then_roots(self):
        d = BootstrapDraws(
            scheme="m-of-n",
            values=np.array([-1.0, 0.0, 8.0]),
            B=3,
            k=5,
            seed=0,
            n=100,
            m=100,
            p=3.0,
        )
        np.testing.assert_allclose(d.wp_scale(), [0.0, 0.0, 2.0])

    def test_replication_count(self):
        out = naive_bootstrap(NULL_X, NULL_Y, TWO_POINT, 1.0, 17, seed=1)
        assert out.B == 17 and out.values.shape == (17,)
