import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from relbelief.numerics import (
    ConvergenceError,
    DomainError,
    GammaRateParams,
    NormalParams,
    RandomStream,
    gamma_cdf,
    gamma_quantile,
    kl_normal,
    map_chunks,
    norm_cdf,
    norm_quantile,
    sample_gamma_rate,
    sample_normal,
    solve_two_quantile_gamma,
)


def mp_phi(z):
    mp.mp.dps = 40
    return float(mp.erfc(-mp.mpf(z) / mp.sqrt(2)) / 2)


class TestNormCdf:
    def test_median(self):
        assert norm_cdf(0.0) == 0.5

    @pytest.mark.parametrize("z", [-8.0, -5.5, -3.0, -1.0, 0.3, 1.959964, 4.0, 6.0])
    def test_matches_erfc_oracle(self, z):
        assert norm_cdf(z) == pytest.approx(mp_phi(z), abs=1e-12)

    def test_far_tail_relative_accuracy(self):
        # erfc oracle: 6.220960574271784e-16
        assert norm_cdf(-8.0) == pytest.approx(6.220960574271784e-16, rel=1e-10)

    def test_975(self):
        assert norm_cdf(1.959964) == pytest.approx(0.975, abs=1e-8)

    @pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(DomainError):
            norm_cdf(bad)

    def test_monotone(self):
        z = np.linspace(-10, 10, 2001)
        assert np.all(np.diff(norm_cdf(z)) >= 0)


class TestNormQuantile:
    def test_median(self):
        assert norm_quantile(0.5) == 0.0

    @pytest.mark.parametrize(
        "p, expected",
        # Newton iterations on the erfc oracle at 40 digits
        [(0.9995, 3.2905267314918948), (0.975, 1.9599639845400542)],
    )
    def test_values(self, p, expected):
        assert norm_quantile(p) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            norm_quantile(p)

    def test_roundtrip_cdf_of_quantile(self):
        p = np.linspace(1e-6, 1 - 1e-6, 999)
        assert np.max(np.abs(norm_cdf(norm_quantile(p)) - p)) < 1e-10

    def test_roundtrip_quantile_of_cdf_lower_half(self):
        z = np.linspace(-6, 0, 601)
        assert np.max(np.abs(norm_quantile(norm_cdf(z)) - z)) < 1e-12

    def test_roundtrip_quantile_of_cdf_within_conditioning(self):
        # near 1 the double spacing of p, divided by the density, bounds any inverse
        z = np.linspace(-6, 6, 1201)
        p = norm_cdf(z)
        bound = 2 * np.spacing(p) / stats.norm.pdf(z) + 1e-12
        assert np.all(np.abs(norm_quantile(p) - z) <= bound)


class TestGamma:
    def test_boundary(self):
        assert gamma_cdf(GammaRateParams(1, 1), 0.0) == 0.0

    def test_exponential(self):
        assert gamma_cdf(GammaRateParams(1, 1), 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-14)

    def test_against_integrated_density(self):
        # mpmath quadrature of the gamma(2.5, rate 3) density on [0, 1.2]
        assert gamma_cdf(GammaRateParams(2.5, 3.0), 1.2) == pytest.approx(0.7938140802904441, abs=1e-10)

    def test_negative_x(self):
        with pytest.raises(DomainError):
            gamma_cdf(GammaRateParams(1, 1), -0.1)

    def test_quantile_exponential(self):
        assert gamma_quantile(GammaRateParams(1, 1), 1 - math.exp(-1)) == pytest.approx(1.0, rel=1e-12)
        assert gamma_quantile(GammaRateParams(1, 2), 0.5) == pytest.approx(math.log(2) / 2, rel=1e-12)

    def test_quantile_extreme_shape(self):
        # 200-step bisection against mpmath's regularised incomplete gamma
        q = gamma_quantile(GammaRateParams(4.01, 329.78), 0.0005)
        assert q == pytest.approx(0.0010844628442004632, rel=1e-9)
        assert gamma_cdf(GammaRateParams(4.01, 329.78), q) == pytest.approx(0.0005, abs=1e-9)

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_quantile_domain(self, p):
        with pytest.raises(DomainError):
            gamma_quantile(GammaRateParams(2, 1), p)

    def test_invalid_params(self):
        with pytest.raises(DomainError):
            GammaRateParams(0, 1)
        with pytest.raises(DomainError):
            GammaRateParams(1, -1)

    @settings(max_examples=200, deadline=None)
    @given(
        shape=st.floats(0.2, 200),
        rate=st.floats(1e-3, 1e3),
        p=st.floats(0.0005, 0.9995),
    )
    def test_cdf_of_quantile(self, shape, rate, p):
        params = GammaRateParams(shape, rate)
        assert gamma_cdf(params, gamma_quantile(params, p)) == pytest.approx(p, abs=1e-8)


class TestKL:
    def test_identical(self):
        assert kl_normal(NormalParams(3, 2), NormalParams(3, 2)) == 0.0

    def test_equal_variance(self):
        assert kl_normal(NormalParams(1, 1), NormalParams(0, 1)) == pytest.approx(0.5, abs=1e-15)

    def test_against_quadrature(self):
        # mpmath quadrature of p log(p/q) for p = N(0, 1), q = N(0, 4)
        assert kl_normal(NormalParams(0, 1), NormalParams(0, 4)) == pytest.approx(0.31814718055994530, abs=1e-14)

    def test_nonnegative_random_pairs(self):
        rng = np.random.default_rng(11)
        for _ in range(10_000):
            m1, m2 = rng.normal(0, 5, 2)
            v1, v2 = np.exp(rng.normal(0, 2, 2))
            assert kl_normal(NormalParams(m1, v1), NormalParams(m2, v2)) >= 0.0
            assert kl_normal(NormalParams(m1, v1), NormalParams(m1, v1)) <= 1e-14

    def test_invalid_variance(self):
        with pytest.raises(DomainError):
            NormalParams(0, 0)


class TestRandomStream:
    def test_deterministic(self):
        a = RandomStream(42, 3).standard_normal(1000)
        b = RandomStream(42, 3).standard_normal(1000)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = RandomStream(42, 0).standard_normal(1000)
        b = RandomStream(42, 1).standard_normal(1000)
        assert not np.any(a == b)

    def test_substreams_differ_from_parent(self):
        s = RandomStream(42, 0)
        assert not np.any(s.substream(0).uniform(100) == RandomStream(42, 0).uniform(100))

    def test_seed_range(self):
        RandomStream(2**64 - 1)
        with pytest.raises(DomainError):
            RandomStream(2**64)
        with pytest.raises(DomainError):
            RandomStream(-1)

    def test_map_chunks_independent_of_workers(self):
        def fn(sub, k):
            return sub.standard_normal(k)

        one = np.concatenate(map_chunks(RandomStream(5, 2), 300_001, fn, workers=1))
        eight = np.concatenate(map_chunks(RandomStream(5, 2), 300_001, fn, workers=8))
        assert one.shape == (300_001,)
        assert np.array_equal(one, eight)


class TestSampling:
    def test_normal_mean_clt(self):
        draws = sample_normal(RandomStream(1), NormalParams(0, 1), 100_000)
        assert abs(draws.mean()) < 0.013

    def test_normal_location_scale(self):
        base = sample_normal(RandomStream(1), NormalParams(0, 1), 1000)
        shifted = sample_normal(RandomStream(1), NormalParams(5, 4), 1000)
        np.testing.assert_allclose(shifted, 5 + 2 * base, rtol=0, atol=1e-13)

    def test_normal_million(self):
        draws = sample_normal(RandomStream(9), NormalParams(-2.5, 9), 1_000_000)
        assert abs(draws.mean() + 2.5) < 4 * 3 / 1000

    def test_gamma_mean(self):
        draws = sample_gamma_rate(RandomStream(1), GammaRateParams(2, 1), 100_000)
        assert abs(draws.mean() - 2) < 0.018

    def test_gamma_million(self):
        p = GammaRateParams(0.4, 2.0)
        draws = sample_gamma_rate(RandomStream(4), p, 1_000_000)
        se = math.sqrt(p.shape) / p.rate / 1000
        assert abs(draws.mean() - p.mean) < 4 * se

    def test_gamma_exponential_case(self):
        draws = sample_gamma_rate(RandomStream(3), GammaRateParams(1, 2.5), 20_000)
        assert stats.kstest(draws, stats.expon(scale=1 / 2.5).cdf).pvalue > 0.001

    def test_gamma_small_shape_distribution(self):
        draws = sample_gamma_rate(RandomStream(3), GammaRateParams(0.3, 1.0), 20_000)
        assert stats.kstest(draws, stats.gamma(0.3).cdf).pvalue > 0.001

    def test_gamma_rate_scaling(self):
        unit = sample_gamma_rate(RandomStream(8), GammaRateParams(1.29, 1.0), 1000)
        scaled = sample_gamma_rate(RandomStream(8), GammaRateParams(1.29, 12.36), 1000)
        np.testing.assert_allclose(scaled, unit / 12.36, rtol=1e-14)


class TestTwoQuantileSolver:
    def test_roundtrip_fixed(self):
        p = GammaRateParams(2, 5)
        got = solve_two_quantile_gamma(gamma_quantile(p, 0.9995), gamma_quantile(p, 0.0005))
        assert got.shape == pytest.approx(2, rel=1e-5)
        assert got.rate == pytest.approx(5, rel=1e-5)

    def test_dental_targets(self):
        z = 3.2905267314918948
        upper, lower = z**2 / 2**2, z**2 / 15**2
        got = solve_two_quantile_gamma(upper, lower)
        assert gamma_quantile(got, 0.9995) == pytest.approx(upper, rel=1e-6)
        assert gamma_quantile(got, 0.0005) == pytest.approx(lower, rel=1e-6)

    @pytest.mark.parametrize("lower, upper", [(1.0, 1.0), (2.0, 1.0), (0.0, 1.0)])
    def test_bad_targets(self, lower, upper):
        with pytest.raises((DomainError, ConvergenceError)):
            solve_two_quantile_gamma(upper, lower)

    def test_unbracketable(self):
        # a ratio this close to 1 needs shape far beyond the search range
        with pytest.raises(ConvergenceError) as info:
            solve_two_quantile_gamma(1.0 + 1e-9, 1.0)
        assert len(info.value.residuals) == 2

    @settings(max_examples=100, deadline=None)
    @given(shape=st.floats(0.05, 500), rate=st.floats(1e-3, 1e3))
    def test_roundtrip_property(self, shape, rate):
        p = GammaRateParams(shape, rate)
        got = solve_two_quantile_gamma(gamma_quantile(p, 0.9995), gamma_quantile(p, 0.0005))
        assert got.shape == pytest.approx(shape, rel=1e-5)
        assert got.rate == pytest.approx(rate, rel=1e-5)
