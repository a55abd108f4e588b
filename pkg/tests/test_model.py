import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relbelief.model import (
    DataSummary,
    ElicitationInput,
    Hyperparameters,
    Variant,
    elicit_known_variance,
    elicit_unknown_variance,
    posterior_known_variance,
    posterior_unknown_variance,
    sample_posterior,
    sample_prior,
)
from relbelief.numerics import DomainError, GammaRateParams, RandomStream, gamma_quantile


def known(mu0=0.0, lambda0=1.0):
    return Hyperparameters(mu0, lambda0, variant=Variant.KNOWN)


class TestDataSummary:
    def test_from_values_matches_numpy(self):
        x = np.random.default_rng(0).normal(1e6, 3.0, 1001)
        d = DataSummary.from_values(x)
        assert d.n == 1001
        assert d.mean == pytest.approx(x.mean(), rel=1e-14)
        assert d.sample_variance == pytest.approx(x.var(ddof=1), rel=1e-9)

    def test_single_value(self):
        d = DataSummary.from_values([4.2])
        assert (d.n, d.mean, d.sample_variance) == (1, 4.2, 0.0)

    def test_invariants(self):
        with pytest.raises(DomainError):
            DataSummary(0, 1.0)
        with pytest.raises(DomainError):
            DataSummary(3, 1.0, -1.0)
        with pytest.raises(DomainError):
            DataSummary(1, 1.0, 0.5)
        with pytest.raises(DomainError):
            DataSummary.from_values([])

    def test_unknown_variance_rejects_single_observation(self):
        hp = Hyperparameters(0, 1, 2, 2, Variant.UNKNOWN)
        with pytest.raises(DomainError):
            posterior_unknown_variance(hp, DataSummary(1, 0.0))


class TestElicitationKnown:
    def test_symmetric_interval(self):
        assert elicit_known_variance(ElicitationInput(-3, 3), 2.0).mu0 == 0.0

    def test_dental_interval(self):
        hp = elicit_known_variance(ElicitationInput(0, 25, 0.999), 3.6)
        assert hp.mu0 == 12.5
        # 25 / (2 * 3.6 * 3.2905267314918948), oracle from mpmath Newton
        assert hp.lambda0 == pytest.approx(1.0552177525231495, rel=1e-12)

    def test_gamma_monotone(self):
        lams = [elicit_known_variance(ElicitationInput(0, 1, g), 1.0).lambda0 for g in (0.9, 0.99, 0.999, 0.9999)]
        assert all(a > b for a, b in zip(lams, lams[1:]))

    def test_sigma_monotone(self):
        lams = [elicit_known_variance(ElicitationInput(0, 1), s).lambda0 for s in (0.5, 1, 2, 4)]
        assert all(a > b for a, b in zip(lams, lams[1:]))

    def test_invalid(self):
        with pytest.raises(DomainError):
            ElicitationInput(1, 1)
        with pytest.raises(DomainError):
            ElicitationInput(0, 1, gamma=1.0)
        with pytest.raises(DomainError):
            ElicitationInput(0, 1, s1=3, s2=2)
        with pytest.raises(DomainError):
            elicit_known_variance(ElicitationInput(0, 1), 0.0)


class TestElicitationUnknown:
    @pytest.mark.parametrize(
        "a, b, s1, s2, mu0, lambda0",
        [(0, 25, 2, 15, 12.5, 12.5 / 15), (8, 24, 4, 10, 16, 0.8), (4, 6, 2, 5, 5, 0.2)],
    )
    def test_location_and_scale(self, a, b, s1, s2, mu0, lambda0):
        hp = elicit_unknown_variance(ElicitationInput(a, b, 0.999, s1, s2))
        assert hp.mu0 == mu0
        assert hp.lambda0 == pytest.approx(lambda0, rel=1e-14)

    def test_precision_quantiles_hit_targets(self):
        hp = elicit_unknown_variance(ElicitationInput(0, 25, 0.999, 2, 15))
        z2 = 3.2905267314918948**2
        prec = GammaRateParams(hp.alpha0, hp.beta0)
        assert gamma_quantile(prec, 0.9995) == pytest.approx(z2 / 4, rel=1e-6)
        assert gamma_quantile(prec, 0.0005) == pytest.approx(z2 / 225, rel=1e-6)

    def test_lambda_decreasing_in_s2(self):
        lams = [elicit_unknown_variance(ElicitationInput(0, 10, 0.999, 1, s2)).lambda0 for s2 in (2, 4, 8)]
        assert lams[0] > lams[1] > lams[2]

    def test_requires_spread_bounds(self):
        with pytest.raises(DomainError):
            elicit_unknown_variance(ElicitationInput(0, 10))


class TestHyperparameters:
    def test_variant_consistency(self):
        with pytest.raises(DomainError):
            Hyperparameters(0, 1, 2.0, 3.0, Variant.KNOWN)
        with pytest.raises(DomainError):
            Hyperparameters(0, 1, None, 3.0, Variant.UNKNOWN)
        with pytest.raises(DomainError):
            Hyperparameters(0, 0, variant=Variant.KNOWN)


class TestPosteriorKnown:
    def test_substitution(self):
        post = posterior_known_variance(known(0, 1), DataSummary(1, 2.0, known_sigma2=1.0))
        assert post.mu_x == pytest.approx(1.0)
        assert post.sigma_x2 == pytest.approx(0.5)

    @pytest.mark.parametrize("n, lam", [(1, 0.1), (10, 1.0), (1000, 5.0)])
    def test_fixed_point(self, n, lam):
        post = posterior_known_variance(known(3.3, lam), DataSummary(n, 3.3, known_sigma2=2.0))
        assert post.mu_x == pytest.approx(3.3, rel=1e-14)

    def test_large_n(self):
        post = posterior_known_variance(known(0, 1), DataSummary(10**8, 2.0, known_sigma2=1.0))
        assert post.mu_x == pytest.approx(2.0, abs=1e-6)
        assert post.sigma_x2 < 1e-6

    def test_convex_combination(self):
        hp = known(1.0, 0.7)
        a = posterior_known_variance(hp, DataSummary(5, 0.0, known_sigma2=1.0)).mu_x
        b = posterior_known_variance(hp, DataSummary(5, 1.0, known_sigma2=1.0)).mu_x
        w_xbar = b - a
        w_mu0 = a / hp.mu0
        assert w_xbar + w_mu0 == pytest.approx(1.0, rel=1e-14)
        assert 0 < w_xbar < 1

    def test_missing_sigma(self):
        with pytest.raises(DomainError):
            posterior_known_variance(known(), DataSummary(3, 0.0, 1.0))


class TestPosteriorUnknown:
    def test_dental_beta_x(self, dental):
        data, _, hp = dental
        post = posterior_unknown_variance(hp, data)
        # 12.36 + 90.72 + 48.6 / (2 * 11.3335), mpmath evaluation
        assert post.beta_x == pytest.approx(105.22408611638064, rel=1e-12)
        assert post.alpha_x == pytest.approx(1.29 + 7.5)
        assert post.lambda_x2 == pytest.approx(1 / (15 + 1 / 0.83**2))
        assert post.mu_x == pytest.approx((12.5 / 0.83**2 + 15 * 10.7) / (15 + 1 / 0.83**2))

    def test_no_shrinkage_at_prior_mean(self):
        hp = Hyperparameters(2.0, 0.5, 3.0, 4.0, Variant.UNKNOWN)
        post = posterior_unknown_variance(hp, DataSummary(9, 2.0, 1.5))
        assert post.beta_x == pytest.approx(4.0 + 8 * 1.5 / 2, rel=1e-15)

    def test_degenerate_data(self):
        hp = Hyperparameters(2.0, 0.5, 3.0, 4.0, Variant.UNKNOWN)
        post = posterior_unknown_variance(hp, DataSummary(9, 2.0, 0.0))
        assert post.beta_x == 4.0
        assert post.alpha_x == 3.0 + 4.5

    @settings(max_examples=200, deadline=None)
    @given(
        n=st.integers(2, 500),
        xbar=st.floats(-50, 50),
        s2=st.floats(0, 100),
        mu0=st.floats(-50, 50),
        lam=st.floats(0.01, 10),
    )
    def test_beta_x_bounds_and_monotonicity(self, n, xbar, s2, mu0, lam):
        hp = Hyperparameters(mu0, lam, 2.0, 3.0, Variant.UNKNOWN)
        base = posterior_unknown_variance(hp, DataSummary(n, xbar, s2)).beta_x
        assert base >= hp.beta0
        assert posterior_unknown_variance(hp, DataSummary(n, xbar, s2 + 1.0)).beta_x >= base
        further = xbar + math.copysign(1.0, xbar - mu0)
        assert posterior_unknown_variance(hp, DataSummary(n, further, s2)).beta_x >= base

    def test_concentrates_with_n(self):
        hp = Hyperparameters(0.0, 1.0, 2.0, 2.0, Variant.UNKNOWN)
        spreads = []
        for n in (10, 10**3, 10**5):
            post = posterior_unknown_variance(hp, DataSummary(n, 0.3, 1.0))
            mu, _ = sample_posterior(RandomStream(7), post, 100_000)
            spreads.append(mu.var())
        assert spreads[0] > spreads[1] > spreads[2]


class TestSampling:
    def test_known_prior_collapses(self):
        mu, s2 = sample_prior(RandomStream(1), known(4.0, 1e-6), 1.0, 100_000)
        assert mu.var() < 1e-10
        assert np.all(s2 == 1.0)

    def test_known_prior_location_scale(self):
        mu, _ = sample_prior(RandomStream(2), known(3.0, 1.0), 1.0, 500)
        z = RandomStream(2).standard_normal(500)
        np.testing.assert_allclose(mu, 3.0 + z, atol=1e-14)

    def test_known_prior_needs_sigma(self):
        with pytest.raises(DomainError):
            sample_prior(RandomStream(1), known(), None)

    def test_unknown_prior_precision_mean(self, dental):
        _, _, hp = dental
        _, s2 = sample_prior(RandomStream(3), hp, size=100_000)
        prec = 1 / s2
        se = math.sqrt(hp.alpha0) / hp.beta0 / math.sqrt(100_000)
        assert abs(prec.mean() - 1.29 / 12.36) < 4 * se

    def test_unknown_prior_scalar(self, dental):
        _, _, hp = dental
        mu, s2 = sample_prior(RandomStream(3), hp)
        assert isinstance(mu, float) and s2 > 0

    def test_known_posterior_degenerate(self):
        post = posterior_known_variance(known(0, 1), DataSummary(1, 2.0, known_sigma2=1.0))
        from dataclasses import replace

        mu, _ = sample_posterior(RandomStream(1), replace(post, sigma_x2=0.0), 1000)
        assert np.all(mu == post.mu_x)

    def test_unknown_posterior_moments(self, dental):
        data, _, hp = dental
        post = posterior_unknown_variance(hp, data)
        mu, s2 = sample_posterior(RandomStream(4), post, 100_000)
        prec = 1 / s2
        se = math.sqrt(post.alpha_x) / post.beta_x / math.sqrt(100_000)
        assert abs(prec.mean() - post.alpha_x / post.beta_x) < 4 * se
        # marginal variance of mu is lambda_x2 * beta_x / (alpha_x - 1)
        mu_sd = math.sqrt(post.lambda_x2 * post.beta_x / (post.alpha_x - 1))
        assert abs(mu.mean() - post.mu_x) < 4 * mu_sd / math.sqrt(100_000)

    def test_known_posterior_mean(self):
        post = posterior_known_variance(known(1.0, 2.0), DataSummary(20, 0.5, known_sigma2=4.0))
        mu, _ = sample_posterior(RandomStream(5), post, 100_000)
        assert abs(mu.mean() - post.mu_x) < 4 * math.sqrt(post.sigma_x2 / 100_000)
