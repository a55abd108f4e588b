"""Relative belief ratios for ``H0: mu = mu1`` and the strength of the evidence.

Two routes are provided.

Direct
    Closed-form ``RB(mu1 | x)``: the posterior-to-prior density ratio of
    ``mu``.  The strength ``Pi(RB(mu | x) <= RB(mu1 | x) | x)`` is the
    posterior probability that ``|mu - xbar| >= |xbar - mu1|``; it has a
    closed form when the variance is known and is simulated otherwise.

Distance
    The KL divergence between ``N(mu, sigma2)`` and ``N(mu1, sigma2)`` is
    ``D = (mu - mu1)**2 / (2 sigma2)``.  Its prior and posterior distributions
    are simulated, the prior sample is cut at its ``i/M`` quantiles and the
    relative belief ratio of each cell is the ratio of posterior to prior
    content.  ``RB_D(0 | x)`` is read off the first ``i0`` cells.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .model import (
    DataSummary,
    Hyperparameters,
    Variant,
    posterior,
    posterior_known_variance,
    posterior_unknown_variance,
    sample_posterior,
    sample_prior,
)
from .numerics import DomainError, RandomStream, map_chunks, norm_cdf

__all__ = [
    "DegenerateGridError",
    "DiscretizedDensity",
    "Evidence",
    "KLTestConfig",
    "RBResult",
    "direct_rb",
    "direct_rb_known",
    "direct_rb_unknown",
    "direct_strength_known",
    "direct_strength_unknown",
    "kl_distance_to_null",
    "log_rb_known",
    "log_rb_unknown",
    "run_kl_rb_test",
    "student_t_rb_unknown",
]

PRIOR_STREAM = 0
POSTERIOR_STREAM = 1


class DegenerateGridError(DomainError):
    """Too many prior quantiles coincide for the cell estimator to be usable."""


class Evidence(str, enum.Enum):
    IN_FAVOR = "in_favor"
    AGAINST = "against"
    NEUTRAL = "neutral"

    @classmethod
    def from_rb(cls, rb: float, std_error: float = 0.0) -> Evidence:
        if std_error > 0 and abs(rb - 1.0) < std_error:
            return cls.NEUTRAL
        if rb > 1.0:
            return cls.IN_FAVOR
        if rb < 1.0:
            return cls.AGAINST
        return cls.NEUTRAL


@dataclass(frozen=True)
class RBResult:
    rb: float
    strength: float
    evidence: Evidence
    rb_std_error: Optional[float] = None
    strength_std_error: Optional[float] = None

    def __post_init__(self):
        if not self.rb >= 0:
            raise DomainError(f"relative belief ratio must be >= 0, got {self.rb}")
        if not 0.0 <= self.strength <= 1.0:
            raise DomainError(f"strength must lie in [0, 1], got {self.strength}")


@dataclass(frozen=True)
class KLTestConfig:
    r1: int = 100_000
    r2: int = 100_000
    M: int = 20
    i0: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.M < 1 or not 0 < self.i0 < self.M:
            raise DomainError(f"need 0 < i0 < M, got i0={self.i0}, M={self.M}")
        if not 0 < self.i0 / self.M <= 0.25:
            raise DomainError(f"i0/M must lie in (0, 0.25], got {self.i0 / self.M}")
        if self.r1 < 10 * self.M or self.r2 < 10 * self.M:
            raise DomainError(f"r1 and r2 must be at least 10*M = {10 * self.M}")


@dataclass
class DiscretizedDensity:
    """Prior-quantile grid of the distance with per-cell contents.

    Cell ``i`` is ``[prior_quantiles[i], prior_quantiles[i + 1])`` for
    ``i < M - 1``; the last cell is unbounded above.  ``prior_contents`` are
    the nominal ``1/M`` masses, shifted forward past cells emptied by tied
    quantiles.
    """

    M: int
    i0: int
    prior_quantiles: np.ndarray
    prior_contents: np.ndarray
    posterior_contents: np.ndarray

    def cell_rb(self) -> np.ndarray:
        """Per-cell RB estimate; NaN for cells with no prior mass."""
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.posterior_contents / self.prior_contents
        out[self.prior_contents == 0] = np.nan
        return out

    @property
    def rb_zero(self) -> float:
        return float(self.posterior_contents[: self.i0].sum() / self.prior_contents[: self.i0].sum())


def log_rb_known(hp: Hyperparameters, n: int, sigma2: float, xbar, mu):
    """``log RB(mu | x)`` for the known-variance model, broadcasting over ``xbar`` and ``mu``."""
    nl2 = n * hp.lambda0**2
    xbar = np.asarray(xbar, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return 0.5 * math.log1p(nl2) - n / (2.0 * sigma2) * (
        (xbar - mu) ** 2 - (xbar - hp.mu0) ** 2 / (nl2 + 1.0)
    )


def log_rb_unknown(hp: Hyperparameters, n: int, xbar, s2, mu):
    """Log of the normal-gamma ratio of :func:`direct_rb_unknown`, broadcasting."""
    xbar = np.asarray(xbar, dtype=float)
    base = hp.beta0 + (n - 1) * np.asarray(s2, dtype=float) / 2.0
    num = base + n / 2.0 * (xbar - np.asarray(mu, dtype=float)) ** 2
    den = base + n / 2.0 * (xbar - hp.mu0) ** 2 / (n * hp.lambda0**2 + 1.0)
    return 0.5 * math.log(n + 1.0 / hp.lambda0**2) - (n / 2.0 + hp.alpha0) * np.log(num / den)


def _exp(log_value):
    out = np.exp(log_value)
    return float(out) if out.ndim == 0 else out


def direct_rb_known(hp: Hyperparameters, data: DataSummary, mu):
    """Closed-form ``RB(mu | x)`` in the known-variance model (vectorised in ``mu``)."""
    sigma2 = data.require_sigma2()
    if hp.variant is not Variant.KNOWN:
        raise DomainError("hyperparameters are not for the known-variance model")
    return _exp(log_rb_known(hp, data.n, sigma2, data.mean, mu))


def direct_strength_known(hp: Hyperparameters, data: DataSummary, mu1: float) -> float:
    """``Pi(|mu - xbar| >= |xbar - mu1| | x)`` under the normal posterior.

    The two Phi arguments are ``(xbar +- |xbar - mu1| - mu_x) / sigma_x``.
    """
    post = posterior_known_variance(hp, data)
    d = abs(data.mean - mu1)
    if d == 0:
        return 1.0
    sx = math.sqrt(post.sigma_x2)
    shift = (data.mean - post.mu_x) / sx
    a = d / sx
    return float(min(1.0, norm_cdf(-(a + shift)) + norm_cdf(-a + shift)))


def direct_rb_unknown(hp: Hyperparameters, data: DataSummary, mu1):
    """``RB(mu1 | x)`` in the normal-gamma model as ``m_T(T | mu1) / m_T(T)``.

    ``m_T(T | mu)`` integrates the precision against its *marginal*
    gamma(alpha0, beta0) prior, giving::

        sqrt(n + 1/lambda0**2) * (B(mu1) / beta_x) ** -(n/2 + alpha0)

    with ``B(mu) = beta0 + (n-1) s2/2 + n (xbar - mu)**2 / 2``.  The
    denominator ``beta_x`` shrinks toward ``mu0``.  Because the prior of the
    precision given ``mu`` is not the marginal one, this is not exactly the
    posterior/prior density ratio of ``mu``; see :func:`student_t_rb_unknown`.
    """
    if hp.variant is not Variant.UNKNOWN:
        raise DomainError("hyperparameters are not for the unknown-variance model")
    if data.n < 2:
        raise DomainError("the unknown-variance model needs n >= 2")
    return _exp(log_rb_unknown(hp, data.n, data.mean, data.sample_variance, mu1))


def _log_t_marginal(mu, shape, rate, centre, scale2):
    # marginal of mu when mu | s2 ~ N(centre, scale2 * s2), 1/s2 ~ gamma_rate(shape, rate)
    return (
        gammaln(shape + 0.5)
        - gammaln(shape)
        - 0.5 * np.log(2.0 * np.pi * scale2 * rate)
        - (shape + 0.5) * np.log1p((mu - centre) ** 2 / (2.0 * scale2 * rate))
    )


def student_t_rb_unknown(hp: Hyperparameters, data: DataSummary, mu1):
    """Exact posterior/prior density ratio of ``mu`` in the normal-gamma model.

    Both marginals of ``mu`` are scaled Student-t laws.
    """
    post = posterior_unknown_variance(hp, data)
    mu1 = np.asarray(mu1, dtype=float)
    return _exp(
        _log_t_marginal(mu1, post.alpha_x, post.beta_x, post.mu_x, post.lambda_x2)
        - _log_t_marginal(mu1, hp.alpha0, hp.beta0, hp.mu0, hp.lambda0**2)
    )


def direct_rb(hp: Hyperparameters, data: DataSummary, mu1):
    if hp.variant is Variant.KNOWN:
        return direct_rb_known(hp, data, mu1)
    return direct_rb_unknown(hp, data, mu1)


def direct_strength_unknown(
    stream: RandomStream,
    hp: Hyperparameters,
    data: DataSummary,
    mu1: float,
    reps: int,
    workers: int = 1,
) -> float:
    """Monte Carlo strength in the normal-gamma model.

    ``RB(mu | x)`` from :func:`direct_rb_unknown` decreases in
    ``(xbar - mu)**2``, so the strength is the posterior probability of
    ``(mu - xbar)**2 >= (xbar - mu1)**2``.  Standard error is at most
    ``0.5 / sqrt(reps)``.
    """
    if reps < 1000:
        raise DomainError(f"reps must be at least 1000, got {reps}")
    post = posterior_unknown_variance(hp, data)
    d2 = (data.mean - mu1) ** 2

    def count(sub, size):
        mu, _ = sample_posterior(sub, post, size)
        return int(np.count_nonzero((mu - data.mean) ** 2 >= d2))

    hits = sum(map_chunks(stream, reps, count, workers))
    return hits / reps


def kl_distance_to_null(mu, sigma2, mu1):
    """KL divergence of ``N(mu, sigma2)`` from ``N(mu1, sigma2)``."""
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(sigma2 <= 0):
        raise DomainError("sigma2 must be positive")
    out = (np.asarray(mu, dtype=float) - mu1) ** 2 / (2.0 * sigma2)
    return float(out) if out.ndim == 0 else out


def _distance_sample(stream, draw, total, mu1, workers):
    def chunk(sub, size):
        mu, s2 = draw(sub, size)
        return kl_distance_to_null(mu, s2, mu1)

    return np.concatenate(map_chunks(stream, total, chunk, workers))


def _nominal_contents(quantiles: np.ndarray, M: int) -> np.ndarray:
    """``1/M`` per cell, carried forward over cells emptied by tied quantiles."""
    contents = np.zeros(M)
    carry = 0.0
    for i in range(M):
        carry += 1.0 / M
        empty = i < M - 1 and quantiles[i] == quantiles[i + 1]
        if not empty:
            contents[i] = carry
            carry = 0.0
    return contents


def build_grid(prior_d: np.ndarray, posterior_d: np.ndarray, M: int, i0: int) -> DiscretizedDensity:
    levels = np.arange(M + 1) / M
    q = np.quantile(prior_d, levels)
    q[0] = 0.0
    empty = int(np.count_nonzero(q[1:M] == q[:M - 1]))
    if empty > 0.2 * M:
        raise DegenerateGridError(
            f"{empty} of {M} prior-quantile cells collapsed; increase r1"
        )
    post_sorted = np.sort(posterior_d)
    # F(q) = fraction of posterior draws strictly below q; last cell is open
    cdf = np.searchsorted(post_sorted, q[:M], side="left") / post_sorted.size
    cdf = np.append(cdf, 1.0)
    return DiscretizedDensity(
        M=M,
        i0=i0,
        prior_quantiles=q,
        prior_contents=_nominal_contents(q, M),
        posterior_contents=np.diff(cdf),
    )


def strength_from_grid(grid: DiscretizedDensity) -> float:
    """Posterior mass of cells whose RB does not exceed ``RB(0)``.

    The first ``i0`` cells form the cell containing 0 and always count.
    """
    rb0 = grid.rb_zero
    cell = grid.cell_rb()
    tail = np.arange(grid.M) >= grid.i0
    keep = tail & (grid.prior_contents > 0) & (cell <= rb0)
    total = grid.posterior_contents[: grid.i0].sum() + grid.posterior_contents[keep].sum()
    return float(min(1.0, total))


def run_kl_rb_test(
    hp: Hyperparameters,
    data: DataSummary,
    mu1: float,
    config: KLTestConfig = KLTestConfig(),
    workers: int = 1,
) -> tuple[RBResult, DiscretizedDensity]:
    """Distance-based relative belief test of ``H0: mu = mu1``.

    Prior distances come from stream ``(config.seed, 0)`` and posterior
    distances from ``(config.seed, 1)``.
    """
    post = posterior(hp, data)
    sigma2 = data.known_sigma2 if hp.variant is Variant.KNOWN else None
    if hp.variant is Variant.KNOWN:
        data.require_sigma2()

    prior_d = _distance_sample(
        RandomStream(config.seed, PRIOR_STREAM),
        lambda s, k: sample_prior(s, hp, sigma2, k),
        config.r1,
        mu1,
        workers,
    )
    post_d = _distance_sample(
        RandomStream(config.seed, POSTERIOR_STREAM),
        lambda s, k: sample_posterior(s, post, k),
        config.r2,
        mu1,
        workers,
    )
    grid = build_grid(prior_d, post_d, config.M, config.i0)
    rb0 = grid.rb_zero
    f0 = float(grid.posterior_contents[: grid.i0].sum())
    p0 = float(grid.prior_contents[: grid.i0].sum())
    rb_se = math.sqrt(f0 * (1.0 - f0) / config.r2) / p0
    strength = strength_from_grid(grid)
    st_se = math.sqrt(strength * (1.0 - strength) / config.r2)
    result = RBResult(rb0, strength, Evidence.from_rb(rb0, rb_se), rb_se, st_se)
    return result, grid
