"""Prior-data conflict checks and the bias of a prior for ``H0: mu = mu1``.

Conflict is the prior predictive probability that the minimal sufficient
statistic has density no larger than the observed one.  Bias against is the
conditional prior probability, given ``mu = mu1``, of getting ``RB <= 1``;
bias in favor is the probability of ``RB >= 1`` when ``mu = mu1 +- delta``.
Nuisance variance is integrated out under its prior in the normal-gamma
model and held at the known value otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .model import DataSummary, Hyperparameters, Variant, sample_prior
from .numerics import DomainError, RandomStream, map_chunks, norm_cdf
from .rb import log_rb_known, log_rb_unknown

__all__ = [
    "BiasReport",
    "ConflictMethod",
    "ConflictResult",
    "bias_against",
    "bias_in_favor",
    "bias_report",
    "conflict_known_variance",
    "conflict_known_variance_mc",
    "conflict_unknown_variance",
    "log_prior_predictive_unknown",
]

MIN_REPS = 10_000


class ConflictMethod(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class ConflictResult:
    tail_probability: float
    method: ConflictMethod
    mc_std_error: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "method", ConflictMethod(self.method))
        if (self.mc_std_error is not None) != (self.method is ConflictMethod.MONTE_CARLO):
            raise DomainError("mc_std_error is required exactly for Monte Carlo results")


@dataclass(frozen=True)
class BiasReport:
    bias_against: float
    bias_in_favor_upper: float
    bias_in_favor_lower: float
    delta: float
    reps: int
    seed: int

    def std_error(self, p: float) -> float:
        return math.sqrt(p * (1.0 - p) / self.reps)


def _binomial(hits: int, reps: int) -> tuple[float, float]:
    p = hits / reps
    return p, math.sqrt(p * (1.0 - p) / reps)


def _check_reps(reps: int):
    if reps < MIN_REPS:
        raise DomainError(f"reps must be at least {MIN_REPS}, got {reps}")


def conflict_known_variance(hp: Hyperparameters, data: DataSummary) -> ConflictResult:
    """Two-sided tail of xbar under its N(mu0, lambda0^2 s2 + s2/n) prior predictive."""
    sigma2 = data.require_sigma2()
    sd = math.sqrt(hp.lambda0**2 * sigma2 + sigma2 / data.n)
    z = abs(data.mean - hp.mu0) / sd
    return ConflictResult(2.0 * norm_cdf(-z), ConflictMethod.CLOSED_FORM)


def conflict_known_variance_mc(
    stream: RandomStream, hp: Hyperparameters, data: DataSummary, reps: int, workers: int = 1
) -> ConflictResult:
    """Simulation version of :func:`conflict_known_variance`, for cross-checking."""
    _check_reps(reps)
    sigma2 = data.require_sigma2()
    n = data.n
    shrink = hp.lambda0**2 * sigma2 + sigma2 / n
    observed = (data.mean - hp.mu0) ** 2 / shrink

    def count(sub, size):
        mu, _ = sample_prior(sub, hp, sigma2, size)
        xbar = mu + math.sqrt(sigma2 / n) * sub.standard_normal(size)
        # normal density is decreasing in the squared standardised distance
        return int(np.count_nonzero((xbar - hp.mu0) ** 2 / shrink >= observed))

    p, se = _binomial(sum(map_chunks(stream, reps, count, workers)), reps)
    return ConflictResult(p, ConflictMethod.MONTE_CARLO, se)


def log_prior_predictive_unknown(hp: Hyperparameters, n: int, xbar, s2):
    """Log prior predictive density of the data in the normal-gamma model.

    Depends on the data only through ``(xbar, s2)``::

        lgamma(n/2 + a0) - lgamma(a0) - log(n + 1/l0^2)/2 - (n/2) log(2 pi)
        + a0 log b0 - log l0 - (n/2 + a0) log beta_x
    """
    a0, b0, l0 = hp.alpha0, hp.beta0, hp.lambda0
    xbar = np.asarray(xbar, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    beta_x = b0 + (n - 1) * s2 / 2.0 + n * (xbar - hp.mu0) ** 2 / (2.0 * (n * l0**2 + 1.0))
    const = (
        gammaln(n / 2.0 + a0)
        - gammaln(a0)
        - 0.5 * math.log(n + 1.0 / l0**2)
        - n / 2.0 * math.log(2.0 * math.pi)
        + a0 * math.log(b0)
        - math.log(l0)
    )
    out = const - (n / 2.0 + a0) * np.log(beta_x)
    return float(out) if out.ndim == 0 else out


def _draw_summaries(sub: RandomStream, mu, sigma2, n: int, size: int):
    xbar = mu + np.sqrt(sigma2 / n) * sub.standard_normal(size)
    s2 = sigma2 * sub.chisquare(n - 1, size) / (n - 1)
    return xbar, s2


def conflict_unknown_variance(
    stream: RandomStream, hp: Hyperparameters, data: DataSummary, reps: int, workers: int = 1
) -> ConflictResult:
    """Monte Carlo prior-data conflict check for the normal-gamma model."""
    _check_reps(reps)
    if hp.variant is not Variant.UNKNOWN:
        raise DomainError("hyperparameters are not for the unknown-variance model")
    if data.n < 2:
        raise DomainError("the unknown-variance model needs n >= 2")
    n = data.n
    observed = log_prior_predictive_unknown(hp, n, data.mean, data.sample_variance)

    def count(sub, size):
        mu, sigma2 = sample_prior(sub, hp, size=size)
        xbar, s2 = _draw_summaries(sub, mu, sigma2, n, size)
        return int(np.count_nonzero(log_prior_predictive_unknown(hp, n, xbar, s2) <= observed))

    p, se = _binomial(sum(map_chunks(stream, reps, count, workers)), reps)
    return ConflictResult(p, ConflictMethod.MONTE_CARLO, se)


def _simulated_log_rb(sub, hp, mu_true, mu1, n, size, sigma2):
    """log RB(mu1 | x) for ``size`` data sets of size ``n`` generated at ``mu_true``."""
    if hp.variant is Variant.KNOWN:
        xbar = mu_true + math.sqrt(sigma2 / n) * sub.standard_normal(size)
        return log_rb_known(hp, n, sigma2, xbar, mu1)
    s2_true = 1.0 / (sub.standard_gamma(hp.alpha0, size) / hp.beta0)
    xbar, s2 = _draw_summaries(sub, mu_true, s2_true, n, size)
    return log_rb_unknown(hp, n, xbar, s2, mu1)


def _rb_frequency(stream, hp, mu_true, mu1, n, reps, sigma2, favor: bool, workers: int) -> float:
    _check_reps(reps)
    if hp.variant is Variant.KNOWN:
        if sigma2 is None or not sigma2 > 0:
            raise DomainError("known-variance bias needs a positive sigma2")
    elif n < 2:
        raise DomainError("the unknown-variance model needs n >= 2")

    def count(sub, size):
        log_rb = _simulated_log_rb(sub, hp, mu_true, mu1, n, size, sigma2)
        hit = log_rb >= 0.0 if favor else log_rb <= 0.0
        return int(np.count_nonzero(hit))

    return sum(map_chunks(stream, reps, count, workers)) / reps


def bias_against(
    stream: RandomStream,
    hp: Hyperparameters,
    mu1: float,
    n: int,
    reps: int,
    sigma2: Optional[float] = None,
    workers: int = 1,
) -> float:
    """Prior probability of evidence against ``mu1`` when ``mu1`` is true.

    ``sigma2`` is the known variance and is ignored for the normal-gamma
    model, where it is drawn from its prior for every replicate.
    """
    return _rb_frequency(stream, hp, mu1, mu1, n, reps, sigma2, favor=False, workers=workers)


def bias_in_favor(
    stream_upper: RandomStream,
    stream_lower: RandomStream,
    hp: Hyperparameters,
    mu1: float,
    delta: float,
    n: int,
    reps: int,
    sigma2: Optional[float] = None,
    workers: int = 1,
) -> tuple[float, float]:
    """Probability of evidence in favor of ``mu1`` when the truth is ``mu1 +- delta``."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    upper = _rb_frequency(stream_upper, hp, mu1 + delta, mu1, n, reps, sigma2, True, workers)
    lower = _rb_frequency(stream_lower, hp, mu1 - delta, mu1, n, reps, sigma2, True, workers)
    return upper, lower


def bias_report(
    seed: int,
    hp: Hyperparameters,
    mu1: float,
    delta: float,
    n: int,
    reps: int,
    sigma2: Optional[float] = None,
    workers: int = 1,
    streams: tuple[int, int, int] = (3, 4, 5),
) -> BiasReport:
    against = bias_against(RandomStream(seed, streams[0]), hp, mu1, n, reps, sigma2, workers)
    upper, lower = bias_in_favor(
        RandomStream(seed, streams[1]), RandomStream(seed, streams[2]),
        hp, mu1, delta, n, reps, sigma2, workers,
    )
    return BiasReport(against, upper, lower, delta, reps, seed)
