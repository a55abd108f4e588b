"""Data summaries, conjugate priors and posteriors, and prior elicitation.

Two model variants share one set of types:

* ``known_variance``: ``mu ~ N(mu0, lambda0**2 * sigma**2)`` with sigma fixed.
* ``unknown_variance``: ``1/sigma**2 ~ gamma_rate(alpha0, beta0)`` and
  ``mu | sigma**2 ~ N(mu0, lambda0**2 * sigma**2)``.

The conditional posterior variance of ``mu`` in the normal-gamma update is
``sigma**2 / (n + 1/lambda0**2)``, and the posterior mean weights the prior
mean by ``1/lambda0**2``.  Both are the standard conjugate results.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .numerics import (
    DomainError,
    GammaRateParams,
    RandomStream,
    VIRTUAL_CERTAINTY_Z,
    norm_quantile,
    solve_two_quantile_gamma,
)

__all__ = [
    "DataSummary",
    "ElicitationInput",
    "Hyperparameters",
    "PosteriorSpec",
    "Variant",
    "elicit_known_variance",
    "elicit_unknown_variance",
    "posterior",
    "posterior_known_variance",
    "posterior_unknown_variance",
    "sample_posterior",
    "sample_prior",
]


class Variant(str, enum.Enum):
    KNOWN = "known_variance"
    UNKNOWN = "unknown_variance"


@dataclass(frozen=True)
class DataSummary:
    """Sufficient statistics of a normal sample.

    ``sample_variance`` uses the ``n - 1`` divisor.  ``known_sigma2`` is set
    only when the population variance is treated as known.
    """

    n: int
    mean: float
    sample_variance: float = 0.0
    known_sigma2: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if not math.isfinite(self.mean):
            raise DomainError("sample mean must be finite")
        if not (self.sample_variance >= 0 and math.isfinite(self.sample_variance)):
            raise DomainError(f"sample variance must be >= 0, got {self.sample_variance}")
        if self.n == 1 and self.sample_variance != 0:
            raise DomainError("a single observation has zero sample variance")
        if self.known_sigma2 is not None and not self.known_sigma2 > 0:
            raise DomainError(f"known_sigma2 must be positive, got {self.known_sigma2}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.sample_variance)

    @classmethod
    def from_values(cls, values: Iterable[float], known_sigma2: Optional[float] = None) -> DataSummary:
        """Summarise raw observations with Welford's one-pass update."""
        n, mean, m2 = 0, 0.0, 0.0
        for x in values:
            x = float(x)
            n += 1
            delta = x - mean
            mean += delta / n
            m2 += delta * (x - mean)
        if n == 0:
            raise DomainError("no observations")
        var = m2 / (n - 1) if n > 1 else 0.0
        return cls(n, mean, var, known_sigma2)

    @classmethod
    def from_sd(cls, n: int, mean: float, sd: float, known_sigma2: Optional[float] = None) -> DataSummary:
        return cls(n, mean, sd * sd, known_sigma2)

    def require_sigma2(self) -> float:
        if self.known_sigma2 is None:
            raise DomainError("the known-variance model needs known_sigma2")
        return self.known_sigma2


@dataclass(frozen=True)
class ElicitationInput:
    """Expert input: ``mu`` lies in ``(a, b)`` with probability ``gamma``.

    ``s1 <= s2`` bound the half-length ``sigma * z`` of an interval holding
    virtually all observations; they are only used for the unknown-variance
    prior.
    """

    a: float
    b: float
    gamma: float = 0.999
    s1: Optional[float] = None
    s2: Optional[float] = None

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError(f"need a < b, got a={self.a}, b={self.b}")
        if not 0 < self.gamma < 1:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}")
        for name in ("s1", "s2"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise DomainError(f"{name} must be positive, got {v}")
        if self.s1 is not None and self.s2 is not None and self.s1 > self.s2:
            raise DomainError(f"need s1 <= s2, got s1={self.s1}, s2={self.s2}")

    @property
    def z(self) -> float:
        return norm_quantile((1.0 + self.gamma) / 2.0)


@dataclass(frozen=True)
class Hyperparameters:
    mu0: float
    lambda0: float
    alpha0: Optional[float] = None
    beta0: Optional[float] = None
    variant: Variant = Variant.KNOWN

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not math.isfinite(self.mu0):
            raise DomainError("mu0 must be finite")
        if not (self.lambda0 > 0 and math.isfinite(self.lambda0)):
            raise DomainError(f"lambda0 must be positive, got {self.lambda0}")
        has_gamma = self.alpha0 is not None or self.beta0 is not None
        if self.variant is Variant.UNKNOWN:
            if self.alpha0 is None or self.beta0 is None:
                raise DomainError("unknown-variance hyperparameters need alpha0 and beta0")
            if not (self.alpha0 > 0 and self.beta0 > 0):
                raise DomainError("alpha0 and beta0 must be positive")
        elif has_gamma:
            raise DomainError("alpha0/beta0 are only valid for the unknown-variance variant")

    @property
    def precision_prior(self) -> GammaRateParams:
        if self.variant is not Variant.UNKNOWN:
            raise DomainError("no precision prior in the known-variance model")
        return GammaRateParams(self.alpha0, self.beta0)


@dataclass(frozen=True)
class PosteriorSpec:
    """Conjugate posterior.

    Known variance: ``mu | x ~ N(mu_x, sigma_x2)``.  Unknown variance:
    ``1/sigma**2 | x ~ gamma_rate(alpha_x, beta_x)`` and
    ``mu | sigma**2, x ~ N(mu_x, lambda_x2 * sigma**2)``.
    """

    variant: Variant
    mu_x: float
    sigma_x2: Optional[float] = None
    alpha_x: Optional[float] = None
    beta_x: Optional[float] = None
    lambda_x2: Optional[float] = None
    sigma2: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.variant is Variant.KNOWN:
            if not (self.sigma_x2 is not None and self.sigma_x2 >= 0):
                raise DomainError("known-variance posterior needs sigma_x2 >= 0")
        else:
            for name in ("alpha_x", "beta_x", "lambda_x2"):
                v = getattr(self, name)
                if v is None or not v > 0:
                    raise DomainError(f"{name} must be positive, got {v}")


def elicit_known_variance(inp: ElicitationInput, sigma: float) -> Hyperparameters:
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    mu0 = (inp.a + inp.b) / 2.0
    lambda0 = (inp.b - inp.a) / (2.0 * sigma * inp.z)
    return Hyperparameters(mu0, lambda0, variant=Variant.KNOWN)


def elicit_unknown_variance(inp: ElicitationInput) -> Hyperparameters:
    """Normal-gamma prior from an interval for ``mu`` and bounds on the data spread.

    ``lambda0 = ((b - a)/2) / s2``.  ``(alpha0, beta0)`` put the
    ``(1 +- gamma)/2`` quantiles of the precision at ``z**2/s1**2`` and
    ``z**2/s2**2`` with ``z`` the ``(1 + gamma)/2`` normal quantile.
    """
    if inp.s1 is None or inp.s2 is None:
        raise DomainError("unknown-variance elicitation needs s1 and s2")
    mu0 = (inp.a + inp.b) / 2.0
    lambda0 = (inp.b - inp.a) / 2.0 / inp.s2
    z = inp.z
    p_hi = (1.0 + inp.gamma) / 2.0
    prec = solve_two_quantile_gamma(z * z / inp.s1**2, z * z / inp.s2**2, p_hi, 1.0 - p_hi)
    return Hyperparameters(mu0, lambda0, prec.shape, prec.rate, Variant.UNKNOWN)


def posterior_known_variance(hp: Hyperparameters, data: DataSummary) -> PosteriorSpec:
    if hp.variant is not Variant.KNOWN:
        raise DomainError("hyperparameters are not for the known-variance model")
    sigma2 = data.require_sigma2()
    nl2 = data.n * hp.lambda0**2
    mu_x = nl2 / (nl2 + 1.0) * data.mean + hp.mu0 / (nl2 + 1.0)
    sigma_x2 = hp.lambda0**2 * sigma2 / (nl2 + 1.0)
    return PosteriorSpec(Variant.KNOWN, mu_x, sigma_x2=sigma_x2, sigma2=sigma2)


def posterior_unknown_variance(hp: Hyperparameters, data: DataSummary) -> PosteriorSpec:
    if hp.variant is not Variant.UNKNOWN:
        raise DomainError("hyperparameters are not for the unknown-variance model")
    if data.n < 2:
        raise DomainError("the unknown-variance model needs n >= 2")
    n = data.n
    inv_l2 = 1.0 / hp.lambda0**2
    alpha_x = hp.alpha0 + n / 2.0
    beta_x = (
        hp.beta0
        + (n - 1) * data.sample_variance / 2.0
        + n * (data.mean - hp.mu0) ** 2 / (2.0 * (n * hp.lambda0**2 + 1.0))
    )
    lambda_x2 = 1.0 / (n + inv_l2)
    mu_x = lambda_x2 * (hp.mu0 * inv_l2 + n * data.mean)
    return PosteriorSpec(
        Variant.UNKNOWN, mu_x, alpha_x=alpha_x, beta_x=beta_x, lambda_x2=lambda_x2
    )


def posterior(hp: Hyperparameters, data: DataSummary) -> PosteriorSpec:
    if hp.variant is Variant.KNOWN:
        return posterior_known_variance(hp, data)
    return posterior_unknown_variance(hp, data)


def sample_prior(stream: RandomStream, hp: Hyperparameters, sigma2: Optional[float] = None, size=None):
    """Draw ``(mu, sigma2)`` from the prior; vectorised when ``size`` is given."""
    if hp.variant is Variant.KNOWN:
        if sigma2 is None or not sigma2 > 0:
            raise DomainError("known-variance prior sampling needs a positive sigma2")
        z = stream.standard_normal(size)
        mu = hp.mu0 + hp.lambda0 * math.sqrt(sigma2) * z
        s2 = sigma2 if size is None else np.full(np.shape(mu), float(sigma2))
        return mu, s2
    prec = stream.standard_gamma(hp.alpha0, size) / hp.beta0
    s2 = 1.0 / prec
    mu = hp.mu0 + hp.lambda0 * np.sqrt(s2) * stream.standard_normal(size)
    return (float(mu), float(s2)) if size is None else (mu, s2)


def sample_posterior(stream: RandomStream, post: PosteriorSpec, size=None):
    if post.variant is Variant.KNOWN:
        mu = post.mu_x + math.sqrt(post.sigma_x2) * stream.standard_normal(size)
        s2 = post.sigma2 if post.sigma2 is not None else math.nan
        return mu, (s2 if size is None else np.full(np.shape(mu), s2))
    prec = stream.standard_gamma(post.alpha_x, size) / post.beta_x
    s2 = 1.0 / prec
    mu = post.mu_x + np.sqrt(post.lambda_x2 * s2) * stream.standard_normal(size)
    return (float(mu), float(s2)) if size is None else (mu, s2)
