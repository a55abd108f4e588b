"""Special functions, seeded random streams, and the normal KL divergence.

Everything stochastic in the package draws from a :class:`RandomStream`.  A
stream is identified by ``(seed, stream_index)`` plus an optional chunk path,
and is backed by a PCG64 generator seeded through :class:`numpy.random.SeedSequence`
with that identity as its spawn key, so distinct indices never share state.

Large Monte Carlo jobs are cut into fixed-size chunks (:func:`map_chunks`);
every chunk owns a child stream, so the concatenated draws do not depend on
how many workers executed the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np
from scipy import optimize, special

__all__ = [
    "CHUNK_SIZE",
    "ConvergenceError",
    "DomainError",
    "GammaRateParams",
    "NormalParams",
    "RandomStream",
    "VIRTUAL_CERTAINTY_Z",
    "gamma_cdf",
    "gamma_quantile",
    "kl_normal",
    "map_chunks",
    "norm_cdf",
    "norm_quantile",
    "sample_gamma_rate",
    "sample_normal",
    "solve_two_quantile_gamma",
]

T = TypeVar("T")

CHUNK_SIZE = 1 << 16

_UINT64_MAX = (1 << 64) - 1


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed; ``residuals`` holds the last residuals."""

    def __init__(self, message: str, residuals: Sequence[float] = ()):
        super().__init__(message)
        self.residuals = tuple(residuals)


@dataclass(frozen=True)
class NormalParams:
    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise DomainError(f"non-finite normal parameters {self!r}")
        if self.variance <= 0:
            raise DomainError(f"normal variance must be positive, got {self.variance}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class GammaRateParams:
    """Gamma distribution in the shape/rate parameterisation (mean shape/rate)."""

    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise DomainError(f"gamma shape and rate must be positive, got {self!r}")
        if not (math.isfinite(self.shape) and math.isfinite(self.rate)):
            raise DomainError(f"non-finite gamma parameters {self!r}")

    @property
    def mean(self) -> float:
        return self.shape / self.rate


class RandomStream:
    """Reproducible source of variates.

    Two streams built from the same ``(seed, stream_index)`` (and the same
    chunk path) produce bit-identical sequences.  Streams with different
    indices are statistically independent and non-overlapping because the
    index is part of the SeedSequence spawn key.

    The stream is stateful: successive calls continue the sequence.
    """

    def __init__(self, seed: int, stream_index: int = 0, path: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed <= _UINT64_MAX:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if stream_index < 0 or any(p < 0 for p in path):
            raise DomainError("stream indices must be non-negative")
        self.seed = seed
        self.stream_index = int(stream_index)
        self.path = tuple(int(p) for p in path)
        seq = np.random.SeedSequence(seed, spawn_key=(self.stream_index, *self.path))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_index={self.stream_index}, path={self.path})"

    def substream(self, index: int) -> RandomStream:
        """Child stream, independent of this one and of its siblings."""
        return RandomStream(self.seed, self.stream_index, (*self.path, index))

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def standard_gamma(self, shape, size=None):
        # numpy uses Marsaglia-Tsang with the boost for shape < 1
        return self._gen.standard_gamma(shape, size)

    def chisquare(self, df, size=None):
        return 2.0 * self._gen.standard_gamma(df / 2.0, size)

    def uniform(self, size=None):
        return self._gen.random(size)


def map_chunks(
    stream: RandomStream,
    total: int,
    fn: Callable[[RandomStream, int], T],
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> list[T]:
    """Apply ``fn(substream, n)`` to consecutive chunks covering ``total`` draws.

    Chunk ``j`` always receives ``stream.substream(j)`` and the same size, so
    the returned list (in chunk order) is independent of ``workers``.
    """
    if total < 0:
        raise DomainError("total must be non-negative")
    sizes = [min(chunk_size, total - start) for start in range(0, total, chunk_size)]
    jobs = [(stream.substream(j), n) for j, n in enumerate(sizes)]
    if workers <= 1 or len(jobs) <= 1:
        return [fn(s, n) for s, n in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _check_finite(x, name: str):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _scalar_or_array(value: np.ndarray, like):
    return float(value) if np.ndim(like) == 0 else value


def norm_cdf(z):
    """Standard normal CDF.

    ``scipy.special.ndtr`` switches to an erfc evaluation in the tails, so the
    result keeps full relative accuracy far below ``1e-16``.
    """
    arr = _check_finite(z, "z")
    return _scalar_or_array(special.ndtr(arr), z)


def norm_quantile(p):
    """Inverse of :func:`norm_cdf` on the open unit interval."""
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0) & (arr < 1)):
        raise DomainError("p must lie strictly inside (0, 1)")
    return _scalar_or_array(special.ndtri(arr), p)


VIRTUAL_CERTAINTY_Z = float(special.ndtri(0.9995))


def gamma_cdf(params: GammaRateParams, x):
    """Regularised lower incomplete gamma P(shape, rate * x)."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("x must be non-negative")
    return _scalar_or_array(special.gammainc(params.shape, params.rate * arr), x)


def gamma_quantile(params: GammaRateParams, p):
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0) & (arr < 1)):
        raise DomainError("p must lie strictly inside (0, 1)")
    return _scalar_or_array(special.gammaincinv(params.shape, arr) / params.rate, p)


def sample_normal(stream: RandomStream, params: NormalParams, size=None):
    return params.mean + params.sd * stream.standard_normal(size)


def sample_gamma_rate(stream: RandomStream, params: GammaRateParams, size=None):
    return stream.standard_gamma(params.shape, size) / params.rate


def kl_normal(p: NormalParams, q: NormalParams) -> float:
    """KL divergence KL(p || q) between two univariate normals.

    Uses ``log(sd_q / sd_p)``; the opposite sign on the log term can go
    negative and is not a divergence.
    """
    ratio = p.variance / q.variance
    return 0.5 * (ratio - 1.0 - math.log(ratio)) + (p.mean - q.mean) ** 2 / (2.0 * q.variance)


def _log_quantile_ratio(log_shape: float, p_hi: float, p_lo: float) -> float:
    shape = math.exp(log_shape)
    hi = special.gammaincinv(shape, p_hi)
    lo = special.gammaincinv(shape, p_lo)
    if lo <= 0:
        return math.inf
    return math.log(hi) - math.log(lo)


def solve_two_quantile_gamma(
    upper_target: float,
    lower_target: float,
    p_upper: float = 0.9995,
    p_lower: float = 0.0005,
) -> GammaRateParams:
    """Find the gamma(shape, rate) whose ``p_upper``/``p_lower`` quantiles hit the targets.

    The quantile ratio of a gamma law depends on the shape alone and decreases
    strictly from infinity to 1, so the shape is the root of a bracketed
    one-dimensional equation in ``log(shape)``; the rate then follows in
    closed form from the upper quantile.
    """
    if not (0 < lower_target < upper_target) or not math.isfinite(upper_target):
        raise DomainError(
            f"need 0 < lower_target < upper_target, got {lower_target}, {upper_target}"
        )
    target = math.log(upper_target) - math.log(lower_target)

    def residual(log_shape):
        return _log_quantile_ratio(log_shape, p_upper, p_lower) - target

    lo, hi = math.log(1e-3), math.log(1e8)
    r_lo, r_hi = residual(lo), residual(hi)
    if not (r_lo > 0 > r_hi):
        raise ConvergenceError(
            "quantile ratio not bracketed for shape in [1e-3, 1e8]", (r_lo, r_hi)
        )
    try:
        # lower end can be +inf where the lower quantile underflows; brentq
        # needs finite values, so pull the bracket in until it is finite
        while not math.isfinite(r_lo):
            lo += 0.5
            r_lo = residual(lo)
            if lo >= hi:
                raise ConvergenceError("could not find a finite bracket", (r_lo, r_hi))
        log_shape = optimize.brentq(residual, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    except RuntimeError as exc:
        if isinstance(exc, ConvergenceError):
            raise
        raise ConvergenceError(str(exc), (r_lo, r_hi)) from exc
    shape = math.exp(log_shape)
    rate = special.gammaincinv(shape, p_upper) / upper_target
    result = GammaRateParams(shape, rate)
    errs = (
        gamma_quantile(result, p_upper) / upper_target - 1.0,
        gamma_quantile(result, p_lower) / lower_target - 1.0,
    )
    if max(abs(e) for e in errs) > 1e-6:
        raise ConvergenceError("two-quantile solve did not reach 1e-6 relative error", errs)
    return result
