"""Classical two-sided one-sample z- and t-tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .model import DataSummary
from .numerics import DomainError, norm_cdf

__all__ = ["ClassicalResult", "t_cdf", "t_sf", "t_test", "z_test"]


@dataclass(frozen=True)
class ClassicalResult:
    statistic: float
    p_value: float
    df: Optional[int] = None

    def rejects(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


def t_sf(t, df):
    """Upper tail P(T_df > t) through the regularised incomplete beta function.

    ``P(|T| > |t|) = I_{df/(df + t^2)}(df/2, 1/2)``; evaluating the tail
    directly keeps relative accuracy for small p-values.
    """
    t = np.asarray(t, dtype=float)
    two_sided = special.betainc(df / 2.0, 0.5, df / (df + t * t))
    out = np.where(t >= 0, 0.5 * two_sided, 1.0 - 0.5 * two_sided)
    return float(out) if out.ndim == 0 else out


def t_cdf(t, df):
    t = np.asarray(t, dtype=float)
    out = t_sf(-t, df)
    return float(out) if np.ndim(out) == 0 else out


def z_test(data: DataSummary, mu1: float, sigma: float) -> ClassicalResult:
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    z = (data.mean - mu1) / (sigma / math.sqrt(data.n))
    return ClassicalResult(z, 2.0 * norm_cdf(-abs(z)))


def t_test(data: DataSummary, mu1: float) -> ClassicalResult:
    if data.n < 2:
        raise DomainError("the t-test needs n >= 2")
    if data.sample_variance <= 0:
        raise DomainError("the t-test needs a positive sample standard deviation")
    df = data.n - 1
    t = (data.mean - mu1) / (data.sd / math.sqrt(data.n))
    p = special.betainc(df / 2.0, 0.5, df / (df + t * t))
    return ClassicalResult(t, float(p), df)
