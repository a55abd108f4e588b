"""End-to-end runs: elicit, check the prior, test, and compare with the classical test.

Every stochastic step draws from ``RandomStream(mc.seed, k)`` with a fixed
sub-stream index ``k``:

==  ==========================================
0   prior distance sample (distance test)
1   posterior distance sample (distance test)
2   prior-data conflict
3   bias against
4   bias in favor at ``mu1 + delta``
5   bias in favor at ``mu1 - delta``
6   Monte Carlo strength of the direct test
==  ==========================================
"""

from __future__ import annotations

import math

from . import __version__
from .baselines import t_test, z_test
from .config import RunConfig
from .diagnostics import bias_report, conflict_known_variance, conflict_unknown_variance
from .model import DataSummary, Hyperparameters, Variant, elicit_known_variance, elicit_unknown_variance
from .numerics import RandomStream
from .rb import (
    KLTestConfig,
    direct_rb,
    direct_strength_known,
    direct_strength_unknown,
    run_kl_rb_test,
)
from .report import Diagnostics, MethodRow, Provenance, Report, classical_decision, rb_decision

__all__ = ["PipelineError", "STREAMS", "elicit", "run_check", "run_pipeline"]

STREAMS = {
    "prior_distance": 0,
    "posterior_distance": 1,
    "conflict": 2,
    "bias_against": 3,
    "bias_in_favor_upper": 4,
    "bias_in_favor_lower": 5,
    "direct_strength": 6,
}


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


class _stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError) and isinstance(exc, Exception):
            raise PipelineError(self.name, exc) from exc
        return False


def elicit(config: RunConfig) -> Hyperparameters:
    """Elicited hyperparameters (ignores any explicit override)."""
    if config.elicitation is None:
        raise PipelineError("elicitation", ValueError("configuration has no elicitation block"))
    with _stage("elicitation"):
        if config.model_variant is Variant.KNOWN:
            return elicit_known_variance(config.elicitation, config.known_sigma)
        return elicit_unknown_variance(config.elicitation)


def _hyperparameters(config: RunConfig) -> Hyperparameters:
    if config.hyperparameters is not None:
        return config.hyperparameters
    return elicit(config)


def _diagnostics(config: RunConfig, hp: Hyperparameters, data: DataSummary, workers: int) -> Diagnostics:
    mc = config.mc
    with _stage("conflict"):
        if hp.variant is Variant.KNOWN:
            conflict = conflict_known_variance(hp, data)
        else:
            conflict = conflict_unknown_variance(
                RandomStream(mc.seed, STREAMS["conflict"]), hp, data, mc.reps, workers
            )
    with _stage("bias"):
        bias = bias_report(
            mc.seed, hp, config.null_mean, config.delta, data.n, mc.reps,
            sigma2=data.known_sigma2, workers=workers,
            streams=(STREAMS["bias_against"], STREAMS["bias_in_favor_upper"], STREAMS["bias_in_favor_lower"]),
        )
    return Diagnostics(
        conflict=conflict.tail_probability,
        conflict_method=conflict.method.value,
        conflict_std_error=conflict.mc_std_error,
        bias_against=bias.bias_against,
        bias_in_favor_upper=bias.bias_in_favor_upper,
        bias_in_favor_lower=bias.bias_in_favor_lower,
        delta=config.delta,
        bias_reps=bias.reps,
    )


def _provenance(config: RunConfig, hp: Hyperparameters, data: DataSummary) -> Provenance:
    mc = config.mc
    return Provenance(
        software="relbelief",
        version=__version__,
        variant=config.variant,
        null_mean=config.null_mean,
        n=data.n,
        mean=data.mean,
        sd=data.sd,
        hyperparameters={"mu0": hp.mu0, "lambda0": hp.lambda0, "alpha0": hp.alpha0, "beta0": hp.beta0},
        seed=mc.seed,
        r1=mc.r1,
        r2=mc.r2,
        M=mc.M,
        i0=mc.i0,
        reps=mc.reps,
        alpha=config.alpha,
        streams=dict(STREAMS),
    )


def run_pipeline(config: RunConfig, workers: int = 1) -> Report:
    """Full run; rows are ordered distance RB, direct RB, classical test."""
    with _stage("data"):
        data = config.load_data()
    hp = _hyperparameters(config)
    mc = config.mc
    diagnostics = _diagnostics(config, hp, data, workers)

    with _stage("distance test"):
        kl_cfg = KLTestConfig(mc.r1, mc.r2, mc.M, mc.i0, mc.seed)
        kl, _ = run_kl_rb_test(hp, data, config.null_mean, kl_cfg, workers)
    rows = [
        MethodRow(
            "Distance", "RB", kl.rb, kl.strength, kl.rb_std_error,
            decision=rb_decision(kl.rb, kl.rb_std_error),
        )
    ]

    with _stage("direct test"):
        rb = direct_rb(hp, data, config.null_mean)
        if hp.variant is Variant.KNOWN:
            strength = direct_strength_known(hp, data, config.null_mean)
        else:
            strength = direct_strength_unknown(
                RandomStream(mc.seed, STREAMS["direct_strength"]), hp, data, config.null_mean, mc.reps, workers
            )
    rows.append(MethodRow("Direct", "RB", rb, strength, decision=rb_decision(rb)))

    with _stage("classical test"):
        if config.variant == "z":
            res, name = z_test(data, config.null_mean, config.known_sigma), "z-test"
        else:
            res, name = t_test(data, config.null_mean), "t-test"
    rows.append(
        MethodRow(
            name, "p-value", res.p_value, statistic=res.statistic,
            decision=classical_decision(res.p_value, config.alpha),
        )
    )
    return Report(rows, diagnostics, _provenance(config, hp, data))


def run_check(config: RunConfig, workers: int = 1) -> Report:
    """Conflict and bias diagnostics only."""
    with _stage("data"):
        data = config.load_data()
    hp = _hyperparameters(config)
    return Report([], _diagnostics(config, hp, data, workers), _provenance(config, hp, data))


def hyperparameters_table(hp: Hyperparameters) -> dict:
    out = {"variant": hp.variant.value, "mu0": hp.mu0, "lambda0": hp.lambda0}
    if hp.variant is Variant.UNKNOWN:
        out.update(alpha0=hp.alpha0, beta0=hp.beta0)
    return {k: (v if not isinstance(v, float) or math.isfinite(v) else None) for k, v in out.items()}
