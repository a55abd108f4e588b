"""Run configuration: parsing and validation of YAML (or JSON) documents.

A document looks like::

    variant: t                 # t (unknown variance) or z (known variance)
    null_mean: 11
    data:
      summary: {n: 15, mean: 10.7, sd: 3.6}
      # or raw: path/to/values.txt   (one number per line, '#' comments)
    known_sigma: 3.6           # required for variant z
    elicitation: {a: 0, b: 25, gamma: 0.999, s1: 2, s2: 15}
    hyperparameters: {mu0: 12.5, lambda0: 0.83, alpha0: 1.29, beta0: 12.36}
    delta: 0.5
    alpha: 0.05                # level for the classical test only
    mc: {r1: 100000, r2: 100000, M: 20, i0: 1, reps: 100000, seed: 1}

``hyperparameters``, when present, overrides ``elicitation``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from .model import DataSummary, ElicitationInput, Hyperparameters, Variant
from .numerics import DomainError

__all__ = ["ConfigError", "MCSettings", "RunConfig", "load_config", "parse_config", "read_raw_values"]


class ConfigError(ValueError):
    """Invalid run configuration; ``problems`` lists ``(field_path, message)``."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{path}: {msg}" for path, msg in problems))


@dataclass(frozen=True)
class MCSettings:
    r1: int = 100_000
    r2: int = 100_000
    M: int = 20
    i0: int = 1
    reps: int = 100_000
    seed: int = 1


@dataclass(frozen=True)
class RunConfig:
    variant: str
    null_mean: float
    delta: float
    summary: Optional[tuple[int, float, float]] = None
    raw: Optional[Path] = None
    known_sigma: Optional[float] = None
    elicitation: Optional[ElicitationInput] = None
    hyperparameters: Optional[Hyperparameters] = None
    alpha: float = 0.05
    mc: MCSettings = field(default_factory=MCSettings)

    @property
    def model_variant(self) -> Variant:
        return Variant.KNOWN if self.variant == "z" else Variant.UNKNOWN

    @property
    def known_sigma2(self) -> Optional[float]:
        return None if self.known_sigma is None else self.known_sigma**2

    def load_data(self) -> DataSummary:
        s2 = self.known_sigma2 if self.variant == "z" else None
        if self.raw is not None:
            # normalise through (n, mean, sd) so raw and summary inputs agree bit for bit
            d = DataSummary.from_values(read_raw_values(self.raw))
            n, mean, sd = d.n, d.mean, d.sd
        else:
            n, mean, sd = self.summary
        return DataSummary.from_sd(n, mean, sd, s2)

    def with_seed(self, seed: int) -> RunConfig:
        return replace(self, mc=replace(self.mc, seed=seed))


def read_raw_values(path) -> list[float]:
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise DomainError(f"{path}:{lineno}: not a number: {line!r}") from None
    return values


_REQUIRED = ("variant", "null_mean", "data", "delta")


def _number(doc: dict, key: str, path: str, problems, *, positive=False, required=True):
    if key not in doc or doc[key] is None:
        if required:
            problems.append((path, "missing required field"))
        return None
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        problems.append((path, f"expected a finite number, got {value!r}"))
        return None
    if positive and value <= 0:
        problems.append((path, f"must be positive, got {value}"))
        return None
    return float(value)


def _integer(doc: dict, key: str, path: str, default: int, problems, minimum: int = 1):
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        problems.append((path, f"expected an integer >= {minimum}, got {value!r}"))
        return default
    return value


def _section(doc: dict, key: str, problems) -> Optional[dict]:
    value = doc.get(key)
    if value is None:
        return None
    if not isinstance(value, dict):
        problems.append((key, "expected a mapping"))
        return None
    return value


def parse_config(text: str, base_dir=None) -> RunConfig:
    """Parse and validate a configuration document, collecting every problem."""
    try:
        doc = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError([("<document>", f"malformed document: {exc}")]) from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError([("<document>", "top level must be a mapping")])
    problems: list[tuple[str, str]] = []
    for key in _REQUIRED:
        if key not in doc:
            problems.append((key, "missing required field"))
    if "elicitation" not in doc and "hyperparameters" not in doc:
        problems.append(("elicitation|hyperparameters", "one of these is required"))

    variant = doc.get("variant")
    if "variant" in doc and variant not in ("z", "t"):
        problems.append(("variant", f"expected 'z' or 't', got {variant!r}"))
        variant = None

    null_mean = _number(doc, "null_mean", "null_mean", problems, required=False)
    delta = _number(doc, "delta", "delta", problems, positive=True, required=False)
    known_sigma = _number(doc, "known_sigma", "known_sigma", problems, positive=True, required=False)
    alpha = _number(doc, "alpha", "alpha", problems, required=False)
    if alpha is None:
        alpha = 0.05
    elif not 0 < alpha < 1:
        problems.append(("alpha", f"must lie in (0, 1), got {alpha}"))
    if variant == "z" and known_sigma is None:
        problems.append(("known_sigma", "variant z requires known_sigma"))

    summary, raw = None, None
    data = _section(doc, "data", problems)
    if data is not None:
        if "summary" in data and "raw" in data:
            problems.append(("data.summary", "conflicts with data.raw; give exactly one"))
            problems.append(("data.raw", "conflicts with data.summary; give exactly one"))
        elif "summary" in data:
            sdoc = data["summary"]
            if not isinstance(sdoc, dict):
                problems.append(("data.summary", "expected a mapping"))
            else:
                n = sdoc.get("n")
                if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                    problems.append(("data.summary.n", f"expected a positive integer, got {n!r}"))
                mean = _number(sdoc, "mean", "data.summary.mean", problems)
                sd = _number(sdoc, "sd", "data.summary.sd", problems)
                if sd is not None and sd < 0:
                    problems.append(("data.summary.sd", "must be non-negative"))
                if not any(p.startswith("data.summary") for p, _ in problems):
                    summary = (n, mean, sd)
        elif "raw" in data:
            raw = Path(str(data["raw"]))
            if base_dir is not None and not raw.is_absolute():
                raw = Path(base_dir) / raw
        else:
            problems.append(("data", "needs either 'summary' or 'raw'"))

    elicitation = None
    edoc = _section(doc, "elicitation", problems)
    if edoc is not None:
        a = _number(edoc, "a", "elicitation.a", problems)
        b = _number(edoc, "b", "elicitation.b", problems)
        gamma = _number(edoc, "gamma", "elicitation.gamma", problems, required=False)
        s1 = _number(edoc, "s1", "elicitation.s1", problems, positive=True, required=variant == "t")
        s2 = _number(edoc, "s2", "elicitation.s2", problems, positive=True, required=variant == "t")
        if not any(p.startswith("elicitation") for p, _ in problems):
            try:
                elicitation = ElicitationInput(a, b, 0.999 if gamma is None else gamma, s1, s2)
            except DomainError as exc:
                problems.append(("elicitation", str(exc)))

    hyper = None
    hdoc = _section(doc, "hyperparameters", problems)
    if hdoc is not None:
        mu0 = _number(hdoc, "mu0", "hyperparameters.mu0", problems)
        lambda0 = _number(hdoc, "lambda0", "hyperparameters.lambda0", problems, positive=True)
        need_gamma = variant == "t"
        alpha0 = _number(hdoc, "alpha0", "hyperparameters.alpha0", problems, positive=True, required=need_gamma)
        beta0 = _number(hdoc, "beta0", "hyperparameters.beta0", problems, positive=True, required=need_gamma)
        if variant == "z" and (alpha0 is not None or beta0 is not None):
            problems.append(("hyperparameters", "alpha0/beta0 are not used by variant z"))
        elif variant is not None and not any(p.startswith("hyperparameters") for p, _ in problems):
            v = Variant.KNOWN if variant == "z" else Variant.UNKNOWN
            hyper = Hyperparameters(mu0, lambda0, alpha0, beta0, v)

    mc = MCSettings()
    mdoc = _section(doc, "mc", problems)
    if mdoc is not None:
        unknown = set(mdoc) - {"r1", "r2", "M", "i0", "reps", "seed"}
        for key in sorted(unknown):
            problems.append((f"mc.{key}", "unknown field"))
        mc = MCSettings(
            r1=_integer(mdoc, "r1", "mc.r1", mc.r1, problems),
            r2=_integer(mdoc, "r2", "mc.r2", mc.r2, problems),
            M=_integer(mdoc, "M", "mc.M", mc.M, problems),
            i0=_integer(mdoc, "i0", "mc.i0", mc.i0, problems),
            reps=_integer(mdoc, "reps", "mc.reps", mc.reps, problems),
            seed=_integer(mdoc, "seed", "mc.seed", mc.seed, problems, minimum=0),
        )
        if not 0 < mc.i0 / mc.M <= 0.25:
            problems.append(("mc.i0", f"i0/M must lie in (0, 0.25], got {mc.i0}/{mc.M}"))

    if problems:
        raise ConfigError(problems)
    return RunConfig(
        variant=variant,
        null_mean=null_mean,
        delta=delta,
        summary=summary,
        raw=raw,
        known_sigma=known_sigma,
        elicitation=elicitation,
        hyperparameters=hyper,
        alpha=alpha,
        mc=mc,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)
