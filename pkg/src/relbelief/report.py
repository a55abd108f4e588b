"""Report model and its text, delimited (CSV) and structured (JSON) renderings.

Decision strings are derived from the numeric columns only:

* relative belief rows: ``evidence in favor`` when RB > 1, ``evidence
  against`` when RB < 1, ``no evidence`` when RB = 1 or, for Monte Carlo
  estimates, when ``|RB - 1|`` is below the reported standard error;
* classical rows: ``reject the null`` when ``p < alpha``, else ``fail to
  reject the null``.

Structured output is JSON with keys in the dataclass field order below, so
``Report.from_json(report.to_json()).to_json()`` reproduces the input byte
for byte.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Optional

from .rb import Evidence

__all__ = [
    "Diagnostics",
    "MethodRow",
    "Provenance",
    "Report",
    "classical_decision",
    "emit_report",
    "rb_decision",
]

FORMATS = ("text", "delimited", "structured")

_EVIDENCE_TEXT = {
    Evidence.IN_FAVOR: "evidence in favor",
    Evidence.AGAINST: "evidence against",
    Evidence.NEUTRAL: "no evidence",
}


def rb_decision(rb: float, std_error: Optional[float] = None) -> str:
    return _EVIDENCE_TEXT[Evidence.from_rb(rb, std_error or 0.0)]


def classical_decision(p_value: float, alpha: float) -> str:
    return "reject the null" if p_value < alpha else "fail to reject the null"


@dataclass
class MethodRow:
    method: str
    quantity: str  # "RB" or "p-value"
    value: float
    strength: Optional[float] = None
    std_error: Optional[float] = None
    statistic: Optional[float] = None
    decision: str = ""


@dataclass
class Diagnostics:
    conflict: Optional[float] = None
    conflict_method: Optional[str] = None
    conflict_std_error: Optional[float] = None
    bias_against: Optional[float] = None
    bias_in_favor_upper: Optional[float] = None
    bias_in_favor_lower: Optional[float] = None
    delta: Optional[float] = None
    bias_reps: Optional[int] = None


@dataclass
class Provenance:
    software: str
    version: str
    variant: str
    null_mean: float
    n: int
    mean: float
    sd: float
    hyperparameters: dict
    seed: int
    r1: int
    r2: int
    M: int
    i0: int
    reps: int
    alpha: float
    streams: dict = field(default_factory=dict)


@dataclass
class Report:
    rows: list[MethodRow]
    diagnostics: Diagnostics
    provenance: Provenance

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> Report:
        return cls(
            rows=[MethodRow(**r) for r in d["rows"]],
            diagnostics=Diagnostics(**d["diagnostics"]),
            provenance=Provenance(**d["provenance"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Report:
        return cls.from_dict(json.loads(text))

    def row(self, method: str) -> MethodRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)


def _g(x) -> str:
    return "" if x is None else f"{x:.6g}"


def _delimited(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["section", "name", "value", "secondary", "std_error", "decision"])
    for r in report.rows:
        w.writerow(["method", r.method, _g(r.value), _g(r.strength), _g(r.std_error), r.decision])
    d = report.diagnostics
    w.writerow(["diagnostic", "prior_data_conflict", _g(d.conflict), "", _g(d.conflict_std_error), ""])
    w.writerow(["diagnostic", "bias_against", _g(d.bias_against), "", "", ""])
    w.writerow(
        ["diagnostic", "bias_in_favor", _g(d.bias_in_favor_upper), _g(d.bias_in_favor_lower), "", ""]
    )
    return buf.getvalue()


def _fmt(x, digits=4) -> str:
    return "-" if x is None else f"{x:.{digits}f}"


def _text(report: Report) -> str:
    lines = []
    if report.rows:
        header = f"{'Test':<28}{'Values':<22}Decision"
        lines += [header, "-" * len(header)]
        for r in report.rows:
            label = f"{r.method}: {r.quantity}" + (" (Strength)" if r.strength is not None else "")
            value = _fmt(r.value) if r.value < 1e4 else f"{r.value:.4g}"
            if r.strength is not None:
                value += f" ({_fmt(r.strength)})"
            lines.append(f"{label:<28}{value:<22}{r.decision}")
        lines.append("")
    d = report.diagnostics
    lines.append("Diagnostics")
    conflict = _fmt(d.conflict)
    if d.conflict_method:
        conflict += f" ({d.conflict_method}"
        conflict += f", se {d.conflict_std_error:.4f})" if d.conflict_std_error is not None else ")"
    lines.append(f"  prior-data conflict        {conflict}")
    lines.append(f"  bias against               {_fmt(d.bias_against)}")
    if d.delta is not None:
        p = report.provenance
        lines.append(
            f"  bias in favor              {_fmt(d.bias_in_favor_upper)} (at {p.null_mean + d.delta:g}), "
            f"{_fmt(d.bias_in_favor_lower)} (at {p.null_mean - d.delta:g})"
        )
    p = report.provenance
    hp = ", ".join(f"{k}={v:.6g}" for k, v in p.hyperparameters.items() if v is not None)
    lines += [
        "",
        "Provenance",
        f"  {p.software} {p.version}; variant {p.variant}; H0: mu = {p.null_mean:g}",
        f"  data n={p.n} mean={p.mean:.6g} sd={p.sd:.6g}",
        f"  hyperparameters {hp}",
        f"  seed={p.seed} r1={p.r1} r2={p.r2} M={p.M} i0={p.i0} reps={p.reps} alpha={p.alpha:g}",
    ]
    return "\n".join(lines) + "\n"


def emit_report(report: Report, fmt: str = "text") -> bytes:
    if fmt == "text":
        out = _text(report)
    elif fmt == "delimited":
        out = _delimited(report)
    elif fmt == "structured":
        out = report.to_json()
    else:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    return out.encode("utf-8")
