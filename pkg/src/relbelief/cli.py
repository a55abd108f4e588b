"""Command-line interface.

::

    relbelief test  --config fixtures/dental.yaml [--seed N] [--format text|delimited|structured] [--out PATH]
    relbelief elicit --config fixtures/dental.yaml
    relbelief check --config fixtures/dental.yaml
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .pipeline import PipelineError, elicit, hyperparameters_table, run_check, run_pipeline
from .report import FORMATS, emit_report


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relbelief", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("test", "run the full pipeline"),
        ("elicit", "print elicited hyperparameters"),
        ("check", "prior-data conflict and bias only"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--seed", type=_u64, help="override mc.seed")
        p.add_argument("--format", choices=FORMATS, default="text")
        p.add_argument("--out", type=Path, help="write here instead of stdout")
        p.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo chunks")
    return parser


def _elicit_output(hp, fmt: str) -> bytes:
    table = hyperparameters_table(hp)
    if fmt == "structured":
        return (json.dumps(table, indent=2) + "\n").encode()
    if fmt == "delimited":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value"])
        for k, v in table.items():
            w.writerow([k, v if isinstance(v, str) else f"{v:.6g}"])
        return buf.getvalue().encode()
    return "".join(
        f"{k:<10}{v if isinstance(v, str) else f'{v:.6g}'}\n" for k, v in table.items()
    ).encode()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = config.with_seed(args.seed)
        if args.command == "elicit":
            out = _elicit_output(elicit(config), args.format)
        elif args.command == "check":
            out = emit_report(run_check(config, args.workers), args.format)
        else:
            out = emit_report(run_pipeline(config, args.workers), args.format)
    except ConfigError as exc:
        for path, msg in exc.problems:
            print(f"config error: {path}: {msg}", file=sys.stderr)
        return 2
    except (PipelineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        args.out.write_bytes(out)
    else:
        sys.stdout.buffer.write(out)
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
