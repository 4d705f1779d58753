"""``sigflip`` command line.

Exit codes: 0 success, 1 a verdict failed, 2 configuration error,
3 analysis error. Errors are also printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys
import time
from pathlib import Path

from sigflip import analysis, config
from sigflip.errors import AnalysisError, ConfigError

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_ANALYSIS = 0, 1, 2, 3


def _fmt(v) -> str:
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _json_text(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _error(exc: Exception, code: int) -> int:
    payload = exc.payload() if hasattr(exc, "payload") else {"error": type(exc).__name__, "message": str(exc)}
    payload["exit_code"] = code
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sigflip", description="Signature-changing metric toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("analyze", "locate H, classify radicals, write a JSON report"),
        ("transform", "sample gt = g + f Vb Vb on the grid as CSV"),
        ("decompose", "recover f and g from a metric for a chosen V as CSV"),
        ("verify", "run every verdict on a triple, write a JSON report"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("source", nargs="?", help="gallery:NAME or a config path")
        p.add_argument("--config", help="path to a JSON config")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--seed", type=int, help="override the config seed")
        if name in ("analyze", "verify"):
            p.add_argument("--timings", action="store_true", help="record wall-clock timings in the report")
        if name == "decompose":
            p.add_argument("--vector", nargs="+", metavar="EXPR", help="components of V, one expression each")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    source = args.config or args.source
    try:
        if source is None:
            raise ConfigError("give a config path or gallery:NAME")
        cfg = config.load(source)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.command in ("transform", "verify") and cfg.mode != "triple":
            raise ConfigError(f"{args.command} needs mode 'triple', config has {cfg.mode!r}")
        if args.command == "decompose" and cfg.mode != "metric":
            raise ConfigError(f"decompose needs mode 'metric', config has {cfg.mode!r}")
        if args.command == "decompose" and args.vector is not None and len(args.vector) != cfg.dimension:
            raise ConfigError(f"--vector needs {cfg.dimension} components")
    except ConfigError as exc:
        return _error(exc, EXIT_CONFIG)

    start = time.perf_counter()
    try:
        code = EXIT_OK
        if args.command == "analyze":
            report = analysis.run_analyze(cfg)
        elif args.command == "verify":
            report, passed = analysis.run_verify(cfg)
            code = EXIT_OK if passed else EXIT_VERDICT
        elif args.command == "transform":
            _emit(_csv_text(*analysis.transform_table(cfg)), args.out)
            return EXIT_OK
        else:
            _emit(_csv_text(*analysis.decompose_table(cfg, args.vector)), args.out)
            return EXIT_OK
    except ConfigError as exc:
        return _error(exc, EXIT_CONFIG)
    except (AnalysisError, ArithmeticError) as exc:
        return _error(exc, EXIT_ANALYSIS)

    if args.timings:
        report["timings"] = {"total_seconds": time.perf_counter() - start}
    _emit(_json_text(report), args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
