"""Command line entry point: ``paramctl run | table | trace``.

Exit codes: 0 success, 2 configuration error, 3 some runs crashed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .harness import (
    TABLE_FORMATS,
    ConfigError,
    apply_overrides,
    emit_table,
    emit_traces,
    load_config,
    read_records,
    run_grid,
    summarize,
)
from .harness.grid import RunTask, execute

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3

log = logging.getLogger("paramctl")


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer: {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with 2 on usage errors, which is also the config-error code
    parser = argparse.ArgumentParser(prog="paramctl", description="Online parameter control benchmark for a (mu+lambda) ES.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="YAML grid configuration (defaults: the full grid)")
        p.add_argument("--seed", type=_u64, help="master seed, overrides the config")
        p.add_argument("--controllers", type=_names, help="comma separated subset, e.g. A,Q")
        p.add_argument("--problems", type=_names, help="comma separated subset, e.g. sphere,levi")

    run = sub.add_parser("run", help="run the controller x problem x EA grid")
    common(run)
    run.add_argument("--runs", type=int, help="independent runs per cell")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    run.add_argument("--format", choices=TABLE_FORMATS, default="csv", help="table format")
    run.add_argument("--traces", action="store_true", help="also write per-run trace CSVs")

    table = sub.add_parser("table", help="re-aggregate runs.jsonl into a table")
    table.add_argument("--out", type=Path, default=Path("results"), help="directory holding runs.jsonl")
    table.add_argument("--format", choices=TABLE_FORMATS, default="md", help="table format")

    trace = sub.add_parser("trace", help="one run with full sigma/reward/split traces")
    common(trace)
    trace.add_argument("--controller", default="A")
    trace.add_argument("--problem", default="sphere")
    trace.add_argument("--k", type=float, default=1.0)
    trace.add_argument("--mu", type=int, default=5)
    trace.add_argument("--lambda", dest="lam", type=int, default=7)
    trace.add_argument("--run", type=int, default=0, help="run index, selects the derived seed")
    trace.add_argument("--out", type=Path, default=Path("traces"), help="output directory")
    return parser


def _cmd_run(args) -> int:
    cfg = apply_overrides(
        load_config(args.config),
        seed=args.seed,
        runs=args.runs,
        controllers=args.controllers,
        problems=args.problems,
        traces=True if args.traces else None,
    )
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    summary, _ = run_grid(cfg, jobs=args.jobs, out_dir=args.out, fmt=args.format)
    print(emit_table(summary, "md"))
    if summary.failed_runs:
        log.error("%d run(s) crashed; see 'error' in %s", summary.failed_runs, args.out / "runs.jsonl")
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_table(args) -> int:
    path = args.out / "runs.jsonl"
    if not path.exists():
        raise ConfigError(f"no run records at {path}")
    summary = summarize(read_records(path))
    text = emit_table(summary, args.format, args.out / f"table.{args.format}")
    print(text, end="" if text.endswith("\n") else "\n")
    return EXIT_PARTIAL if summary.failed_runs else EXIT_OK


def _cmd_trace(args) -> int:
    cfg = apply_overrides(
        load_config(args.config),
        seed=args.seed,
        controllers=[args.controller],
        problems=[args.problem],
        k=[args.k],
        mu=[args.mu],
        lam=[args.lam],
        runs=1,
    )
    ea = cfg.ea_configs()[0]
    ce = cfg.controllers[0]
    task = RunTask(0, args.run, ce.name, dict(ce.options), cfg.problems[0], cfg.precision, ea, cfg.rl, cfg.seed, True)
    rec = execute(task)
    files = emit_traces([rec], args.out)
    status = "reached optimum" if rec.success else "did not reach optimum"
    print(f"{rec.controller} on {rec.problem} (k={ea.k:g}, mu={ea.mu}, lambda={ea.lam}): "
          f"{status} after {rec.generations} generations, best f = {rec.best_fitness:.3g}")
    for f in files:
        print(f)
    if rec.error:
        log.error("run crashed: %s", rec.error)
        return EXIT_PARTIAL
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler = {"run": _cmd_run, "table": _cmd_table, "trace": _cmd_trace}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"paramctl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
