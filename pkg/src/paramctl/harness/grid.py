"""Parallel, seed-deterministic execution of the controller x problem x EA grid."""

from __future__ import annotations

import hashlib
import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

from ..controllers import RLParams, make_controller
from ..core import RngStream
from ..engine import EaConfig, RunRecord, run_to_optimum
from .config import GridConfig, ProblemEntry
from .report import GridSummary, emit_table, emit_traces, summarize, write_records

log = logging.getLogger(__name__)


def derive_seed(master: int, *parts: object) -> int:
    """64-bit seed from the master seed and a cell/run identity.

    Seeds depend on what a run *is*, not on its position in the work
    list, so a sub-grid reproduces the matching runs of the full grid.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(str(master).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(repr(part).encode())
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RunTask:
    """Everything one worker needs to execute one run."""

    index: int
    run: int
    controller: str
    options: Mapping
    problem: ProblemEntry
    precision: float
    ea: EaConfig
    rl: RLParams
    master_seed: int
    record_traces: bool = False

    @property
    def engine_seed(self) -> int:
        # shared by all controllers for the same (problem, config, run):
        # identical initial populations across the compared controllers
        return derive_seed(self.master_seed, "engine", self.problem.name, self.ea.k, self.ea.mu, self.ea.lam, self.run)

    @property
    def controller_seed(self) -> int:
        return derive_seed(
            self.master_seed, "controller", self.controller, self.problem.name,
            self.ea.k, self.ea.mu, self.ea.lam, self.run,
        )


def build_tasks(cfg: GridConfig) -> list[RunTask]:
    """Work items in table order: EA row, then problem, controller, run."""
    tasks = []
    for ea in cfg.ea_configs():
        for prob in cfg.problems:
            for ce in cfg.controllers:
                for r in range(cfg.runs):
                    tasks.append(
                        RunTask(len(tasks), r, ce.name, dict(ce.options), prob, cfg.precision,
                                ea, cfg.rl, cfg.seed, cfg.traces)
                    )
    return tasks


def effective_options(options: Mapping, ctrl) -> dict:
    """Configured options plus the clustering feature actually used, when there is one."""
    out = dict(options)
    if hasattr(ctrl, "cluster_on"):
        out.setdefault("cluster_on", ctrl.cluster_on)
    return out


def execute(task: RunTask) -> RunRecord:
    """Run one task; any exception becomes a failed record instead of propagating."""
    try:
        problem = task.problem.instance(task.precision)
        ctrl = make_controller(task.controller, [task.ea.sigma_spec()], task.rl, **dict(task.options))
        rec = run_to_optimum(
            task.ea,
            problem,
            ctrl,
            RngStream(task.engine_seed, 0),
            RngStream(task.controller_seed, 1),
            seed=task.engine_seed,
            record_traces=task.record_traces,
        )
        rec.run = task.run
        rec.options = effective_options(task.options, ctrl)
        return rec
    except Exception as exc:  # noqa: BLE001 - a crashing run must not stop the grid
        log.error("run %d (%s on %s) failed: %s", task.index, task.controller, task.problem.name, exc)
        return RunRecord(
            controller=task.controller,
            problem=task.problem.name,
            k=task.ea.k,
            mu=task.ea.mu,
            lam=task.ea.lam,
            seed=task.engine_seed,
            generations=0,
            success=False,
            best_fitness=float("nan"),
            evaluations=0,
            error="".join(traceback.format_exception_only(type(exc), exc)).strip(),
            run=task.run,
            options=dict(task.options),
        )


def iter_records(tasks: list[RunTask], jobs: int = 1) -> Iterator[RunRecord]:
    """Yield records in task order whatever the worker count."""
    if jobs <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield execute(t)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map() preserves submission order, so output never depends on scheduling
        yield from pool.map(execute, tasks, chunksize=1)


def run_grid(
    cfg: GridConfig, jobs: int = 1, out_dir: str | Path | None = None, fmt: str = "csv"
) -> tuple[GridSummary, list[RunRecord]]:
    """Execute every run of the grid and aggregate.

    With ``out_dir`` the records (``runs.jsonl``), the summary
    (``summary.json``), the table (``table.<fmt>``) and, when the config
    asks for them, per-run traces (``traces/``) are written there.
    """
    tasks = build_tasks(cfg)
    log.info("running %d runs with %d worker(s)", len(tasks), jobs)
    records = []
    for i, rec in enumerate(iter_records(tasks, jobs), 1):
        records.append(rec)
        if i % 50 == 0 or i == len(tasks):
            log.info("%d/%d runs done", i, len(tasks))
    summary = summarize(records)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_records(records, out / "runs.jsonl")
        (out / "summary.json").write_text(summary.to_json(), encoding="utf-8")
        emit_table(summary, fmt, out / f"table.{fmt}")
        if cfg.traces:
            emit_traces(records, out / "traces")
    return summary, records
