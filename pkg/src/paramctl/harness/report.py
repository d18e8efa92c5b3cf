"""Aggregation of run records and table/trace writers."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..engine import RunRecord

TABLE_FORMATS = ("csv", "md", "json")

ConfigKey = tuple[float, int, int]


@dataclass(frozen=True)
class CellSummary:
    """Aggregate of the runs of one (controller, problem, k, mu, lambda) cell.

    Means and standard deviations cover successful runs only; the
    success rate says how many that was.
    """

    controller: str
    problem: str
    k: float
    mu: int
    lam: int
    runs: int
    successes: int
    errors: int
    success_rate: float
    mean_generations: float | None
    std_generations: float | None

    @property
    def config(self) -> ConfigKey:
        return (self.k, self.mu, self.lam)


@dataclass(frozen=True)
class Tie:
    problem: str
    k: float
    mu: int
    lam: int
    controllers: tuple[str, ...]


@dataclass
class GridSummary:
    controllers: list[str]
    problems: list[str]
    configs: list[ConfigKey]
    cells: list[CellSummary]
    wins: dict[str, int] = field(default_factory=dict)
    wins_by_problem: dict[str, dict[str, int]] = field(default_factory=dict)
    ties: list[Tie] = field(default_factory=list)
    controller_options: dict[str, dict] = field(default_factory=dict)

    def cell(self, controller: str, problem: str, config: ConfigKey) -> CellSummary | None:
        for c in self.cells:
            if c.controller == controller and c.problem == problem and c.config == tuple(config):
                return c
        return None

    def winners(self, problem: str, config: ConfigKey) -> list[str]:
        """Controllers with the lowest mean generations in one (problem, config) cell."""
        means = {}
        for name in self.controllers:
            c = self.cell(name, problem, config)
            if c is not None and c.mean_generations is not None:
                means[name] = c.mean_generations
        if not means:
            return []
        best = min(means.values())
        return [n for n in self.controllers if means.get(n) == best]

    @property
    def failed_runs(self) -> int:
        return sum(c.errors for c in self.cells)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["configs"] = [list(c) for c in self.configs]
        d["ties"] = [dict(asdict(t), controllers=list(t.controllers)) for t in self.ties]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _mean_std(values: Sequence[int]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


def summarize(records: Iterable[RunRecord]) -> GridSummary:
    """Build a :class:`GridSummary`; row and column order follow first appearance."""
    controllers: list[str] = []
    problems: list[str] = []
    configs: list[ConfigKey] = []
    groups: dict[tuple[str, str, ConfigKey], list[RunRecord]] = {}
    options: dict[str, dict] = {}
    for rec in records:
        options.setdefault(rec.controller, dict(rec.options))
        cfg = (float(rec.k), int(rec.mu), int(rec.lam))
        for seq, item in ((controllers, rec.controller), (problems, rec.problem), (configs, cfg)):
            if item not in seq:
                seq.append(item)
        groups.setdefault((rec.controller, rec.problem, cfg), []).append(rec)

    cells = []
    for cfg in configs:
        for prob in problems:
            for ctrl in controllers:
                recs = groups.get((ctrl, prob, cfg))
                if not recs:
                    continue
                ok = [r.generations for r in recs if r.success]
                mean, std = _mean_std(ok)
                cells.append(
                    CellSummary(
                        controller=ctrl,
                        problem=prob,
                        k=cfg[0],
                        mu=cfg[1],
                        lam=cfg[2],
                        runs=len(recs),
                        successes=len(ok),
                        errors=sum(r.error is not None for r in recs),
                        success_rate=len(ok) / len(recs),
                        mean_generations=mean,
                        std_generations=std,
                    )
                )
    summary = GridSummary(controllers, problems, configs, cells, controller_options=options)
    summary.wins = {c: 0 for c in controllers}
    summary.wins_by_problem = {p: {c: 0 for c in controllers} for p in problems}
    for cfg in configs:
        for prob in problems:
            best = summary.winners(prob, cfg)
            for name in best:
                summary.wins[name] += 1
                summary.wins_by_problem[prob][name] += 1
            if len(best) > 1:
                summary.ties.append(Tie(prob, cfg[0], cfg[1], cfg[2], tuple(best)))
    return summary


# -- run record files -------------------------------------------------------


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def write_records(records: Iterable[RunRecord], path: str | Path) -> Path:
    """One JSON object per line, traces omitted."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            d = {k: _clean(v) for k, v in rec.summary_dict().items()}
            fh.write(json.dumps(d, sort_keys=True) + "\n")
    return path


def read_records(path: str | Path) -> list[RunRecord]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            out.append(
                RunRecord(
                    controller=d["controller"],
                    problem=d["problem"],
                    k=d["k"],
                    mu=d["mu"],
                    lam=d["lambda"],
                    seed=d["seed"],
                    generations=d["generations"],
                    success=d["success"],
                    best_fitness=math.nan if d["best_fitness"] is None else d["best_fitness"],
                    evaluations=d["evaluations"],
                    error=d.get("error"),
                    run=d.get("run", 0),
                    options=d.get("options") or {},
                )
            )
    return out


# -- tables -----------------------------------------------------------------


def _fmt_k(k: float) -> str:
    return f"{k:g}"


def _num(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def _options_text(opts: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in sorted(opts.items()))


def _csv_table(s: GridSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["k", "mu", "lambda"]
    for p in s.problems:
        for c in s.controllers:
            header += [f"{p}:{c}:mean", f"{p}:{c}:std", f"{p}:{c}:success_rate"]
        header.append(f"{p}:best")
    w.writerow(header)
    for cfg in s.configs:
        row = [_fmt_k(cfg[0]), cfg[1], cfg[2]]
        for p in s.problems:
            for c in s.controllers:
                cell = s.cell(c, p, cfg)
                if cell is None:
                    row += ["", "", ""]
                else:
                    row += [_num(cell.mean_generations), _num(cell.std_generations), _num(cell.success_rate)]
            best = s.winners(p, cfg)
            row.append(("tie:" if len(best) > 1 else "") + "|".join(best))
        w.writerow(row)
    wins = ["wins", "", ""]
    for p in s.problems:
        for c in s.controllers:
            wins += [s.wins_by_problem[p][c], "", ""]
        wins.append("")
    w.writerow(wins)
    opts = ["options", "", ""]
    for p in s.problems:
        for c in s.controllers:
            opts += [_options_text(s.controller_options.get(c, {})), "", ""]
        opts.append("")
    w.writerow(opts)
    return buf.getvalue()


def _md_table(s: GridSummary) -> str:
    cols = [(p, c) for p in s.problems for c in s.controllers]
    lines = [
        "| k | mu | lambda | " + " | ".join(f"{p} {c}" for p, c in cols) + " |",
        "|---|---|---|" + "---|" * len(cols),
    ]
    for cfg in s.configs:
        cells = []
        best = {p: s.winners(p, cfg) for p in s.problems}
        for p, c in cols:
            cell = s.cell(c, p, cfg)
            if cell is None or cell.mean_generations is None:
                text = "n/a" if cell is None else f"- (0/{cell.runs})"
            else:
                text = f"{cell.mean_generations:.1f} ± {cell.std_generations:.1f}"
                if cell.successes < cell.runs:
                    text += f" ({cell.successes}/{cell.runs})"
                if c in best[p]:
                    text = f"**{text}**" + ("†" if len(best[p]) > 1 else "")
            cells.append(text)
        lines.append(f"| {_fmt_k(cfg[0])} | {cfg[1]} | {cfg[2]} | " + " | ".join(cells) + " |")
    lines.append("| wins | | | " + " | ".join(str(s.wins_by_problem[p][c]) for p, c in cols) + " |")
    lines += [
        "",
        "Mean ± std of generations to reach the optimum over successful runs; "
        "(s/n) gives the successes when not all runs converged. "
        "Bold marks the best mean per problem and row, † a tie.",
        "",
        "Total wins: " + ", ".join(f"{c}={s.wins[c]}" for c in s.controllers),
        "",
    ]
    for c in s.controllers:
        text = _options_text(s.controller_options.get(c, {}))
        if text:
            lines += [f"{c} options: {text}", ""]
    return "\n".join(lines)


def emit_table(summary: GridSummary, fmt: str = "csv", path: str | Path | None = None) -> str:
    """Render ``summary`` as ``csv``, ``md`` or ``json``; also write it when ``path`` is given."""
    if fmt not in TABLE_FORMATS:
        raise ValueError(f"format must be one of {TABLE_FORMATS}")
    if not summary.cells:
        raise ValueError("empty summary")
    text = {"csv": _csv_table, "md": _md_table, "json": GridSummary.to_json}[fmt](summary)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


# -- traces -----------------------------------------------------------------


def trace_stem(rec: RunRecord) -> str:
    return f"{rec.problem}_{rec.controller}_k{_fmt_k(float(rec.k))}_mu{rec.mu}_lam{rec.lam}_run{rec.run}"


def split_rows(rec: RunRecord) -> list[tuple[int, tuple[float, ...]]]:
    """The split trace expanded to one ``(generation, splits)`` row per generation."""
    events = dict(rec.split_trace)
    current: tuple[float, ...] = events.get(0, ())
    rows = []
    for g in range(rec.generations + 1):
        current = events.get(g, current)
        rows.append((g, current))
    return rows


def emit_traces(records: Iterable[RunRecord], out_dir: str | Path) -> list[Path]:
    """Per run: ``<stem>_sigma.csv`` (generation, sigma, reward) and ``<stem>_splits.csv``.

    The splits file has one row per generation (0 is the initial state)
    and columns ``split_1 .. split_m``; unused columns are left blank.
    ``<stem>_meta.json`` holds the run summary and controller options.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for rec in records:
        stem = trace_stem(rec)
        p = out / f"{stem}_sigma.csv"
        with p.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["generation", "sigma", "reward"])
            for g, (sig, r) in enumerate(zip(rec.sigma_trace, rec.reward_trace), 1):
                w.writerow([g, repr(sig), repr(r)])
        written.append(p)
        rows = split_rows(rec)
        width = max((len(s) for _, s in rows), default=0)
        p = out / f"{stem}_splits.csv"
        with p.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["generation"] + [f"split_{i + 1}" for i in range(width)])
            for g, splits in rows:
                w.writerow([g] + [repr(float(x)) for x in splits] + [""] * (width - len(splits)))
        written.append(p)
        p = out / f"{stem}_meta.json"
        meta = {k: _clean(v) for k, v in rec.summary_dict().items()}
        p.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(p)
    return written
