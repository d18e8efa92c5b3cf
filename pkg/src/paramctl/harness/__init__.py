"""Benchmark grid: configuration, parallel execution, tables and traces."""

from .config import ConfigError, ControllerEntry, GridConfig, ProblemEntry, apply_overrides, config_from_dict, load_config
from .grid import RunTask, build_tasks, derive_seed, execute, run_grid
from .report import (
    TABLE_FORMATS,
    CellSummary,
    GridSummary,
    Tie,
    emit_table,
    emit_traces,
    read_records,
    split_rows,
    summarize,
    write_records,
)

__all__ = [
    "CellSummary",
    "ConfigError",
    "ControllerEntry",
    "GridConfig",
    "GridSummary",
    "ProblemEntry",
    "RunTask",
    "TABLE_FORMATS",
    "Tie",
    "apply_overrides",
    "build_tasks",
    "config_from_dict",
    "derive_seed",
    "emit_table",
    "emit_traces",
    "execute",
    "load_config",
    "read_records",
    "run_grid",
    "split_rows",
    "summarize",
    "write_records",
]
