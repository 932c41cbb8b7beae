"""Experiment harness: sweeps, reproduction cases, persistence, CLI."""

from .cases import CATALOG, CaseReport, Check, case_ids, reproduce
from .gfio import (
    export_csv,
    export_json,
    export_result,
    import_json,
    load_gf,
    save_gf,
)
from .sweep import AXIS_NAMES, ENGINES, SweepResult, SweepSpec, evaluate_point, run_sweep

__all__ = [
    "AXIS_NAMES",
    "CATALOG",
    "CaseReport",
    "Check",
    "ENGINES",
    "SweepResult",
    "SweepSpec",
    "case_ids",
    "evaluate_point",
    "export_csv",
    "export_json",
    "export_result",
    "import_json",
    "load_gf",
    "reproduce",
    "run_sweep",
    "save_gf",
]
