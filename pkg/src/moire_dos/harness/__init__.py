"""Configuration-driven convergence experiments."""

from .config import ExperimentConfig, SweepSpec, load_config, parse_config
from .diagnostics import ErgodicityResult, ergodicity_diagnostic
from .fitting import InsufficientPointsError, RateFit, fit_rate, fit_records
from .output import emit_outputs, read_records, write_records
from .sweep import ConvergenceRecord, RECORD_FIELDS, run_sweep

__all__ = [
    "ExperimentConfig", "SweepSpec", "load_config", "parse_config", "ErgodicityResult",
    "ergodicity_diagnostic", "InsufficientPointsError", "RateFit", "fit_rate", "fit_records",
    "emit_outputs", "read_records", "write_records", "ConvergenceRecord", "RECORD_FIELDS",
    "run_sweep",
]
