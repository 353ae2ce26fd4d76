"""Discrete-event MAC simulator for adaptive uplink polling in one Wi-Fi BSS."""

from .config import RunConfig, build_config
from .errors import ConfigError
from .mac import Scheme
from .metrics import BoxStats, RunSummary, box_stats
from .runner import (SweepSpec, SummaryRow, default_sweep, read_summary_csv,
                     run_one, run_sweep)
from .sim import Simulation

__version__ = "0.1.0"

__all__ = [
    "BoxStats", "ConfigError", "RunConfig", "RunSummary", "Scheme",
    "Simulation", "SummaryRow", "SweepSpec", "box_stats", "build_config",
    "default_sweep", "read_summary_csv", "run_one", "run_sweep", "__version__",
]
