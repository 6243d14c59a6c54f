"""Discrete-time simulator for symmetric uplink/downlink airtime allocation
at a roadside edge server, with contention-based baselines."""

from .engine import FAIR, ALGORITHMS, MetricsLedger, RunSpec, run, sweep
from .scenario import SimConfig
from .trajectory import Scenario, load_csv, synthesize

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "FAIR",
    "MetricsLedger",
    "RunSpec",
    "Scenario",
    "SimConfig",
    "load_csv",
    "run",
    "sweep",
    "synthesize",
]
