"""Tail-risk calibration of trajectory uncertainty models."""
from __future__ import annotations

from .config import ExperimentConfig, IngestSchema, build_config, load_config
from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .experiments import RunResult, run_experiment
from .export import export_tube
from .ingest import IngestReport, ingest_scenarios, read_scenarios, write_scenarios

__all__ = [
    *_core_all,
    "ExperimentConfig",
    "IngestReport",
    "IngestSchema",
    "RunResult",
    "build_config",
    "export_tube",
    "ingest_scenarios",
    "load_config",
    "read_scenarios",
    "run_experiment",
    "write_scenarios",
]
