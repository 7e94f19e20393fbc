"""Benchmark harness: configuration, cross-validated grid search, reports and diagrams."""
from .config import ExperimentConfig, load_config
from .diagram import emit_nemenyi_diagram
from .report import emit_tables
from .runner import LearnerResult, RunReport, run_experiment

__all__ = [
    "ExperimentConfig",
    "LearnerResult",
    "RunReport",
    "emit_nemenyi_diagram",
    "emit_tables",
    "load_config",
    "run_experiment",
]
