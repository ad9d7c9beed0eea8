"""Experiment harness: configs, runners, report writers, and the CLI."""

from .config import ExperimentConfig, resolve_model
from .experiments import (
    AcceptanceResult,
    CoverageReport,
    EquivalenceReport,
    ThroughputResult,
    bootstrap_mean_ci,
    resolve_prompts,
    run_acceptance,
    run_coverage,
    run_equivalence,
    run_throughput,
)

__all__ = [
    "AcceptanceResult",
    "CoverageReport",
    "EquivalenceReport",
    "ExperimentConfig",
    "ThroughputResult",
    "bootstrap_mean_ci",
    "resolve_model",
    "resolve_prompts",
    "run_acceptance",
    "run_coverage",
    "run_equivalence",
    "run_throughput",
]
