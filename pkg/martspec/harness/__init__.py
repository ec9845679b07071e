"""HARNESS

This subpackage contains the experiment front end: validated YAML configs,
the run context, the (size, seed) sweep with its worker pool, run reports,
Wachter Q-Q data and the command-line interface.
"""

from .cli import main
from .context_manager import ExperimentContext
from .experiment_config import (
    Ensemble,
    ExperimentConfig,
    Generator,
    LimitLaw,
    Metric,
    Verb,
    build_config,
    check_config,
    load_document,
)
from .qq import qq_data, qq_max_gap
from .run import RunReport, run, run_cell

__all__ = [
    "Ensemble",
    "ExperimentConfig",
    "ExperimentContext",
    "Generator",
    "LimitLaw",
    "Metric",
    "RunReport",
    "Verb",
    "build_config",
    "check_config",
    "load_document",
    "main",
    "qq_data",
    "qq_max_gap",
    "run",
    "run_cell",
]
