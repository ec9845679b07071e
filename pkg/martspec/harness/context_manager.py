"""
Module for the context of one experiment run.
"""

from __future__ import annotations

import logging
import os
from typing import Any, Optional

from ..file_io import ensure_directory
from ..log_config import configure_logging
from .experiment_config import ExperimentConfig, check_config


class ExperimentContext:
    """
    Context for running one experiment. Contains
    - the validated config
    - logger object
    - output directory
    - failed (size, seed) cells
    - assertion outcomes
    """

    config: ExperimentConfig
    logger: logging.Logger
    out_dir: str
    failed_cells: list[dict[str, Any]]
    assertions: list[dict[str, Any]]
    exit_flag: bool

    def __init__(self, config: ExperimentConfig, **kwargs) -> None:
        self.config = config
        self.out_dir = kwargs.get("out_dir", config.output)
        self.failed_cells = []
        self.assertions = []
        self.exit_flag = False
        ensure_directory(self.out_dir)
        self.logger = kwargs.get(
            "logger",
            configure_logging(
                log_path=kwargs.get("log_path", self.out_dir),
                filename=kwargs.get("log_filename", f"{config.verb.value}.log"),
                level=kwargs.get("log_level", logging.ERROR),
            ),
        )

    def __enter__(self) -> ExperimentContext:
        return self

    def __exit__(self, *exc_info: Any) -> None:
        for handler in self.logger.handlers:
            handler.flush()

    def path(self, filename: str) -> str:
        """A file in the output directory."""
        return os.path.join(self.out_dir, filename)

    def start_new_log(self) -> None:
        """Log the experiment about to run."""
        config = self.config
        short_hash = config.config_hash()[:12]
        msg = f"running {config.verb.value} (config {short_hash})"
        msg += f"\ngenerator: {config.generator.value} "
        msg += f"{config.generator_params}"
        msg += f"\nensemble: {config.ensemble.value}"
        msg += f"\nsizes: {config.sizes}, seeds: {config.seeds}"
        if config.limit_law:
            msg += f"\nlimit law: {config.limit_law}"
        for k, metric in enumerate(config.metrics):
            msg += f"\n{k}: {metric.value}"
        self.logger.info(msg)
        check_config(config, self.logger)

    def record_failure(self, size: int, seed: int, error: str) -> None:
        """Mark a (size, seed) cell as failed."""
        self.failed_cells.append({"size": size, "seed": seed, "error": error})
        self.logger.warning(f"FAILED (n={size}, seed={seed}): {error}")

    def check_assertion(
        self,
        name: str,
        value: float,
        threshold: float,
        size: Optional[int] = None,
        statistic: str = "median",
    ) -> bool:
        """Record whether value <= threshold."""
        passed = bool(value <= threshold)
        self.assertions.append(
            {
                "name": name,
                "size": size,
                "statistic": statistic,
                "value": value,
                "threshold": threshold,
                "passed": passed,
            }
        )
        level = logging.INFO if passed else logging.WARNING
        where = "" if size is None else f" at n={size}"
        self.logger.log(
            level,
            f"ASSERT {name}{where}: {statistic} {value:.6g} <= {threshold:.6g}"
            + (" passed" if passed else " FAILED"),
        )
        return passed

    def check_flag(
        self, name: str, passed: bool, size: Optional[int] = None
    ) -> bool:
        """Record a pass/fail check with no numeric threshold."""
        return self.check_assertion(
            name, 0.0 if passed else 1.0, 0.0, size=size, statistic="all"
        )

    @property
    def ok(self) -> bool:
        """True when no cell failed and every assertion passed."""
        return not self.failed_cells and all(
            a["passed"] for a in self.assertions
        )

    def exit_msg(self, description: str) -> str:
        """Returns an exit message."""
        msg = f"EXIT({self.config.verb.value}): {description} "
        msg += f"(failed cells: {len(self.failed_cells)}, "
        failed = sum(not a["passed"] for a in self.assertions)
        msg += f"failed assertions: {failed})"
        return msg

    def log_exit(self, description: str, level: int = logging.INFO) -> None:
        """Log an exit message."""
        self.logger.log(level, self.exit_msg(description))
        self.exit_flag = True

    def log_good_exit(self, description: str) -> None:
        """Log a good exit message."""
        self.log_exit(description, logging.INFO)

    def log_bad_exit(self, description: str) -> None:
        """Log a bad exit message."""
        self.log_exit(description, logging.WARNING)
