"""
Module for configuring experiments.

An experiment config is a YAML file with a top-level schema_version and one
section per CLI verb. Every section is validated against a JSON schema in
which unknown keys are errors; enumerated choices are Enum classes, and
check_config rejects incompatible combinations.
"""

from __future__ import annotations

import hashlib
import logging
from copy import deepcopy
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import jsonschema
import yaml

from ..file_io import canonical_json
from ..log_config import get_logger

VERSION = "0.1.0"
SCHEMA_VERSION = 1


class Verb(Enum):
    """
    Enumeration of experiment pipelines, one per CLI verb.

    Attributes:
        WIGNER: ESD of the normalized symmetric matrix vs a limit law.
        COVARIANCE: ESD of the sample covariance (or block) matrix.
        LIMIT_CURVE: curves of a limit law and its Stieltjes inversion.
        SWAP_DIAGNOSTIC: Lindeberg swap and derivative diagnostics.
        CONDITIONS: Lindeberg, variance and truncation functionals.
        QQ: Wachter Q-Q data of ordered eigenvalues against a law.
    """

    WIGNER = "wigner"
    COVARIANCE = "covariance"
    LIMIT_CURVE = "limit-curve"
    SWAP_DIAGNOSTIC = "swap-diagnostic"
    CONDITIONS = "conditions"
    QQ = "qq"


class Generator(Enum):
    """
    Enumeration of entry generators.

    Attributes:
        GAUSSIAN: independent standard Gaussian entries.
        ARCH: the nonlinear ARCH random field.
        MARTINGALE_FILL: an ARCH(1) sequence placed in lex order.
        PANEL: independent ARCH(1) rows.
        VARIANCE_PROFILE: Gaussian entries with variances a_i^2 a_j^2.
    """

    GAUSSIAN = "gaussian"
    ARCH = "arch"
    MARTINGALE_FILL = "martingale-fill"
    PANEL = "panel"
    VARIANCE_PROFILE = "variance-profile"


class Ensemble(Enum):
    """
    Enumeration of matrix ensembles.

    Attributes:
        WIGNER: X_n / sqrt(n).
        COVARIANCE: X X^T / n.
        SYMMETRIZED: the block matrix B_N.
    """

    WIGNER = "wigner"
    COVARIANCE = "covariance"
    SYMMETRIZED = "symmetrized"


class LimitLaw(Enum):
    """
    Enumeration of limit laws.

    Attributes:
        SEMICIRCLE: the semicircle law.
        MP: the Marchenko-Pastur law; the ratio defaults to p / n.
        VARIANCE_PROFILE: the limit driven by a measure nu.
    """

    SEMICIRCLE = "semicircle"
    MP = "mp"
    VARIANCE_PROFILE = "variance-profile"


class Metric(Enum):
    """
    Enumeration of per-record metrics.

    Attributes:
        LEVY: Levy distance between the ESD and the limit law.
        KOLMOGOROV: Kolmogorov distance between the ESD and the limit law.
        LINDEBERG: the empirical Lindeberg sum at lindeberg_eps.
        VARIANCE_DEVIATION: normalized deviation from unit variances.
        VARIANCE_BOUND: normalized sum of variances.
        STIELTJES_GAP: max |S_n(z) - S(z)| over z_points.
    """

    LEVY = "levy"
    KOLMOGOROV = "kolmogorov"
    LINDEBERG = "lindeberg"
    VARIANCE_DEVIATION = "variance-deviation"
    VARIANCE_BOUND = "variance-bound"
    STIELTJES_GAP = "stieltjes-gap"


TRIANGULAR_GENERATORS = {
    Generator.GAUSSIAN,
    Generator.ARCH,
    Generator.MARTINGALE_FILL,
    Generator.VARIANCE_PROFILE,
}
RECTANGULAR_GENERATORS = {Generator.GAUSSIAN, Generator.PANEL}

GENERATOR_PARAMS: dict[Generator, set[str]] = {
    Generator.GAUSSIAN: set(),
    Generator.ARCH: {
        "c",
        "rho",
        "alpha_tot",
        "window",
        "burn_in",
        "shape",
        "calibration_samples",
    },
    Generator.MARTINGALE_FILL: {"omega", "beta", "burn_in"},
    Generator.PANEL: {"omega", "beta", "burn_in"},
    Generator.VARIANCE_PROFILE: {"distribution", "low", "high", "values"},
}

_COMPLEX_POINT = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
}

SECTION_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "generator": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": [g.value for g in Generator]},
                "params": {"type": "object"},
            },
        },
        "ensemble": {"enum": [e.value for e in Ensemble]},
        "sizes": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 1,
        },
        "ratio": {"type": "number", "exclusiveMinimum": 0},
        "p": {"type": "integer", "minimum": 1},
        "seeds": {
            "type": "array",
            "items": {"type": "integer", "minimum": 0},
            "minItems": 1,
        },
        "limit_law": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": [law.value for law in LimitLaw]},
                "ratio": {"type": "number", "exclusiveMinimum": 0},
                "atoms": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 0},
                    "minItems": 1,
                },
                "weights": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 0},
                    "minItems": 1,
                },
                "inversion_height": {"type": "number", "exclusiveMinimum": 0},
                "grid_points": {"type": "integer", "minimum": 2},
            },
        },
        "metrics": {
            "type": "array",
            "items": {"enum": [m.value for m in Metric]},
        },
        "lindeberg_eps": {"type": "number", "exclusiveMinimum": 0},
        "truncation_eps": {"type": "number", "exclusiveMinimum": 0},
        "z_points": {"type": "array", "items": _COMPLEX_POINT, "minItems": 1},
        "diagnostics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "swap": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "a": {"type": "integer", "minimum": 1},
                        "z": _COMPLEX_POINT,
                        "allow_large": {"type": "boolean"},
                    },
                },
                "derivative_check": {"type": "boolean"},
                "rate_z": _COMPLEX_POINT,
                "interpolation_check": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "gap": {"type": "number", "minimum": 0},
                        "replicates": {"type": "integer", "minimum": 10000},
                        "z": _COMPLEX_POINT,
                    },
                },
            },
        },
        "assertions": {
            "type": "object",
            "propertyNames": {
                "enum": [m.value for m in Metric]
                + [
                    "swap-bound",
                    "swap-residual",
                    "derivative-error",
                    "rate-exponent",
                    "interpolation",
                    "qq-gap",
                    "mass",
                    "truncation",
                ]
            },
            "additionalProperties": {"type": "number"},
        },
        "curves": {"type": "boolean"},
        "output": {"type": "string"},
        "threads": {"type": "integer", "minimum": 1},
    },
}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        **{verb.value: SECTION_SCHEMA for verb in Verb},
    },
}

DEFAULT_SECTIONS: dict[Verb, dict[str, Any]] = {
    Verb.WIGNER: {
        "generator": {"name": "gaussian"},
        "sizes": [200, 500, 1000],
        "seeds": [1, 2, 3, 4, 5],
        "limit_law": {"name": "semicircle"},
        "metrics": ["levy", "kolmogorov", "lindeberg"],
    },
    Verb.COVARIANCE: {
        "generator": {"name": "panel", "params": {"omega": 1.0, "beta": 0.3}},
        "ensemble": "covariance",
        "sizes": [1000],
        "ratio": 0.5,
        "seeds": [1, 2, 3, 4, 5],
        "limit_law": {"name": "mp"},
        "metrics": ["levy", "kolmogorov"],
    },
    Verb.LIMIT_CURVE: {
        "limit_law": {"name": "semicircle"},
    },
    Verb.SWAP_DIAGNOSTIC: {
        "generator": {
            "name": "martingale-fill",
            "params": {"omega": 1.0, "beta": 0.3},
        },
        "sizes": [16],
        "seeds": [1, 2, 3, 4, 5],
        "diagnostics": {
            "swap": {"a": 2, "z": [0.0, 1.0]},
            "derivative_check": True,
            "rate_z": [0.0, 2.0],
        },
        "assertions": {"swap-bound": 0, "swap-residual": 1e-10},
    },
    Verb.CONDITIONS: {
        "generator": {"name": "gaussian"},
        "sizes": [200],
        "seeds": [1, 2, 3],
        "metrics": ["lindeberg", "variance-deviation", "variance-bound"],
    },
    Verb.QQ: {
        "generator": {"name": "gaussian"},
        "sizes": [1000],
        "seeds": [1],
        "limit_law": {"name": "semicircle"},
    },
}


@dataclass
class ExperimentConfig:
    """A validated experiment section with defaults filled in."""

    verb: Verb
    generator: Generator = Generator.GAUSSIAN
    generator_params: dict[str, Any] = field(default_factory=dict)
    ensemble: Ensemble = Ensemble.WIGNER
    sizes: list[int] = field(default_factory=lambda: [100])
    ratio: Optional[float] = None
    p: Optional[int] = None
    seeds: list[int] = field(default_factory=lambda: [0])
    limit_law: dict[str, Any] = field(default_factory=dict)
    metrics: list[Metric] = field(default_factory=list)
    lindeberg_eps: float = 0.1
    truncation_eps: float = 1.0
    z_points: list[complex] = field(default_factory=lambda: [1j])
    diagnostics: dict[str, Any] = field(default_factory=dict)
    assertions: dict[str, float] = field(default_factory=dict)
    curves: bool = True
    output: str = "martspec-out"
    threads: int = 1
    section: dict[str, Any] = field(default_factory=dict)

    def p_for(self, n: int) -> int:
        """Number of panel rows at column count n."""
        if self.p is not None:
            return self.p
        if self.ratio is None:
            raise ValueError("Covariance experiments need p or ratio.")
        return max(1, round(self.ratio * n))

    def law_name(self) -> Optional[LimitLaw]:
        """The configured limit law, if any."""
        if "name" not in self.limit_law:
            return None
        return LimitLaw(self.limit_law["name"])

    def config_hash(self) -> str:
        """sha256 of the canonical JSON of the section, without output and
        threads."""
        hashed = {
            key: value
            for key, value in self.section.items()
            if key not in ("output", "threads")
        }
        hashed["verb"] = self.verb.value
        encoded = canonical_json(hashed).encode("utf-8")
        return hashlib.sha256(encoded).hexdigest()


def validate_document(
    document: Any, logger: Optional[logging.Logger] = None
) -> None:
    """Validates a whole config document; raises ValueError on errors."""
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.path))
    if errors:
        msg = "invalid experiment config: " + "; ".join(
            f"{'/'.join(str(p) for p in e.path) or '<root>'}: {e.message}"
            for e in errors
        )
        get_logger(logger).error(msg)
        raise ValueError(msg)


def load_document(path: str, logger: Optional[logging.Logger] = None) -> dict:
    """Reads and validates a YAML config file."""
    with open(path, "r", encoding="utf-8") as f:
        document = yaml.safe_load(f)
    validate_document(document, logger)
    return document


def build_config(
    verb: Verb,
    document: Optional[dict[str, Any]] = None,
    overrides: Optional[dict[str, Any]] = None,
    logger: Optional[logging.Logger] = None,
) -> ExperimentConfig:
    """
    The section of a validated document for one verb (the built-in default
    when the document has none), with CLI overrides applied: seed replaces
    the seed list, out the output directory, threads the worker count.
    """
    logger = get_logger(logger)
    if document is not None and verb.value in document:
        section = deepcopy(document[verb.value])
    else:
        section = deepcopy(DEFAULT_SECTIONS[verb])
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "seed":
            section["seeds"] = [int(value)]
        elif key == "out":
            section["output"] = str(value)
        elif key == "threads":
            section["threads"] = int(value)
        else:
            msg = f'unknown override "{key}"'
            logger.error(msg)
            raise ValueError(msg)
    validate_document(
        {"schema_version": SCHEMA_VERSION, verb.value: section}, logger
    )
    config = _from_section(verb, section)
    check_config(config, logger)
    return config


def _from_section(verb: Verb, section: dict[str, Any]) -> ExperimentConfig:
    generator = section.get("generator", {"name": "gaussian"})
    default_ensemble = (
        Ensemble.COVARIANCE if verb == Verb.COVARIANCE else Ensemble.WIGNER
    )
    return ExperimentConfig(
        verb=verb,
        generator=Generator(generator["name"]),
        generator_params=dict(generator.get("params", {})),
        ensemble=Ensemble(section.get("ensemble", default_ensemble.value)),
        sizes=list(section.get("sizes", [100])),
        ratio=section.get("ratio"),
        p=section.get("p"),
        seeds=list(section.get("seeds", [0])),
        limit_law=dict(section.get("limit_law", {})),
        metrics=[Metric(m) for m in section.get("metrics", [])],
        lindeberg_eps=float(section.get("lindeberg_eps", 0.1)),
        truncation_eps=float(section.get("truncation_eps", 1.0)),
        z_points=[
            complex(re, im) for re, im in section.get("z_points", [[0.0, 1.0]])
        ],
        diagnostics=dict(section.get("diagnostics", {})),
        assertions=dict(section.get("assertions", {})),
        curves=bool(section.get("curves", True)),
        output=str(section.get("output", "martspec-out")),
        threads=int(section.get("threads", 1)),
        section=section,
    )


def check_config(
    config: ExperimentConfig, logger: Optional[logging.Logger] = None
) -> None:
    """Check that the combination of choices is valid."""
    logger = get_logger(logger)
    msgs = []
    allowed = GENERATOR_PARAMS[config.generator]
    unknown = sorted(set(config.generator_params) - allowed)
    if unknown:
        msgs.append(
            f"unknown parameters {unknown} "
            + f"for generator {config.generator.value}"
        )
    rectangular = config.ensemble in (Ensemble.COVARIANCE, Ensemble.SYMMETRIZED)
    if rectangular:
        if config.generator not in RECTANGULAR_GENERATORS:
            msgs.append(
                f"generator {config.generator.value} cannot fill a p x n panel"
            )
        if config.p is None and config.ratio is None:
            msgs.append("covariance mode requires p or ratio")
    elif config.generator not in TRIANGULAR_GENERATORS:
        msgs.append(f"generator {config.generator.value} is rectangular only")
    law = config.law_name()
    if law == LimitLaw.SEMICIRCLE and rectangular:
        msgs.append("the semicircle law applies to the wigner ensemble")
    curve = config.verb == Verb.LIMIT_CURVE
    if law == LimitLaw.MP and not rectangular and not curve:
        msgs.append("the mp law applies to covariance ensembles")
    if curve and law == LimitLaw.MP:
        if "ratio" not in config.limit_law and config.ratio is None:
            msgs.append("the mp limit curve requires a ratio")
    if law == LimitLaw.VARIANCE_PROFILE:
        has_atoms = "atoms" in config.limit_law
        if not has_atoms and config.generator != Generator.VARIANCE_PROFILE:
            msgs.append(
                "the variance-profile law needs atoms or that generator"
            )
    distances = {Metric.LEVY, Metric.KOLMOGOROV, Metric.STIELTJES_GAP}
    if law is None and distances & set(config.metrics):
        msgs.append("distance metrics need a limit law")
    if config.verb in (Verb.WIGNER, Verb.COVARIANCE, Verb.QQ) and law is None:
        msgs.append(f"the {config.verb.value} verb needs a limit law")
    if config.verb == Verb.SWAP_DIAGNOSTIC and rectangular:
        msgs.append("the swap diagnostic applies to triangular fields")
    if msgs:
        msg = "; ".join(msgs)
        logger.error(msg)
        raise ValueError(msg)
