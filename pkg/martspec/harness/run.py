"""
Module for running experiments and assembling their reports.

Every verb except limit-curve is a sweep over (size, seed) cells. A cell
draws its field from the stream (seed, size), builds the configured
ensemble, and computes a flat dictionary of metrics; exceptions mark the
cell failed without touching the others. Records are sorted by (size, seed)
before aggregation, so reports do not depend on worker scheduling or on the
order of the seed list.
"""

from __future__ import annotations

import math
import time
from functools import lru_cache
from typing import Any, Optional

import numpy as np

from ..diagnostics.conditions import (
    lindeberg_sum,
    truncation_effect,
    variance_bound,
    variance_deviation,
)
from ..diagnostics.metrics import kolmogorov_distance, levy_distance
from ..diagnostics.resolvent import (
    PERTURBATION_SLACK,
    finite_difference_partials,
    partials_of_vector,
    rate_exponent,
)
from ..diagnostics.swap import gaussian_interpolation_check, swap_decomposition
from ..field.field import FieldSample
from ..field.generate import (
    ARCH1_BURN_IN,
    ARCH_CALIBRATION_SAMPLES,
    ArchSpec,
    gen_arch_field,
    gen_gaussian_field,
    gen_gaussian_panel,
    gen_martingale_matrix_fill,
    gen_panel,
    sample_profile_from_sequence,
)
from ..field.rng import RngStream
from ..file_io import save_csv, save_field_params, save_report
from ..limit_laws import (
    DiscreteMeasure,
    SmoothCDF,
    empirical_measure,
    marchenko_pastur,
    semicircle,
    vp_cdf,
)
from ..log_config import get_logger
from ..matrix_build import (
    build_cov,
    build_sym_bn,
    build_wigner,
    cov_eigenvalues_from_bn,
    stieltjes_cov_via_bn,
)
from ..spectra import (
    DEFAULT_GRID_POINTS,
    DEFAULT_INVERSION_HEIGHT,
    SpectralSample,
    density_grid,
    density_recover,
    eigenvalues,
    esd,
    stieltjes_from_eigs,
)
from .batch import run_batch
from .context_manager import ExperimentContext
from .experiment_config import (
    SCHEMA_VERSION,
    VERSION,
    Ensemble,
    ExperimentConfig,
    Generator,
    LimitLaw,
    Metric,
    Verb,
)
from .qq import qq_data, qq_max_gap

# default ARCH(1) parameters (omega, beta)
ARCH1_DEFAULT = (1.0, 0.3)

# midpoint atoms discretizing a uniform distribution of a_j^2
VP_NU_ATOMS = 200

# Gaussian comparison fields of the swap diagnostic use stream ids above this
COMPARATOR_STREAM_OFFSET = 2**61

# rate of the first partials of s in n, fitted at diagnostics.rate_z
PARTIAL_RATE = -1.5
RATE_POINT = 2j

# assertion name -> (record metric, statistic over a size)
ASSERTION_STATISTICS = {
    "swap-bound": ("swap-violation", "sum"),
    "swap-residual": ("swap-residual", "max"),
    "derivative-error": ("derivative-error", "max"),
    "interpolation": ("interpolation-violation", "sum"),
    "qq-gap": ("qq-gap", "median"),
    "mass": ("mass-defect", "max"),
    "truncation": ("truncation-violation", "sum"),
}

CURVE_VERBS = (Verb.WIGNER, Verb.COVARIANCE, Verb.QQ)


class RunReport:
    """
    The result of one experiment: sorted per-cell records, per-size
    aggregates, assertion outcomes, failed cells and provenance. Timings are
    kept apart from the payload, which is reproducible byte for byte.
    """

    config: ExperimentConfig
    records: list[dict[str, Any]]
    timings: list[dict[str, Any]]
    aggregates: list[dict[str, Any]]
    assertions: list[dict[str, Any]]
    failed_cells: list[dict[str, Any]]
    summary: dict[str, Any]

    def __init__(
        self,
        config: ExperimentConfig,
        records: list[dict[str, Any]],
        timings: Optional[list[dict[str, Any]]] = None,
    ) -> None:
        self.config = config
        self.records = sorted(records, key=lambda r: (r["size"], r["seed"]))
        self.timings = sorted(
            timings or [], key=lambda t: (t["size"], t["seed"])
        )
        self.aggregates = aggregate_records(self.records)
        self.assertions = []
        self.failed_cells = [
            {"size": r["size"], "seed": r["seed"], "error": r["error"]}
            for r in self.records
            if r["status"] == "failed"
        ]
        self.summary = {}

    def __repr__(self) -> str:
        return (
            f"RunReport({self.config.verb.value}, records={len(self.records)}, "
            + f"failed={len(self.failed_cells)}, ok={self.ok})"
        )

    @property
    def ok(self) -> bool:
        """True when no cell failed and every assertion passed."""
        return not self.failed_cells and all(
            a["passed"] for a in self.assertions
        )

    def payload(self) -> dict[str, Any]:
        """The reproducible part of the report."""
        return {
            "schema": SCHEMA_VERSION,
            "verb": self.config.verb.value,
            "config_hash": self.config.config_hash(),
            "config": {
                k: v
                for k, v in self.config.section.items()
                if k not in ("output", "threads")
            },
            "seeds": sorted(self.config.seeds),
            "sizes": sorted(self.config.sizes),
            "version": VERSION,
            "records": self.records,
            "aggregates": self.aggregates,
            "summary": self.summary,
            "assertions": self.assertions,
            "failed_cells": self.failed_cells,
        }

    def to_dict(self) -> dict[str, Any]:
        """The payload together with timings."""
        data = self.payload()
        data["timings"] = self.timings
        return data

    def save(self, filename: str) -> None:
        """Save the report to a json file."""
        save_report(self.to_dict(), filename)

    def metric_values(self, metric: str, size: int) -> list[float]:
        """Values of a metric over the successful records at one size."""
        return [
            r["metrics"][metric]
            for r in self.records
            if r["size"] == size
            and r["status"] == "ok"
            and metric in r["metrics"]
        ]


def aggregate_records(records: list[dict[str, Any]]) -> list[dict[str, Any]]:
    """
    Mean, min, max, median and standard error of every metric per size,
    over the successful records. Values are sorted before reduction.
    """
    grouped: dict[tuple[int, str], list[float]] = {}
    for record in records:
        if record["status"] != "ok":
            continue
        for metric, value in record["metrics"].items():
            grouped.setdefault((record["size"], metric), []).append(value)
    out = []
    for (size, metric), values in sorted(grouped.items()):
        out.append({"size": size, "metric": metric, **_statistics(values)})
    return out


def _statistics(values: list[float]) -> dict[str, Any]:
    arr = np.sort(np.asarray(values, dtype=float))
    k = len(arr)
    stderr = float(np.std(arr, ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    return {
        "count": k,
        "mean": math.fsum(arr) / k,
        "min": float(arr[0]),
        "max": float(arr[-1]),
        "median": float(np.median(arr)),
        "stderr": stderr,
    }


### FIELDS, ENSEMBLES AND LAWS ################################################


def generate_field(
    config: ExperimentConfig, size: int, seed: int
) -> FieldSample:
    """The field of one cell, drawn from the stream (seed, size)."""
    rng = RngStream(seed, stream_id=size)
    params = config.generator_params
    rectangular = config.ensemble != Ensemble.WIGNER
    p = config.p_for(size) if rectangular else size
    if config.generator == Generator.GAUSSIAN:
        if rectangular:
            return gen_gaussian_panel(p, size, rng)
        return gen_gaussian_field(size, rng=rng)
    if config.generator == Generator.ARCH:
        spec_params = {
            k: v for k, v in params.items() if k != "calibration_samples"
        }
        return gen_arch_field(
            size,
            ArchSpec(**spec_params),
            rng,
            calibration_samples=params.get(
                "calibration_samples", ARCH_CALIBRATION_SAMPLES
            ),
        )
    arch1 = (
        params.get("omega", ARCH1_DEFAULT[0]),
        params.get("beta", ARCH1_DEFAULT[1]),
    )
    burn_in = params.get("burn_in", ARCH1_BURN_IN)
    if config.generator == Generator.MARTINGALE_FILL:
        return gen_martingale_matrix_fill(size, arch1, rng, burn_in)
    if config.generator == Generator.PANEL:
        return gen_panel(p, size, arch1, rng, burn_in)
    a_sq = profile_sequence(params, size, rng)
    field = gen_gaussian_field(
        size, sample_profile_from_sequence(size, a_sq), rng
    )
    field.provenance["generator"] = Generator.VARIANCE_PROFILE.value
    field.provenance["params"] = dict(params)
    return field


def profile_sequence(
    params: dict[str, Any], n: int, rng: RngStream
) -> np.ndarray:
    """
    The terms a_1^2, ..., a_n^2: the configured values repeated
    periodically, or i.i.d. uniform draws on [low, high].
    """
    if "values" in params:
        values = np.asarray(params["values"], dtype=float)
        if values.ndim != 1 or len(values) == 0:
            raise ValueError("Profile values must be a non-empty list.")
        return np.resize(values, n)
    distribution = params.get("distribution", "uniform")
    if distribution != "uniform":
        raise ValueError(f'Unknown profile distribution "{distribution}".')
    low, high = params.get("low", 0.0), params.get("high", 1.0)
    if not 0 <= low <= high:
        raise ValueError(f"Need 0 <= low <= high, got [{low}, {high}].")
    return rng.uniform(low, high, n)


def profile_measure(config: ExperimentConfig) -> DiscreteMeasure:
    """
    The limit nu of the empirical distribution of a_j^2: the configured
    atoms, the empirical measure of periodic values, or a midpoint
    discretization of the uniform distribution.
    """
    law = config.limit_law
    if "atoms" in law:
        return DiscreteMeasure(law["atoms"], law.get("weights"))
    params = config.generator_params
    if "values" in params:
        return empirical_measure(params["values"])
    low, high = params.get("low", 0.0), params.get("high", 1.0)
    mids = low + (high - low) * (np.arange(VP_NU_ATOMS) + 0.5) / VP_NU_ATOMS
    return DiscreteMeasure(mids)


def build_spectrum(
    config: ExperimentConfig, field: FieldSample
) -> SpectralSample:
    """
    Eigenvalues of the configured ensemble. The symmetrized ensemble reports
    the covariance spectrum recovered from the block matrix.
    """
    if config.ensemble == Ensemble.WIGNER:
        return eigenvalues(build_wigner(field))
    if config.ensemble == Ensemble.COVARIANCE:
        return eigenvalues(build_cov(field))
    s_bn = eigenvalues(build_sym_bn(field))
    return cov_eigenvalues_from_bn(s_bn, field.p, field.n)


def law_for(config: ExperimentConfig, size: int = 0) -> Optional[SmoothCDF]:
    """The configured limit law at a size (the mp ratio may depend on it)."""
    name = config.law_name()
    if name is None:
        return None
    if name == LimitLaw.SEMICIRCLE:
        return _cached_law(("semicircle",))
    if name == LimitLaw.MP:
        if "ratio" in config.limit_law:
            y = float(config.limit_law["ratio"])
        elif size > 0:
            y = config.p_for(size) / size
        else:
            y = float(config.ratio or 0.0)
        return _cached_law(("mp", y))
    nu = profile_measure(config)
    return _cached_law(
        (
            "variance-profile",
            tuple(nu.atoms.tolist()),
            tuple(nu.weights.tolist()),
            _inversion_height(config),
            int(config.limit_law.get("grid_points", DEFAULT_GRID_POINTS)),
        )
    )


def _inversion_height(config: ExperimentConfig) -> float:
    return float(
        config.limit_law.get("inversion_height", DEFAULT_INVERSION_HEIGHT)
    )


@lru_cache(maxsize=16)
def _cached_law(key: tuple) -> SmoothCDF:
    if key[0] == "semicircle":
        return semicircle()
    if key[0] == "mp":
        return marchenko_pastur(key[1])
    _, atoms, weights, v, points = key
    nu = DiscreteMeasure(atoms, weights)
    # the limit is supported in [-2 max a^2, 2 max a^2]
    edge = 2 * max(atoms) + 0.5
    return vp_cdf(nu, np.linspace(-edge, edge, points), v=v)


### CELLS #####################################################################


def run_cell(cell: tuple[ExperimentConfig, int, int]) -> tuple[dict, float]:
    """
    The record of one (size, seed) cell and its wall time. Any exception
    marks the record failed.
    """
    config, size, seed = cell
    start = time.perf_counter()
    record: dict[str, Any] = {"size": size, "seed": seed}
    try:
        if config.verb == Verb.SWAP_DIAGNOSTIC:
            metrics = swap_metrics(config, size, seed)
        elif config.verb == Verb.CONDITIONS:
            metrics = condition_metrics(config, size, seed)
        elif config.verb == Verb.QQ:
            metrics = qq_metrics(config, size, seed)
        else:
            metrics = spectral_metrics(config, size, seed)
        record["status"] = "ok"
        record["metrics"] = metrics
    except Exception as e:  # pylint: disable=broad-exception-caught
        msg = f"{type(e).__name__}: {e}"
        get_logger().error(f"cell (n={size}, seed={seed}) failed: {msg}")
        record["status"] = "failed"
        record["error"] = msg
    return record, time.perf_counter() - start


def spectral_metrics(
    config: ExperimentConfig, size: int, seed: int
) -> dict[str, float]:
    """Distances of the ESD to the limit law, and field functionals."""
    field = generate_field(config, size, seed)
    s = build_spectrum(config, field)
    law = law_for(config, size)
    metrics = field_metrics(config, field)
    metrics["lambda-min"], metrics["lambda-max"] = s.support
    F = esd(s)
    if Metric.LEVY in config.metrics:
        metrics[Metric.LEVY.value] = levy_distance(F, law)
    if Metric.KOLMOGOROV in config.metrics:
        metrics[Metric.KOLMOGOROV.value] = kolmogorov_distance(F, law)
    if Metric.STIELTJES_GAP in config.metrics:
        metrics[Metric.STIELTJES_GAP.value] = _stieltjes_gap(
            config, field, s, law
        )
    return metrics


def field_metrics(
    config: ExperimentConfig, field: FieldSample
) -> dict[str, float]:
    """The configured entry-field functionals of one realization."""
    metrics = {}
    if Metric.LINDEBERG in config.metrics:
        metrics[Metric.LINDEBERG.value] = lindeberg_sum(
            field, config.lindeberg_eps
        )
    if Metric.VARIANCE_DEVIATION in config.metrics:
        metrics[Metric.VARIANCE_DEVIATION.value] = variance_deviation(field)
    if Metric.VARIANCE_BOUND in config.metrics:
        metrics[Metric.VARIANCE_BOUND.value] = variance_bound(field)
    return metrics


def _stieltjes_gap(
    config: ExperimentConfig,
    field: FieldSample,
    s: SpectralSample,
    law: Optional[SmoothCDF],
) -> float:
    if law is None or law.stieltjes is None:
        raise ValueError(f"The law {law} has no Stieltjes transform.")
    gaps = []
    for z in config.z_points:
        if config.ensemble == Ensemble.SYMMETRIZED:
            s_n = stieltjes_cov_via_bn(field, z)
        else:
            s_n = stieltjes_from_eigs(s, z)
        gaps.append(abs(s_n - law.stieltjes(z)))
    return float(max(gaps))


def condition_metrics(
    config: ExperimentConfig, size: int, seed: int
) -> dict[str, float]:
    """Field functionals, and the truncation effect for triangular fields."""
    field = generate_field(config, size, seed)
    metrics = field_metrics(config, field)
    if not field.rectangular:
        z = config.z_points[0]
        effect = truncation_effect(field, config.truncation_eps, z)
        metrics["truncation-zeroed"] = float(effect["zeroed"])
        metrics["truncation-lhs"] = effect["lhs"]
        metrics["truncation-rhs"] = effect["rhs"]
        within = effect["lhs"] <= effect["rhs"] * (1 + PERTURBATION_SLACK)
        metrics["truncation-violation"] = 0.0 if within else 1.0
    return metrics


def qq_metrics(
    config: ExperimentConfig, size: int, seed: int
) -> dict[str, float]:
    """The largest Q-Q gap away from the extremes."""
    field = generate_field(config, size, seed)
    s = build_spectrum(config, field)
    rows = qq_data(s, law_for(config, size))
    return {"qq-gap": qq_max_gap(rows)}


def swap_metrics(
    config: ExperimentConfig, size: int, seed: int
) -> dict[str, float]:
    """
    The swap decomposition of the configured field against a Gaussian field
    with the same declared profile, plus the optional derivative and
    interpolation checks.
    """
    field = generate_field(config, size, seed)
    options = config.diagnostics.get("swap", {})
    z = complex(*options.get("z", [0.0, 1.0]))
    comparator = gen_gaussian_field(
        size,
        field.declared_profile,
        RngStream(seed, COMPARATOR_STREAM_OFFSET + size),
    )
    report = swap_decomposition(
        field,
        comparator,
        z,
        a=options.get("a", 2),
        allow_large=options.get("allow_large", False),
    )
    metrics = {
        "abs-R1": abs(report.R1),
        "abs-R2": abs(report.R2),
        "abs-R3": abs(report.R3),
        "swap-rhs": report.bound_rhs,
        "swap-residual": report.residual,
        "swap-violation": 0.0 if report.within_bound else 1.0,
        "L3": report.L3,
    }
    x = field.to_triangular_vector()
    if config.diagnostics.get("derivative_check", False):
        analytic = partials_of_vector(x, z)
        numeric = finite_difference_partials(x, z)
        largest = float(np.max(np.abs(analytic)))
        rate_z = complex(
            *config.diagnostics.get("rate_z", [0.0, RATE_POINT.imag])
        )
        metrics["max-partial"] = float(
            np.max(np.abs(partials_of_vector(x, rate_z)))
        )
        metrics["derivative-error"] = float(
            np.max(np.abs(analytic - numeric)) / largest
        )
    interpolation = config.diagnostics.get("interpolation_check")
    if interpolation is not None:
        z_int = complex(*interpolation.get("z", [0.0, 1.0]))
        check = gaussian_interpolation_check(
            1.0,
            1.0 + interpolation.get("gap", 0.2),
            z_int,
            replicates=interpolation.get("replicates", 10_000),
            rng=RngStream(seed, size),
            n=size,
            check=False,
        )
        metrics["interpolation-lhs"] = check.lhs
        metrics["interpolation-rhs"] = check.rhs
        metrics["interpolation-violation"] = 0.0 if check.holds else 1.0
    return metrics


### VERBS #####################################################################


def run(
    config: ExperimentConfig,
    context: Optional[ExperimentContext] = None,
    quiet: bool = True,
) -> RunReport:
    """
    Runs an experiment, checks its assertions, writes report.json and the
    curve files to the output directory, and returns the report.
    """
    context = context if context is not None else ExperimentContext(config)
    context.start_new_log()
    if config.verb == Verb.LIMIT_CURVE:
        report = limit_curve(config, context)
    else:
        cells = [
            (config, size, seed)
            for size in config.sizes
            for seed in config.seeds
        ]
        results = run_batch(run_cell, cells, config.threads, quiet)
        report = RunReport(
            config,
            [record for record, _ in results],
            [
                {"size": r["size"], "seed": r["seed"], "seconds": t}
                for r, t in results
            ],
        )
        for cell in report.failed_cells:
            context.record_failure(cell["size"], cell["seed"], cell["error"])
        write_field_params(config, context)
        _summarize(report, context)
        if config.curves and config.verb in CURVE_VERBS:
            write_curves(config, context)
    check_assertions(report, context)
    report.save(context.path("report.json"))
    if report.ok:
        context.log_good_exit("all cells succeeded and all assertions passed")
    else:
        context.log_bad_exit("failures present")
    return report


def limit_curve(
    config: ExperimentConfig, context: ExperimentContext
) -> RunReport:
    """
    Writes law.csv (x, pdf, cdf) and density.csv (x, f), the density
    recovered by Stieltjes inversion of the law's transform, and reports the
    mass captured by the grid and the largest inversion gap.
    """
    law = law_for(config)
    if law is None:
        raise ValueError("limit-curve needs a limit law.")
    v = _inversion_height(config)
    grid = density_grid(
        law, int(config.limit_law.get("grid_points", DEFAULT_GRID_POINTS))
    )
    save_csv(context.path("law.csv"), ["x", "pdf", "cdf"], law.rows(grid))
    metrics: dict[str, float] = {"mass-defect": abs(1 - float(law(grid[-1])))}
    if law.stieltjes is not None:
        recovered = density_recover(law.stieltjes, grid, v)
        save_csv(
            context.path("density.csv"),
            ["x", "f"],
            zip(grid.tolist(), recovered.tolist()),
        )
        metrics["inversion-gap"] = float(
            np.max(np.abs(recovered - np.asarray(law.density(grid))))
        )
    context.logger.info(f"limit curve {law}: {metrics}")
    return RunReport(
        config, [{"size": 0, "seed": 0, "status": "ok", "metrics": metrics}]
    )


def write_field_params(
    config: ExperimentConfig, context: ExperimentContext
) -> None:
    """
    Writes params.json, the provenance record of the field of the first
    cell (smallest size, smallest seed).
    """
    size, seed = min(config.sizes), min(config.seeds)
    try:
        field = generate_field(config, size, seed)
    except Exception as e:  # pylint: disable=broad-exception-caught
        context.logger.warning(f"no params.json for n={size}: {e}")
        return
    save_field_params(field, context.path("params.json"))


def write_curves(config: ExperimentConfig, context: ExperimentContext) -> None:
    """
    For the first seed of every size: esd_n<size>.csv (t, F),
    density_n<size>.csv (x, f) and qq_n<size>.csv (q_law, lambda); and
    law_n<size>.csv (x, pdf, cdf) for the limit law.
    """
    seed = min(config.seeds)
    for size in sorted(config.sizes):
        try:
            field = generate_field(config, size, seed)
            s = build_spectrum(config, field)
        except Exception as e:  # pylint: disable=broad-exception-caught
            context.logger.warning(f"no curves at n={size}: {e}")
            continue
        save_csv(context.path(f"esd_n{size}.csv"), ["t", "F"], esd(s).rows())
        grid = density_grid(s)
        f = density_recover(lambda w: stieltjes_from_eigs(s, w), grid)
        save_csv(
            context.path(f"density_n{size}.csv"),
            ["x", "f"],
            zip(grid.tolist(), f.tolist()),
        )
        law = law_for(config, size)
        if law is None:
            continue
        save_csv(
            context.path(f"law_n{size}.csv"),
            ["x", "pdf", "cdf"],
            law.rows(density_grid(law)),
        )
        save_csv(
            context.path(f"qq_n{size}.csv"),
            ["q_law", "lambda"],
            qq_data(s, law),
        )


def _summarize(report: RunReport, context: ExperimentContext) -> None:
    """Cross-size statistics: monotonicity of median distances and the
    fitted rate of the first partials."""
    config = report.config
    sizes = sorted(config.sizes)
    for metric in (Metric.LEVY.value, Metric.KOLMOGOROV.value):
        medians = [
            float(np.median(values))
            for values in (report.metric_values(metric, n) for n in sizes)
            if values
        ]
        if len(medians) == len(sizes) and len(sizes) > 1:
            report.summary[f"{metric}-medians-decreasing"] = bool(
                np.all(np.diff(medians) < 0)
            )
    if config.diagnostics.get("derivative_check", False) and len(sizes) > 1:
        means = [report.metric_values("max-partial", n) for n in sizes]
        if all(means):
            slope = rate_exponent(sizes, [math.fsum(m) / len(m) for m in means])
            report.summary["rate-exponent"] = slope
            context.logger.info(f"first partials decay like n^{slope:.3f}")


def check_assertions(report: RunReport, context: ExperimentContext) -> None:
    """Evaluates the configured assertions and stores them on the report."""
    config = report.config
    sizes = sorted({r["size"] for r in report.records})
    for name, threshold in sorted(config.assertions.items()):
        if name == "rate-exponent":
            if "rate-exponent" not in report.summary:
                context.check_flag(name, False)
                continue
            gap = abs(report.summary["rate-exponent"] - PARTIAL_RATE)
            context.check_assertion(name, gap, threshold, statistic="abs-gap")
            continue
        metric, statistic = ASSERTION_STATISTICS.get(name, (name, "median"))
        for size in sizes:
            values = report.metric_values(metric, size)
            if not values:
                context.check_flag(f"{name} (no values)", False, size)
                continue
            context.check_assertion(
                name, _statistic(values, statistic), threshold, size, statistic
            )
    report.assertions = list(context.assertions)


def _statistic(values: list[float], statistic: str) -> float:
    if statistic == "sum":
        return math.fsum(values)
    if statistic == "max":
        return float(max(values))
    return float(np.median(values))
