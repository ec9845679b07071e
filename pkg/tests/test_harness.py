"""
test_harness.py
===============

Tests for experiment configs, the run context, Q-Q data, the (size, seed)
sweep and the command-line interface.
"""

import json
import os

import numpy as np
import pytest
import yaml

import martspec  # pylint: disable=import-error
from martspec.diagnostics import (  # pylint: disable=import-error
    partials_of_vector,
)
from martspec.field import ArchSpec  # pylint: disable=import-error
from martspec.file_io import (  # pylint: disable=import-error
    arch_spec_from_params,
    canonical_json,
    load_csv,
    load_field_params,
    load_report,
)
from martspec.harness import (  # pylint: disable=import-error
    Ensemble,
    ExperimentContext,
    Generator,
    Metric,
    Verb,
    build_config,
    load_document,
    main,
    qq_data,
    qq_max_gap,
    run,
)
from martspec.harness.experiment_config import (  # pylint: disable=import-error
    SCHEMA_VERSION,
    validate_document,
)
from martspec.harness.run import (  # pylint: disable=import-error
    build_spectrum,
    generate_field,
    law_for,
)
from martspec.spectra import SpectralSample, esd  # pylint: disable=import-error


def _config(verb: Verb, section: dict, out_dir, **overrides):
    document = {"schema_version": SCHEMA_VERSION, verb.value: section}
    overrides["out"] = str(out_dir)
    return build_config(verb, document, overrides)


def _wigner_section(**kwargs) -> dict:
    section = {
        "generator": {"name": "gaussian"},
        "sizes": [20, 40],
        "seeds": [1, 2],
        "limit_law": {"name": "semicircle"},
        "metrics": ["levy", "kolmogorov", "lindeberg", "stieltjes-gap"],
    }
    section.update(kwargs)
    return section


def _write_yaml(path, document) -> str:
    filename = os.path.join(str(path), "config.yaml")
    with open(filename, "w", encoding="utf-8") as f:
        yaml.safe_dump(document, f)
    return filename


### CONFIGS ###################################################################


def test_default_configs(tmp_path) -> None:
    """Test that every verb has a valid built-in config."""
    for verb in Verb:
        config = build_config(verb, None, {"out": str(tmp_path)})
        assert config.verb == verb
        assert config.output == str(tmp_path)
    config = build_config(Verb.COVARIANCE, None, {"out": str(tmp_path)})
    assert config.generator == Generator.PANEL
    assert config.ensemble == Ensemble.COVARIANCE
    assert config.p_for(1000) == 500


def test_config_overrides(tmp_path) -> None:
    """Test the seed, output and thread overrides."""
    section = _wigner_section()
    config = _config(Verb.WIGNER, section, tmp_path, seed=7, threads=3)
    assert config.seeds == [7]
    assert config.threads == 3
    assert config.metrics[0] == Metric.LEVY
    with pytest.raises(ValueError):
        build_config(Verb.WIGNER, None, {"verbose": True})


def test_config_rejects_unknown_keys() -> None:
    """Test that unknown keys and versions fail validation."""
    with pytest.raises(ValueError):
        validate_document(
            {"schema_version": SCHEMA_VERSION, "wigner": {"n": 1}}
        )
    with pytest.raises(ValueError):
        validate_document({"schema_version": 99})
    with pytest.raises(ValueError):
        validate_document({"schema_version": SCHEMA_VERSION, "plot": {}})
    with pytest.raises(ValueError):
        validate_document(
            {
                "schema_version": SCHEMA_VERSION,
                "wigner": {"assertions": {"speed": 1.0}},
            }
        )


def test_config_rejects_combinations(tmp_path) -> None:
    """Test that incompatible choices are rejected."""
    bad_sections = [
        # semicircle with a covariance ensemble
        _wigner_section(ensemble="covariance", ratio=0.5),
        # rectangular generator in a Wigner matrix
        _wigner_section(generator={"name": "panel"}),
        # covariance without p or ratio
        _wigner_section(ensemble="covariance", limit_law={"name": "mp"}),
        # distances without a law
        {"generator": {"name": "gaussian"}, "metrics": ["levy"]},
        # unknown generator parameter
        _wigner_section(generator={"name": "arch", "params": {"gamma": 1}}),
    ]
    for section in bad_sections:
        with pytest.raises(ValueError):
            _config(Verb.WIGNER, section, tmp_path)
    with pytest.raises(ValueError):
        _config(
            Verb.SWAP_DIAGNOSTIC,
            {"ensemble": "covariance", "ratio": 0.5},
            tmp_path,
        )


def test_config_hash(tmp_path) -> None:
    """Test that the hash ignores output and threads but not seeds."""
    a = _config(Verb.WIGNER, _wigner_section(), tmp_path)
    b = _config(Verb.WIGNER, _wigner_section(), tmp_path / "other", threads=2)
    c = _config(Verb.WIGNER, _wigner_section(seeds=[1, 3]), tmp_path)
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()
    assert len(a.config_hash()) == 64


def test_load_document(tmp_path) -> None:
    """Test reading a YAML config file."""
    document = {"schema_version": SCHEMA_VERSION, "wigner": _wigner_section()}
    filename = _write_yaml(tmp_path, document)
    assert load_document(filename) == document
    config = build_config(Verb.WIGNER, load_document(filename))
    assert config.sizes == [20, 40]


### CONTEXT ###################################################################


def test_context_assertions(tmp_path) -> None:
    """Test assertion bookkeeping and the exit message."""
    config = _config(Verb.WIGNER, _wigner_section(), tmp_path)
    with ExperimentContext(config) as context:
        assert context.check_assertion("levy", 0.01, 0.05, size=20)
        assert context.ok
        assert not context.check_flag("rate-exponent", False)
        context.record_failure(40, 2, "ValueError: boom")
        assert not context.ok
        assert "failed cells: 1" in context.exit_msg("done")
        context.log_bad_exit("done")
        assert context.exit_flag
    assert os.path.exists(tmp_path / "wigner.log")
    assert context.path("x.csv") == os.path.join(str(tmp_path), "x.csv")


### Q-Q #######################################################################


def test_qq_self() -> None:
    """Test that a sample against its own ESD lies on the diagonal."""
    s = SpectralSample(np.sort(martspec.field.RngStream(0).standard_normal(20)))
    rows = qq_data(s, esd(s))
    assert len(rows) == 20
    assert qq_max_gap(rows) == 0.0
    assert qq_max_gap(rows, trim=0) == 0.0


def test_qq_atom() -> None:
    """Test that quantiles inside the atom of mp(4) sit at the origin."""
    s = SpectralSample(np.linspace(0, 9, 8))
    q = np.array([row[0] for row in qq_data(s, martspec.marchenko_pastur(4.0))])
    assert np.all(q[:6] == 0.0)
    assert np.all(q[6:] > 1.0)


def test_qq_semicircle() -> None:
    """Test a Gaussian Wigner spectrum against semicircle quantiles."""
    rng = martspec.field.RngStream(1)
    field = martspec.field.gen_gaussian_field(300, rng=rng)
    s = martspec.eigenvalues(martspec.build_wigner(field))
    assert qq_max_gap(qq_data(s, martspec.semicircle())) < 0.15


def test_qq_rejects() -> None:
    """Test the trim checks."""
    rows = [(0.0, 0.0)] * 10
    with pytest.raises(ValueError):
        qq_max_gap(rows)
    with pytest.raises(ValueError):
        qq_max_gap(rows, trim=-1)


### RUNS ######################################################################


def test_run_wigner(tmp_path) -> None:
    """Test a small Wigner sweep with curves and a passing assertion."""
    section = _wigner_section(assertions={"levy": 0.5, "kolmogorov": 0.5})
    config = _config(Verb.WIGNER, section, tmp_path)
    report = run(config)
    assert report.ok
    assert [(r["size"], r["seed"]) for r in report.records] == [
        (20, 1),
        (20, 2),
        (40, 1),
        (40, 2),
    ]
    metrics = report.records[0]["metrics"]
    for name in ["levy", "kolmogorov", "lindeberg", "stieltjes-gap"]:
        assert metrics[name] >= 0
    assert metrics["levy"] <= metrics["kolmogorov"] + 2e-6
    aggregate = next(
        a
        for a in report.aggregates
        if a["size"] == 20 and a["metric"] == "levy"
    )
    assert aggregate["count"] == 2
    assert aggregate["min"] <= aggregate["median"] <= aggregate["max"]
    assert len(report.assertions) == 4
    for filename in [
        "report.json",
        "wigner.log",
        "esd_n20.csv",
        "density_n40.csv",
        "law_n20.csv",
        "qq_n40.csv",
    ]:
        assert os.path.exists(tmp_path / filename)
    header, data = load_csv(str(tmp_path / "qq_n20.csv"))
    assert header == ["q_law", "lambda"]
    assert data.shape == (20, 2)
    saved = load_report(str(tmp_path / "report.json"))
    assert saved["config_hash"] == config.config_hash()
    assert len(saved["timings"]) == 4


def test_run_reproducible(tmp_path) -> None:
    """Test byte-identical payloads across runs, workers and seed order."""
    first = run(_config(Verb.WIGNER, _wigner_section(), tmp_path / "a"))
    second = run(_config(Verb.WIGNER, _wigner_section(), tmp_path / "b"))
    assert canonical_json(first.payload()) == canonical_json(second.payload())
    shuffled = run(
        _config(
            Verb.WIGNER,
            _wigner_section(seeds=[2, 1], curves=False),
            tmp_path / "c",
            threads=2,
        )
    )
    assert json.dumps(shuffled.records) == json.dumps(first.records)


def test_run_failed_assertion(tmp_path) -> None:
    """Test that an impossible threshold fails the run."""
    section = _wigner_section(assertions={"levy": 0.0}, curves=False)
    report = run(_config(Verb.WIGNER, section, tmp_path))
    assert not report.ok
    assert not report.failed_cells
    assert not any(a["passed"] for a in report.assertions)


def test_run_failed_cell(tmp_path) -> None:
    """Test that an exception in one cell marks it failed."""
    section = {
        "generator": {"name": "variance-profile", "params": {"values": []}},
        "sizes": [10],
        "seeds": [1],
        "limit_law": {"name": "variance-profile", "atoms": [1.0]},
        "metrics": ["kolmogorov"],
        "curves": False,
    }
    report = run(_config(Verb.WIGNER, section, tmp_path))
    assert not report.ok
    assert report.failed_cells[0]["size"] == 10
    assert "ValueError" in report.failed_cells[0]["error"]


def test_run_covariance(tmp_path) -> None:
    """Test that the covariance and symmetrized ensembles agree."""
    section = {
        "generator": {"name": "gaussian"},
        "sizes": [60],
        "ratio": 0.5,
        "seeds": [3],
        "limit_law": {"name": "mp"},
        "metrics": ["kolmogorov", "stieltjes-gap"],
        "curves": False,
    }
    direct = run(_config(Verb.COVARIANCE, section, tmp_path / "cov"))
    section["ensemble"] = "symmetrized"
    block = run(_config(Verb.COVARIANCE, section, tmp_path / "sym"))
    assert direct.ok and block.ok
    m1, m2 = direct.records[0]["metrics"], block.records[0]["metrics"]
    assert m1["lambda-min"] >= -1e-10
    assert m1["kolmogorov"] == pytest.approx(m2["kolmogorov"], abs=1e-6)
    assert m1["stieltjes-gap"] == pytest.approx(m2["stieltjes-gap"], abs=1e-8)


def test_atom_mass(tmp_path) -> None:
    """Test the fraction of zero eigenvalues for y = 4."""
    section = {
        "generator": {"name": "gaussian"},
        "sizes": [250],
        "p": 1000,
        "seeds": [1],
        "limit_law": {"name": "mp"},
        "metrics": ["kolmogorov"],
        "curves": False,
    }
    config = _config(Verb.COVARIANCE, section, tmp_path)
    field = generate_field(config, 250, 1)
    s = build_spectrum(config, field)
    assert np.mean(s.values < 1e-6) == pytest.approx(0.75, abs=0.02)
    assert law_for(config, 250).atom == pytest.approx((0.0, 0.75))


def test_run_qq(tmp_path) -> None:
    """Test the qq verb."""
    section = {
        "generator": {"name": "gaussian"},
        "sizes": [100],
        "seeds": [1],
        "limit_law": {"name": "semicircle"},
        "assertions": {"qq-gap": 0.5},
    }
    report = run(_config(Verb.QQ, section, tmp_path))
    assert report.ok
    assert report.records[0]["metrics"]["qq-gap"] < 0.5
    assert os.path.exists(tmp_path / "qq_n100.csv")


def test_run_conditions(tmp_path) -> None:
    """Test the conditions verb with the truncation check."""
    section = {
        "generator": {"name": "gaussian"},
        "sizes": [30],
        "seeds": [1, 2],
        "metrics": ["lindeberg", "variance-deviation", "variance-bound"],
        "truncation_eps": 0.3,
        "assertions": {"truncation": 0, "variance-deviation": 0},
    }
    report = run(_config(Verb.CONDITIONS, section, tmp_path))
    assert report.ok
    metrics = report.records[0]["metrics"]
    assert metrics["variance-deviation"] == 0.0
    assert metrics["truncation-zeroed"] > 0
    assert metrics["truncation-lhs"] <= metrics["truncation-rhs"]


def test_run_swap(tmp_path) -> None:
    """Test the swap diagnostic with the derivative check and its rate."""
    section = {
        "generator": {"name": "martingale-fill"},
        "sizes": [4, 8],
        "seeds": [1, 2, 3],
        "diagnostics": {
            "swap": {"a": 2, "z": [0.0, 1.0]},
            "derivative_check": True,
        },
        "assertions": {
            "swap-bound": 0,
            "swap-residual": 1e-10,
            "derivative-error": 1e-5,
            "rate-exponent": 1.0,
        },
    }
    report = run(_config(Verb.SWAP_DIAGNOSTIC, section, tmp_path))
    assert report.ok, report.assertions
    assert "rate-exponent" in report.summary
    metrics = report.records[0]["metrics"]
    for name in ["abs-R1", "abs-R2", "abs-R3", "swap-rhs", "L3", "max-partial"]:
        assert metrics[name] >= 0


def test_run_swap_rate_point(tmp_path) -> None:
    """Test that max-partial is taken at rate_z, 2i by default."""
    section = {
        "generator": {"name": "gaussian"},
        "sizes": [4, 6],
        "seeds": [1],
        "diagnostics": {"swap": {"a": 1}, "derivative_check": True},
    }
    for rate_z in (None, [0.5, 0.5]):
        if rate_z is not None:
            section["diagnostics"]["rate_z"] = rate_z
        config = _config(Verb.SWAP_DIAGNOSTIC, section, tmp_path)
        report = run(config)
        assert report.ok
        z = 2j if rate_z is None else complex(*rate_z)
        x = generate_field(config, 4, 1).to_triangular_vector()
        expected = np.max(np.abs(partials_of_vector(x, z)))
        assert report.records[0]["metrics"]["max-partial"] == pytest.approx(
            expected, rel=1e-12
        )
        assert "rate-exponent" in report.summary


def test_run_field_params(tmp_path) -> None:
    """Test params.json, the record of the first field of a run."""
    section = _wigner_section(
        generator={
            "name": "arch",
            "params": {"rho": 0.4, "window": 4, "calibration_samples": 1000},
        },
        sizes=[12, 8],
        seeds=[3, 2],
        curves=False,
    )
    run(_config(Verb.WIGNER, section, tmp_path))
    data = load_field_params(str(tmp_path / "params.json"))
    assert data["generator"] == "arch"
    assert data["shape"] == [8, 8]
    assert data["provenance"]["seed"] == 2
    assert arch_spec_from_params(data) == ArchSpec(rho=0.4, window=4)


def test_run_limit_curve(tmp_path) -> None:
    """Test the limit-curve verb for the three laws."""
    config = _config(
        Verb.LIMIT_CURVE,
        {"limit_law": {"name": "semicircle"}, "assertions": {"mass": 1e-9}},
        tmp_path / "sc",
    )
    report = run(config)
    assert report.ok
    header, data = load_csv(str(tmp_path / "sc" / "law.csv"))
    assert header == ["x", "pdf", "cdf"]
    assert data[-1, 2] == pytest.approx(1.0)
    assert os.path.exists(tmp_path / "sc" / "density.csv")
    config = _config(
        Verb.LIMIT_CURVE,
        {"limit_law": {"name": "mp", "ratio": 4.0}},
        tmp_path / "mp",
    )
    assert run(config).ok
    config = _config(
        Verb.LIMIT_CURVE,
        {
            "limit_law": {
                "name": "variance-profile",
                "atoms": [1.0],
                "grid_points": 201,
            },
            "assertions": {"mass": 0.02},
        },
        tmp_path / "vp",
    )
    report = run(config)
    assert report.ok
    assert report.records[0]["metrics"]["inversion-gap"] < 0.05


def test_run_variance_profile(tmp_path) -> None:
    """Test a variance-profile Wigner run against its limit law."""
    section = {
        "generator": {
            "name": "variance-profile",
            "params": {"values": [0.5, 1.5]},
        },
        "sizes": [200],
        "seeds": [1],
        "limit_law": {"name": "variance-profile", "grid_points": 801},
        "metrics": ["kolmogorov", "variance-deviation"],
        "curves": False,
        "assertions": {"kolmogorov": 0.1},
    }
    report = run(_config(Verb.WIGNER, section, tmp_path))
    assert report.ok, report.assertions
    assert report.records[0]["metrics"]["variance-deviation"] > 0


### CLI #######################################################################


def test_cli_exit_codes(tmp_path, capsys) -> None:
    """Test the exit codes for success, failed assertions and bad configs."""
    good = {
        "schema_version": SCHEMA_VERSION,
        "wigner": _wigner_section(sizes=[20], seeds=[1], curves=False),
    }
    filename = _write_yaml(tmp_path, good)
    out = str(tmp_path / "out")
    assert main(["--config", filename, "--out", out, "--quiet", "wigner"]) == 0
    assert "RunReport" in capsys.readouterr().out
    assert os.path.exists(os.path.join(out, "report.json"))
    good["wigner"]["assertions"] = {"levy": 0.0}
    filename = _write_yaml(tmp_path, good)
    assert main(["--config", filename, "--out", out, "--quiet", "wigner"]) == 1
    good["wigner"]["bogus"] = True
    filename = _write_yaml(tmp_path, good)
    assert main(["--config", filename, "--out", out, "wigner"]) == 2
    missing = str(tmp_path / "missing.yaml")
    assert main(["--config", missing, "--out", out, "wigner"]) == 2


def test_cli_seed_override(tmp_path) -> None:
    """Test that --seed runs a single seed."""
    document = {
        "schema_version": SCHEMA_VERSION,
        "conditions": {"sizes": [10], "seeds": [1, 2, 3]},
    }
    filename = _write_yaml(tmp_path, document)
    out = str(tmp_path / "out")
    argv = ["--config", filename, "--out", out, "--seed", "5", "--quiet"]
    assert main(argv + ["conditions"]) == 0
    saved = load_report(os.path.join(out, "report.json"))
    assert saved["seeds"] == [5]


### ACCEPTANCE ################################################################


@pytest.mark.slow
def test_semicircle_acceptance(tmp_path) -> None:
    """Test Gaussian Wigner at n = 2000 against the semicircle."""
    section = _wigner_section(
        sizes=[2000],
        seeds=[1],
        metrics=["levy", "kolmogorov"],
        assertions={"levy": 0.05, "kolmogorov": 0.05},
        curves=False,
    )
    assert run(_config(Verb.WIGNER, section, tmp_path)).ok


@pytest.mark.slow
def test_semicircle_medians_decreasing(tmp_path) -> None:
    """Test the default Wigner sweep over n = 200, 500, 1000."""
    config = build_config(Verb.WIGNER, None, {"out": str(tmp_path)})
    report = run(config)
    assert report.ok
    assert report.summary["levy-medians-decreasing"]
    assert report.summary["kolmogorov-medians-decreasing"]


@pytest.mark.slow
def test_arch_acceptance(tmp_path) -> None:
    """Test the ARCH field at n = 1000 over five seeds."""
    section = {
        "generator": {"name": "arch"},
        "sizes": [1000],
        "seeds": [1, 2, 3, 4, 5],
        "limit_law": {"name": "semicircle"},
        "metrics": ["levy"],
        "assertions": {"levy": 0.08},
        "curves": False,
    }
    assert run(_config(Verb.WIGNER, section, tmp_path)).ok


@pytest.mark.slow
def test_panel_acceptance(tmp_path) -> None:
    """Test the ARCH(1) panel covariance at p = 500, n = 1000."""
    config = build_config(Verb.COVARIANCE, None, {"out": str(tmp_path)})
    config.assertions = {"kolmogorov": 0.06}
    report = run(config)
    assert report.ok, report.assertions
