"""
test_file_io.py
===============

Tests for parameter records, curves, matrices and reports on disk.
"""

import json

import numpy as np
import pytest

from martspec import file_io  # pylint: disable=import-error
from martspec.field import (  # pylint: disable=import-error
    ArchSpec,
    RngStream,
    gen_arch_field,
    gen_gaussian_field,
)


def test_field_params_round_trip(tmp_path) -> None:
    """Test that an ARCH parameter record rebuilds its spec."""
    spec = ArchSpec(rho=0.4, window=4, burn_in=8)
    field = gen_arch_field(
        12, spec, RngStream(2), normalize=False, calibration_samples=1000
    )
    filename = str(tmp_path / "params.json")
    file_io.save_field_params(field, filename)
    data = file_io.load_field_params(filename)
    assert data["generator"] == "arch"
    assert data["shape"] == [12, 12]
    assert file_io.arch_spec_from_params(data) == spec


def test_field_params_rejects(tmp_path) -> None:
    """Test records lacking keys or from another generator."""
    filename = str(tmp_path / "bad.json")
    with open(filename, "w", encoding="utf-8") as f:
        json.dump({"generator": "gaussian"}, f)
    with pytest.raises(ValueError):
        file_io.load_field_params(filename)
    field = gen_gaussian_field(3, rng=RngStream(0))
    file_io.save_field_params(field, filename)
    with pytest.raises(ValueError):
        file_io.arch_spec_from_params(file_io.load_field_params(filename))


def test_csv_full_precision(tmp_path) -> None:
    """Test that CSV values keep full float precision."""
    filename = str(tmp_path / "curves" / "c.csv")
    rows = [(1 / 3, 2.0), (np.float64(np.pi), -1e-300)]
    file_io.save_csv(filename, ["x", "y"], rows)
    header, data = file_io.load_csv(filename)
    assert header == ["x", "y"]
    assert data[0, 0] == 1 / 3
    assert data[1, 0] == np.pi
    assert data[1, 1] == -1e-300


def test_report_layout(tmp_path) -> None:
    """Test that reports load back as written."""
    data = {"schema": 1, "records": [{"size": 2, "seed": 1}], "empty": []}
    filename = str(tmp_path / "report.json")
    file_io.save_report(data, filename)
    assert file_io.load_report(filename) == data
    with open(filename, "r", encoding="utf-8") as f:
        assert f.read().count("\n") == 7


def test_canonical_json() -> None:
    """Test that key order does not change the canonical form."""
    assert file_io.canonical_json({"b": 1, "a": [1, 2]}) == (
        file_io.canonical_json({"a": [1, 2], "b": 1})
    )
    assert file_io.canonical_json({"a": 1}) == '{"a":1}'

