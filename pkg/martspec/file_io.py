"""
Module for loading and saving generator parameters, curves and reports.

Reports are JSON, curves are CSV with a header row, and matrices are dense
float64 .npy files. No other binary formats are written.
"""

import csv
import json
import os
from typing import Any, Iterable, Sequence

import numpy as np

from .field.field import FieldSample
from .field.generate import ArchSpec


def ensure_directory(path: str) -> None:
    """Create a directory (and parents) if none exists."""
    if len(path) > 0 and not os.path.exists(path):
        os.makedirs(path)


### GENERATOR PARAMETERS ######################################################


def save_field_params(field: FieldSample, filename: str) -> None:
    """Save the provenance record of a field to a json file."""
    data = {
        "generator": field.provenance.get("generator", "unknown"),
        "shape": list(field.entries.shape),
        "rectangular": field.rectangular,
        "sigma_hat": field.sigma_hat,
        "provenance": field.provenance,
    }
    _custom_json_dump(data, filename)


def load_field_params(filename: str) -> dict[str, Any]:
    """Load a provenance record written by save_field_params."""
    with open(filename, "r", encoding="utf-8") as f:
        data = json.load(f)
    for key in ("generator", "shape", "provenance"):
        if key not in data:
            raise ValueError(f'Parameter file {filename} lacks "{key}".')
    return data


def arch_spec_from_params(data: dict[str, Any]) -> ArchSpec:
    """Rebuild the ArchSpec of an ARCH field from its parameter record."""
    if data.get("generator") != "arch":
        raise ValueError(f'Not an ARCH field record: {data.get("generator")}.')
    return ArchSpec(**data["provenance"]["params"])


### CURVES ####################################################################


def save_csv(
    filename: str, header: Sequence[str], rows: Iterable[Sequence[float]]
) -> None:
    """Write rows to a comma-separated file with a header row."""
    ensure_directory(os.path.dirname(filename))
    with open(filename, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_value(x) for x in row])


def load_csv(filename: str) -> tuple[list[str], np.ndarray]:
    """Read a file written by save_csv into (header, float array)."""
    with open(filename, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def save_matrix(matrix: np.ndarray, filename: str) -> None:
    """Dense float64 C-order .npy export."""
    ensure_directory(os.path.dirname(filename))
    np.save(filename, np.ascontiguousarray(matrix, dtype=np.float64))


def _csv_value(x: Any) -> str:
    # repr keeps full float precision
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


### REPORTS ###################################################################


def save_report(data: dict[str, Any], filename: str) -> None:
    """Save a run report to a json file."""
    ensure_directory(os.path.dirname(filename))
    _custom_json_dump(data, filename)


def load_report(filename: str) -> dict[str, Any]:
    """Load a run report."""
    with open(filename, "r", encoding="utf-8") as f:
        return json.load(f)


def canonical_json(data: Any) -> str:
    """Key-sorted compact JSON, the basis of config hashes."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def _custom_json_dump(data: dict[str, Any], filename: str, indent=4) -> None:
    """
    Custom JSON dump function that expands the first level of lists, one item
    per line, and keeps deeper levels compact.
    """

    def format_list(lst, level):
        return ",\n".join(
            " " * level + json.dumps(item, sort_keys=True) for item in lst
        )

    items = list(data.items())
    with open(filename, "w", encoding="utf-8") as f:
        f.write("{\n")
        for k, (key, value) in enumerate(items):
            sep = "," if k < len(items) - 1 else ""
            if isinstance(value, list) and len(value) > 0:
                f.write(f'    "{key}": [\n')
                f.write(format_list(value, indent + 4))
                f.write(f"\n    ]{sep}\n")
            else:
                dumped = json.dumps(value, sort_keys=True)
                f.write(f'    "{key}": {dumped}{sep}\n')
        f.write("}\n")
