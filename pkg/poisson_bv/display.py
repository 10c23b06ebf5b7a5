"""
Rendering of results as deterministic JSON or as CSV tables for plotting.

Complex numbers appear as [re, im] pairs in JSON and as re_*/im_* column
pairs in CSV.
"""

import csv
import io
import json
from collections.abc import Mapping, Sequence
from typing import Any

import numpy as np

from poisson_bv.models.boundary import BoundaryFunction, InversionReport
from poisson_bv.models.space import BoundaryPoint


def render_json(payload: Any) -> str:
    """JSON with sorted keys; identical payloads give identical bytes."""
    return json.dumps(payload, sort_keys=True, indent=2)


def complex_columns(name: str, value: complex) -> dict[str, float]:
    value = complex(value)
    return {f"re_{name}": float(value.real), f"im_{name}": float(value.imag)}


def _angle_columns(b: BoundaryPoint) -> dict[str, float]:
    return {f"b{j + 1}": float(a) for j, a in enumerate(b.angles)}


def scalar_rows(values: Mapping[str, Any]) -> list[dict[str, Any]]:
    """One row; complex entries are split into re/im columns."""
    row: dict[str, Any] = {}
    for name, value in values.items():
        if isinstance(value, (complex, np.complexfloating)):
            row.update(complex_columns(name, value))
        else:
            row[name] = value
    return [row]


def vector_rows(name: str, vectors: Sequence[np.ndarray], labels: Sequence[str]) -> list[dict]:
    """One row per labelled complex vector, coordinates as re_name_j/im_name_j."""
    rows = []
    for label, vector in zip(labels, vectors, strict=True):
        row: dict[str, Any] = {"label": label}
        for j, value in enumerate(np.atleast_1d(vector), start=1):
            row.update(complex_columns(f"{name}_{j}", value))
        rows.append(row)
    return rows


def inversion_rows(report: InversionReport) -> list[dict[str, Any]]:
    """Per boundary point: angles, bv, c(lambda) f and the error."""
    rows = []
    for point in report.points:
        row: dict[str, Any] = _angle_columns(point.b)
        row.update(complex_columns("bv", point.bv))
        row.update(complex_columns("target", point.target))
        row["error"] = point.error
        rows.append(row)
    return rows


def boundary_rows(f: BoundaryFunction, points: Sequence[BoundaryPoint]) -> list[dict[str, Any]]:
    rows = []
    for b in points:
        row: dict[str, Any] = _angle_columns(b)
        row.update(complex_columns("value", f(b)))
        rows.append(row)
    return rows


def series_rows(coeffs: np.ndarray, index_name: str = "k") -> list[dict[str, Any]]:
    """One row per coefficient; vector coefficients get one column pair per component."""
    rows = []
    for k, value in enumerate(np.asarray(coeffs)):
        row: dict[str, Any] = {index_name: k}
        components = np.atleast_1d(value)
        if components.shape == (1,):
            row.update(complex_columns("u", components[0]))
        else:
            for i, c in enumerate(components, start=1):
                row.update(complex_columns(f"u{i}", c))
        rows.append(row)
    return rows


def render_csv(rows: Sequence[Mapping[str, Any]]) -> str:
    """CSV with the column order of the first row."""
    if not rows:
        return ""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buffer.getvalue()
