"""CSV and JSON serialization with fixed column orders.

Column orders (``n`` is the ambient dimension, coordinates are 1-based):

ContourCloud
    ``re_1, im_1, ..., re_n, im_n, x_1, ..., x_n, param_re, param_im, critical``
FiberScanResult
    ``angle_index, kind, cluster, re_1, im_1, re_2, im_2, x_1, x_2, residual, radial_error``
SampleCloud
    ``p_1, ..., p_n, param_re, param_im`` (``p`` are log or argument coordinates)
classification
    ``x_1, x_2, verdict, hull, regularity, clusters, normal_1, normal_2, note``
"""
from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError

METRICS_SCHEMA = "amoeba-scope.metrics/1"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write(path, header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def contour_csv(cloud, path=None) -> str:
    n = cloud.points.shape[1] if cloud.points.ndim == 2 else 2
    header = [c for k in range(1, n + 1) for c in (f"re_{k}", f"im_{k}")]
    header += [f"x_{k}" for k in range(1, n + 1)] + ["param_re", "param_im", "critical"]
    rows = []
    for i in range(len(cloud)):
        p = cloud.points[i]
        t = cloud.params[i] if cloud.params is not None else complex("nan")
        rows.append([v for z in p for v in (z.real, z.imag)] + list(cloud.logs[i]) + [t.real, t.imag, True])
    return _write(path, header, rows)


def fiber_csv(result, path=None) -> str:
    header = ["angle_index", "kind", "cluster", "re_1", "im_1", "re_2", "im_2", "x_1", "x_2",
              "residual", "radial_error"]
    rows = []
    for h in result.hits:
        p = h.point
        rows.append([h.angle_index, h.kind, h.cluster, p[0].real, p[0].imag, p[1].real, p[1].imag,
                     np.log(abs(p[0])), np.log(abs(p[1])), h.residual, h.radial_error])
    return _write(path, header, rows)


def cloud_csv(cloud, path=None) -> str:
    n = cloud.points.shape[1]
    header = [f"p_{k}" for k in range(1, n + 1)] + ["param_re", "param_im"]
    prov = cloud.provenance
    rows = []
    for i in range(len(cloud)):
        t = complex(prov[i]) if prov.ndim == 1 else complex("nan")
        rows.append(list(cloud.points[i]) + [t.real, t.imag])
    return _write(path, header, rows)


def classification_csv(results, path=None) -> str:
    header = ["x_1", "x_2", "verdict", "hull", "regularity", "clusters", "normal_1", "normal_2", "note"]
    rows = []
    for r in results:
        v = r.mean_normal
        v = (float("nan"), float("nan")) if v is None else v
        n_cl = 0 if r.fiber is None else len(r.fiber.clusters)
        rows.append([r.x[0], r.x[1], r.verdict.value, r.hull.value if r.hull else "",
                     r.regularity.value if r.regularity else "", n_cl, v[0], v[1], r.note])
    return _write(path, header, rows)


def read_points_csv(path, ndim: int = 2) -> np.ndarray:
    """Query points from a CSV file; a header row is skipped when it is not numeric."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(v) for v in row[:ndim]]
            except ValueError:
                if lineno == 1:
                    continue
                raise ValidationError(f"{path}: line {lineno} is not numeric")
            if len(vals) != ndim:
                raise ValidationError(f"{path}: line {lineno} needs {ndim} columns")
            rows.append(vals)
    return np.array(rows, dtype=np.float64).reshape(-1, ndim)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if not np.isfinite(f):
            return None if np.isnan(f) else ("inf" if f > 0 else "-inf")
        return f
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(obj, path) -> Path:
    p = Path(path)
    p.write_text(dumps_json(obj))
    return p


__all__ = [
    "METRICS_SCHEMA",
    "classification_csv",
    "cloud_csv",
    "contour_csv",
    "dumps_json",
    "fiber_csv",
    "read_points_csv",
    "write_json",
]
