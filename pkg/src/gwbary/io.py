"""JSON input parsing and round-trip-safe JSON/CSV output."""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .measure import DiscreteMeasure, GroundMetric, ValidationError, normalize_measure


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"{path}: no such file", "path") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})",
                              "json") from None


def _number_array(value, field, ndim):
    if not isinstance(value, list):
        raise ValidationError(f"'{field}' must be an array", field)
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"'{field}' must be a rectangular array of numbers", field) from None
    if any(isinstance(v, bool) for v in np.ravel(np.array(value, dtype=object))):
        raise ValidationError(f"'{field}' must contain only numbers", field)
    if arr.size == 0:
        return arr.reshape((0,) * ndim)
    if arr.ndim != ndim:
        shape = "an array of equal-length arrays" if ndim == 2 else "a flat array"
        raise ValidationError(f"'{field}' must be {shape} of numbers", field)
    return arr


def measure_from_dict(data, normalize=True):
    if not isinstance(data, dict):
        raise ValidationError("a measure must be a JSON object", "measure")
    for key in ("points", "masses"):
        if key not in data:
            raise ValidationError(f"missing key '{key}'", key)
    masses = _number_array(data["masses"], "masses", 1)
    points = _number_array(data["points"], "points", 2)
    if points.size == 0:
        points = points.reshape(0, 1)
    mu = DiscreteMeasure(points, masses)
    return normalize_measure(mu) if normalize else mu


def load_measure(path, normalize=True):
    """Read a measure file; duplicates are merged and zero masses dropped."""
    return measure_from_dict(_load_json(path), normalize)


def load_metric(source):
    """``"euclidean"`` or the path of a JSON file ``{"matrix": [[...]]}``."""
    if source is None or source == "euclidean":
        return GroundMetric.euclidean()
    data = _load_json(source)
    if not isinstance(data, dict) or "matrix" not in data:
        raise ValidationError("metric file needs a 'matrix' key", "matrix")
    return GroundMetric.explicit(_number_array(data["matrix"], "matrix", 2))


def measure_to_dict(mu):
    return {"points": mu.points.tolist(), "masses": mu.masses.tolist()}


def format_float(x):
    """17 significant digits, always readable back as a float; non-finite values become null."""
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()
