"""CSV and JSON writers shared by the experiment runners and the CLI."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def jsonable(obj):
    """Convert numpy scalars and non-finite floats into plain JSON values.

    Infinities become the strings ``"inf"`` / ``"-inf"`` and NaN becomes
    ``None`` so the output stays strict JSON.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True)


def write_json(path, obj) -> str:
    text = dumps(obj)
    Path(path).write_text(text + "\n")
    return text


def fmt(x) -> str:
    """Full-precision text for a number; empty for ``None``."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
