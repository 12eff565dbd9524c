"""Canonical JSON serialization: sorted keys, fixed float formatting.

Reports must be byte-identical across runs and platforms, so floats are
rendered with 17 significant digits (enough to round-trip a double) and
dictionary keys are emitted in sorted order.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in report")
    if x == 0.0:
        return "0"  # normalize -0.0
    s = format(x, ".17g")
    return s


def _dump(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"non-string report key: {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _dump(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _dump(item, out)
        out.append("]")
    elif isinstance(obj, np.ndarray):
        _dump(obj.tolist(), out)
    else:
        raise TypeError(f"unserializable report value of type {type(obj)!r}")


def canonical_dumps(obj) -> str:
    """Serialize to a canonical single-line JSON string."""
    out: list[str] = []
    _dump(obj, out)
    return "".join(out)


def write_report(path: str | Path, obj) -> None:
    Path(path).write_text(canonical_dumps(obj) + "\n", encoding="ascii")
