"""JSON state files and 17-significant-digit serialization."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidState
from .spectral import PeakonState


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return "null"
        return f"{v:.17g}"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        items = sorted(v.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(x)}" for k, x in items) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps17(obj) -> str:
    """JSON with sorted keys and floats printed to 17 significant digits."""
    return _fmt(obj)


def _number_list(obj, key):
    val = obj.get(key)
    if not isinstance(val, list) or not val:
        raise InvalidState(f"field {key!r} must be a non-empty list of numbers", field=key)
    out = []
    for v in val:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InvalidState(f"field {key!r} contains a non-numeric entry {v!r}", field=key)
        out.append(float(v))
    return out


def parse_state(text: str) -> PeakonState:
    """Parse and validate a state file ``{"x": [...], "m": [...], "t": 0}``."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidState(f"malformed JSON: {exc}", field="<json>") from exc
    if not isinstance(obj, dict):
        raise InvalidState("state file must contain a JSON object", field="<json>")
    x = _number_list(obj, "x")
    m = _number_list(obj, "m")
    t = obj.get("t", 0.0)
    if isinstance(t, bool) or not isinstance(t, (int, float)):
        raise InvalidState("field 't' must be a number", field="t")
    return PeakonState(x, m, float(t))


def load_state(path) -> PeakonState:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidState(f"cannot read state file: {exc}", field="<file>") from exc
    return parse_state(text)


def serialize_state(s: PeakonState) -> str:
    return dumps17({"m": list(s.m), "t": s.t, "x": list(s.x)}) + "\n"
