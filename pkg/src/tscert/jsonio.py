"""JSON serialization with round-trip-exact floats.

Floats are written with 17 significant digits, which is enough for
binary64 values to survive a write/read cycle bit-exactly. Non-finite
floats are rejected because they have no JSON representation.
"""

from __future__ import annotations

import json
import math

import numpy as np


def _format(obj, indent, level):
    compact = indent is None
    pad = "" if compact else " " * (indent * level)
    inner = "" if compact else " " * (indent * (level + 1))
    open_sep, item_sep, close_sep = ("", ", ", "") if compact else ("\n", ",\n", "\n")
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key, value in obj.items():
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {type(key)}")
            items.append(f"{inner}{json.dumps(key)}: {_format(value, indent, level + 1)}")
        return "{" + open_sep + item_sep.join(items) + close_sep + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{_format(v, indent, level + 1)}" for v in obj]
        return "[" + open_sep + item_sep.join(items) + close_sep + pad + "]"
    if isinstance(obj, np.ndarray):
        return _format(obj.tolist(), indent, level)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            raise ValueError("non-finite float cannot be serialized")
        return format(value, ".17g")
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def dumps(obj, indent=2) -> str:
    """Serialize to JSON text with 17-significant-digit floats.

    indent=None produces a single compact line (for JSON-lines output).
    """
    return _format(obj, indent, 0)


def dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj) + "\n")


def loads(text: str):
    return json.loads(text)


def load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
