"""Line-delimited JSON reading and deterministic writing.

Floats are written with 17 significant digits so every value survives a
write/read round trip bit-for-bit.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError


def format_float(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj):
    """Compact JSON with fixed float formatting; dict key order is preserved."""
    parts = []
    _encode(obj, parts)
    return "".join(parts)


def _encode(obj, out):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if k:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _encode(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for k, val in enumerate(obj):
            if k:
                out.append(",")
            _encode(val, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def iter_lines(source):
    """Yield ``(line_number, text)`` for non-blank lines of a path or file object."""
    if isinstance(source, (str, Path)):
        try:
            fh = open(source, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc}") from exc
        with fh:
            yield from _numbered(fh)
    else:
        yield from _numbered(source)


def _numbered(lines):
    for k, line in enumerate(lines, start=1):
        line = line.strip()
        if line:
            yield k, line


def parse_line(lineno, text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"line {lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise InputError(f"line {lineno}: expected a JSON object")
    return obj


def read_jsonl(source):
    """All records of a line-delimited file; the first malformed line raises."""
    return [parse_line(k, t) for k, t in iter_lines(source)]


def write_jsonl(records, dest):
    """Write dict records one per line to a path or file object."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            return write_jsonl(records, fh)
    n = 0
    for rec in records:
        dest.write(dumps(rec))
        dest.write("\n")
        n += 1
    return n
