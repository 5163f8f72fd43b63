"""CSV matrix format and byte-stable JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import MalformedInputError

SCHEMA_VERSION = 1


def format_float(x: float) -> str:
    """17 significant digits; non-finite values become JSON strings."""
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _encode(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(_json_string(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj, key=str)):
            if k:
                out.append(",")
            out.append(_json_string(str(key)))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for k, item in enumerate(obj):
            if k:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif hasattr(obj, "to_dict"):
        _encode(obj.to_dict(), out)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _json_string(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def dumps(obj: Any) -> str:
    """Serialize with sorted keys and 17-significant-digit floats.

    The stdlib encoder uses shortest round-trip reprs, so floats are
    written by hand to keep reports byte-stable across platforms.
    """
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)


def read_matrix_csv(source, tol_abs: float = 1e-9):
    """Parse a labelled CSV matrix into a DistanceMatrix.

    The first row carries the point labels, the remaining rows the full
    matrix. Asymmetry beyond ``tol_abs`` is rejected as malformed.
    """
    from .distances import DistanceMatrix

    if isinstance(source, (str, Path)):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise MalformedInputError(f"cannot read {source}: {exc}") from exc
    else:
        text = source.read()
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]
    if not rows:
        raise MalformedInputError("empty CSV: expected a label row")
    labels = [c.strip() for c in rows[0]]
    body = rows[1:]
    if len(body) != len(labels):
        raise MalformedInputError(f"{len(labels)} labels but {len(body)} matrix rows")
    values = []
    for r, row in enumerate(body):
        if len(row) != len(labels):
            raise MalformedInputError(f"row {r} has {len(row)} entries, expected {len(labels)}")
        try:
            values.append([float(c) for c in row])
        except ValueError as exc:
            raise MalformedInputError(f"row {r}: {exc}") from exc
    arr = np.array(values, dtype=float).reshape(len(labels), len(labels))
    dm = DistanceMatrix(arr, labels)
    gap = np.abs(dm.d - dm.d.T)
    if gap.size and gap.max() > tol_abs:
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        raise MalformedInputError(
            f"asymmetric matrix: d[{i}][{j}]={float(dm.d[i, j])!r} vs d[{j}][{i}]={float(dm.d[j, i])!r}"
        )
    return dm


def write_matrix_csv(dm, target=None) -> str:
    """Write ``dm`` in the input CSV format; returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dm.labels)
    for row in dm.d:
        writer.writerow([format(float(v), ".17g") for v in row])
    text = buf.getvalue()
    if target is not None:
        Path(target).write_text(text)
    return text
