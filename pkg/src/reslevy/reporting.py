"""Deterministic CSV and JSON report files.

Every file starts with a header recording the seed, the package version and
all numerical tolerances.  The wall-clock timestamp lives only in the
header, so two runs with the same configuration and seed produce identical
report bodies.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np

__all__ = ["make_header", "to_jsonable", "write_json", "write_csv", "atomic_write", "read_body"]

VERSION = "0.1.0"


def make_header(seed: int, tolerances: dict, command: str, timestamp: str | None = None) -> dict:
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {
        "command": command,
        "seed": int(seed),
        "timestamp": timestamp,
        "tolerances": dict(tolerances),
        "version": VERSION,
    }


def to_jsonable(value):
    """Convert numpy scalars/arrays and non-finite floats to plain JSON values.

    ``nan`` becomes ``null`` and infinities the strings ``"inf"``/``"-inf"``.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, header: dict, results) -> None:
    doc = {"header": to_jsonable(header), "results": to_jsonable(results)}
    atomic_write(path, json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n")


def _cell(v) -> str:
    v = to_jsonable(v)
    if v is None:
        return "nan"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: str, header: dict, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    """CSV with ``,`` separators and ``\\n`` line ends after a ``#`` header block."""
    buf = io.StringIO()
    flat = {k: v for k, v in header.items() if k != "tolerances"}
    for key in sorted(flat):
        buf.write(f"# {key}: {flat[key]}\n")
    for key, value in sorted(header.get("tolerances", {}).items()):
        buf.write(f"# tolerance.{key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    atomic_write(path, buf.getvalue())


def read_body(path: str) -> str:
    """Report content without the timestamp: the ``results`` of a JSON file or
    the non-header lines of a CSV file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        doc = json.loads(text)
        doc["header"].pop("timestamp", None)
        return json.dumps(doc, sort_keys=True)
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("# timestamp"))
