"""CSV / JSON readers and writers shared by the CLI.

CSVs are UTF-8, LF-terminated, with a header row; floats use repr so equal
inputs give byte-identical files. Missing values are empty fields.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    return rows[0], rows[1:]


def write_signal(path, x) -> Path:
    return write_csv(path, ["x"], ([v] for v in np.asarray(x, dtype=float)))


def read_signal(path) -> np.ndarray:
    header, rows = read_csv(path)
    if "x" in header:
        col = header.index("x")
    elif len(header) == 1:
        col = 0
    else:
        raise ValueError(f"{path}: no 'x' column in header {header}")
    if not rows:
        raise ValueError(f"{path}: no samples")
    try:
        return np.array([float(r[col]) for r in rows if r])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed sample row ({exc})") from None


def read_segments(path) -> list[tuple[int, int]]:
    header, rows = read_csv(path)
    try:
        i0, i1 = header.index("start"), header.index("end")
    except ValueError:
        raise ValueError(f"{path}: segments CSV needs 'start' and 'end' columns") from None
    return [(int(r[i0]), int(r[i1])) for r in rows if r]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(obj), encoding="utf-8", newline="\n")
    return path


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()
