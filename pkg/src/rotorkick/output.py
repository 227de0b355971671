"""CSV and JSON manifest writers.  Files are written to a temporary name and renamed."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CSV_SCHEMA_VERSION",
    "trajectory_header",
    "trajectory_rows",
    "atomic_write_text",
    "write_csv",
    "write_json",
    "read_csv",
]

CSV_SCHEMA_VERSION = 1


def atomic_write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return atomic_write_text(path, buf.getvalue())


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    return header, data


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, payload: dict) -> Path:
    return atomic_write_text(path, json.dumps(payload, indent=2, default=_jsonable) + "\n")


def trajectory_header(m: int, n_levels: int) -> list[str]:
    """clock, cos_expectation, target_overlap, pop_l<l>..., leaked_population."""
    pops = [f"pop_l{abs(m) + k}" for k in range(n_levels)]
    return ["clock", "cos_expectation", "target_overlap", *pops, "leaked_population"]


def trajectory_rows(traj) -> Iterable[list]:
    for i in range(len(traj.clock)):
        yield [traj.clock[i], traj.cos[i], traj.overlap[i], *traj.populations[i], traj.leaked[i]]
