"""Line-delimited JSON reports.

The first line is a header record carrying the format version, toolkit
version, command, seed and tolerances; each further line is one record with
a ``record`` tag. Keys are sorted and floats use Python's shortest
round-trip representation, so identical runs produce identical bytes and
parsing restores every double exactly. Complex numbers are written as
``[re, im]`` pairs.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, jordan, simcore

FORMAT = "qvpkit-report"
FORMAT_VERSION = 1

TOLERANCES = {
    "build": simcore.TOL_BUILD,
    "equality": simcore.TOL_EQ,
    "cluster": jordan.CLUSTER_TOL,
    "eigenspace": jordan.EIGENSPACE_TOL,
}


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, complex numbers and Fractions to JSON values."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return str(v)
        return v
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def sparse_state(vec: np.ndarray, tol: float = 1e-12) -> list:
    """Nonzero amplitudes of a state as ``[index, [re, im]]`` pairs."""
    vec = np.asarray(vec, dtype=complex)
    return [[int(i), [float(vec[i].real), float(vec[i].imag)]] for i in np.flatnonzero(np.abs(vec) > tol)]


@dataclass
class Report:
    command: str
    seed: int
    records: list[dict] = field(default_factory=list)

    def header(self) -> dict:
        return {"record": "header", "format": FORMAT, "version": FORMAT_VERSION,
                "toolkit": __version__, "command": self.command, "seed": self.seed,
                "tolerances": dict(TOLERANCES)}

    def add(self, kind: str, **fields) -> dict:
        rec = {"record": kind, **to_jsonable(fields)}
        self.records.append(rec)
        return rec

    def find(self, kind: str) -> list[dict]:
        return [r for r in self.records if r["record"] == kind]

    def to_text(self) -> str:
        lines = [self.header(), *self.records]
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in lines)

    @classmethod
    def from_text(cls, text: str) -> "Report":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not rows or rows[0].get("record") != "header" or rows[0].get("format") != FORMAT:
            raise ValueError("not a report: missing header line")
        return cls(rows[0]["command"], rows[0]["seed"], rows[1:])

    def write(self, path: str | os.PathLike) -> None:
        write_atomic(path, self.to_text())


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_report(path: str | os.PathLike) -> Report:
    return Report.from_text(Path(path).read_text())


def report_differences(expected: Report, actual: Report, tol: float = 1e-8) -> list[str]:
    """Paths where two reports disagree: floats within ``tol``, everything else exactly."""
    diffs: list[str] = []

    def walk(a: Any, b: Any, path: str) -> None:
        if isinstance(a, float) or isinstance(b, float):
            if not (isinstance(a, (int, float)) and isinstance(b, (int, float))) or \
                    isinstance(a, bool) or isinstance(b, bool) or abs(a - b) > tol:
                diffs.append(f"{path}: {a!r} != {b!r}")
        elif isinstance(a, dict) and isinstance(b, dict):
            if set(a) != set(b):
                diffs.append(f"{path}: keys {sorted(set(a) ^ set(b))} differ")
            for k in sorted(set(a) & set(b)):
                walk(a[k], b[k], f"{path}.{k}")
        elif isinstance(a, list) and isinstance(b, list):
            if len(a) != len(b):
                diffs.append(f"{path}: length {len(a)} != {len(b)}")
            for i, (x, y) in enumerate(zip(a, b)):
                walk(x, y, f"{path}[{i}]")
        elif a != b:
            diffs.append(f"{path}: {a!r} != {b!r}")

    walk([expected.header(), *expected.records], [actual.header(), *actual.records], "report")
    return diffs
