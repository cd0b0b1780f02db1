"""Deterministic CSV/JSON emission with resume support.

Every sweep writes rows in a canonical key order with shortest-roundtrip
float formatting, so identical configs reproduce byte-identical files and an
interrupted sweep can be resumed: the existing file is kept as long as its
rows match a prefix of the planned key sequence and recomputation continues
from the first missing key.
"""

from __future__ import annotations

import json
import os
import platform
import sys
from typing import Iterable

import numpy as np

SCHEMA_VERSION = 1

GAP_HEADER = [
    "model", "N", "instance", "h", "t_mode", "t", "beta",
    "delta", "lambda2", "reducible", "db_residual",
]
GAP_KEY = ["model", "N", "instance", "h", "t_mode", "t"]

FIT_HEADER = ["model", "t_mode", "h", "k", "prefactor_log2", "residual", "n_points"]

BASELINE_FIT_HEADER = ["model", "strategy", "beta", "k", "prefactor_log2", "residual"]

IPR_WINDOW_HEADER = [
    "model", "N", "instance", "h", "window_lo", "window_hi", "mean_ipr",
]
IPR_WINDOW_KEY = ["model", "N", "instance", "h"]

IPR_VECTOR_HEADER = ["model", "N", "h", "index", "energy", "ipr"]
IPR_VECTOR_KEY = ["model", "N", "h", "index"]

TIME_TRACE_HEADER = [
    "model", "N", "h", "h_role", "t", "mean_delta", "stderr_delta", "long_time_mean",
]
TIME_TRACE_KEY = ["model", "N", "h_role", "t"]

ISING_BOUND_HEADER = ["N", "h", "t_mode", "t", "beta", "first_term_log", "second_term", "total"]
ISING_BOUND_KEY = ["N", "h", "t_mode", "t"]

CUT_HEADER = [
    "N", "instance", "h", "beta", "cut_threshold", "delta", "lambda_B",
    "fg", "cs", "ipr_bound", "fe_bound", "S_f", "S_g", "E_c",
]
CUT_KEY = ["N", "instance", "h", "cut_threshold"]


def fmt(value) -> str:
    """Canonical cell formatting: shortest float repr, lowercase booleans."""
    if value is None or value == "":
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


class ResumableWriter:
    """Append-only CSV writer that resumes from a matching row prefix."""

    def __init__(self, path: str, header: list[str], key_columns: list[str]):
        self.path = path
        self.header = header
        self.key_columns = key_columns
        self._key_idx = [header.index(c) for c in key_columns]
        self._existing: list[list[str]] = []
        if os.path.exists(path):
            self._load_existing()
        self._fp = None
        self._cursor = 0  # rows already emitted this session
        self.rows_written = 0

    def _load_existing(self) -> None:
        with open(self.path, encoding="utf-8") as fp:
            lines = fp.read().split("\n")
        if not lines or lines[0] != ",".join(self.header):
            # Unknown header: start over rather than mixing schemas.
            self._existing = []
            return
        for line in lines[1:]:
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != len(self.header):
                break  # torn tail line from an interrupted run
            self._existing.append(cells)

    def existing_key(self, position: int) -> tuple | None:
        if position < len(self._existing):
            return tuple(self._existing[position][i] for i in self._key_idx)
        return None

    def _open(self, keep_rows: int) -> None:
        mode = "w"
        with open(self.path, mode, encoding="utf-8") as fp:
            fp.write(",".join(self.header) + "\n")
            for row in self._existing[:keep_rows]:
                fp.write(",".join(row) + "\n")
        self._fp = open(self.path, "a", encoding="utf-8")

    def begin(self, planned_keys: list[tuple]) -> int:
        """Trim the file to the prefix matching ``planned_keys``; return its length."""
        matched = 0
        for row in self._existing:
            if matched >= len(planned_keys):
                break
            key = tuple(row[i] for i in self._key_idx)
            if key == planned_keys[matched]:
                matched += 1
            else:
                break
        self._open(matched)
        self._cursor = matched
        self.rows_written = matched
        return matched

    def write_row(self, values: dict) -> None:
        line = ",".join(fmt(values.get(col)) for col in self.header)
        self._fp.write(line + "\n")
        self.rows_written += 1

    def flush(self) -> None:
        if self._fp is not None:
            self._fp.flush()
            os.fsync(self._fp.fileno())

    def close(self) -> None:
        if self._fp is not None:
            self._fp.close()
            self._fp = None


def plain_csv(path: str, header: list[str], rows: Iterable[dict]) -> int:
    """One-shot CSV emission for post-processed outputs (fits, summaries)."""
    count = 0
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(",".join(header) + "\n")
        for row in rows:
            fp.write(",".join(fmt(row.get(col)) for col in header) + "\n")
            count += 1
    return count


def key_of(values: dict, key_columns: list[str]) -> tuple:
    return tuple(fmt(values.get(col)) for col in key_columns)


def write_resolved_config(out_dir: str, resolved: dict) -> None:
    path = os.path.join(out_dir, "config.resolved.json")
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(resolved, fp, indent=2, sort_keys=True)
        fp.write("\n")


def write_manifest(out_dir: str, file_rows: dict, wall_time_s: float, failures: int) -> None:
    from . import __version__

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "files": file_rows,
        "failures": failures,
        "wall_time_s": round(wall_time_s, 3),
        "versions": {
            "package": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fp:
        json.dump(manifest, fp, indent=2, sort_keys=True)
        fp.write("\n")


def log(message: str) -> None:
    print(message, file=sys.stderr, flush=True)
