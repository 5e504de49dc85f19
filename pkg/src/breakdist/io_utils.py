"""File formats: series CSV, change-point-set CSV, distance-matrix CSV,
flat key=value config files, and diffable JSON.

All numeric output is serialized with 12 significant digits so that
reports from identical runs compare byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .changepoint import Series
from .errors import DataError
from .matrix import DistanceMatrix
from .sets import ChangePointSet

PathLike = Union[str, Path]

_SIG_DIGITS = 12


def _read_lines(path: Path) -> list[list[str]]:
    """CSV rows of a file, with OSError surfaced as DataError."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def fmt_num(x: float) -> str:
    """Render one number with 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    f = float(x)
    if math.isnan(f) or math.isinf(f):
        return str(f)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return f"{f:.{_SIG_DIGITS}g}"


def _round_floats(obj):
    """Recursively round floats to 12 significant digits for JSON output."""
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isfinite(f):
            return float(f"{f:.{_SIG_DIGITS}g}")
        return None if math.isnan(f) else f
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist())
    return obj


def dump_json(obj: dict) -> str:
    """Deterministic JSON text: sorted keys, rounded floats, no timestamps."""
    return json.dumps(_round_floats(obj), indent=2, sort_keys=True) + "\n"


def write_json(path: PathLike, obj: dict) -> None:
    Path(path).write_text(dump_json(obj), encoding="utf-8")


# ---------------------------------------------------------------------------
# series CSV: header row of labels, one column per series, rows = time steps


def load_csv(path: PathLike) -> list[Series]:
    """Read a collection of series from a column-oriented CSV file.

    The first line names the series; each subsequent line holds one
    observation per series.  Columns may end early (ragged lengths), but
    a blank cell must not be followed by a value in the same column.
    """
    path = Path(path)
    rows = [r for r in _read_lines(path) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    labels = [c.strip() for c in rows[0]]
    if len(rows) < 2:
        raise DataError(f"{path}: no data rows below the header")
    for j, lab in enumerate(labels):
        if not lab:
            raise DataError(f"{path}: blank series label in header column {j + 1}")
    if len(set(labels)) != len(labels):
        raise DataError(f"{path}: duplicate series labels in header")
    columns: list[list[float]] = [[] for _ in labels]
    ended = [False] * len(labels)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) > len(labels):
            raise DataError(f"{path}: row {i} has more cells than header columns")
        for j, lab in enumerate(labels):
            cell = row[j].strip() if j < len(row) else ""
            if cell == "":
                ended[j] = True
                continue
            if ended[j]:
                raise DataError(
                    f"{path}: row {i}, column {lab!r}: value after a blank cell; "
                    "blanks may only pad the end of a column"
                )
            try:
                columns[j].append(float(cell))
            except ValueError:
                raise DataError(
                    f"{path}: row {i}, column {lab!r}: non-numeric value {cell!r}"
                ) from None
    series = []
    for lab, col in zip(labels, columns):
        if not col:
            raise DataError(f"{path}: column {lab!r} has no values")
        series.append(Series(np.asarray(col), label=lab))
    return series


def log_returns(s: Series) -> Series:
    """Log returns r_t = ln(x_{t+1} / x_t); output is one shorter."""
    v = s.values
    if v.size < 2:
        raise DataError(f"series {s.label!r}: need at least 2 values for log returns")
    bad = np.flatnonzero(v <= 0)
    if bad.size:
        raise DataError(
            f"series {s.label!r}: non-positive value at index {int(bad[0])}; "
            "log returns require strictly positive data"
        )
    return Series(np.diff(np.log(v)), label=s.label)


# ---------------------------------------------------------------------------
# change-point-set CSV: one line per set, "label,i1,i2,..."


def load_changepoint_sets(path: PathLike) -> list[ChangePointSet]:
    """Read change-point sets, one per line, as "label,i1,i2,..."."""
    path = Path(path)
    rows = _read_lines(path)
    out = []
    for i, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row]
        if not any(cells):
            continue
        label = cells[0]
        if not label:
            raise DataError(f"{path}: line {i}: missing set label")
        body = [c for c in cells[1:] if c]
        if not body:
            raise DataError(f"{path}: line {i}: set {label!r} has no change points")
        try:
            idx = [int(c) for c in body]
        except ValueError as exc:
            raise DataError(f"{path}: line {i}: {exc}") from None
        try:
            out.append(ChangePointSet(np.asarray(idx, dtype=np.int64), label=label))
        except DataError as exc:
            raise DataError(f"{path}: line {i}: {exc}") from exc
    if not out:
        raise DataError(f"{path}: no change-point sets found")
    return out


def save_changepoint_sets(path: PathLike, sets: Sequence[ChangePointSet]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for i, s in enumerate(sets):
            label = s.label or f"s{i + 1}"
            w.writerow([label, *(str(int(p)) for p in s.points)])


# ---------------------------------------------------------------------------
# distance-matrix CSV


def save_distance_matrix(path: PathLike, D: DistanceMatrix) -> None:
    """Square CSV with a shared label row and column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["", *D.labels])
        for lab, row in zip(D.labels, D.values):
            w.writerow([lab, *(fmt_num(v) for v in row)])


def load_distance_matrix(path: PathLike) -> DistanceMatrix:
    path = Path(path)
    rows = [r for r in _read_lines(path) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: not a distance-matrix CSV")
    labels = [c.strip() for c in rows[0][1:]]
    n = len(labels)
    if len(rows) != n + 1:
        raise DataError(f"{path}: expected {n} data rows, found {len(rows) - 1}")
    values = np.empty((n, n), dtype=np.float64)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n + 1:
            raise DataError(f"{path}: row {i}: expected {n + 1} cells, found {len(row)}")
        if row[0].strip() != labels[i - 2]:
            raise DataError(
                f"{path}: row {i}: row label {row[0].strip()!r} does not match "
                f"header label {labels[i - 2]!r}"
            )
        for j, cell in enumerate(row[1:]):
            try:
                values[i - 2, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: row {i}, column {labels[j]!r}: non-numeric value {cell!r}"
                ) from None
    return DistanceMatrix(values, labels)


# ---------------------------------------------------------------------------
# flat key=value config files


def read_config(path: PathLike) -> dict[str, str]:
    """Parse a flat key=value file; '#' lines are comments.

    Values keep their text form (quotes stripped); interpretation is the
    caller's job so that the same file can feed CLI-flag merging.
    """
    path = Path(path)
    out: dict[str, str] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}: line {i}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise DataError(f"{path}: line {i}: missing key")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        if key in out:
            raise DataError(f"{path}: line {i}: duplicate key {key!r}")
        out[key] = value
    return out
