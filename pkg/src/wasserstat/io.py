"""CSV and JSON ingestion and export.

All files are UTF-8, comma-separated, with `#`-prefixed comment lines
ignored. Numeric output carries 12 significant digits so reruns are
byte-comparable. Readers return labels alongside data; alignment against
a reference labeling (reordering, unknown-label errors) happens in
align_values so every front-end path shares one rule.
"""
from __future__ import annotations

import csv
import io as _stdio
import json
import sys

import numpy as np

from .errors import DataMismatchError, InputError
from .ground import Counts, GroundSpace, Measure
from .limits import LimitDraws
from .resampling import BootstrapDraws
from .trees import Tree


def fmt(x: float) -> str:
    """Format one float with 12 significant digits."""
    return f"{float(x):.12g}"


def round12(x: float) -> float:
    return float(fmt(x))


def _data_lines(path: str) -> list[str]:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    lines = []
    for line in raw.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        lines.append(line)
    return lines


def _csv_rows(path: str) -> list[list[str]]:
    lines = _data_lines(path)
    if not lines:
        raise InputError(f"{path}: file has no data rows")
    return [[cell.strip() for cell in row] for row in csv.reader(lines)]


def _parse_float(cell: str, path: str, what: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise InputError(f"{path}: bad {what} value {cell!r}") from None


def _parse_count(cell: str, path: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise InputError(f"{path}: bad count value {cell!r} (integer required)") from None


def _check_header(row: list[str], expected: list[str], path: str):
    if [c.lower() for c in row] != expected:
        raise InputError(f"{path}: expected header {','.join(expected)!r}, got {','.join(row)!r}")


def _check_unique(labels: list[str], path: str):
    seen = set()
    for lab in labels:
        if lab in seen:
            raise InputError(f"{path}: duplicate id {lab!r}")
        seen.add(lab)


def read_measure(path: str) -> tuple[list[str], Measure]:
    """Measure file: header id,mass."""
    rows = _csv_rows(path)
    _check_header(rows[0], ["id", "mass"], path)
    labels, values = [], []
    for row in rows[1:]:
        if len(row) != 2:
            raise InputError(f"{path}: expected 2 columns, got {len(row)}")
        labels.append(row[0])
        values.append(_parse_float(row[1], path, "mass"))
    _check_unique(labels, path)
    try:
        measure = Measure.from_array(np.array(values), renormalize=True)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    return labels, measure


def read_counts(path: str) -> tuple[list[str], Counts]:
    """Counts file: header id,count with integer counts."""
    rows = _csv_rows(path)
    _check_header(rows[0], ["id", "count"], path)
    labels, values = [], []
    for row in rows[1:]:
        if len(row) != 2:
            raise InputError(f"{path}: expected 2 columns, got {len(row)}")
        labels.append(row[0])
        values.append(_parse_count(row[1], path))
    _check_unique(labels, path)
    try:
        counts = Counts(np.array(values, dtype=np.int64))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    return labels, counts


def read_observations(path: str) -> dict[str, int]:
    """Sample file: either one observation label per line or id,count rows.

    Returns label -> count in first-appearance order; the caller aligns
    against the ground space and decides what unknown labels mean.
    """
    lines = _data_lines(path)
    if not lines:
        raise InputError(f"{path}: file has no data rows")
    first = [c.strip().lower() for c in next(csv.reader([lines[0]]))]
    counts: dict[str, int] = {}
    if first == ["id", "count"]:
        for row in csv.reader(lines[1:]):
            row = [c.strip() for c in row]
            if len(row) != 2:
                raise InputError(f"{path}: expected 2 columns, got {len(row)}")
            if row[0] in counts:
                raise InputError(f"{path}: duplicate id {row[0]!r}")
            counts[row[0]] = _parse_count(row[1], path)
    else:
        for line in lines:
            label = line.strip()
            counts[label] = counts.get(label, 0) + 1
    return counts


def read_points(path: str) -> GroundSpace:
    """Points file: header id,c1,...,cd."""
    rows = _csv_rows(path)
    header = [c.lower() for c in rows[0]]
    if len(header) < 2 or header[0] != "id" or header[1:] != [f"c{i}" for i in range(1, len(header))]:
        raise InputError(f"{path}: expected header id,c1,...,cd, got {','.join(rows[0])!r}")
    d = len(header) - 1
    labels, coords = [], []
    for row in rows[1:]:
        if len(row) != d + 1:
            raise InputError(f"{path}: expected {d + 1} columns, got {len(row)}")
        labels.append(row[0])
        coords.append([_parse_float(c, path, "coordinate") for c in row[1:]])
    _check_unique(labels, path)
    try:
        return GroundSpace(labels=tuple(labels), coords=np.array(coords))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def read_cost(path: str, exponent: float = 1.0) -> tuple[list[str], np.ndarray]:
    """Cost file: (N+1) x (N+1) grid; first row and column carry the ids."""
    rows = _csv_rows(path)
    header = rows[0]
    n = len(header) - 1
    if n < 1:
        raise InputError(f"{path}: cost matrix needs at least one point")
    labels = header[1:]
    _check_unique(labels, path)
    if len(rows) != n + 1:
        raise InputError(f"{path}: expected {n + 1} rows, got {len(rows)}")
    entries = np.empty((n, n))
    for i, row in enumerate(rows[1:]):
        if len(row) != n + 1:
            raise InputError(f"{path}: expected {n + 1} columns, got {len(row)}")
        if row[0] != labels[i]:
            raise InputError(
                f"{path}: row id {row[0]!r} does not match column id {labels[i]!r}"
            )
        entries[i] = [_parse_float(c, path, "cost") for c in row[1:]]
    return labels, entries


def read_tree(path: str) -> Tree:
    """Tree file: header child,parent,weight.

    The root is either a self-parent row with weight 0, or left out and
    inferred as the unique label that appears as a parent only.
    """
    rows = _csv_rows(path)
    _check_header(rows[0], ["child", "parent", "weight"], path)
    edges: dict[str, tuple[str, float]] = {}
    order: list[str] = []
    seen: set[str] = set()
    for row in rows[1:]:
        if len(row) != 3:
            raise InputError(f"{path}: expected 3 columns, got {len(row)}")
        child, parent = row[0], row[1]
        weight = _parse_float(row[2], path, "weight")
        if child in edges:
            raise InputError(f"{path}: duplicate child {child!r}")
        if child == parent and weight != 0.0:
            raise InputError(f"{path}: root row {child!r} must have weight 0")
        edges[child] = (parent, weight)
        for lab in (child, parent):
            if lab not in seen:
                seen.add(lab)
                order.append(lab)
    roots = [lab for lab in order if lab not in edges or edges[lab][0] == lab]
    if len(roots) != 1:
        raise InputError(f"{path}: expected exactly one root, found {len(roots)}")
    root = roots[0]
    index = {lab: i for i, lab in enumerate(order)}
    parent = np.empty(len(order), dtype=np.int64)
    weight = np.zeros(len(order))
    for lab in order:
        if lab == root:
            parent[index[lab]] = index[lab]
            continue
        par, w = edges[lab]
        parent[index[lab]] = index[par]
        weight[index[lab]] = w
    try:
        return Tree(order, parent, weight)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def align_values(
    labels: list[str], values: np.ndarray, ref_labels, what: str
) -> np.ndarray:
    """Reorder values given per labels into the reference label order."""
    ref = list(ref_labels)
    if sorted(labels) != sorted(ref):
        missing = sorted(set(ref) - set(labels))
        extra = sorted(set(labels) - set(ref))
        parts = []
        if missing:
            parts.append(f"missing ids {missing}")
        if extra:
            parts.append(f"unknown ids {extra}")
        raise DataMismatchError(f"{what}: labels do not match ground space ({'; '.join(parts)})")
    pos = {lab: i for i, lab in enumerate(labels)}
    idx = np.array([pos[lab] for lab in ref], dtype=np.int64)
    return np.asarray(values)[idx]


def align_observations(obs: dict[str, int], ref_labels, what: str) -> Counts:
    """Counts over the reference labels; labels outside them are an error."""
    ref = list(ref_labels)
    known = set(ref)
    unknown = sorted(set(obs) - known)
    if unknown:
        raise DataMismatchError(f"{what}: observations on unknown ids {unknown}")
    values = np.array([obs.get(lab, 0) for lab in ref], dtype=np.int64)
    try:
        return Counts(values)
    except ValueError as exc:
        raise DataMismatchError(f"{what}: {exc}") from None


def _open_out(path: str | None):
    if path is None:
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from None


def json_dumps(payload) -> str:
    """Serialize with floats pre-rounded to 12 significant digits."""

    def walk(obj):
        if isinstance(obj, float):
            return round12(obj)
        if isinstance(obj, dict):
            return {k: walk(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [walk(v) for v in obj]
        return obj

    return json.dumps(walk(payload))


def _write_table(path: str | None, header: list[str], rows, meta: dict | None):
    """CSV table; metadata goes to a .meta.json sidecar, or to a leading
    comment line when writing to stdout."""
    buf = _stdio.StringIO()
    if meta is not None and path is None:
        buf.write("# " + json_dumps(meta) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    out, close = _open_out(path)
    try:
        out.write(buf.getvalue())
    finally:
        if close:
            out.close()
    if meta is not None and path is not None:
        with open(path + ".meta.json", "w", encoding="utf-8") as fh:
            fh.write(json_dumps(meta) + "\n")


def draws_metadata(draws: LimitDraws) -> dict:
    return {
        "regime": draws.regime,
        "p": draws.p,
        "lambda": draws.lam,
        "M": draws.M,
        "seed": draws.seed,
    }


def write_draws(path: str | None, draws: LimitDraws):
    rows = ((i, fmt(v)) for i, v in enumerate(draws.draws))
    _write_table(path, ["draw_index", "value"], rows, draws_metadata(draws))


def bootstrap_metadata(draws: BootstrapDraws) -> dict:
    return {
        "scheme": draws.scheme,
        "B": draws.B,
        "k": draws.k,
        "seed": draws.seed,
        "n": draws.n,
        "m": draws.m,
        "inconsistent": draws.inconsistent,
    }


def write_bootstrap(path: str | None, draws: BootstrapDraws):
    rows = ((i, fmt(v)) for i, v in enumerate(draws.values))
    _write_table(path, ["rep", "value"], rows, bootstrap_metadata(draws))


def write_plan(path: str | None, labels, plan: np.ndarray, atol: float = 1e-12):
    """Plan triplets from_id,to_id,mass for entries above atol."""
    labels = list(labels)
    rows = []
    for i, j in zip(*np.nonzero(plan > atol)):
        rows.append((labels[i], labels[j], fmt(plan[i, j])))
    _write_table(path, ["from_id", "to_id", "mass"], rows, None)


def write_convergence(path: str | None, rows):
    table = ((row.L, fmt(row.alpha), fmt(row.p), row.n, fmt(row.ks)) for row in rows)
    _write_table(path, ["L", "alpha", "p", "n", "ks"], table, None)


def write_json(path: str | None, payload: dict):
    out, close = _open_out(path)
    try:
        out.write(json_dumps(payload) + "\n")
    finally:
        if close:
            out.close()
