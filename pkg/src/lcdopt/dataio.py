"""Dataset parsing, trace serialization, and the optimal-value cache.

Datasets arrive as LibSVM-format text: one sample per line,
``label index:value ...`` with 1-based strictly increasing indices and
``#`` comments. Storage is dense; the bundled problems are desk scale and
the dominant solver cost is the gradient, not memory.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from pathlib import Path
import numpy as np
from filelock import FileLock

from .errors import EmptyDataset, ParseError
from .objectives import estimate_f_star
from .solvers import Trace, TraceRecord


@dataclasses.dataclass(frozen=True)
class Dataset:
    rows: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,)
    source: str = ""

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def d(self):
        return self.rows.shape[1]


@dataclasses.dataclass(frozen=True)
class RunRecord:
    metadata: dict
    trace: Trace


def _fmt(x):
    return f"{x:.17g}"


def _parse_float(token, lineno, what):
    try:
        return float(token)
    except ValueError:
        raise ParseError(lineno, f"non-numeric {what} {token!r}") from None


def parse_libsvm(source, classification=True):
    """Parse LibSVM text (a string, open file, or path) into a Dataset.

    Feature count is the largest index seen; absent features are zero.
    In classification mode two-valued label sets are mapped onto -1/+1
    (smaller value to -1).
    """
    name = ""
    if hasattr(source, "read"):
        text = source.read()
        name = getattr(source, "name", "")
    elif isinstance(source, Path) or (
            isinstance(source, str) and source and "\n" not in source
            and Path(source).is_file()):
        name = str(source)
        text = Path(source).read_text()
    else:
        text = str(source)

    labels = []
    entries = []  # per-sample list of (index, value)
    max_index = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        label = _parse_float(tokens[0], lineno, "label")
        pairs = []
        prev_index = 0
        for tok in tokens[1:]:
            idx_str, sep, val_str = tok.partition(":")
            if not sep:
                raise ParseError(lineno, f"malformed feature token {tok!r}")
            try:
                idx = int(idx_str)
            except ValueError:
                raise ParseError(lineno,
                                 f"non-integer feature index {idx_str!r}") from None
            if idx < 1:
                raise ParseError(lineno, f"feature index {idx} is not 1-based")
            if idx <= prev_index:
                raise ParseError(
                    lineno, f"feature index {idx} not strictly increasing")
            val = _parse_float(val_str, lineno, "feature value")
            if not np.isfinite(val):
                raise ParseError(lineno, f"non-finite feature value {val_str!r}")
            pairs.append((idx, val))
            prev_index = idx
        if not np.isfinite(label):
            raise ParseError(lineno, f"non-finite label {tokens[0]!r}")
        labels.append(label)
        entries.append(pairs)
        if prev_index > max_index:
            max_index = prev_index

    if not labels:
        raise EmptyDataset("no samples found")
    rows = np.zeros((len(labels), max_index))
    for i, pairs in enumerate(entries):
        for idx, val in pairs:
            rows[i, idx - 1] = val
    labels = np.asarray(labels)
    if classification:
        labels = map_class_labels(labels)
    return Dataset(rows=rows, labels=labels, source=name)


def map_class_labels(labels):
    """Map a two-valued label set onto -1/+1 (smaller value to -1)."""
    values = np.unique(labels)
    if values.size == 1 and values[0] in (-1.0, 1.0):
        return labels.astype(float)
    if values.size != 2:
        raise ValueError(
            f"classification labels must take two values, got {values}")
    return np.where(labels == values[0], -1.0, 1.0)


def serialize_libsvm(dataset):
    """Write a Dataset back to LibSVM text; zeros are omitted, floats keep
    17 significant digits so a reparse reproduces them bit-exactly."""
    lines = []
    for i in range(dataset.n):
        parts = [_fmt(dataset.labels[i])]
        row = dataset.rows[i]
        for j in np.nonzero(row)[0]:
            parts.append(f"{j + 1}:{_fmt(row[j])}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def min_max_scale(dataset):
    """Per-column min-max scaling onto [0, 1]; constant columns map to 0."""
    lo = dataset.rows.min(axis=0)
    hi = dataset.rows.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return Dataset(rows=(dataset.rows - lo) / span, labels=dataset.labels,
                   source=dataset.source)


def dataset_hash(dataset):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(dataset.rows).tobytes())
    h.update(np.ascontiguousarray(dataset.labels).tobytes())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# Trace CSV
# ---------------------------------------------------------------------------

TRACE_HEADER = "k,f_gap,grad_norm,step_norm,newton_iters,elapsed_s"


def write_trace_csv(record, path):
    """One CSV row per iteration plus a JSON metadata sidecar.

    Floats are serialized with 17 significant digits, so parsing the file
    back reproduces the trace bit-exactly.
    """
    path = Path(path)
    lines = [TRACE_HEADER]
    for r in record.trace.records:
        lines.append(",".join([
            str(r.k), _fmt(r.f_gap), _fmt(r.grad_norm), _fmt(r.step_norm),
            str(r.newton_iters), _fmt(r.elapsed_s),
        ]))
    path.write_text("\n".join(lines) + "\n")
    meta = dict(record.metadata)
    meta["status"] = record.trace.status
    meta["iterations"] = len(record.trace.records)
    if record.trace.error:
        meta["error"] = record.trace.error
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")
    return path


def read_trace_csv(path):
    """Parse a trace CSV back into TraceRecord rows."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ParseError(1, "missing trace header")
    records = []
    for line in lines[1:]:
        k, f_gap, grad_norm, step_norm, newton_iters, elapsed = line.split(",")
        records.append(TraceRecord(
            k=int(k), f_gap=float(f_gap), grad_norm=float(grad_norm),
            step_norm=float(step_norm), newton_iters=int(newton_iters),
            elapsed_s=float(elapsed),
        ))
    return records


# ---------------------------------------------------------------------------
# Optimal-value cache
# ---------------------------------------------------------------------------


def fstar_cache_get_or_compute(obj, key, results_dir, budget=200_000,
                               tol=1e-10, lower_bound=0.0):
    """Cached reference optimum keyed by dataset hash + hyperparameters.

    Entries live under <results_dir>/fstar/<key>.json with provenance;
    access is serialized through an advisory file lock. Corrupt entries
    are recomputed and overwritten.
    """
    cache_dir = Path(results_dir) / "fstar"
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"{key}.json"
    lock = FileLock(str(path) + ".lock")
    with lock:
        if path.exists():
            try:
                payload = json.loads(path.read_text())
                return float(payload["value"])
            except (ValueError, KeyError, TypeError):
                pass  # corrupt entry: fall through and recompute
        est = estimate_f_star(obj, budget=budget, tol=tol,
                              lower_bound=lower_bound)
        payload = {
            "value": est.value,
            "provenance": {
                "method": est.method,
                "converged": est.converged,
                "grad_norm": est.grad_norm,
                "iterations": est.iterations,
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
            },
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")
        return float(est.value)
