"""CSV datasets, matrix files and the versioned model file.

Floats are written with ``repr``, the shortest decimal string that parses
back to the same double, so saved matrices and models round-trip bit-exactly
and diffs stay reproducible.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .data import (
    REGRESSION,
    Dataset,
    StandardizationParams,
    Target,
    encode_labels,
)
from .errors import DataFormatError
from .projection import Component, ProjectionModel

MODEL_FORMAT = "ispca-model/1"
MAX_CLASSES = 20


def format_float(x: float) -> str:
    return repr(float(x))


@dataclass
class Table:
    """A parsed labeled CSV before target inference."""

    feature_names: tuple
    X: np.ndarray
    raw_labels: list
    label_name: str
    label_index: int


def _resolve_label(label_column, header, n_cols, has_header) -> int:
    if label_column is None:
        return n_cols - 1
    if has_header and str(label_column) in header:
        return header.index(str(label_column))
    try:
        idx = int(label_column)
    except (TypeError, ValueError):
        raise DataFormatError(
            f"label column {label_column!r} not found; columns are {', '.join(header)}"
        ) from None
    if not -n_cols <= idx < n_cols:
        raise DataFormatError(f"label column index {idx} out of range for {n_cols} columns")
    return idx % n_cols


def read_table(path, label_column=None, has_header: bool = True, require_label: bool = True) -> Table:
    """Parse a comma-delimited UTF-8 file with one label column.

    ``label_column`` is a header name or a 0-based index (negative counts
    from the end); ``None`` means the last column.  With
    ``require_label=False`` a missing named label column yields an unlabeled
    table.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DataFormatError(f"{path}: file is empty")
    if has_header:
        header, body, first_line = [h.strip() for h in rows[0]], rows[1:], 2
    else:
        header, body, first_line = [f"col{j + 1}" for j in range(len(rows[0]))], rows, 1
    n_cols = len(header)
    for i, r in enumerate(body):
        if len(r) != n_cols:
            raise DataFormatError(
                f"{path}: row {i + first_line} has {len(r)} fields, expected {n_cols}"
            )
    if not body:
        raise DataFormatError(f"{path}: no data rows")

    try:
        lab = _resolve_label(label_column, header, n_cols, has_header)
    except DataFormatError:
        if require_label:
            raise
        lab = None
    feat_idx = [j for j in range(n_cols) if j != lab]
    X = np.empty((len(body), len(feat_idx)))
    for i, r in enumerate(body):
        for k, j in enumerate(feat_idx):
            try:
                X[i, k] = float(r[j])
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {i + first_line}, column {header[j]!r}: "
                    f"non-numeric value {r[j]!r}"
                ) from None
            if not math.isfinite(X[i, k]):
                raise DataFormatError(
                    f"{path}: row {i + first_line}, column {header[j]!r}: non-finite value"
                )
    if has_header:
        names = tuple(header[j] for j in feat_idx)
    else:
        names = tuple(f"x{k + 1}" for k in range(len(feat_idx)))
    labels = [r[lab].strip() for r in body] if lab is not None else []
    return Table(names, X, labels, header[lab] if lab is not None else "", lab if lab is not None else -1)


def infer_target(raw_labels, task: str = "auto") -> Target:
    """Regression for numeric labels with more than 20 distinct values, else classes."""
    if task not in ("auto", "regression", "classification"):
        raise DataFormatError(f"unknown task {task!r}")
    numeric = None
    try:
        numeric = np.array([float(v) for v in raw_labels])
    except ValueError:
        pass
    if task == "regression" or (task == "auto" and numeric is not None
                                and len(set(raw_labels)) > MAX_CLASSES):
        if numeric is None:
            raise DataFormatError("regression target has non-numeric labels")
        return Target(REGRESSION, numeric)
    return encode_labels(raw_labels)


def load_csv(path, label_column=None, has_header: bool = True, task: str = "auto") -> Dataset:
    table = read_table(path, label_column, has_header)
    return Dataset(table.X, infer_target(table.raw_labels, task), table.feature_names)


def matrix_csv(M, header, extra=None, extra_name: str = "label") -> str:
    """CSV text for a matrix with optional trailing string column."""
    M = np.asarray(M, dtype=float)
    cols = list(header) + ([extra_name] if extra is not None else [])
    lines = [",".join(cols)]
    for i, row in enumerate(M):
        cells = [format_float(x) for x in row]
        if extra is not None:
            cells.append(str(extra[i]))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def save_matrix(path, M, header, extra=None, extra_name: str = "label") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(matrix_csv(M, header, extra, extra_name))


def load_matrix(path) -> tuple[list, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)
    return header, data.reshape(len(rows) - 1, len(header))


def json_safe(v):
    """Convert numpy scalars to Python ones and NaN to None, recursively."""
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) else v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [json_safe(x) for x in v]
    return v


def model_document(model: ProjectionModel, w_file: str, extra: dict | None = None) -> dict:
    st = model.standardization
    doc = {
        "format": MODEL_FORMAT,
        "method": model.method,
        "config": model.config,
        "target_kind": model.target_kind,
        "label_map": [str(lab) for lab in model.labels],
        "feature_names": list(model.feature_names),
        "standardization": {
            "means": st.means.tolist(),
            "sds": st.sds.tolist(),
            "constant": st.constant.tolist(),
        },
        "z_scales": model.z_scales.tolist(),
        "n_supervised": model.n_supervised,
        "components": [c.metadata() for c in model.components],
        "warnings": list(model.warnings),
        "W_file": w_file,
    }
    if extra:
        doc.update(extra)
    return json_safe(doc)


def save_model(model: ProjectionModel, out_dir, stem: str = "model", extra: dict | None = None) -> str:
    """Write ``<stem>.json`` plus ``<stem>_W.csv``; returns the JSON path."""
    os.makedirs(out_dir, exist_ok=True)
    w_file = f"{stem}_W.csv"
    save_matrix(os.path.join(out_dir, w_file), model.W, [f"c{k + 1}" for k in range(model.K_total)])
    path = os.path.join(out_dir, f"{stem}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_document(model, w_file, extra), fh, indent=2)
        fh.write("\n")
    return path


def load_model(path) -> tuple[ProjectionModel, dict]:
    """Read a model file and its W matrix; returns the model and the raw document."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise DataFormatError(f"{path}: unsupported model format {doc.get('format')!r}")
    st = doc["standardization"]
    params = StandardizationParams(
        np.array(st["means"], dtype=float),
        np.array(st["sds"], dtype=float),
        np.array(st["constant"], dtype=bool),
    )
    _, W = load_matrix(os.path.join(os.path.dirname(os.path.abspath(path)), doc["W_file"]))
    if W.shape[0] != params.D:
        raise DataFormatError(f"{path}: W has {W.shape[0]} rows, expected {params.D}")
    comps = []
    for k, meta in enumerate(doc["components"]):
        meta = {key: val for key, val in meta.items()}
        comps.append(Component(v=None, w=W[:, k].copy(), **meta))
    model = ProjectionModel(
        W=W,
        components=comps,
        standardization=params,
        z_scales=np.array(doc["z_scales"], dtype=float),
        method=doc["method"],
        config=doc["config"],
        target_kind=doc["target_kind"],
        labels=tuple(doc["label_map"]),
        feature_names=tuple(doc["feature_names"]),
        warnings=list(doc["warnings"]),
    )
    return model, doc
