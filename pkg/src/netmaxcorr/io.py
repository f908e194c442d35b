"""File formats: sample CSVs, joint-pmf JSON, correlation CSVs and result JSON."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .distributions import Dataset, EmptyDataError, discretize
from .graph import Graph
from .network import NetworkDistribution, NmcSolution

logger = logging.getLogger(__name__)


class InputFormatError(ValueError):
    pass


def read_samples_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Header of variable names and the rows; rows with empty fields are rejected."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputFormatError(f"{path}: empty file") from None
        rows, rejected = [], 0
        for lineno, row in enumerate(reader, 2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            if any(not c.strip() for c in row):
                rejected += 1
                continue
            rows.append([c.strip() for c in row])
    if rejected:
        logger.warning("%s: rejected %d rows with missing values", path, rejected)
    if not rows:
        raise EmptyDataError(f"{path}: no complete sample rows")
    return header, rows


def _column_kind(col: Sequence[str]) -> str:
    try:
        [int(c) for c in col]
        return "int"
    except ValueError:
        pass
    try:
        [float(c) for c in col]
        return "real"
    except ValueError:
        return "text"


def load_dataset(path: str | Path, bins: int | None = None, scheme: str = "quantile") -> Dataset:
    """Load a samples CSV, one column per variable.

    Integer and text columns are categorical; real columns are discretized
    into ``bins`` bins (required). With ``bins`` set, integer columns are
    binned as well.
    """
    header, rows = read_samples_csv(path)
    cols = list(zip(*rows))
    codes, labels, numeric = [], [], []
    for name, col in zip(header, cols):
        kind = _column_kind(col)
        if kind == "text" or (kind == "int" and bins is None):
            raw = np.array([int(c) for c in col]) if kind == "int" else np.array(col)
            part = Dataset.from_categories(raw[None, :], names=[name])
            codes.append(part.values[0])
            labels.append(part.labels[0])
            numeric.append(raw.astype(float) if kind == "int" else part.values[0].astype(float))
            continue
        if bins is None:
            raise InputFormatError(f"{path}: column {name!r} is real-valued; pass --bins")
        reals = np.array([float(c) for c in col])
        if not np.isfinite(reals).all():
            raise InputFormatError(f"{path}: column {name!r} has non-finite values")
        part = discretize(reals[None, :], bins, scheme, names=[name])
        codes.append(part.values[0])
        labels.append(part.labels[0])
        numeric.append(reals)
    sizes = tuple(len(lab) for lab in labels)
    return Dataset(np.array(codes), sizes, labels, list(header), np.array(numeric))


def load_real_matrix(path: str | Path) -> tuple[list[str], np.ndarray]:
    header, rows = read_samples_csv(path)
    try:
        data = np.array([[float(c) for c in r] for r in rows]).T
    except ValueError as exc:
        raise InputFormatError(f"{path}: non-numeric value ({exc})") from None
    return header, data


def load_correlation_csv(path: str | Path) -> np.ndarray:
    """Square matrix, comma separated, optional header row of names."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        rows = rows[1:]
    try:
        mat = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise InputFormatError(f"{path}: non-numeric entry ({exc})") from None
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InputFormatError(f"{path}: correlation matrix must be square")
    return mat


def load_joints_json(path: str | Path, graph: Graph | None = None) -> NetworkDistribution:
    """``{"alphabet_sizes": [...], "joints": {"i,j": matrix}}`` with 1-based ``i,j``.

    Each matrix is nested rows or a flat row-major list. Without ``graph``
    the edges are the keys of ``joints``.
    """
    try:
        doc = json.loads(Path(path).read_text())
        sizes = [int(k) for k in doc["alphabet_sizes"]]
        raw = doc["joints"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"{path}: malformed joint file ({exc})") from None
    joints = {}
    for key, mat in raw.items():
        try:
            i, j = (int(x) - 1 for x in key.split(","))
        except ValueError:
            raise InputFormatError(f"{path}: bad edge key {key!r}") from None
        if not (0 <= i < len(sizes) and 0 <= j < len(sizes)) or i == j:
            raise InputFormatError(f"{path}: edge key {key!r} out of range")
        try:
            arr = np.asarray(mat, dtype=float).reshape(sizes[i], sizes[j])
        except (TypeError, ValueError) as exc:
            raise InputFormatError(f"{path}: joint {key!r} does not match sizes "
                                   f"{sizes[i]}x{sizes[j]} ({exc})") from None
        joints[(i, j)] = arr
    if graph is None:
        graph = Graph(len(sizes), joints.keys())
    joints = {(min(e), max(e)): (m if e[0] < e[1] else m.T) for e, m in joints.items()
              if graph.has_edge(*e)}
    margs = None
    if any(not graph.neighbors(v) for v in range(graph.n)):
        margs = [np.full(k, 1.0 / k) for k in sizes]
        for (i, j), m in joints.items():
            margs[i], margs[j] = m.sum(axis=1), m.sum(axis=0)
    return NetworkDistribution.from_joints(graph, joints, margs)


def _label(x: Any) -> str:
    return str(x)


def variable_labels(net: NetworkDistribution) -> tuple[list[str], list[list[str]]]:
    """Variable names and the original (pre-pruning) symbol labels."""
    if net.dataset is not None:
        d = net.dataset
        return list(d.names), [[_label(x) for x in lab] for lab in d.labels]
    names = [f"X{i + 1}" for i in range(net.n)]
    kept = net.kept or [np.arange(k) for k in net.dims]
    return names, [[_label(int(x)) for x in k] for k in kept]


def solution_to_dict(sol: NmcSolution, net: NetworkDistribution, config: dict | None = None) -> dict:
    names, labels = variable_labels(net)
    out = {
        "rho_g": sol.rho_g,
        "objective": sol.objective,
        "edge_correlations": [
            {"edge": [i + 1, j + 1], "variables": [names[i], names[j]], "correlation": float(c)}
            for (i, j), c in zip(sol.edges, sol.edge_corr)
        ],
        "transforms": {
            names[i]: {labels[i][c]: float(v) for c, v in enumerate(sol.transforms[i])} for i in range(net.n)
        },
        "trace": [float(x) for x in sol.trace],
        "flags": sol.flags,
        "start_index": sol.start_index,
        "config_echo": config if config is not None else sol.config,
    }
    if sol.signs is not None:
        out["edge_signs"] = [int(s) for s in sol.signs]
    if sol.extra:
        out["extra"] = sol.extra
    return out


def rho_from_result(result: dict, d: Dataset, graph: Graph) -> float:
    """Recompute the objective from serialized transforms and the sample data."""
    transforms = []
    for i in range(d.n):
        table = result["transforms"][d.names[i]]
        transforms.append(np.array([table[_label(lab)] for lab in d.labels[i]]))
    net = NetworkDistribution.from_dataset(graph, d)
    return float(net.edge_correlations(transforms).sum())


def dumps(obj: Any) -> str:
    """Deterministic JSON (sorted keys, numpy scalars converted)."""
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.generic):
            return o.item()
        raise TypeError(f"not serializable: {type(o).__name__}")

    return json.dumps(obj, sort_keys=True, indent=2, default=default) + "\n"
