"""Categorical datasets, pairwise joint pmfs, Q-matrices and discretization."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

PMF_ATOL = 1e-12
SPECTRAL_ATOL = 1e-9


class InvalidPairError(ValueError):
    pass


class EmptyDataError(ValueError):
    pass


class InvalidDistributionError(ValueError):
    pass


class DegenerateVariableWarning(UserWarning):
    pass


def standardize(values: np.ndarray, p: np.ndarray) -> np.ndarray | None:
    """Center and scale ``values`` to mean 0, variance 1 under the pmf ``p``.

    Returns ``None`` when the centered vector has (numerically) zero variance.
    """
    values = np.asarray(values, dtype=float)
    centered = values - p @ values
    var = p @ centered**2
    if not var > 1e-28:
        return None
    return centered / np.sqrt(var)


@dataclass
class Dataset:
    """An ``n x m`` matrix of category indices, one row per variable.

    Categories are pruned to those that actually occur; ``labels[i][c]`` is
    the original label of pruned category ``c`` of variable ``i``.
    ``numeric`` holds real values per sample, used by the regularized solver
    (raw reals for discretized data, the category index otherwise).
    """

    values: np.ndarray
    alphabet_sizes: tuple[int, ...]
    labels: list[list] = field(default_factory=list)
    names: list[str] = field(default_factory=list)
    numeric: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)
        if self.values.ndim != 2 or self.values.shape[1] == 0:
            raise EmptyDataError("dataset must be a non-empty n x m matrix")
        if not self.names:
            self.names = [f"X{i + 1}" for i in range(self.n)]
        if not self.labels:
            self.labels = [list(range(k)) for k in self.alphabet_sizes]
        if self.numeric is None:
            self.numeric = self.values.astype(float)
        for i, k in enumerate(self.alphabet_sizes):
            row = self.values[i]
            if row.min() < 0 or row.max() >= k:
                raise InvalidDistributionError(f"variable {self.names[i]} has categories outside [0, {k})")

    @classmethod
    def from_categories(
        cls,
        values: np.ndarray | Sequence[Sequence],
        names: Sequence[str] | None = None,
        numeric: np.ndarray | None = None,
    ) -> "Dataset":
        """Build a dataset from arbitrary category labels, pruning unused ones."""
        raw = np.asarray(values)
        if raw.ndim != 2 or raw.shape[1] == 0 or raw.shape[0] == 0:
            raise EmptyDataError("dataset must be a non-empty n x m matrix")
        codes = np.empty(raw.shape, dtype=np.int64)
        labels = []
        for i in range(raw.shape[0]):
            uniq, inv = np.unique(raw[i], return_inverse=True)
            codes[i] = inv
            labels.append([u.item() if hasattr(u, "item") else u for u in uniq])
        sizes = tuple(len(lab) for lab in labels)
        return cls(codes, sizes, labels, list(names) if names else [], numeric)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def counts(self, i: int) -> np.ndarray:
        return np.bincount(self.values[i], minlength=self.alphabet_sizes[i])

    def marginal(self, i: int) -> np.ndarray:
        return self.counts(i) / self.m

    def pair_counts(self, i: int, j: int) -> np.ndarray:
        ki, kj = self.alphabet_sizes[i], self.alphabet_sizes[j]
        flat = self.values[i] * kj + self.values[j]
        return np.bincount(flat, minlength=ki * kj).reshape(ki, kj)

    def conditional_mean(self, target: np.ndarray, given: int) -> np.ndarray:
        """E[target | X_given = c] per category, ``target`` a per-sample vector."""
        sums = np.bincount(self.values[given], weights=target, minlength=self.alphabet_sizes[given])
        return sums / self.counts(given)

    def subset(self, variables: Sequence[int]) -> "Dataset":
        variables = list(variables)
        return Dataset(
            self.values[variables],
            tuple(self.alphabet_sizes[v] for v in variables),
            [self.labels[v] for v in variables],
            [self.names[v] for v in variables],
            self.numeric[variables],
        )


@dataclass
class PairwiseJoint:
    """Joint pmf of two finite variables with strictly positive marginals.

    ``kept_i`` / ``kept_j`` map rows/columns back to the symbols of the
    unpruned input.
    """

    joint: np.ndarray
    kept_i: np.ndarray | None = None
    kept_j: np.ndarray | None = None

    def __post_init__(self):
        joint = np.asarray(self.joint, dtype=float)
        if joint.ndim != 2 or joint.size == 0:
            raise InvalidDistributionError("joint pmf must be a non-empty matrix")
        if not np.isfinite(joint).all():
            raise InvalidDistributionError("joint pmf has non-finite entries")
        if (joint < 0).any():
            raise InvalidDistributionError("joint pmf has negative entries")
        total = joint.sum()
        if abs(total - 1.0) > 1e-9:
            raise InvalidDistributionError(f"joint pmf sums to {total!r}, not 1")
        joint = joint / total
        rows = joint.sum(axis=1) > 0
        cols = joint.sum(axis=0) > 0
        if self.kept_i is None:
            self.kept_i = np.flatnonzero(rows)
        else:
            self.kept_i = np.asarray(self.kept_i)[rows]
        if self.kept_j is None:
            self.kept_j = np.flatnonzero(cols)
        else:
            self.kept_j = np.asarray(self.kept_j)[cols]
        self.joint = joint[rows][:, cols]
        self.marginal_i = self.joint.sum(axis=1)
        self.marginal_j = self.joint.sum(axis=0)

    @property
    def q(self) -> np.ndarray:
        return self.joint / np.sqrt(np.outer(self.marginal_i, self.marginal_j))

    @property
    def shape(self) -> tuple[int, int]:
        return self.joint.shape

    def transposed(self) -> "PairwiseJoint":
        return PairwiseJoint(self.joint.T.copy(), self.kept_j, self.kept_i)

    def correlation(self, phi_i: np.ndarray, phi_j: np.ndarray) -> float:
        return float(phi_i @ self.joint @ phi_j)


def empirical_joint(d: Dataset, i: int, j: int) -> PairwiseJoint:
    """Empirical joint pmf of variables ``i`` and ``j`` from sample counts."""
    if i == j:
        raise InvalidPairError(f"pair ({i}, {j}) must name two distinct variables")
    if d.m == 0:
        raise EmptyDataError("dataset has no samples")
    return PairwiseJoint(d.pair_counts(i, j) / d.m)


@dataclass
class BivariateMC:
    value: float
    phi_i: np.ndarray
    phi_j: np.ndarray


def bivariate_mc_svd(pj: PairwiseJoint) -> BivariateMC:
    """Maximal correlation as the second singular value of the Q-matrix.

    The optimal transforms are the second singular vector pair scaled by
    ``1/sqrt(marginal)``; they are returned standardized with the sign
    fixed so that their correlation is non-negative.
    """
    ki, kj = pj.shape
    if min(ki, kj) < 2:
        return BivariateMC(0.0, np.zeros(ki), np.zeros(kj))
    u, s, vt = np.linalg.svd(pj.q)
    phi_i = standardize(u[:, 1] / np.sqrt(pj.marginal_i), pj.marginal_i)
    phi_j = standardize(vt[1] / np.sqrt(pj.marginal_j), pj.marginal_j)
    value = float(np.clip(s[1], 0.0, 1.0))
    if phi_i is None or phi_j is None:
        return BivariateMC(value, np.zeros(ki), np.zeros(kj))
    if pj.correlation(phi_i, phi_j) < 0:
        phi_j = -phi_j
    return BivariateMC(value, phi_i, phi_j)


def discretize(
    real_data: np.ndarray,
    bins: int,
    scheme: str = "quantile",
    names: Sequence[str] | None = None,
) -> Dataset:
    """Bin each row of an ``n x m`` real matrix independently.

    ``quantile`` assigns sample ranks (ties broken by sample order) to
    ``bins`` equally filled bins; ``fixed-width`` splits ``[min, max]``
    into equal intervals. A constant row collapses to one category and
    triggers :class:`DegenerateVariableWarning`.
    """
    x = np.atleast_2d(np.asarray(real_data, dtype=float))
    if bins < 2:
        raise ValueError("bins must be at least 2")
    if x.shape[1] == 0:
        raise EmptyDataError("no samples to discretize")
    if not np.isfinite(x).all():
        raise ValueError("discretize requires finite entries")
    n, m = x.shape
    codes = np.zeros((n, m), dtype=np.int64)
    for i in range(n):
        row = x[i]
        if row.min() == row.max():
            label = names[i] if names else f"X{i + 1}"
            warnings.warn(f"variable {label} is constant; all samples in one bin", DegenerateVariableWarning, stacklevel=2)
            continue
        if scheme == "quantile":
            order = np.argsort(row, kind="stable")
            ranks = np.empty(m, dtype=np.int64)
            ranks[order] = np.arange(m)
            codes[i] = (ranks * bins) // m
        elif scheme == "fixed-width":
            edges = np.linspace(row.min(), row.max(), bins + 1)
            codes[i] = np.clip(np.searchsorted(edges, row, side="right") - 1, 0, bins - 1)
        else:
            raise ValueError(f"unknown binning scheme {scheme!r}")
    return Dataset.from_categories(codes, names=names, numeric=x)


def marginal_floor(source: Dataset | Iterable[np.ndarray]) -> float:
    """Smallest marginal probability over all variables and (pruned) symbols."""
    if isinstance(source, Dataset):
        pmfs: Iterable[np.ndarray] = (source.marginal(i) for i in range(source.n))
    else:
        pmfs = source
    floor = min(float(np.min(np.asarray(p)[np.asarray(p) > 0])) for p in pmfs)
    return floor
