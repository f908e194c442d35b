"""Distributions over a graph, solver configuration, results and the shared
multi-start policy."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Sequence, TypeVar

import numpy as np

from .distributions import (
    Dataset,
    InvalidDistributionError,
    PairwiseJoint,
    bivariate_mc_svd,
    empirical_joint,
    standardize,
)
from .graph import Edge, Graph

T = TypeVar("T")


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 1000
    tol: float = 1e-9
    starts: int = 10
    seed: int = 0
    max_rounds: int = 50
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


class NetworkDistribution:
    """Per-vertex marginals and per-edge joints for the variables of a graph.

    Built either from explicit pairwise joints or from a :class:`Dataset`.
    With a dataset, conditional expectations are taken over raw samples;
    joints are only materialized on request.
    """

    def __init__(
        self,
        graph: Graph,
        marginals: Sequence[np.ndarray],
        joints: Mapping[Edge, PairwiseJoint] | None = None,
        dataset: Dataset | None = None,
    ):
        self.graph = graph
        self.marginals = [np.asarray(p, dtype=float) for p in marginals]
        self._joints: dict[Edge, PairwiseJoint] = dict(joints or {})
        self.dataset = dataset
        self.kept: list[np.ndarray] | None = None
        if joints is None and dataset is None:
            raise ValueError("need joints or a dataset")
        if len(self.marginals) != graph.n:
            raise InvalidDistributionError("one marginal per vertex required")

    @classmethod
    def from_dataset(cls, graph: Graph, d: Dataset) -> "NetworkDistribution":
        if d.n != graph.n:
            raise InvalidDistributionError(f"graph has {graph.n} vertices but data has {d.n} variables")
        return cls(graph, [d.marginal(i) for i in range(d.n)], dataset=d)

    @classmethod
    def from_joints(
        cls,
        graph: Graph,
        joints: Mapping[Edge, PairwiseJoint | np.ndarray],
        marginals: Sequence[np.ndarray] | None = None,
    ) -> "NetworkDistribution":
        """Assemble from one joint per edge, keyed ``(i, j)`` with ``i < j``.

        Marginals implied by different edges must agree within 1e-9.
        Vertices without an edge need an explicit marginal.
        """
        canon: dict[Edge, PairwiseJoint] = {}
        for (i, j), pj in joints.items():
            raw = pj.joint if isinstance(pj, PairwiseJoint) else np.asarray(pj, dtype=float)
            if i > j:
                i, j, raw = j, i, raw.T
            if not graph.has_edge(i, j):
                raise InvalidDistributionError(f"joint given for non-edge ({i + 1}, {j + 1})")
            canon[(i, j)] = raw
        missing = [e for e in graph.edges if e not in canon]
        if missing:
            raise InvalidDistributionError(f"no joint for edges {[(i + 1, j + 1) for i, j in missing]}")

        full_marg: list[np.ndarray | None] = [None] * graph.n
        if marginals is not None:
            full_marg = [np.asarray(p, dtype=float) for p in marginals]
        for (i, j), raw in canon.items():
            for v, p in ((i, raw.sum(axis=1)), (j, raw.sum(axis=0))):
                if full_marg[v] is None:
                    full_marg[v] = p
                elif full_marg[v].shape != p.shape or np.max(np.abs(full_marg[v] - p)) > 1e-9:
                    raise InvalidDistributionError(f"inconsistent marginals for variable {v + 1}")
        for v, p in enumerate(full_marg):
            if p is None:
                raise InvalidDistributionError(f"variable {v + 1} has no edge and no marginal")
        keep = [np.flatnonzero(p > 0) for p in full_marg]
        pruned = {}
        for (i, j), raw in canon.items():
            sub = raw[np.ix_(keep[i], keep[j])]
            pruned[(i, j)] = PairwiseJoint(sub / sub.sum(), keep[i], keep[j])
        margs = [p[k] / p[k].sum() for p, k in zip(full_marg, keep)]
        net = cls(graph, margs, joints=pruned)
        net.kept = keep
        return net

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def dims(self) -> list[int]:
        return [len(p) for p in self.marginals]

    def joint(self, i: int, j: int) -> PairwiseJoint:
        """Joint of ``(X_i, X_j)``, rows indexed by ``X_i``."""
        key = (min(i, j), max(i, j))
        if key not in self._joints:
            if self.dataset is None:
                raise KeyError(f"no joint for pair ({i + 1}, {j + 1})")
            self._joints[key] = empirical_joint(self.dataset, *key)
        pj = self._joints[key]
        return pj if i < j else pj.transposed()

    def cond_expectation(self, target: int, given: int, phi: np.ndarray) -> np.ndarray:
        """E[phi(X_target) | X_given] as a vector over the symbols of ``given``."""
        if self.dataset is not None:
            d = self.dataset
            return d.conditional_mean(phi[d.values[target]], given)
        pj = self.joint(given, target)
        return (pj.joint @ phi) / pj.marginal_i

    def correlation(self, i: int, j: int, phi_i: np.ndarray, phi_j: np.ndarray) -> float:
        if self.dataset is not None:
            d = self.dataset
            return float(np.mean(phi_i[d.values[i]] * phi_j[d.values[j]]))
        return self.joint(i, j).correlation(phi_i, phi_j)

    def edge_correlations(self, transforms: Sequence[np.ndarray]) -> np.ndarray:
        return np.array([self.correlation(i, j, transforms[i], transforms[j]) for i, j in self.graph.edges])

    def restrict(self, vertices: Sequence[int]) -> tuple["NetworkDistribution", list[int]]:
        """Distribution of the induced subgraph on ``vertices``."""
        sub, labels = self.graph.subgraph(vertices)
        margs = [self.marginals[v] for v in labels]
        if self.dataset is not None:
            return NetworkDistribution(sub, margs, dataset=self.dataset.subset(labels)), labels
        joints = {(a, b): self.joint(labels[a], labels[b]) for a, b in sub.edges}
        return NetworkDistribution(sub, margs, joints=joints), labels


@dataclass
class NmcSolution:
    """Transforms per variable, per-edge correlations and the objective trace."""

    transforms: list[np.ndarray]
    edge_corr: np.ndarray
    rho_g: float
    trace: list[float]
    edges: tuple[Edge, ...]
    flags: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    start_index: int = 0
    signs: np.ndarray | None = None
    objective: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.objective is None:
            self.objective = self.rho_g


def parallel_map(fn: Callable[..., T], items: Sequence, threads: int = 1) -> list[T]:
    """``map`` preserving input order; thread count never affects results."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _unit_perp(v: np.ndarray, sqrt_p: np.ndarray) -> np.ndarray | None:
    v = v - (v @ sqrt_p) * sqrt_p
    norm = np.linalg.norm(v)
    return None if norm < 1e-12 else v / norm


def _random_perp(rng: np.random.Generator, sqrt_p: np.ndarray) -> np.ndarray:
    if len(sqrt_p) < 2:
        return np.zeros_like(sqrt_p)
    while True:
        v = _unit_perp(rng.standard_normal(len(sqrt_p)), sqrt_p)
        if v is not None:
            return v


def initial_starts(net: NetworkDistribution, starts: int, seed: int) -> list[list[np.ndarray]]:
    """Starting points in orthonormal-basis coordinates (unit, orthogonal to sqrt(p)).

    Start 0 averages the sign-aligned bivariate SVD transforms of each
    vertex's incident edges; the remaining starts are uniform on the unit
    sphere orthogonal to ``sqrt(p_i)``, seeded per start.
    """
    sqrt_ps = [np.sqrt(p) for p in net.marginals]
    seeds = np.random.SeedSequence(seed).spawn(max(starts, 1))
    result = []
    for s in range(max(starts, 1)):
        rng = np.random.default_rng(seeds[s])
        if s == 0:
            acc = [np.zeros_like(sp) for sp in sqrt_ps]
            ref: list[np.ndarray | None] = [None] * net.n
            for i, j in net.graph.edges:
                mc = bivariate_mc_svd(net.joint(i, j))
                for v, phi in ((i, mc.phi_i), (j, mc.phi_j)):
                    a = phi * sqrt_ps[v]
                    if ref[v] is None and np.any(a):
                        ref[v] = a
                    if ref[v] is not None and a @ ref[v] < 0:
                        a = -a
                    acc[v] += a
            start = []
            for v in range(net.n):
                a = _unit_perp(acc[v], sqrt_ps[v])
                start.append(a if a is not None else _random_perp(rng, sqrt_ps[v]))
        else:
            start = [_random_perp(rng, sp) for sp in sqrt_ps]
        result.append(start)
    return result


def coords_to_transforms(coords: Sequence[np.ndarray], marginals: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Map basis coordinates to per-symbol transform values, standardized."""
    out = []
    for a, p in zip(coords, marginals):
        phi = standardize(a / np.sqrt(p), p)
        out.append(np.zeros_like(p) if phi is None else phi)
    return out


def transforms_to_coords(transforms: Sequence[np.ndarray], marginals: Sequence[np.ndarray]) -> list[np.ndarray]:
    return [phi * np.sqrt(p) for phi, p in zip(transforms, marginals)]


def pick_best(results: Sequence[NmcSolution]) -> NmcSolution:
    """Largest objective wins; ties go to the lowest start index."""
    best = results[0]
    for r in results[1:]:
        if r.objective > best.objective + 1e-12:
            best = r
    return best
