"""Random ball-carving partitions and the partitioned NMC approximation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import Graph, Partition, cut_edges
from .network import NetworkDistribution, NmcSolution, parallel_map


class BlockSolveError(RuntimeError):
    pass


def default_radius_cap(epsilon: float, growth: float = 2.0) -> int:
    """``ceil((r/eps) ln(r/eps))`` with growth exponent ``r`` (2 for grid-like graphs)."""
    x = growth / epsilon
    return max(1, math.ceil(x * math.log(x)))


def truncated_geometric_pmf(epsilon: float, k: int) -> np.ndarray:
    """P[R = l] for ``l = 1..k``: ``eps (1-eps)^(l-1)`` below ``k``, the tail mass at ``k``."""
    l = np.arange(1, k + 1)
    pmf = epsilon * (1.0 - epsilon) ** (l - 1)
    pmf[-1] = (1.0 - epsilon) ** (k - 1)
    return pmf


@dataclass(frozen=True)
class PartitionSampler:
    epsilon: float
    k: int | None = None
    seed: int = 0
    shuffle: bool = False

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be at least 1")

    @property
    def radius_cap(self) -> int:
        return self.k if self.k is not None else default_radius_cap(self.epsilon)


def sample_partition(g: Graph, sampler: PartitionSampler, rng: np.random.Generator | None = None) -> Partition:
    """Color vertices by growing balls of truncated-geometric radius.

    Vertices are visited in index order (or a seeded shuffle); each one
    recolors every vertex within its sampled radius. Equal colors form the
    blocks.
    """
    rng = np.random.default_rng(sampler.seed) if rng is None else rng
    k = sampler.radius_cap
    pmf = truncated_geometric_pmf(sampler.epsilon, k)
    order = rng.permutation(g.n) if sampler.shuffle else np.arange(g.n)
    color = np.full(g.n, -1)
    for v in order:
        radius = int(rng.choice(k, p=pmf)) + 1
        color[g.ball(int(v), radius)] = v
    blocks: dict[int, list[int]] = {}
    for v, c in enumerate(color):
        blocks.setdefault(int(c), []).append(v)
    return Partition(blocks.values())


def sample_partitions(g: Graph, sampler: PartitionSampler, count: int) -> list[Partition]:
    """``count`` independent partitions, each from its own spawned seed."""
    seqs = np.random.SeedSequence(sampler.seed).spawn(count)
    return [sample_partition(g, sampler, np.random.default_rng(s)) for s in seqs]


@dataclass
class ApproxNmcResult:
    partition: Partition
    block_solutions: list[NmcSolution | None]
    rho_hat: float
    cut_edge_count: int
    block_sizes: list[int] = field(default_factory=list)


def approx_nmc(
    net: NetworkDistribution,
    partition: Partition,
    solver: Callable[[NetworkDistribution], NmcSolution],
    threads: int = 1,
) -> ApproxNmcResult:
    """Solve NMC independently on each block's induced subgraph and sum."""
    partition.validate(net.n)

    def solve(m: int) -> NmcSolution | None:
        block = partition.blocks[m]
        sub, _ = net.restrict(block)
        if not sub.graph.edges:
            return None
        try:
            return solver(sub)
        except Exception as exc:
            raise BlockSolveError(f"block {m} (vertices {[v + 1 for v in block]}): {exc}") from exc

    sols = parallel_map(solve, range(len(partition.blocks)), threads)
    rho_hat = 0.0
    for s in sols:
        if s is not None:
            rho_hat += s.rho_g
    return ApproxNmcResult(
        partition, sols, rho_hat, len(cut_edges(net.graph, partition)), partition.block_sizes()
    )
