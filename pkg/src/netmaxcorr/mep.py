"""Maximum-correlation-problem form of discrete NMC and its Gauss-Seidel solver.

Conventions: ``r(b)`` sums the objective once per undirected edge, so it
equals the NMC objective of the recovered transforms. ``lambdas[i]`` is the
Lagrange multiplier of block ``i``, ``b_i . sum_j C_ij b_j``, so that
``sum(lambdas) == 2 r`` and flipping a single block changes ``r`` by
``-2 lambdas[i]``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .network import (
    NetworkDistribution,
    NmcSolution,
    SolverConfig,
    coords_to_transforms,
    initial_starts,
    parallel_map,
    pick_best,
)

logger = logging.getLogger(__name__)

PINV_THRESHOLD = 1e-8


class IllConditionedMarginalError(ValueError):
    pass


@dataclass
class McpProblem:
    sqrt_p: list[np.ndarray]
    A: list[np.ndarray]
    B: list[np.ndarray]
    blocks: dict[tuple[int, int], np.ndarray]
    neighbors: list[tuple[int, ...]]

    @property
    def n(self) -> int:
        return len(self.sqrt_p)

    @property
    def dims(self) -> list[int]:
        return [len(s) for s in self.sqrt_p]

    def block(self, i: int, j: int) -> np.ndarray:
        if (i, j) in self.blocks:
            return self.blocks[(i, j)]
        return np.zeros((self.dims[i], self.dims[j]))

    def dense(self) -> np.ndarray:
        """The full symmetric block matrix ``C``."""
        offs = np.concatenate([[0], np.cumsum(self.dims)])
        C = np.zeros((offs[-1], offs[-1]))
        for (i, j), blk in self.blocks.items():
            C[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] = blk
        return C

    def row_sum(self, i: int, b: list[np.ndarray]) -> np.ndarray:
        acc = np.zeros(self.dims[i])
        for j in self.neighbors[i]:
            acc += self.blocks[(i, j)] @ b[j]
        return acc


@dataclass
class MepState:
    b: list[np.ndarray]
    r: float
    lambdas: np.ndarray
    flipped: tuple[int, ...] = ()


@dataclass
class MepRun:
    state: MepState
    trace: list[float]
    sweeps: int
    degenerate_updates: int = 0
    converged: bool = False
    residual: float = 0.0


def _root_and_pinv(sqrt_p: np.ndarray, var: int) -> tuple[np.ndarray, np.ndarray]:
    k = len(sqrt_p)
    w, U = np.linalg.eigh(np.eye(k) - np.outer(sqrt_p, sqrt_p))
    null = int(np.argmax(np.abs(U.T @ sqrt_p)))
    sigma = np.sqrt(np.clip(w, 0.0, None))
    sigma[null] = 0.0
    B = (U * sigma) @ U.T
    rest = [c for c in range(k) if c != null]
    if rest and sigma[rest].min() < PINV_THRESHOLD:
        raise IllConditionedMarginalError(f"variable {var + 1}: second-smallest singular value below {PINV_THRESHOLD}")
    Ur = U[:, rest]
    A = (Ur / sigma[rest]) @ Ur.T if rest else np.zeros((k, k))
    return B, A


def assemble_mcp(net: NetworkDistribution) -> McpProblem:
    """Build ``A_i``, ``B_i`` and the blocks ``C_ij = A_i^T (Q_ij - sqrt(p_i) sqrt(p_j)^T) A_j``."""
    sqrt_p = [np.sqrt(p) for p in net.marginals]
    A, B = [], []
    for v, sp in enumerate(sqrt_p):
        b_mat, a_mat = _root_and_pinv(sp, v)
        B.append(b_mat)
        A.append(a_mat)
    blocks = {}
    for i, j in net.graph.edges:
        q = net.joint(i, j).q
        c = A[i].T @ (q - np.outer(sqrt_p[i], sqrt_p[j])) @ A[j]
        blocks[(i, j)] = c
        blocks[(j, i)] = c.T
    neighbors = [net.graph.neighbors(v) for v in range(net.n)]
    return McpProblem(sqrt_p, A, B, blocks, neighbors)


def evaluate(prob: McpProblem, b: list[np.ndarray]) -> MepState:
    lambdas = np.array([b[i] @ prob.row_sum(i, b) for i in range(prob.n)])
    return MepState([x.copy() for x in b], float(lambdas.sum() / 2), lambdas)


def stationarity_residual(prob: McpProblem, state: MepState) -> np.ndarray:
    """Per-block norm of ``sum_j C_ij b_j - lambda_i b_i``."""
    return np.array([
        np.linalg.norm(prob.row_sum(i, state.b) - state.lambdas[i] * state.b[i]) for i in range(prob.n)
    ])


def gauss_seidel_mep(
    prob: McpProblem,
    init: MepState | list[np.ndarray],
    max_iter: int = 1000,
    tol: float = 1e-9,
) -> MepRun:
    """Block Gauss-Seidel power iteration for the multivariate eigenvalue problem.

    Stops once a sweep raises ``r`` by less than ``tol`` and every block
    residual is below ``sqrt(tol)``, or after ``max_iter`` sweeps. A block
    whose update direction vanishes is left as is and counted as degenerate.
    """
    b = [x.copy() for x in (init.b if isinstance(init, MepState) else init)]
    for i, x in enumerate(b):
        nrm = np.linalg.norm(x)
        if prob.neighbors[i] and abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"initial block {i + 1} is not unit norm")
    state = evaluate(prob, b)
    trace = [state.r]
    degenerate = 0
    converged = False
    sweeps = 0
    res_tol = np.sqrt(tol)
    for sweeps in range(1, max_iter + 1):
        for i in range(prob.n):
            if not prob.neighbors[i]:
                continue
            tilde = prob.row_sum(i, b)
            nrm = np.linalg.norm(tilde)
            if nrm < 1e-14:
                degenerate += 1
                continue
            b[i] = tilde / nrm
        new = evaluate(prob, b)
        trace.append(new.r)
        gain = new.r - state.r
        state = new
        if gain < tol and stationarity_residual(prob, state).max(initial=0.0) < res_tol:
            converged = True
            break
    residual = float(stationarity_residual(prob, state).max(initial=0.0))
    return MepRun(state, trace, sweeps, degenerate, converged, residual)


def sign_flip_escape(prob: McpProblem, state: MepState) -> MepState:
    """Negate blocks with negative multipliers, each flip strictly raising ``r``.

    Blocks are flipped one at a time, most negative multiplier first, with
    multipliers recomputed after each flip; flipping a set of adjacent blocks
    simultaneously can lower ``r``. Each flip raises ``r`` by ``-2 lambda_i``.
    """
    b = [x.copy() for x in state.b]
    current = evaluate(prob, b)
    flipped = []
    while True:
        i = int(np.argmin(current.lambdas)) if prob.n else 0
        if prob.n == 0 or current.lambdas[i] >= -1e-14:
            break
        b[i] = -b[i]
        flipped.append(i)
        current = evaluate(prob, b)
    if not flipped:
        return state
    return replace(current, flipped=tuple(flipped))


def b_to_transforms(prob: McpProblem, state: MepState) -> list[np.ndarray]:
    """Per-symbol transforms ``phi_i = (A_i b_i) / sqrt(p_i)`` (offset along sqrt(p) set to 0)."""
    coords = [prob.A[i] @ state.b[i] for i in range(prob.n)]
    return coords_to_transforms(coords, [sp**2 for sp in prob.sqrt_p])


def _solve_from(prob: McpProblem, init: list[np.ndarray], cfg: SolverConfig) -> tuple[MepState, list[float], dict]:
    b = [prob.B[i] @ a for i, a in enumerate(init)]
    b = [x / np.linalg.norm(x) if np.linalg.norm(x) > 0 else x for x in b]
    state = evaluate(prob, b)
    trace: list[float] = []
    flags = {"degenerate_updates": 0, "escapes": 0, "rounds": 0, "converged": False}
    for rnd in range(cfg.max_rounds):
        run = gauss_seidel_mep(prob, state, cfg.max_iter, cfg.tol)
        trace.extend(run.trace if not trace else run.trace[1:])
        flags["degenerate_updates"] += run.degenerate_updates
        flags["converged"] = run.converged
        flags["rounds"] = rnd + 1
        escaped = sign_flip_escape(prob, run.state)
        if not escaped.flipped:
            state = run.state
            break
        flags["escapes"] += len(escaped.flipped)
        state = escaped
        trace.append(escaped.r)
    return state, trace, flags


def solve_mep(net: NetworkDistribution, cfg: SolverConfig = SolverConfig()) -> NmcSolution:
    """Multi-start Gauss-Seidel with sign-flip escape; returns the best start."""
    prob = assemble_mcp(net)
    starts = initial_starts(net, cfg.starts, cfg.seed)

    def run(idx: int) -> NmcSolution:
        state, trace, flags = _solve_from(prob, starts[idx], cfg)
        transforms = b_to_transforms(prob, state)
        corr = net.edge_correlations(transforms)
        return NmcSolution(
            transforms=transforms,
            edge_corr=corr,
            rho_g=float(corr.sum()),
            trace=trace,
            edges=net.graph.edges,
            flags=flags,
            config={"solver": "mep", **cfg.to_dict()},
            start_index=idx,
            extra={"r": state.r, "lambdas": state.lambdas.tolist()},
        )

    return pick_best(parallel_map(run, range(len(starts)), cfg.threads))
