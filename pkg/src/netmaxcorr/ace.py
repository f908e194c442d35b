"""Network alternating conditional expectation and its absolute and
regularized variants."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .distributions import standardize
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


class ParameterError(ValueError):
    pass


@dataclass
class _Weights:
    """Per-edge multipliers on neighbor terms and an optional linear pull.

    The update target for vertex ``i`` is
    ``edge_scale * sum_j s_ij E[phi_j | X_i] + lin_scale * E[X_i - E X_i | X_i]``.
    """

    signs: dict[tuple[int, int], float] | None = None
    edge_scale: float = 1.0
    lin_scale: float = 0.0
    centered: list[np.ndarray] | None = None

    def sign(self, i: int, j: int) -> float:
        if self.signs is None:
            return 1.0
        return self.signs[(min(i, j), max(i, j))]


def _target(net: NetworkDistribution, i: int, phis: list[np.ndarray], w: _Weights) -> np.ndarray:
    acc = np.zeros(net.dims[i])
    for j in net.graph.neighbors(i):
        acc += w.sign(i, j) * net.cond_expectation(j, i, phis[j])
    acc *= w.edge_scale
    if w.lin_scale:
        acc += w.lin_scale * w.centered[i]
    return acc


def _surrogate(net: NetworkDistribution, phis: list[np.ndarray], w: _Weights) -> tuple[float, np.ndarray]:
    corr = net.edge_correlations(phis)
    signs = np.array([w.sign(i, j) for i, j in net.graph.edges])
    value = w.edge_scale * float(signs @ corr) if len(corr) else 0.0
    if w.lin_scale:
        value += w.lin_scale * sum(float(net.marginals[i] @ (phis[i] * w.centered[i])) for i in range(net.n))
    return value, corr


def _sweeps(net, phis, w: _Weights, max_iter: int, tol: float, flags: dict) -> list[float]:
    value, _ = _surrogate(net, phis, w)
    trace = [value]
    step_tol = np.sqrt(tol)
    active = [i for i in range(net.n) if net.graph.neighbors(i) or w.lin_scale]
    for _ in range(max_iter):
        moved = 0.0
        for i in active:
            phi = standardize(_target(net, i, phis, w), net.marginals[i])
            if phi is None:
                flags["degenerate_updates"] += 1
                continue
            moved = max(moved, float(np.sqrt(net.marginals[i] @ (phi - phis[i]) ** 2)))
            phis[i] = phi
        new, _ = _surrogate(net, phis, w)
        trace.append(new)
        gain = new - value
        value = new
        if gain < tol and moved < step_tol:
            flags["converged"] = True
            break
    return trace


def _escape(net, phis, w: _Weights) -> list[int]:
    """Negate transforms whose local score ``E[phi_i * target_i]`` is negative, one at a time."""
    flipped = []
    while True:
        scores = np.array([
            float(net.marginals[i] @ (phis[i] * _target(net, i, phis, w))) for i in range(net.n)
        ])
        i = int(np.argmin(scores)) if net.n else 0
        if net.n == 0 or scores[i] >= -1e-14:
            return flipped
        phis[i] = -phis[i]
        flipped.append(i)


def _ace_from(net, phis, w: _Weights, cfg: SolverConfig, flags: dict) -> list[float]:
    trace: list[float] = []
    for rnd in range(cfg.max_rounds):
        flags["converged"] = False
        run = _sweeps(net, phis, w, cfg.max_iter, cfg.tol, flags)
        trace.extend(run if not trace else run[1:])
        flags["rounds"] += 1
        flipped = _escape(net, phis, w)
        if not flipped:
            break
        flags["escapes"] += len(flipped)
        trace.append(_surrogate(net, phis, w)[0])
    return trace


def _new_flags() -> dict:
    return {"degenerate_updates": 0, "escapes": 0, "rounds": 0, "converged": False}


def _check_init(net: NetworkDistribution, init: list[np.ndarray]) -> list[np.ndarray]:
    phis = []
    for i, (phi, p) in enumerate(zip(init, net.marginals)):
        phi = np.asarray(phi, dtype=float)
        if phi.shape != p.shape:
            raise ParameterError(f"initial transform for variable {i + 1} has wrong length")
        if len(p) > 1 and (abs(p @ phi) > 1e-9 or abs(p @ phi**2 - 1) > 1e-9):
            raise ParameterError(f"initial transform for variable {i + 1} is not standardized")
        phis.append(phi.copy())
    return phis


def _starts(net: NetworkDistribution, cfg: SolverConfig, init) -> list[list[np.ndarray]]:
    if init is not None:
        return [_check_init(net, init)]
    return [coords_to_transforms(s, net.marginals) for s in initial_starts(net, cfg.starts, cfg.seed)]


def network_ace(
    net: NetworkDistribution,
    cfg: SolverConfig = SolverConfig(),
    init: list[np.ndarray] | None = None,
) -> NmcSolution:
    """Network ACE: each transform becomes the standardized conditional
    expectation of its neighbors' current transforms, in vertex order.

    Runs every start of the shared multi-start policy (or only ``init``
    when given), escaping local optima by sign flips, and keeps the best.
    """
    starts = _starts(net, cfg, init)

    def run(idx: int) -> NmcSolution:
        phis = [p.copy() for p in starts[idx]]
        flags = _new_flags()
        trace = _ace_from(net, phis, _Weights(), cfg, flags)
        corr = net.edge_correlations(phis)
        return NmcSolution(phis, corr, float(corr.sum()), trace, net.graph.edges, flags,
                           {"solver": "ace", **cfg.to_dict()}, idx)

    return pick_best(parallel_map(run, range(len(starts)), cfg.threads))


def _linear_signs(net: NetworkDistribution) -> dict[tuple[int, int], float]:
    """Signs of the Pearson correlations of the (numeric) category values."""
    signs = {}
    for i, j in net.graph.edges:
        if net.dataset is not None:
            xi, xj = net.dataset.numeric[i], net.dataset.numeric[j]
            c = float(np.mean((xi - xi.mean()) * (xj - xj.mean())))
        else:
            pj = net.joint(i, j)
            vi, vj = np.arange(pj.shape[0], dtype=float), np.arange(pj.shape[1], dtype=float)
            c = float((vi - pj.marginal_i @ vi) @ pj.joint @ (vj - pj.marginal_j @ vj))
        signs[(i, j)] = -1.0 if c < 0 else 1.0
    return signs


def absolute_nmc(
    net: NetworkDistribution,
    cfg: SolverConfig = SolverConfig(),
    init: list[np.ndarray] | None = None,
    init_signs: dict[tuple[int, int], float] | None = None,
) -> NmcSolution:
    """Maximize the total absolute edge correlation.

    Alternates ACE sweeps with fixed edge signs and resetting each sign to
    that of its edge correlation (a zero correlation keeps its old sign).
    ``solution.signs`` holds the final signs in edge order and
    ``solution.objective`` the signed sum.
    """
    starts = _starts(net, cfg, init)
    sign0 = dict(init_signs) if init_signs is not None else _linear_signs(net)

    def run(idx: int) -> NmcSolution:
        phis = [p.copy() for p in starts[idx]]
        w = _Weights(signs=dict(sign0))
        flags = _new_flags()
        flags["sign_resets"] = 0
        trace: list[float] = []
        for _ in range(cfg.max_rounds):
            part = _ace_from(net, phis, w, cfg, flags)
            trace.extend(part if not trace else part[1:])
            corr = net.edge_correlations(phis)
            changed = False
            for (i, j), c in zip(net.graph.edges, corr):
                s = np.sign(c)
                if s != 0 and s != w.signs[(i, j)]:
                    w.signs[(i, j)] = float(s)
                    changed = True
            if not changed:
                break
            flags["sign_resets"] += 1
            trace.append(_surrogate(net, phis, w)[0])
        corr = net.edge_correlations(phis)
        signs = np.array([w.signs[e] for e in net.graph.edges])
        return NmcSolution(phis, corr, float(corr.sum()), trace, net.graph.edges, flags,
                           {"solver": "absolute", **cfg.to_dict()}, idx, signs=signs,
                           objective=float(signs @ corr) if len(corr) else 0.0)

    return pick_best(parallel_map(run, range(len(starts)), cfg.threads))


def regularized_nmc(
    net: NetworkDistribution,
    lam: float,
    cfg: SolverConfig = SolverConfig(),
    init: list[np.ndarray] | None = None,
) -> NmcSolution:
    """NMC with a pull of ``lam`` toward the (centered) original variables.

    Update target: ``E[(1-lam)/2 * sum_j phi_j + lam * (X_i - E X_i) | X_i]``.
    ``rho_g`` is the total edge correlation of the returned transforms.
    The updates ascend ``(1-lam)/2 * rho_g + lam * sum_i E[phi_i (X_i - E X_i)]``,
    which is what ``trace`` and ``objective`` report;
    ``extra["regularized_objective"]`` weights edges by ``1-lam`` instead.
    Numeric values come from ``net.dataset.numeric``.
    """
    if not 0.0 <= lam <= 1.0:
        raise ParameterError(f"regularization parameter {lam} outside [0, 1]")
    if net.dataset is None:
        raise ParameterError("regularized NMC needs sample data with numeric values")
    d = net.dataset
    centered = []
    for i in range(net.n):
        x = d.numeric[i] - d.numeric[i].mean()
        centered.append(d.conditional_mean(x, i))
    w = _Weights(edge_scale=(1.0 - lam) / 2.0, lin_scale=lam, centered=centered)
    starts = _starts(net, cfg, init)

    def run(idx: int) -> NmcSolution:
        phis = [p.copy() for p in starts[idx]]
        flags = _new_flags()
        trace = _ace_from(net, phis, w, cfg, flags)
        corr = net.edge_correlations(phis)
        linear = sum(float(net.marginals[i] @ (phis[i] * centered[i])) for i in range(net.n))
        rho = float(corr.sum())
        return NmcSolution(phis, corr, rho, trace, net.graph.edges, flags,
                           {"solver": "regularized", "lambda": lam, **cfg.to_dict()}, idx,
                           objective=trace[-1],
                           extra={"regularized_objective": (1 - lam) * rho + lam * linear})

    return pick_best(parallel_map(run, range(len(starts)), cfg.threads))
