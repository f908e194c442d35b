"""Seeded harnesses for the statistical properties of NMC: continuity in
the distribution, sample-NMC convergence, the partition bound and
graphical-model recovery."""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from .ace import network_ace
from .distributions import Dataset, PairwiseJoint
from .exact import binary_nmc_exact
from .gaussian import EXACT_MAXCUT_LIMIT
from .graph import Graph
from .inference import (
    EXAMPLE_LAMBDA_X,
    EXAMPLE_NULL_PAIRS,
    apply_links,
    infer_precision_multimc,
    infer_precision_nmc,
    sample_covariance_estimate,
    simulate_latent_gaussian,
)
from .mep import solve_mep
from .network import NetworkDistribution, NmcSolution, SolverConfig, parallel_map
from .partition import PartitionSampler, approx_nmc, sample_partitions


def quartiles(values: Sequence[float]) -> dict:
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {"q1": float(q1), "median": float(med), "q3": float(q3),
            "min": float(v.min()), "max": float(v.max()), "count": int(v.size)}


def random_network(g: Graph, sizes: Sequence[int], rng: np.random.Generator,
                   floor: float = 0.05, strength: float = 1.0) -> NetworkDistribution:
    """Random pairwise joints on ``g`` with mutually consistent marginals.

    Each marginal has every symbol above ``floor / size``; each edge joint is
    the independent coupling plus a random zero-margin perturbation scaled
    by ``strength`` times the largest feasible step.
    """
    margs = []
    for k in sizes:
        p = rng.dirichlet(np.ones(k)) * (1 - floor) + floor / k
        margs.append(p / p.sum())
    joints = {}
    for i, j in g.edges:
        base = np.outer(margs[i], margs[j])
        d = rng.uniform(-1, 1, base.shape)
        d = d - d.mean(axis=1, keepdims=True) - d.mean(axis=0, keepdims=True) + d.mean()
        neg = d < 0
        tmax = np.min(base[neg] / -d[neg]) if neg.any() else 0.0
        joints[(i, j)] = base + strength * rng.uniform(0.2, 1.0) * tmax * d
    return NetworkDistribution.from_joints(g, joints, margs)


def random_binary_network(g: Graph, rng: np.random.Generator, floor: float = 0.1) -> NetworkDistribution:
    return random_network(g, [2] * g.n, rng, floor=floor)


def full_joint_network(g: Graph, P: np.ndarray) -> NetworkDistribution:
    """Pairwise joints of the edges of ``g`` from a full ``n``-way pmf tensor."""
    n = P.ndim
    joints = {}
    for i, j in g.edges:
        other = tuple(a for a in range(n) if a not in (i, j))
        joints[(i, j)] = P.sum(axis=other)
    margs = [P.sum(axis=tuple(a for a in range(n) if a != i)) for i in range(n)]
    return NetworkDistribution.from_joints(g, joints, margs)


def exact_or_solver(net: NetworkDistribution, cfg: SolverConfig = SolverConfig()) -> NmcSolution:
    """Binary enumeration when every alphabet is binary and the block is small, else MEP."""
    if all(d <= 2 for d in net.dims) and net.n <= EXACT_MAXCUT_LIMIT + 1:
        return binary_nmc_exact(net)
    return solve_mep(net, cfg)


# ---------------------------------------------------------------- continuity

def continuity(instances: int = 50, n: int = 3, K: int = 2, seed: int = 0,
               cfg: SolverConfig = SolverConfig(starts=4)) -> dict:
    """Check ``|rho - rho~| <= gamma K^n |E| 8 / delta^2`` for ``||P - P~||_inf <= gamma``,
    ``gamma <= delta^(3/2) K^-n``, on random full joints over a path graph."""
    g = Graph.path(n)
    rows = []
    for s in np.random.SeedSequence(seed).spawn(instances):
        rng = np.random.default_rng(s)
        P = rng.dirichlet(np.ones(K**n)).reshape((K,) * n) * 0.5 + 0.5 / K**n
        P /= P.sum()
        D = rng.uniform(-1, 1, P.shape)
        D -= D.mean()
        D /= np.abs(D).max()
        margs = lambda T: [T.sum(axis=tuple(a for a in range(n) if a != i)) for i in range(n)]
        delta0 = min(m.min() for m in margs(P))
        # the admissible gamma depends on delta of both pmfs; halve until consistent
        gamma = rng.uniform(0.1, 1.0) * delta0**1.5 * K ** (-n)
        while True:
            Pt = P + gamma * D
            delta = min(delta0, min(m.min() for m in margs(Pt)))
            if Pt.min() > 0 and gamma <= delta**1.5 * K ** (-n):
                break
            gamma /= 2
        rho = exact_or_solver(full_joint_network(g, P), cfg).rho_g
        rho_t = exact_or_solver(full_joint_network(g, Pt), cfg).rho_g
        bound = gamma * K**n * len(g.edges) * 8 / delta**2
        rows.append({"gamma": gamma, "delta": delta, "gap": abs(rho - rho_t), "bound": bound,
                     "holds": abs(rho - rho_t) <= bound})
    return {"experiment": "continuity", "instances": rows,
            "passed": all(r["holds"] for r in rows)}


# --------------------------------------------------------- sample convergence

def sample_from_joint(P: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    idx = rng.choice(P.size, size=m, p=P.ravel())
    return np.vstack(np.unravel_index(idx, P.shape))


def default_sample_instance(seed: int = 7) -> np.ndarray:
    """A fixed 3-variable ternary pmf with marginals bounded away from zero."""
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.full(27, 0.7)).reshape(3, 3, 3)
    return 0.7 * P + 0.3 / 27


def sample_convergence(ms: Sequence[int] = (100, 1000, 10000), resamples: int = 20, seed: int = 0,
                       P: np.ndarray | None = None, cfg: SolverConfig = SolverConfig(starts=4),
                       threads: int = 1) -> dict:
    """Median ``|rho^(m) - rho|`` over resamples for each sample size ``m``."""
    P = default_sample_instance() if P is None else P
    g = Graph.complete(P.ndim)
    rho = solve_mep(full_joint_network(g, P), cfg).rho_g
    out = []
    for m in ms:
        seqs = np.random.SeedSequence([seed, int(m)]).spawn(resamples)

        def one(s):
            x = sample_from_joint(P, int(m), np.random.default_rng(s))
            d = Dataset.from_categories(x)
            return abs(network_ace(NetworkDistribution.from_dataset(g, d), cfg).rho_g - rho)

        gaps = parallel_map(one, seqs, threads)
        out.append({"m": int(m), "median_gap": float(np.median(gaps)), **{"quartiles": quartiles(gaps)}})
    medians = [r["median_gap"] for r in out]
    return {"experiment": "sample-convergence", "rho": rho, "by_m": out,
            "passed": all(b <= a for a, b in zip(medians, medians[1:]))}


# ----------------------------------------------------------- partition bound

def parse_graph_spec(spec: str) -> Graph:
    """``gridRxC``, ``cycleN``, ``pathN``, ``completeN`` or ``starN``."""
    spec = spec.lower()
    if spec.startswith("grid"):
        r, c = spec[4:].split("x")
        return Graph.grid(int(r), int(c))
    for name, ctor in (("cycle", Graph.cycle), ("path", Graph.path),
                       ("complete", Graph.complete), ("star", Graph.star)):
        if spec.startswith(name):
            return ctor(int(spec[len(name):]))
    raise ValueError(f"unknown graph spec {spec!r}")


def partition_bound(g: Graph, epsilon: float, samples: int = 200, k: int | None = None,
                    seed: int = 0, net: NetworkDistribution | None = None,
                    cfg: SolverConfig = SolverConfig(starts=4), threads: int = 1) -> dict:
    """Mean partitioned estimate versus ``(1 - eps) rho_G`` on binary variables.

    Blocks are solved exactly by sign enumeration when small enough and
    cached by vertex set; the pass rule allows three standard errors.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    net = random_binary_network(g, rng) if net is None else net
    rho = exact_or_solver(net, cfg).rho_g
    sampler = PartitionSampler(epsilon, k, seed)
    parts = sample_partitions(g, sampler, samples)
    cache: dict[tuple[int, ...], NmcSolution] = {}

    def block_solver(sub: NetworkDistribution) -> NmcSolution:
        return exact_or_solver(sub, cfg)

    estimates, cut_counts = [], np.zeros(len(g.edges))
    edge_index = {e: t for t, e in enumerate(g.edges)}
    for p in parts:
        todo = [b for b in p.blocks if b not in cache]
        for b in todo:
            sub, _ = net.restrict(b)
            cache[b] = block_solver(sub) if sub.graph.edges else None
        rho_hat = sum(cache[b].rho_g for b in p.blocks if cache[b] is not None)
        estimates.append(rho_hat)
        owner = p.block_of()
        for e in g.edges:
            if owner[e[0]] != owner[e[1]]:
                cut_counts[edge_index[e]] += 1
    est = np.array(estimates)
    se = float(est.std(ddof=1) / np.sqrt(len(est))) if len(est) > 1 else 0.0
    mean = float(est.mean())
    target = (1 - epsilon) * rho
    return {
        "experiment": "partition-bound", "n": g.n, "edges": len(g.edges), "epsilon": epsilon,
        "k": sampler.radius_cap, "samples": samples, "rho": rho, "mean_rho_hat": mean,
        "std_error": se, "target": target, "max_cut_rate": float(cut_counts.max() / samples) if len(cut_counts) else 0.0,
        "passed": mean >= target - 3 * se,
    }


# ---------------------------------------------------------- gaussian inference

def _inference_seed(args) -> dict:
    lam, links, m, bins, seq, cfg = args
    latent = simulate_latent_gaussian(lam, m, seq)
    raw = apply_links(latent, links, standardize=False)
    observed = apply_links(latent, links)
    nmc = infer_precision_nmc(raw, bins, cfg)
    return {
        "nmc": nmc.error_metric,
        "multimc": infer_precision_multimc(raw, bins).error_metric,
        "latent": sample_covariance_estimate(latent).error_metric,
        "observed": sample_covariance_estimate(observed).error_metric,
        "rho_g": nmc.solution.rho_g,
    }


def gaussian_inference(links: str = "example1", m: int = 10000, seeds: int = 50, bins: int = 10,
                       seed: int = 0, lambda_x: np.ndarray = EXAMPLE_LAMBDA_X,
                       cfg: SolverConfig = SolverConfig(), threads: int = 1) -> dict:
    """Inference error of NMC, pairwise MC, latent and observed covariances over seeds.

    Link outputs are discretized before standardization (quantile bins are
    invariant to the affine rescaling, which would otherwise create ties).
    """
    seqs = np.random.SeedSequence(seed).spawn(seeds)
    rows = parallel_map(_inference_seed, [(lambda_x, links, m, bins, s, cfg) for s in seqs], threads)
    summary = {key: quartiles([r[key] for r in rows]) for key in ("nmc", "multimc", "latent", "observed")}
    med = {k: v["median"] for k, v in summary.items()}
    checks = {"nmc_le_observed": med["nmc"] <= med["observed"]}
    if links != "example2":
        checks["nmc_le_2x_latent"] = med["nmc"] <= 2 * med["latent"]
    return {"experiment": "gaussian-inference", "links": links, "m": m, "seeds": seeds, "bins": bins,
            "per_seed": rows, "summary": summary, "checks": checks, "passed": all(checks.values())}


EXPERIMENTS: dict[str, Callable[..., dict]] = {
    "continuity": continuity,
    "sample-convergence": sample_convergence,
    "partition-bound": partition_bound,
    "gaussian-inference": gaussian_inference,
}
