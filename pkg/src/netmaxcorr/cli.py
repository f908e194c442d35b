"""Command line entry point ``nmc``.

Exit codes: 0 success, 2 malformed input, 3 solver failure, 4 conflicting
configuration.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments
from .ace import ParameterError, absolute_nmc, network_ace, regularized_nmc
from .distributions import (
    EmptyDataError,
    InvalidDistributionError,
    InvalidPairError,
    PairwiseJoint,
    bivariate_mc_svd,
    empirical_joint,
)
from .gaussian import InvalidCorrelationError, dominance_condition, gaussian_nmc, validate_correlation
from .graph import Graph, InvalidGraphError, InvalidPartitionError, read_edge_list
from .io import (
    InputFormatError,
    dumps,
    load_correlation_csv,
    load_dataset,
    load_joints_json,
    load_real_matrix,
    solution_to_dict,
    variable_labels,
)
from .mep import IllConditionedMarginalError, solve_mep
from .network import NetworkDistribution, SolverConfig
from .partition import BlockSolveError, PartitionSampler, approx_nmc, sample_partitions

logger = logging.getLogger("netmaxcorr")

EXIT_INPUT, EXIT_SOLVER, EXIT_CONFIG = 2, 3, 4
INPUT_ERRORS = (InputFormatError, InvalidGraphError, InvalidDistributionError, InvalidPairError,
                EmptyDataError, InvalidCorrelationError, InvalidPartitionError, FileNotFoundError)
SOLVER_ERRORS = (IllConditionedMarginalError, BlockSolveError, FloatingPointError)


class ConfigError(ValueError):
    pass


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    return int(os.environ.get("NMC_THREADS", "1") or 1)


def _config(args) -> SolverConfig:
    return SolverConfig(max_iter=args.max_iter, tol=args.tol, starts=args.starts,
                        seed=args.seed, threads=_threads(args))


def _add_solver_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--starts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default $NMC_THREADS or 1)")


def _add_data_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="CSV of samples, one column per variable")
    p.add_argument("--bins", type=int, help="bin count for real-valued columns")
    p.add_argument("--bin-scheme", choices=["quantile", "fixed-width"], default="quantile")


def _load_network(args) -> NetworkDistribution:
    if bool(args.data) == bool(args.joints):
        raise ConfigError("give exactly one of --data and --joints")
    if args.graph and args.complete:
        raise ConfigError("--graph and --complete are mutually exclusive")
    if args.data:
        d = load_dataset(args.data, args.bins, args.bin_scheme)
        if args.graph:
            g = read_edge_list(args.graph, d.n)
        elif args.complete:
            g = Graph.complete(d.n)
        else:
            raise ConfigError("a graph is required: --graph FILE or --complete")
        if g.n != d.n:
            raise InvalidGraphError(f"graph has {g.n} vertices but data has {d.n} variables")
        return NetworkDistribution.from_dataset(g, d)
    if args.bins:
        raise ConfigError("--bins applies to --data only")
    g = None
    if args.graph:
        g = read_edge_list(args.graph)
    net = load_joints_json(args.joints, g)
    if args.complete:
        net = load_joints_json(args.joints, Graph.complete(net.n))
    return net


def cmd_solve(args) -> dict:
    cfg = _config(args)
    if args.lam is not None and args.solver != "ace":
        raise ConfigError("--lambda is only valid with --solver ace")
    if args.absolute and args.solver != "ace":
        raise ConfigError("--absolute is only valid with --solver ace")
    if args.absolute and args.lam is not None:
        raise ConfigError("--absolute and --lambda cannot be combined")
    partition_opts = (args.epsilon, args.k, args.partition_samples)
    if args.solver != "partitioned" and any(o is not None for o in partition_opts):
        raise ConfigError("--epsilon/--k/--partition-samples are only valid with --solver partitioned")
    echo = {"command": "solve", "solver": args.solver, "lambda": args.lam, "absolute": args.absolute,
            "bins": args.bins, "bin_scheme": args.bin_scheme, "epsilon": args.epsilon, "k": args.k,
            "partition_samples": args.partition_samples, "max_iter": cfg.max_iter, "tol": cfg.tol,
            "starts": cfg.starts, "seed": cfg.seed}

    if args.solver == "gaussian":
        if not args.data:
            raise ConfigError("--solver gaussian needs --data with real-valued columns")
        names, x = load_real_matrix(args.data)
        rho = np.corrcoef(x)
        res = gaussian_nmc(rho, seed=cfg.seed)
        return {"rho_g": res.value, "signs": res.signs.astype(int).tolist(), "certified": res.certified,
                "variables": names, "method": res.maxcut.method, "config_echo": echo}

    net = _load_network(args)
    if args.solver == "mep":
        sol = solve_mep(net, cfg)
    elif args.solver == "ace":
        if args.lam is not None:
            sol = regularized_nmc(net, args.lam, cfg)
        elif args.absolute:
            sol = absolute_nmc(net, cfg)
        else:
            sol = network_ace(net, cfg)
    else:
        return _solve_partitioned(net, args, cfg, echo)
    if sol.flags.get("degenerate_updates") and not np.isfinite(sol.rho_g):
        raise IllConditionedMarginalError("solver produced a non-finite objective")
    return solution_to_dict(sol, net, echo)


def _solve_partitioned(net: NetworkDistribution, args, cfg: SolverConfig, echo: dict) -> dict:
    eps = 0.2 if args.epsilon is None else args.epsilon
    sampler = PartitionSampler(eps, args.k, cfg.seed)
    count = args.partition_samples or 1
    block_cfg = SolverConfig(cfg.max_iter, cfg.tol, cfg.starts, cfg.seed, cfg.max_rounds, 1)
    names, labels = variable_labels(net)
    runs = []
    for p in sample_partitions(net.graph, sampler, count):
        res = approx_nmc(net, p, lambda sub: network_ace(sub, block_cfg), cfg.threads)
        transforms: dict = {}
        for block, sol in zip(p.blocks, res.block_solutions):
            for local, v in enumerate(block):
                if sol is not None:
                    transforms[names[v]] = {labels[v][c]: float(x) for c, x in enumerate(sol.transforms[local])}
        runs.append({"blocks": [[v + 1 for v in b] for b in p.blocks], "rho_hat": res.rho_hat,
                     "cut_edges": res.cut_edge_count, "block_sizes": res.block_sizes,
                     "transforms": transforms})
    est = [r["rho_hat"] for r in runs]
    return {"rho_hat_mean": float(np.mean(est)), "epsilon": eps, "k": sampler.radius_cap,
            "partitions": runs, "config_echo": echo}


def cmd_mc(args) -> dict:
    if bool(args.data) == bool(args.joints):
        raise ConfigError("give exactly one of --data and --joints")
    if args.data:
        d = load_dataset(args.data, args.bins, args.bin_scheme)
        if d.n != 2:
            raise InputFormatError(f"mc expects exactly two columns, got {d.n}")
        pj = empirical_joint(d, 0, 1)
        names, labels = d.names, [[str(x) for x in lab] for lab in d.labels]
    else:
        net = load_joints_json(args.joints)
        if net.n != 2:
            raise InputFormatError("mc expects a single pair")
        pj = net.joint(0, 1)
        names, labels = variable_labels(net)
    mc = bivariate_mc_svd(pj)
    return {
        "mc": mc.value,
        "variables": names,
        "transforms": {names[0]: {labels[0][c]: float(v) for c, v in enumerate(mc.phi_i)},
                       names[1]: {labels[1][c]: float(v) for c, v in enumerate(mc.phi_j)}},
        "correlation": pj.correlation(mc.phi_i, mc.phi_j),
    }


def cmd_gaussian(args) -> dict:
    rho = validate_correlation(load_correlation_csv(args.corr))
    res = gaussian_nmc(rho, restarts=args.restarts, seed=args.seed)
    dom = dominance_condition(rho)
    return {
        "value": res.value,
        "maxcut_objective": res.maxcut.objective,
        "signs": res.signs.astype(int).tolist(),
        "method": res.maxcut.method,
        "certified": res.certified,
        "dominance_condition": {"holds": dom.holds, "per_vertex": dom.per_vertex.tolist()},
    }


def _graph_from_args(args) -> Graph:
    if args.graph and args.graph_spec:
        raise ConfigError("--graph and --graph-spec are mutually exclusive")
    if args.graph:
        return read_edge_list(args.graph)
    if args.graph_spec:
        return experiments.parse_graph_spec(args.graph_spec)
    raise ConfigError("a graph is required: --graph FILE or --graph-spec SPEC")


def cmd_partition(args) -> dict:
    g = _graph_from_args(args)
    sampler = PartitionSampler(args.epsilon, args.k, args.seed, args.shuffle)
    parts = sample_partitions(g, sampler, args.samples)
    return {"epsilon": args.epsilon, "k": sampler.radius_cap, "n": g.n,
            "partitions": [{"blocks": [[v + 1 for v in b] for b in p.blocks], "block_sizes": p.block_sizes(),
                            "cut_edges": len(g.edges) - sum(1 for e in g.edges if p.block_of()[e[0]] == p.block_of()[e[1]])}
                           for p in parts]}


def cmd_experiment(args) -> dict:
    threads = _threads(args)
    name = args.name
    if name == "continuity":
        return experiments.continuity(args.instances, seed=args.seed)
    if name == "sample-convergence":
        ms = [int(x) for x in args.m.split(",")] if args.m else [100, 1000, 10000]
        return experiments.sample_convergence(ms, args.resamples, args.seed, threads=threads)
    if name == "partition-bound":
        g = experiments.parse_graph_spec(args.graph or "cycle6")
        return experiments.partition_bound(g, args.epsilon, args.samples, args.k, args.seed, threads=threads)
    if name == "gaussian-inference":
        m = int(args.m) if args.m else 10000
        return experiments.gaussian_inference(args.links, m, args.seeds, args.bins, args.seed, threads=threads)
    raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(experiments.EXPERIMENTS)}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmc", description="Network maximal correlation toolkit")
    parser.add_argument("-o", "--output", help="write JSON here instead of stdout")
    parser.add_argument("--timing", action="store_true", help="add wall_time to the output")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="network maximal correlation")
    _add_data_opts(p)
    p.add_argument("--joints", help="JSON of pairwise joint pmfs")
    p.add_argument("--graph", help="edge list, 1-based 'i j' per line")
    p.add_argument("--complete", action="store_true", help="use the complete graph")
    p.add_argument("--solver", choices=["ace", "mep", "partitioned", "gaussian"], default="ace")
    p.add_argument("--lambda", dest="lam", type=float, help="regularization weight in [0, 1]")
    p.add_argument("--absolute", action="store_true", help="maximize total absolute correlation")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--partition-samples", type=int)
    _add_solver_opts(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("mc", help="bivariate maximal correlation")
    _add_data_opts(p)
    p.add_argument("--joints")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("gaussian", help="sign-linear NMC of a Gaussian correlation matrix")
    p.add_argument("--corr", required=True, help="CSV n x n correlation matrix")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gaussian)

    p = sub.add_parser("partition", help="sample ball-carving partitions")
    p.add_argument("--graph")
    p.add_argument("--graph-spec", help="gridRxC, cycleN, pathN, completeN, starN")
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--k", type=int)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--shuffle", action="store_true", help="seeded random vertex order")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("experiment", help="run a statistical harness")
    p.add_argument("name")
    p.add_argument("--links", default="example1", choices=["identity", "example1", "example2"])
    p.add_argument("--m", help="sample size (comma list for sample-convergence)")
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--graph", help="graph spec, e.g. grid8x8 or cycle6")
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--k", type=int)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--resamples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        result = args.func(args)
    except (ConfigError, ParameterError) as exc:
        print(f"nmc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except INPUT_ERRORS as exc:
        print(f"nmc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SOLVER_ERRORS as exc:
        print(f"nmc: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"nmc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.timing:
        result["wall_time"] = time.perf_counter() - start
    text = dumps(result)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
