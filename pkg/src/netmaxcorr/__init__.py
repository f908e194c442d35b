"""Network maximal correlation: optimal per-variable transforms maximizing
total pairwise correlation over a graph."""

from .ace import absolute_nmc, network_ace, regularized_nmc
from .distributions import (
    Dataset,
    PairwiseJoint,
    bivariate_mc_svd,
    discretize,
    empirical_joint,
    marginal_floor,
)
from .exact import binary_nmc_exact
from .gaussian import (
    certify_signs,
    dominance_condition,
    gaussian_nmc,
    hermite,
    maxcut_exact,
    maxcut_local_search,
)
from .graph import Graph, Partition, cut_edges, internal_edges
from .mep import assemble_mcp, b_to_transforms, gauss_seidel_mep, sign_flip_escape, solve_mep
from .network import NetworkDistribution, NmcSolution, SolverConfig
from .partition import PartitionSampler, approx_nmc, sample_partition

__all__ = [
    "Dataset", "PairwiseJoint", "bivariate_mc_svd", "discretize", "empirical_joint", "marginal_floor",
    "Graph", "Partition", "internal_edges", "cut_edges",
    "NetworkDistribution", "NmcSolution", "SolverConfig",
    "assemble_mcp", "gauss_seidel_mep", "sign_flip_escape", "b_to_transforms", "solve_mep",
    "network_ace", "absolute_nmc", "regularized_nmc", "binary_nmc_exact",
    "PartitionSampler", "sample_partition", "approx_nmc",
    "hermite", "dominance_condition", "certify_signs", "maxcut_exact", "maxcut_local_search", "gaussian_nmc",
]
