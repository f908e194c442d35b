"""Exact NMC when every variable is binary.

A standardized function of a two-symbol variable is unique up to sign, so
NMC reduces to maximizing ``sum_edges s_i s_j E[u_i u_j]`` over signs.
"""

from __future__ import annotations

import numpy as np

from .distributions import standardize
from .gaussian import maximize_signs
from .network import NetworkDistribution, NmcSolution


class NotBinaryError(ValueError):
    pass


def binary_basis(net: NetworkDistribution) -> list[np.ndarray]:
    """The standardized transform ``(+a, -b)`` of each binary variable."""
    basis = []
    for i, p in enumerate(net.marginals):
        if len(p) == 1:
            basis.append(np.zeros(1))
            continue
        if len(p) != 2:
            raise NotBinaryError(f"variable {i + 1} has {len(p)} symbols")
        basis.append(standardize(np.array([1.0, 0.0]), p))
    return basis


def binary_nmc_exact(net: NetworkDistribution) -> NmcSolution:
    """Global NMC over all sign patterns (enumeration, no size budget)."""
    basis = binary_basis(net)
    c = net.edge_correlations(basis)
    w = np.zeros((net.n, net.n))
    for (i, j), cij in zip(net.graph.edges, c):
        w[i, j] = w[j, i] = cij
    s, _ = maximize_signs(w)
    transforms = [si * u for si, u in zip(s, basis)]
    corr = net.edge_correlations(transforms)
    value = float(corr.sum())
    return NmcSolution(transforms, corr, value, [value], net.graph.edges,
                       config={"solver": "binary-exact"}, signs=s)
