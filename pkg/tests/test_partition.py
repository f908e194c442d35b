import itertools

import numpy as np
import pytest

from netmaxcorr.exact import NotBinaryError, binary_basis, binary_nmc_exact
from netmaxcorr.experiments import partition_bound, random_binary_network, random_network
from netmaxcorr.graph import Graph, Partition, cut_edges
from netmaxcorr.network import NetworkDistribution, SolverConfig
from netmaxcorr.ace import network_ace
from netmaxcorr.partition import (
    BlockSolveError,
    PartitionSampler,
    approx_nmc,
    default_radius_cap,
    sample_partition,
    sample_partitions,
    truncated_geometric_pmf,
)


@pytest.mark.parametrize("eps,k", [(0.1, 1), (0.1, 5), (0.2, 53), (0.5, 3), (0.999, 10)])
def test_pmf_sums_to_one(eps, k):
    pmf = truncated_geometric_pmf(eps, k)
    assert len(pmf) == k and np.all(pmf >= 0)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-15)


def test_k_one_is_point_mass():
    np.testing.assert_array_equal(truncated_geometric_pmf(0.3, 1), [1.0])
    g = Graph.path(6)
    p = sample_partition(g, PartitionSampler(0.3, k=1, seed=4))
    p.validate(6)
    assert max(p.block_sizes()) <= 3


def test_near_one_eps_gives_unit_radii_and_last_vertices_win():
    g = Graph.path(5)
    p = sample_partition(g, PartitionSampler(0.999, k=10, seed=0))
    # radius 1 from every vertex in index order: each vertex ends up colored by
    # its highest-indexed closed neighbor
    color = {}
    for v in range(5):
        for u in g.ball(v, 1):
            color[u] = v
    expected = {}
    for u, c in color.items():
        expected.setdefault(c, []).append(u)
    assert Partition(expected.values()) == p


def test_default_radius_cap():
    assert default_radius_cap(0.2) == int(np.ceil(10 * np.log(10)))
    assert PartitionSampler(0.2).radius_cap == 24
    assert PartitionSampler(0.2, k=3).radius_cap == 3
    with pytest.raises(ValueError):
        PartitionSampler(0.0)
    with pytest.raises(ValueError):
        PartitionSampler(0.2, k=0)


def test_partitions_cover_and_are_reproducible():
    g = Graph.grid(5, 5)
    a = sample_partitions(g, PartitionSampler(0.2, seed=9), 20)
    b = sample_partitions(g, PartitionSampler(0.2, seed=9), 20)
    assert a == b
    for p in a:
        p.validate(25)
    assert sample_partitions(g, PartitionSampler(0.2, seed=10), 20) != a


def test_blocks_have_bounded_radius():
    g = Graph.cycle(30)
    for p in sample_partitions(g, PartitionSampler(0.5, k=2, seed=1), 20):
        assert max(p.block_sizes()) <= 5


def test_cut_probability_near_eps():
    g = Graph.grid(6, 6)
    eps = 0.2
    parts = sample_partitions(g, PartitionSampler(eps, seed=2), 400)
    rate = np.mean([len(cut_edges(g, p)) / len(g.edges) for p in parts])
    assert rate <= eps * 1.5


def test_no_cut_edges_reproduces_exact():
    rng = np.random.default_rng(0)
    g = Graph(6, [(0, 1), (1, 2), (3, 4), (4, 5), (3, 5)])
    net = random_binary_network(g, rng)
    exact = binary_nmc_exact(net).rho_g
    res = approx_nmc(net, Partition([[0, 1, 2], [3, 4, 5]]), binary_nmc_exact)
    assert res.cut_edge_count == 0
    assert res.rho_hat == pytest.approx(exact, abs=1e-6)
    res2 = approx_nmc(net, Partition([[0, 1, 2], [3, 4, 5]]), lambda s: network_ace(s, SolverConfig(starts=3)), threads=2)
    assert res2.rho_hat == pytest.approx(exact, abs=1e-6)


def test_singleton_blocks_give_zero():
    net = random_binary_network(Graph.cycle(5), np.random.default_rng(1))
    res = approx_nmc(net, Partition([[v] for v in range(5)]), binary_nmc_exact)
    assert res.rho_hat == 0.0 and res.cut_edge_count == 5
    assert res.block_solutions == [None] * 5


def test_block_failure_names_block():
    net = random_binary_network(Graph.cycle(4), np.random.default_rng(2))

    def broken(sub):
        raise RuntimeError("boom")

    with pytest.raises(BlockSolveError, match="vertices"):
        approx_nmc(net, Partition([[0, 1], [2, 3]]), broken)


def test_cycle_partition_bound():
    rep = partition_bound(Graph.cycle(6), 0.2, samples=200, seed=0)
    assert rep["passed"], rep
    assert rep["mean_rho_hat"] <= rep["rho"] + 1e-9


# -------------------------------------------------------------- exact oracle

def brute_force(net):
    basis = binary_basis(net)
    best = -np.inf
    for s in itertools.product([1, -1], repeat=net.n):
        best = max(best, net.edge_correlations([si * u for si, u in zip(s, basis)]).sum())
    return best


def test_exact_matches_itertools(rng):
    for n in (2, 4, 7):
        g = Graph.complete(n)
        net = random_binary_network(g, rng)
        assert binary_nmc_exact(net).rho_g == pytest.approx(brute_force(net), abs=1e-12)


def test_exact_rejects_nonbinary(rng):
    with pytest.raises(NotBinaryError):
        binary_nmc_exact(random_network(Graph.path(2), [3, 2], rng))
