import numpy as np
import pytest

from conftest import bsc, random_pmf, worst_decrease
from netmaxcorr.distributions import PairwiseJoint, bivariate_mc_svd
from netmaxcorr.experiments import random_network
from netmaxcorr.graph import Graph
from netmaxcorr.mep import (
    MepState,
    assemble_mcp,
    b_to_transforms,
    evaluate,
    gauss_seidel_mep,
    sign_flip_escape,
    solve_mep,
    stationarity_residual,
)
from netmaxcorr.network import NetworkDistribution, SolverConfig, initial_starts


def pair_network(P):
    return NetworkDistribution.from_joints(Graph.path(2), {(0, 1): P})


def unit_start(prob, rng):
    b = []
    for sp in prob.sqrt_p:
        v = rng.normal(size=len(sp))
        v -= (v @ sp) * sp
        b.append(v / np.linalg.norm(v))
    return b


def test_binary_uniform_root_is_projector():
    prob = assemble_mcp(pair_network(bsc(0.2)))
    B, A = prob.B[0], prob.A[0]
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(B)), [0, 1], atol=1e-12)
    np.testing.assert_allclose(A, B, atol=1e-12)
    np.testing.assert_allclose(B @ B, B, atol=1e-12)


def test_root_and_inverse_on_complement(rng):
    net = random_network(Graph.path(2), [4, 3], rng)
    prob = assemble_mcp(net)
    for sp, A, B in zip(prob.sqrt_p, prob.A, prob.B):
        proj = np.eye(len(sp)) - np.outer(sp, sp)
        np.testing.assert_allclose(B @ B, proj, atol=1e-12)
        np.testing.assert_allclose(A @ B, proj, atol=1e-12)


def test_independent_pair_gives_zero_block(rng):
    p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(4))
    prob = assemble_mcp(pair_network(np.outer(p, q)))
    np.testing.assert_allclose(prob.block(0, 1), 0, atol=1e-9)


def test_quadratic_form_matches_direct_expectation(rng):
    for seed in range(5):
        net = random_network(Graph.cycle(4), [2, 3, 4, 3], np.random.default_rng(seed))
        prob = assemble_mcp(net)
        state = evaluate(prob, unit_start(prob, rng))
        phis = b_to_transforms(prob, state)
        direct = sum(float(phis[i] @ net.joint(i, j).joint @ phis[j]) for i, j in net.graph.edges)
        b = np.concatenate(state.b)
        assert 0.5 * b @ prob.dense() @ b == pytest.approx(direct, abs=1e-9)
        assert state.r == pytest.approx(direct, abs=1e-9)
        assert state.lambdas.sum() == pytest.approx(2 * state.r, abs=1e-12)


def test_two_variables_converge_to_svd(rng):
    for _ in range(10):
        P = random_pmf(rng, *rng.integers(2, 6, size=2), floor=0.05)
        prob = assemble_mcp(pair_network(P))
        run = gauss_seidel_mep(prob, unit_start(prob, rng), max_iter=5000, tol=1e-13)
        mc = bivariate_mc_svd(PairwiseJoint(P)).value
        assert abs(run.state.r) == pytest.approx(mc, abs=1e-6)
        assert worst_decrease(run.trace) <= 1e-12


def test_zero_coupling_converges_in_one_sweep(rng):
    p = rng.dirichlet(np.ones(3))
    joints = {e: np.outer(p, p) for e in Graph.cycle(3).edges}
    prob = assemble_mcp(NetworkDistribution.from_joints(Graph.cycle(3), joints))
    run = gauss_seidel_mep(prob, unit_start(prob, rng))
    assert run.sweeps == 1 and run.converged
    assert run.trace == pytest.approx([0.0, 0.0], abs=1e-12)
    assert run.degenerate_updates == 3


def test_trace_monotone_random_networks(rng):
    for seed in range(10):
        g = Graph.complete(4) if seed % 2 else Graph.grid(2, 3)
        net = random_network(g, rng.integers(2, 5, size=g.n), np.random.default_rng(seed))
        prob = assemble_mcp(net)
        run = gauss_seidel_mep(prob, unit_start(prob, rng))
        assert worst_decrease(run.trace) <= 1e-12
        assert run.converged
        assert stationarity_residual(prob, run.state).max() < 1e-4


def test_escape_identity_when_multipliers_nonnegative(rng):
    net = random_network(Graph.path(3), [3, 3, 3], rng)
    prob = assemble_mcp(net)
    state = gauss_seidel_mep(prob, unit_start(prob, rng), tol=1e-13).state
    assert state.lambdas.min() >= 0
    assert sign_flip_escape(prob, state) is state


def test_escape_two_variable_hand_built():
    P = bsc(0.1)
    prob = assemble_mcp(pair_network(P))
    mc = bivariate_mc_svd(PairwiseJoint(P))
    u = prob.B[0] @ (mc.phi_i * prob.sqrt_p[0])
    v = prob.B[1] @ (mc.phi_j * prob.sqrt_p[1])
    state = evaluate(prob, [u / np.linalg.norm(u), -v / np.linalg.norm(v)])
    assert state.lambdas[0] < 0
    out = sign_flip_escape(prob, state)
    assert out.flipped == (0,)
    assert out.r - state.r == pytest.approx(-2 * state.lambdas[0], abs=1e-9)
    assert out.r == pytest.approx(0.8, abs=1e-12)


def replay_gain(prob, state, flipped):
    b = [x.copy() for x in state.b]
    gain = 0.0
    for i in flipped:
        gain += -2 * evaluate(prob, b).lambdas[i]
        b[i] = -b[i]
    return gain


def test_escape_gain_equals_flipped_multipliers(rng):
    independent_cases = 0
    for seed in range(40):
        g = Graph.path(5) if seed % 2 else Graph.cycle(6)
        net = random_network(g, [3] * g.n, np.random.default_rng(seed))
        prob = assemble_mcp(net)
        opt = gauss_seidel_mep(prob, unit_start(prob, rng), tol=1e-13).state
        mask = rng.random(g.n) < 0.4
        if not mask.any():
            mask[0] = True
        state = evaluate(prob, [-x if m else x for x, m in zip(opt.b, mask)])
        if state.lambdas.min() >= 0:
            continue
        out = sign_flip_escape(prob, state)
        assert out.r > state.r
        assert out.r - state.r == pytest.approx(replay_gain(prob, state, out.flipped), abs=1e-9)
        flipped = set(out.flipped)
        if len(flipped) == len(out.flipped) and not any(g.has_edge(a, b) for a in flipped for b in flipped if a < b):
            independent_cases += 1
            expected = -2 * sum(state.lambdas[i] for i in flipped)
            assert out.r - state.r == pytest.approx(expected, abs=1e-9)
    assert independent_cases >= 10


def test_rerun_after_escape_never_loses(rng):
    net = random_network(Graph.cycle(5), [3] * 5, rng)
    prob = assemble_mcp(net)
    opt = gauss_seidel_mep(prob, unit_start(prob, rng)).state
    state = evaluate(prob, [-x if i % 2 else x for i, x in enumerate(opt.b)])
    esc = sign_flip_escape(prob, state)
    run = gauss_seidel_mep(prob, esc)
    assert run.state.r >= state.r - 1e-12
    assert run.state.r >= esc.r - 1e-12


def test_binary_uniform_transform_is_pm_one():
    prob = assemble_mcp(pair_network(bsc(0.3)))
    d = np.array([1.0, -1.0]) / np.sqrt(2)
    phis = b_to_transforms(prob, evaluate(prob, [d, d]))
    np.testing.assert_allclose(phis[0], [1, -1], atol=1e-12)
    np.testing.assert_allclose(phis[1], [1, -1], atol=1e-12)


def test_independent_pair_objective_zero(rng):
    net = pair_network(np.outer(rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(2))))
    sol = solve_mep(net)
    assert sol.rho_g == pytest.approx(0, abs=1e-9)


def test_root_has_single_null_direction_even_for_tiny_mass():
    p = np.array([1 - 2e-12, 1e-12, 1e-12])
    P = np.outer(p, [0.5, 0.5])
    prob = assemble_mcp(pair_network(P))
    sv, vecs = np.linalg.eigh(prob.B[0])
    assert np.sum(sv < 1e-9) == 1
    null = vecs[:, np.argmin(sv)]
    assert abs(null @ np.sqrt(p)) == pytest.approx(1, abs=1e-9)
    np.testing.assert_allclose(prob.B[0], prob.B[0].T)


def test_solve_mep_reports_transforms_and_flags(rng):
    net = random_network(Graph.star(4), [2, 3, 4, 2], rng)
    sol = solve_mep(net, SolverConfig(starts=3))
    assert set(sol.flags) >= {"degenerate_updates", "escapes", "rounds", "converged"}
    assert sol.rho_g == pytest.approx(sum(sol.edge_corr))
    assert sol.extra["r"] == pytest.approx(sol.rho_g, abs=1e-9)
    for phi, p in zip(sol.transforms, net.marginals):
        assert p @ phi == pytest.approx(0, abs=1e-9)
        assert p @ phi**2 == pytest.approx(1, abs=1e-9)


def test_initial_starts_are_unit_and_orthogonal(rng):
    net = random_network(Graph.cycle(4), [2, 3, 4, 5], rng)
    starts = initial_starts(net, 5, seed=3)
    assert len(starts) == 5
    for start in starts:
        for a, p in zip(start, net.marginals):
            assert np.linalg.norm(a) == pytest.approx(1)
            assert a @ np.sqrt(p) == pytest.approx(0, abs=1e-12)
    again = initial_starts(net, 5, seed=3)
    assert all(np.array_equal(x, y) for s, t in zip(starts, again) for x, y in zip(s, t))
