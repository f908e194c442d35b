import warnings

import numpy as np
import pytest

from conftest import bsc, random_pmf
from netmaxcorr.distributions import (
    Dataset,
    DegenerateVariableWarning,
    EmptyDataError,
    InvalidDistributionError,
    PairwiseJoint,
    bivariate_mc_svd,
    discretize,
    empirical_joint,
    marginal_floor,
    standardize,
)


def test_perfect_dependence_joint():
    d = Dataset.from_categories([[0, 0, 1, 1], [0, 0, 1, 1]])
    pj = empirical_joint(d, 0, 1)
    np.testing.assert_allclose(pj.joint, [[0.5, 0], [0, 0.5]])
    np.testing.assert_allclose(pj.q, np.eye(2), atol=1e-15)


def test_independent_uniform_q():
    pj = PairwiseJoint(np.full((2, 2), 0.25))
    np.testing.assert_allclose(pj.q, np.full((2, 2), 0.5))
    s = np.linalg.svd(pj.q, compute_uv=False)
    assert s[1] == pytest.approx(0.0, abs=1e-15)


def test_q_top_singular_pair(rng):
    pj = PairwiseJoint(random_pmf(rng, 3, 4))
    U, s, Vt = np.linalg.svd(pj.q)
    assert s[0] == pytest.approx(1.0, abs=1e-12)
    u, v = U[:, 0] * np.sign(U[0, 0]), Vt[0] * np.sign(Vt[0, 0])
    np.testing.assert_allclose(u, np.sqrt(pj.marginal_i), atol=1e-12)
    np.testing.assert_allclose(v, np.sqrt(pj.marginal_j), atol=1e-12)


def test_mc_independent_and_diagonal():
    assert bivariate_mc_svd(PairwiseJoint(np.full((2, 2), 0.25))).value == pytest.approx(0, abs=1e-12)
    assert bivariate_mc_svd(PairwiseJoint(np.eye(2) / 2)).value == pytest.approx(1, abs=1e-12)


def test_mc_binary_symmetric_channel():
    mc = bivariate_mc_svd(PairwiseJoint(bsc(0.1)))
    # Q = [[0.9, 0.1], [0.1, 0.9]]: singular values 1 and 0.8
    assert mc.value == pytest.approx(0.8, abs=1e-12)
    np.testing.assert_allclose(np.abs(mc.phi_i), [1, 1], atol=1e-12)
    assert mc.phi_i[0] * mc.phi_i[1] < 0


def test_mc_transforms_are_standardized_and_attain_value(rng):
    for _ in range(20):
        pj = PairwiseJoint(random_pmf(rng, *rng.integers(2, 6, size=2)))
        mc = bivariate_mc_svd(pj)
        for phi, p in ((mc.phi_i, pj.marginal_i), (mc.phi_j, pj.marginal_j)):
            assert p @ phi == pytest.approx(0, abs=1e-10)
            assert p @ phi**2 == pytest.approx(1, abs=1e-10)
        assert pj.correlation(mc.phi_i, mc.phi_j) == pytest.approx(mc.value, abs=1e-10)
        assert 0 <= mc.value <= 1 + 1e-12


def test_mc_upper_bounds_random_transforms(rng):
    pj = PairwiseJoint(random_pmf(rng, 4, 3))
    mc = bivariate_mc_svd(pj).value
    for _ in range(200):
        f = standardize(rng.normal(size=4), pj.marginal_i)
        g = standardize(rng.normal(size=3), pj.marginal_j)
        assert pj.correlation(f, g) <= mc + 1e-12


def test_zero_rows_are_pruned():
    P = np.array([[0.5, 0.0, 0.0], [0.0, 0.0, 0.5], [0.0, 0.0, 0.0]])
    pj = PairwiseJoint(P)
    assert pj.shape == (2, 2)
    assert list(pj.kept_i) == [0, 1] and list(pj.kept_j) == [0, 2]


@pytest.mark.parametrize("bad", [np.array([[0.5, 0.6], [0, 0]]), np.array([[-0.1, 0.6], [0.5, 0]]),
                                 np.array([[np.nan, 0.5], [0.5, 0]])])
def test_invalid_joint_rejected(bad):
    with pytest.raises(InvalidDistributionError):
        PairwiseJoint(bad)


def test_single_symbol_gives_zero_mc():
    assert bivariate_mc_svd(PairwiseJoint(np.array([[0.3, 0.7]]))).value == 0.0


def test_quantile_median_split():
    d = discretize(np.arange(1, 11)[None, :], 2, "quantile")
    assert d.values[0].tolist() == [0] * 5 + [1] * 5


def test_constant_column_warns():
    with pytest.warns(DegenerateVariableWarning):
        d = discretize(np.array([[3.0] * 8, np.arange(8.0)]), 4)
    assert d.alphabet_sizes[0] == 1 and d.alphabet_sizes[1] == 4


def test_quantile_bins_balanced():
    x = np.random.default_rng(0).standard_normal((1, 10000))
    counts = np.bincount(discretize(x, 10).values[0])
    assert np.all(np.abs(counts - 1000) <= 1)


def test_fixed_width_bins():
    d = discretize(np.array([[0.0, 0.1, 0.5, 0.9, 1.0]]), 2, "fixed-width")
    assert d.values[0].tolist() == [0, 0, 1, 1, 1]
    with pytest.raises(ValueError):
        discretize(np.array([[0.0, 1.0]]), 2, "nope")


def test_marginal_floor_examples():
    assert marginal_floor([np.array([0.5, 0.5]), np.array([0.9, 0.1])]) == pytest.approx(0.1)
    assert marginal_floor([np.full(4, 0.25)]) == 0.25
    x = np.array([[0] * 3 + [1] * 50 + [2] * 47])
    assert marginal_floor(Dataset.from_categories(x)) == pytest.approx(0.03)


def test_dataset_labels_and_errors():
    d = Dataset.from_categories([["b", "a", "b"], ["c", "d", "d"]], names=["u", "v"])
    assert d.labels == [["a", "b"], ["c", "d"]]
    assert d.values.tolist() == [[1, 0, 1], [0, 1, 1]]
    assert Dataset.from_categories([[5, 9, 9]]).labels == [[5, 9]]
    with pytest.raises(EmptyDataError):
        Dataset.from_categories(np.zeros((2, 0)))


def test_conditional_mean_matches_loop(rng):
    d = Dataset.from_categories(rng.integers(0, 3, size=(2, 200)))
    f = rng.normal(size=200)
    got = d.conditional_mean(f, 0)
    want = [f[d.values[0] == c].mean() for c in range(3)]
    np.testing.assert_allclose(got, want)
