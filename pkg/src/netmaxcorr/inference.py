"""Graphical-model recovery for unknown bijective functions of latent
jointly Gaussian variables, via NMC and pairwise maximal correlation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .ace import network_ace
from .distributions import Dataset, bivariate_mc_svd, discretize, empirical_joint
from .graph import Graph
from .network import NetworkDistribution, NmcSolution, SolverConfig

logger = logging.getLogger(__name__)

# Four-variable example whose precision matrix nearly vanishes at (1,3) and (2,4).
EXAMPLE_LAMBDA_X = np.array([
    [1.0, 0.4, 0.2, 0.3],
    [0.4, 1.0, 0.3, 0.2],
    [0.2, 0.3, 1.0, 0.4],
    [0.3, 0.2, 0.4, 1.0],
])
EXAMPLE_NULL_PAIRS = ((0, 2), (1, 3))

RCOND = 1e-10
EDGE_THRESHOLD = 0.1


class UndefinedMetricError(ValueError):
    pass


class FactorizationError(ValueError):
    pass


def simulate_latent_gaussian(lambda_x: np.ndarray, m: int, seed: int | np.random.SeedSequence = 0) -> np.ndarray:
    """``m`` i.i.d. zero-mean normal samples (``n x m``) with covariance ``lambda_x``."""
    lam = np.asarray(lambda_x, dtype=float)
    w, U = np.linalg.eigh((lam + lam.T) / 2)
    if w.min() < -1e-9:
        raise FactorizationError(f"covariance is not PSD (min eigenvalue {w.min():.3g})")
    root = (U * np.sqrt(np.clip(w, 0, None))) @ U.T
    z = np.random.default_rng(seed).standard_normal((len(lam), m))
    return root @ z


def _standardize_rows(y: np.ndarray) -> np.ndarray:
    y = y - y.mean(axis=1, keepdims=True)
    sd = y.std(axis=1, keepdims=True)
    return y / np.where(sd > 0, sd, 1.0)


def _piecewise_linear(x):
    return np.where(x >= 0, 10.0 * x, 0.1 * x)


def _signed_exp(x):
    return np.where(x >= 0, np.exp(20.0 * np.abs(x)), -np.exp(20.0 * np.abs(x)))


def _folded_scale(x):
    # uses the sample extremes, so it is defined per realization
    return np.where(x >= 0, x / x.max() - 1.0, -x / x.min() + 1.0)


LINKS: dict[str, tuple[Callable[[np.ndarray], np.ndarray], ...]] = {
    "identity": (lambda x: x,) * 4,
    "example1": (_piecewise_linear, lambda x: np.exp(20.0 * x), np.negative, lambda x: x**3),
    "example2": (_signed_exp, _folded_scale, np.negative, lambda x: x**3),
}


def apply_links(latent: np.ndarray, which: str = "example1", standardize: bool = True) -> np.ndarray:
    """Observed ``Y_i = f_i(X_i)``, each row standardized to mean 0, variance 1.

    ``example1`` links are monotone bijections; ``example2`` replaces the
    first two by a split exponential and a folded rescaling (the latter not
    monotone). ``identity`` applies to any number of rows.

    Standardizing ``exp(20 x)`` in double precision merges all small values
    into one (ties), so rank-based steps should use ``standardize=False``.
    """
    if which not in LINKS:
        raise ValueError(f"unknown link suite {which!r}; choose from {sorted(LINKS)}")
    latent = np.asarray(latent, dtype=float)
    links = LINKS[which]
    if which == "identity":
        return _standardize_rows(latent.copy())
    if len(latent) != len(links):
        raise ValueError(f"link suite {which!r} is defined for {len(links)} variables")
    with np.errstate(over="ignore"):
        y = np.vstack([f(x) for f, x in zip(links, latent)])
    if not np.isfinite(y).all():
        raise FloatingPointError("link functions overflowed; sample values too extreme")
    return _standardize_rows(y) if standardize else y


def inference_error(
    j_hat: np.ndarray,
    null_pairs: Sequence[tuple[int, int]] = EXAMPLE_NULL_PAIRS,
    exclude_diagonal: bool = False,
    ordered: bool = False,
) -> float:
    """Mass of ``|J|`` on pairs that should be conditionally independent,
    relative to the total ``sum_{i,j} |J(i,j)|``.

    By default each null pair is counted once in the numerator while the
    denominator runs over all entries; ``ordered=True`` counts both
    ``(i,j)`` and ``(j,i)``.
    """
    j = np.abs(np.asarray(j_hat, dtype=float))
    if j.ndim != 2 or j.shape[0] != j.shape[1]:
        raise ValueError("precision estimate must be square")
    denom = j.sum() - (np.trace(j) if exclude_diagonal else 0.0)
    if denom <= 0:
        raise UndefinedMetricError("all-zero precision matrix")
    num = 0.0
    for a, b in null_pairs:
        num += j[a, b] + (j[b, a] if ordered else 0.0)
    return float(num / denom)


def invert_covariance(lam: np.ndarray) -> tuple[np.ndarray, bool, float]:
    """Inverse via a linear solve; pseudo-inverse when ``rcond`` drops below 1e-10."""
    cond = float(np.linalg.cond(lam))
    if not np.isfinite(cond) or 1.0 / cond < RCOND:
        logger.warning("covariance near-singular (cond=%.3g); using pseudo-inverse", cond)
        return np.linalg.pinv(lam, rcond=RCOND, hermitian=True), True, cond
    return np.linalg.solve(lam, np.eye(len(lam))), False, cond


@dataclass
class PrecisionEstimate:
    lambda_hat: np.ndarray
    j_hat: np.ndarray
    edge_set: list[tuple[int, int]]
    error_metric: float
    singular: bool = False
    condition_number: float = 1.0
    solution: NmcSolution | None = None
    extra: dict = field(default_factory=dict)


def estimate_from_covariance(
    lam: np.ndarray,
    null_pairs: Sequence[tuple[int, int]] = EXAMPLE_NULL_PAIRS,
    threshold: float = EDGE_THRESHOLD,
) -> PrecisionEstimate:
    lam = (lam + lam.T) / 2
    j, singular, cond = invert_covariance(lam)
    scale = np.abs(j).max()
    n = len(j)
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if abs(j[a, b]) > threshold * scale]
    return PrecisionEstimate(lam, j, edges, inference_error(j, null_pairs), singular, cond)


def sample_covariance_estimate(samples: np.ndarray, null_pairs=EXAMPLE_NULL_PAIRS) -> PrecisionEstimate:
    """Baseline: inverse of the empirical correlation of the samples as given."""
    z = _standardize_rows(np.asarray(samples, dtype=float))
    return estimate_from_covariance(z @ z.T / z.shape[1], null_pairs)


def infer_precision_nmc(
    observed: np.ndarray,
    bins: int = 10,
    cfg: SolverConfig = SolverConfig(),
    null_pairs: Sequence[tuple[int, int]] = EXAMPLE_NULL_PAIRS,
    scheme: str = "quantile",
) -> PrecisionEstimate:
    """Discretize, solve NMC on the complete graph, and invert the covariance
    of the transformed samples."""
    d = discretize(observed, bins, scheme)
    net = NetworkDistribution.from_dataset(Graph.complete(d.n), d)
    sol = network_ace(net, cfg)
    z = np.vstack([sol.transforms[i][d.values[i]] for i in range(d.n)])
    est = estimate_from_covariance(z @ z.T / d.m, null_pairs)
    est.solution = sol
    return est


def infer_precision_multimc(
    observed: np.ndarray,
    bins: int = 10,
    null_pairs: Sequence[tuple[int, int]] = EXAMPLE_NULL_PAIRS,
    scheme: str = "quantile",
) -> PrecisionEstimate:
    """Pairwise maximal correlations as an (unsigned) covariance estimate.

    Each pair gets its own transforms, so signs are not recoverable; the
    entries are the non-negative maximal correlations.
    """
    d = discretize(observed, bins, scheme)
    lam = np.eye(d.n)
    for a in range(d.n):
        for b in range(a + 1, d.n):
            lam[a, b] = bivariate_mc_svd(empirical_joint(d, a, b)).value
            lam[b, a] = bivariate_mc_svd(empirical_joint(d, b, a)).value
    lam = (lam + lam.T) / 2
    return estimate_from_covariance(lam, null_pairs)
