"""NMC for jointly Gaussian variables: Hermite basis, optimality
certificates for sign-linear transforms, and the Max-Cut reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EXACT_MAXCUT_LIMIT = 24
HERMITE_DEGREE = 6


class InvalidCorrelationError(ValueError):
    pass


class BudgetExceededError(ValueError):
    pass


def validate_correlation(rho: np.ndarray) -> np.ndarray:
    """Check symmetry, unit diagonal, PSD and ``|rho_ij| < 1`` off the diagonal."""
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidCorrelationError("correlation matrix must be square")
    if np.max(np.abs(rho - rho.T), initial=0.0) > 1e-12:
        raise InvalidCorrelationError("correlation matrix is not symmetric")
    if np.max(np.abs(np.diag(rho) - 1.0), initial=0.0) > 1e-12:
        raise InvalidCorrelationError("correlation matrix must have unit diagonal")
    off = rho[~np.eye(len(rho), dtype=bool)]
    if off.size and np.max(np.abs(off)) >= 1.0:
        raise InvalidCorrelationError("off-diagonal correlations must satisfy |rho| < 1")
    if len(rho) and np.linalg.eigvalsh(rho).min() < -1e-9:
        raise InvalidCorrelationError("correlation matrix is not positive semidefinite")
    return rho


def hermite(k: int, x):
    """Degree-``k`` Hermite polynomial normalized for the standard Gaussian.

    Uses ``h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1)``, so ``h_1(x) = x``
    and ``E[h_j(X) h_j(Y)] = rho**j`` for standard bivariate normal ``(X, Y)``.
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for j in range(k):
        prev, cur = cur, (x * cur - math.sqrt(j) * prev) / math.sqrt(j + 1)
    return cur if cur.ndim else float(cur)


def _offdiag(rho: np.ndarray) -> np.ndarray:
    w = np.array(rho, dtype=float)
    np.fill_diagonal(w, 0.0)
    return w


@dataclass
class ConditionReport:
    per_vertex: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(self.per_vertex.all())

    def __bool__(self) -> bool:
        return self.holds


def dominance_condition(rho: np.ndarray) -> ConditionReport:
    """Per vertex: ``sum_j rho_ij >= sum_j rho_ij**2`` over ``j != i``.

    When it holds everywhere the identity transforms solve Gaussian NMC.
    """
    w = _offdiag(validate_correlation(rho))
    lhs, rhs = w.sum(axis=1), (w**2).sum(axis=1)
    return ConditionReport(lhs >= rhs - 1e-12, lhs, rhs)


@dataclass
class SignCertificate:
    balance: np.ndarray
    alignment: np.ndarray
    squares: np.ndarray

    @property
    def balance_ok(self) -> np.ndarray:
        return self.balance >= -1e-12

    @property
    def alignment_ok(self) -> np.ndarray:
        return self.alignment >= self.squares - 1e-12

    @property
    def holds(self) -> bool:
        return bool(self.balance_ok.all() and self.alignment_ok.all())

    def __bool__(self) -> bool:
        return self.holds


def certify_signs(rho: np.ndarray, s: np.ndarray) -> SignCertificate:
    """Sufficient conditions for ``phi_i = s_i X_i`` to be a global NMC optimum.

    Per vertex ``i`` (sums over ``j != i``):
    ``sum (1 - s_i s_j) rho_ij >= 0`` and ``sum s_i s_j rho_ij >= sum rho_ij**2``.
    """
    w = _offdiag(validate_correlation(rho))
    s = np.asarray(s, dtype=float)
    if s.shape != (len(w),) or not np.all(np.abs(s) == 1):
        raise ValueError("signs must be a vector of +1/-1")
    ss = np.outer(s, s)
    return SignCertificate(((1 - ss) * w).sum(axis=1), (ss * w).sum(axis=1), (w**2).sum(axis=1))


@dataclass
class MaxCutSolution:
    signs: np.ndarray
    objective: float
    method: str

    @property
    def nmc_value(self) -> float:
        """Objective counted once per unordered pair."""
        return self.objective / 2.0


def signed_objective(w: np.ndarray, s: np.ndarray) -> float:
    """``sum_{i != j} s_i s_j w_ij`` over ordered pairs."""
    s = np.asarray(s, dtype=float)
    return float(s @ _offdiag(w) @ s)


def _patterns(k: int) -> np.ndarray:
    """All ``2**k`` sign vectors; bit ``b`` of row index set means ``s_b = -1``."""
    idx = np.arange(2**k, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(k, dtype=np.int64)) & 1
    return 1.0 - 2.0 * bits


def maximize_signs(w: np.ndarray) -> tuple[np.ndarray, float]:
    """Exact maximizer of ``s^T W s`` (zero diagonal) with ``s_0 = +1``.

    Meet in the middle: patterns over the first and second halves of the
    free vertices are enumerated separately and combined with one matrix
    product per chunk. Among (numerical) ties the pattern with the lowest
    enumeration index wins, pattern 0 being all ones.
    """
    w = _offdiag(w)
    n = len(w)
    if n == 0:
        return np.ones(0), 0.0
    free = n - 1
    lo_n = free // 2
    hi_n = free - lo_n
    lo = list(range(1, 1 + lo_n))
    hi = [0] + list(range(1 + lo_n, n))
    S_lo = _patterns(lo_n)
    S_hi = np.hstack([np.ones((2**hi_n, 1)), _patterns(hi_n)])
    q_lo = np.einsum("pi,ij,pj->p", S_lo, w[np.ix_(lo, lo)], S_lo)
    q_hi = np.einsum("pi,ij,pj->p", S_hi, w[np.ix_(hi, hi)], S_hi)
    cross = 2.0 * (S_hi @ w[np.ix_(hi, lo)])
    chunk = max(1, (1 << 22) // max(1, len(S_lo)))

    def blocks():
        for start in range(0, len(S_hi), chunk):
            vals = cross[start:start + chunk] @ S_lo.T
            vals += q_hi[start:start + chunk, None]
            vals += q_lo[None, :]
            yield start, vals

    best = max(float(v.max()) for _, v in blocks())
    cutoff = best - 1e-12 * (1.0 + abs(best))
    for start, vals in blocks():
        hit = np.flatnonzero(vals.ravel() >= cutoff)
        if hit.size:
            # enumeration order: low-half index varies fastest
            flat = hit[0]
            h, l = divmod(int(flat), len(S_lo))
            s = np.empty(n)
            s[hi] = S_hi[start + h]
            s[lo] = S_lo[l]
            return s, signed_objective(w, s)
    raise AssertionError("unreachable")


def maxcut_exact(rho: np.ndarray) -> MaxCutSolution:
    """Global maximizer of ``sum_{i != j} s_i s_j rho_ij`` by enumeration."""
    rho = np.asarray(rho, dtype=float)
    if len(rho) > EXACT_MAXCUT_LIMIT:
        raise BudgetExceededError(
            f"n={len(rho)} exceeds the exact enumeration limit {EXACT_MAXCUT_LIMIT}; use maxcut_local_search"
        )
    s, obj = maximize_signs(rho)
    return MaxCutSolution(s, obj, "exact")


def hill_climb(w: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, list[float]]:
    """Steepest single-flip ascent; returns the local optimum and objective path."""
    w = _offdiag(w)
    s = np.array(s, dtype=float)
    field_ = w @ s
    path = [float(s @ field_)]
    while True:
        gains = -4.0 * s * field_
        i = int(np.argmax(gains)) if len(s) else 0
        if not len(s) or gains[i] <= 1e-12:
            return s, path
        s[i] = -s[i]
        field_ += 2.0 * s[i] * w[:, i]
        path.append(float(s @ field_))


def maxcut_local_search(
    rho: np.ndarray,
    restarts: int = 32,
    seed: int = 0,
    init: np.ndarray | None = None,
) -> MaxCutSolution:
    """Best single-flip local optimum over restarts.

    The first restart begins at ``init`` (all ones by default); the rest at
    seeded uniform random sign vectors. Signs are reported with ``s_0 = +1``.
    """
    w = _offdiag(rho)
    n = len(w)
    rng = np.random.default_rng(seed)
    first = np.ones(n) if init is None else np.asarray(init, dtype=float)
    best_s, best = None, -np.inf
    for r in range(max(restarts, 1)):
        start = first if r == 0 else rng.choice([-1.0, 1.0], size=n)
        s, path = hill_climb(w, start)
        if path[-1] > best + 1e-12:
            best_s, best = s, path[-1]
    if n and best_s[0] < 0:
        best_s = -best_s
    return MaxCutSolution(best_s, signed_objective(w, best_s), "local-search")


@dataclass
class GaussianNmcResult:
    value: float
    signs: np.ndarray
    certified: bool
    maxcut: MaxCutSolution
    certificate: SignCertificate


def gaussian_nmc(rho: np.ndarray, restarts: int = 32, seed: int = 0) -> GaussianNmcResult:
    """Best sign-linear NMC solution ``phi_i = s_i X_i`` on the complete graph.

    ``value`` sums ``s_i s_j rho_ij`` once per unordered pair; ``certified``
    says whether the sufficient global-optimality conditions hold for the
    returned signs. Without certification no optimality claim is made.
    """
    rho = validate_correlation(rho)
    if len(rho) <= EXACT_MAXCUT_LIMIT:
        mc = maxcut_exact(rho)
    else:
        mc = maxcut_local_search(rho, restarts, seed)
    cert = certify_signs(rho, mc.signs)
    return GaussianNmcResult(mc.nmc_value, mc.signs, cert.holds, mc, cert)


def hermite_cross_moments(rho: float, degree: int = HERMITE_DEGREE) -> np.ndarray:
    """``E[h_j(X) h_k(Y)]`` for ``j, k <= degree``: ``diag(rho**j)``."""
    return np.diag(rho ** np.arange(degree + 1))
