"""Spectral heat semigroup of the discrete generator L = -M^{-1} K.

Besides the spectral route, the truncated exponential series sum t^k/k! L^k g
is available; it is only reliable while t * lambda_max stays moderate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

EPS = np.finfo(float).eps


class TaylorDivergence(ArithmeticError):
    pass


def _dense(A):
    return A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)


def _mnorm(M, v):
    return math.sqrt(max(float(v @ (M @ v)), 0.0))


@dataclass
class SpectralBasis:
    eigenvalues: np.ndarray  # ascending
    vectors: np.ndarray  # (n_dofs, k), M-orthonormal columns
    M: object

    @property
    def k(self):
        return len(self.eigenvalues)

    def coefficients(self, g):
        g = getattr(g, "values", g)
        return self.vectors.T @ (self.M @ g)


def spectral_decompose(K, M, k=None):
    """Lowest k eigenpairs of K v = lambda M v by a dense symmetric solve."""
    Kd, Md = _dense(K), _dense(M)
    n = Kd.shape[0]
    k = n if k is None else int(k)
    if not 0 < k <= n:
        raise ValueError("k must be between 1 and the number of dofs")
    w, V = la.eigh(Kd, Md, subset_by_index=[0, k - 1])
    w = np.where(np.abs(w) < 1e-12 * max(1.0, abs(w[-1])), 0.0, w)
    return SpectralBasis(w, V, M)


def semigroup_apply(basis, t, g):
    """S(t) g = sum_j exp(-lambda_j t) (v_j^T M g) v_j."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    c = basis.coefficients(g)
    return basis.vectors @ (np.exp(-basis.eigenvalues * t) * c)


def _generator(K, M):
    solve_M = spla.factorized(sp.csc_matrix(M))
    return lambda v: -solve_M(K @ v)


def taylor_iterate(K, M, t, g, tol=1e-10, max_terms=1000):
    """Partial sums of sum_k t^k/k! L^k g until a term drops below ``tol`` in M-norm.

    Raises :class:`TaylorDivergence` when the largest term is so big that
    cancellation in floating point cannot deliver ``tol`` (stiff exponentials),
    or when ``max_terms`` is exceeded.
    """
    g = np.asarray(getattr(g, "values", g), dtype=float)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return g.copy(), 0
    L = _generator(K, M)
    total = g.copy()
    term = g.copy()
    for n in range(1, max_terms + 1):
        term = (t / n) * L(term)
        total += term
        size = _mnorm(M, term)
        if size * EPS > tol:
            raise TaylorDivergence(f"term {n} has M-norm {size:.3e}; round-off exceeds tol")
        if size < tol:
            return total, n
    raise TaylorDivergence(f"no convergence within {max_terms} terms")


@dataclass
class SmoothnessReport:
    terms: np.ndarray  # a_n = s^n/n! ||L^n g||_M, n = 0..n_max (inf on overflow)
    log_terms: np.ndarray  # log a_n, -inf where a_n = 0
    sup: float
    decaying: bool

    @property
    def bounded(self):
        return bool(np.isfinite(self.sup))


def smoothness_diagnostic(K, M, g, s, n_max=40, basis=None, floor=1e-12):
    """Growth profile a_n = (s^n / n!) ||L^n g||_M of the iterated generator.

    Evaluated in the spectral basis, ||L^n g||_M^2 = sum_j lambda_j^(2n) c_j^2,
    because repeated application of L amplifies round-off in the top modes by
    lambda_max^n. Coefficients below ``floor`` times the largest one are
    treated as round-off and dropped.
    """
    if n_max > 60:
        raise ValueError("n_max must be at most 60")
    if s < 0:
        raise ValueError("s must be nonnegative")
    basis = basis or spectral_decompose(K, M)
    c = basis.coefficients(g)
    keep = np.abs(c) > floor * np.abs(c).max() if np.any(c) else np.zeros(len(c), bool)
    lam, c = basis.eigenvalues[keep], np.abs(c[keep])
    n = np.arange(n_max + 1)
    logs = np.full(n_max + 1, -np.inf)
    if len(c):
        logs[0] = 0.5 * math.log(float(np.sum(c**2)))
    pos = lam > 0
    if s > 0 and np.any(pos):
        lc = np.log(c[pos])
        ll = np.log(lam[pos])
        for k in n[1:]:
            x = 2 * (k * ll + lc)
            m = x.max()
            logs[k] = k * math.log(s) - math.lgamma(k + 1) + 0.5 * (m + math.log(np.exp(x - m).sum()))
    with np.errstate(over="ignore"):
        a = np.exp(logs)
    peak = int(np.argmax(logs))
    tail = logs[peak:]
    finite = tail[np.isfinite(tail)]
    decaying = bool(np.all(np.diff(finite) <= 1e-12) and logs[-1] <= logs[peak])
    return SmoothnessReport(a, logs, float(a.max()), decaying)


@dataclass
class SemigroupCheck:
    law_error: float
    contraction: bool
    tol: float

    @property
    def passed(self):
        return self.law_error <= self.tol and self.contraction


def semigroup_property_check(basis, t, s, g, tol=1e-10):
    """Semigroup law ||S(t+s)g - S(t)S(s)g||_M and contraction ||S(t)g||_M <= ||g||_M."""
    M = basis.M
    g = np.asarray(getattr(g, "values", g), dtype=float)
    lhs = semigroup_apply(basis, t + s, g)
    rhs = semigroup_apply(basis, t, semigroup_apply(basis, s, g))
    err = _mnorm(M, lhs - rhs)
    gn = _mnorm(M, g)
    contraction = _mnorm(M, semigroup_apply(basis, t, g)) <= gn * (1 + 1e-12) + 1e-14
    return SemigroupCheck(err, bool(contraction), tol)
