"""Weak Neumann problem with one mean constraint per kernel group."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import CoefficientMatrix, FemSystem, build_system, integrate, l2_error
from .discretize import Field, kernel_groups
from .structure import Structure

COMPAT_TOL = 1e-9


class CompatibilityError(ValueError):
    def __init__(self, residuals):
        self.residuals = residuals
        super().__init__(f"right-hand side is not orthogonal to the kernel: group integrals {residuals}")


@dataclass
class EllipticProblem:
    structure: Structure
    f: object  # per-component frame function(s), dict or callable or scalar
    h: float
    B: Optional[CoefficientMatrix] = None


def check_compatibility(f, s, groups=None, h=0.05):
    """Integral of f over each kernel group (exact component geometry)."""
    from .discretize import mesh

    groups = groups if groups is not None else kernel_groups(s)
    ms = mesh(s, h)
    return [integrate(f, ms, s, components=set(g)) for g in groups]


def _constraint_projector(C):
    """Euclidean projector removing span of the constraint rows (disjoint supports)."""
    C = np.asarray(C.todense() if sp.issparse(C) else C)

    def apply(r):
        out = np.array(r, dtype=float)
        for c in C:
            out -= (out @ c) / (c @ c) * c
        return out

    return apply


def residual(K, u, F, C):
    """||P (K u - F)|| with the kernel-group components removed."""
    u = getattr(u, "values", u)
    F = getattr(F, "values", F)
    return float(np.linalg.norm(_constraint_projector(C)(K @ u - F)))


@dataclass
class EllipticSolution:
    u: Field
    system: FemSystem
    load: Field
    multipliers: np.ndarray
    residual: float
    group_means: list = field(default_factory=list)

    @property
    def energy(self):
        v = self.u.values
        return float(v @ (self.system.K @ v))


def solve_system(system, F, check=True):
    """Solve [K C^T; C 0][u; lam] = [F; 0] for a prepared system."""
    F = getattr(F, "values", F)
    K, C = system.K, system.constraint_matrix()
    ng = C.shape[0]
    A = sp.bmat([[K, sp.csr_matrix(C.T)], [sp.csr_matrix(C), None]], format="csc")
    rhs = np.concatenate([F, np.zeros(ng)])
    sol = spla.spsolve(A, rhs)
    if not np.all(np.isfinite(sol)):
        raise np.linalg.LinAlgError("singular saddle-point system")
    u, lam = sol[: system.n_dofs], sol[system.n_dofs:]
    res = residual(K, u, F, C)
    meas = system.dofmap.group_measures
    means = [float(c @ u) / m for c, m in zip(C, meas)]
    if check and res > 1e-10 * max(np.linalg.norm(F), 1.0):
        raise np.linalg.LinAlgError(f"saddle-point residual too large: {res:.3e}")
    return EllipticSolution(Field(u, system.dofmap), system, Field(F, system.dofmap), lam, res, means)


def solve_elliptic(p, system=None):
    """Weak solution with zero mean on every kernel group; rejects incompatible f."""
    system = system or build_system(p.structure, p.h, p.B)
    groups = system.dofmap.kernel_groups
    resid = [integrate(p.f, system.meshset, p.structure, components=set(g)) for g in groups]
    if max(abs(r) for r in resid) > COMPAT_TOL:
        raise CompatibilityError(resid)
    return solve_system(system, system.load(p.f))


def poincare_constant(K, M, group_dofs):
    """C_k = 1 / smallest nonzero generalized eigenvalue of K v = lam M v on one group.

    Returns ``(C, eigvec)`` with ``eigvec`` over the group's dofs.
    """
    idx = np.asarray(group_dofs)
    Kg = K[idx][:, idx].toarray() if sp.issparse(K) else np.asarray(K)[np.ix_(idx, idx)]
    Mg = M[idx][:, idx].toarray() if sp.issparse(M) else np.asarray(M)[np.ix_(idx, idx)]
    if len(idx) < 2:
        raise ValueError("group needs at least two dofs")
    w, V = la.eigh(Kg, Mg, subset_by_index=[0, 1])
    if not w[1] > 1e-10 * max(abs(w[0]), 1.0) or w[1] <= 0:
        raise np.linalg.LinAlgError("no positive eigenvalue on the group")
    return 1.0 / w[1], V[:, 1]


def group_poincare_constants(system):
    return [poincare_constant(system.K, system.M, system.dofmap.group_dofs(k))[0]
            for k in range(system.dofmap.n_groups)]


@dataclass
class ConvergenceTable:
    h: list
    errors: list
    rates: list

    def rows(self):
        rates = [float("nan")] + list(self.rates)
        return list(zip(self.h, self.errors, rates))


def convergence_study(p, h_list, oracle):
    """L2_mu errors against ``oracle`` and observed rates log2(e(2h)/e(h))."""
    errors = []
    for h in h_list:
        sol = solve_elliptic(EllipticProblem(p.structure, p.f, h, p.B))
        errors.append(l2_error(sol.u, oracle))
    rates = [math.log(e0 / e1) / math.log(h0 / h1)
             for (h0, e0), (h1, e1) in zip(zip(h_list, errors), zip(h_list[1:], errors[1:]))]
    return ConvergenceTable(list(h_list), errors, rates)
