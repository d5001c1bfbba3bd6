"""Discrete bilinear forms on a low-dimensional structure.

Stiffness uses the relaxed coefficient matrix evaluated pointwise at element
quadrature points, which are always interior to a single component.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from .discretize import DofMap, Field, MeshSet, build_dof_map, mesh
from .quadrature import gauss_segment
from .structure import Disc, Structure


class RelaxationError(ArithmeticError):
    """Raised when a normal direction is degenerate for the coefficient matrix."""


def relax_matrix(B, tangents, normals, tol=1e-12):
    """Relaxed matrix B - sum_i (B e_i)(B e_i)^T / (B e_i, e_i).

    The e_i are the normal vectors projected onto Im B and made orthonormal in
    the B inner product. Normals lying in ker B are dropped.
    """
    B = np.asarray(B, dtype=float)
    if np.abs(B - B.T).max() > 1e-14 * max(1.0, np.abs(B).max()):
        raise ValueError("coefficient matrix must be symmetric")
    w, V = np.linalg.eigh(B)
    scale = max(np.abs(w).max(), 1.0)
    im = V[:, np.abs(w) > tol * scale]
    P_im = im @ im.T
    tangents = np.atleast_2d(tangents)
    if np.linalg.norm(tangents - tangents @ P_im) > 1e-10:
        raise RelaxationError("tangent space is not contained in Im B")
    es = []
    for n in np.atleast_2d(normals):
        v = P_im @ n
        if np.linalg.norm(v) <= tol:
            continue
        for e in es:
            v = v - (B @ v @ e) * e
        if np.linalg.norm(v) <= 1e-10:
            continue
        q = v @ B @ v
        if q <= tol:
            raise RelaxationError(f"B-degenerate normal direction ((Be,e) = {q:.3e})")
        es.append(v / math.sqrt(q))
    out = B.copy()
    for e in es:
        Be = B @ e
        out -= np.outer(Be, Be)
    return 0.5 * (out + out.T)


@dataclass
class CoefficientMatrix:
    """Symmetric 3x3 coefficient field with declared ellipticity constant."""

    B: Union[np.ndarray, Callable] = field(default_factory=lambda: np.eye(3))
    lam: float = 1.0

    def __post_init__(self):
        if not callable(self.B):
            self.B = np.asarray(self.B, dtype=float)
            if self.B.shape != (3, 3) or np.abs(self.B - self.B.T).max() > 0:
                raise ValueError("B must be a symmetric 3x3 matrix")
        if not self.lam > 0:
            raise ValueError("ellipticity constant must be positive")

    @property
    def is_constant(self):
        return not callable(self.B)

    def __call__(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, 3)
        if self.is_constant:
            return np.broadcast_to(self.B, (len(X), 3, 3))
        out = np.asarray(self.B(X), dtype=float).reshape(len(X), 3, 3)
        if np.abs(out - out.transpose(0, 2, 1)).max() > 0:
            raise ValueError("B(x) is not symmetric")
        return out

    def check_ellipticity(self, X, n_samples=20, seed=0):
        """Spot-check (B xi, xi) >= lam |xi|^2 on Im B at the given points."""
        rng = np.random.default_rng(seed)
        for Bx in self(X):
            w, V = np.linalg.eigh(Bx)
            im = V[:, np.abs(w) > 1e-12 * max(1.0, np.abs(w).max())]
            xi = rng.standard_normal((n_samples, im.shape[1])) @ im.T
            q = np.einsum("ni,ij,nj->n", xi, Bx, xi)
            if np.any(q < self.lam * np.sum(xi**2, axis=1) * (1 - 1e-12)):
                return False
        return True


def _as_component_func(f, cid):
    if isinstance(f, dict):
        f = f.get(cid, 0.0)
    if callable(f):
        return f
    value = float(f)
    return lambda xi: np.full(len(xi), value)


def _eval(f, xi):
    xi2 = xi.reshape(-1, xi.shape[-1])
    return np.broadcast_to(np.asarray(f(xi2), dtype=float), (len(xi2),)).reshape(xi.shape[:-1])


def _coo_to_csr(rows, cols, vals, n):
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    A.sum_duplicates()
    return A


def assemble_stiffness(ms, dm, B=None, s=None):
    """K[a,b] = sum_i int theta_i (B_mu grad phi_b) . grad phi_a over S_i."""
    s = s or ms.structure
    B = B or CoefficientMatrix()
    rows, cols, vals = [], [], []
    for c in s.components:
        cm = ms[c.id]
        pts, w = cm.quadrature()
        theta = _eval(c.theta, pts)
        G = cm.frame_gradients() @ c.tangents  # (ne, nloc, 3) ambient
        if B.is_constant:
            Bmu = relax_matrix(B.B, c.tangents, c.normals)
            coef = (w * theta).sum(axis=1)
            Ke = np.einsum("e,eai,ij,ebj->eab", coef, G, Bmu, G)
        else:
            X = c.to_ambient(pts.reshape(-1, c.dim))
            Bmu = np.array([relax_matrix(b, c.tangents, c.normals) for b in B(X)]).reshape(*w.shape, 3, 3)
            Ke = np.einsum("eq,eai,eqij,ebj->eab", w * theta, G, Bmu, G)
        g = dm.local_to_global[c.id][cm.cells]
        nloc = g.shape[1]
        rows.append(np.repeat(g, nloc, axis=1).ravel())
        cols.append(np.tile(g, (1, nloc)).ravel())
        vals.append(Ke.ravel())
    K = _coo_to_csr(rows, cols, vals, dm.n_dofs)
    return ((K + K.T) * 0.5).tocsr()


def assemble_mass(ms, dm, s=None):
    """M[a,b] = sum_i int theta_i phi_a phi_b over S_i."""
    s = s or ms.structure
    rows, cols, vals = [], [], []
    for c in s.components:
        cm = ms[c.id]
        pts, w = cm.quadrature()
        theta = _eval(c.theta, pts)
        N = cm.shape_values()
        Me = np.einsum("eq,qa,qb->eab", w * theta, N, N)
        g = dm.local_to_global[c.id][cm.cells]
        nloc = g.shape[1]
        rows.append(np.repeat(g, nloc, axis=1).ravel())
        cols.append(np.tile(g, (1, nloc)).ravel())
        vals.append(Me.ravel())
    M = _coo_to_csr(rows, cols, vals, dm.n_dofs)
    return ((M + M.T) * 0.5).tocsr()


def assemble_load(f, ms, dm, s=None):
    """F[a] = sum_i int theta_i f phi_a over S_i; f is per-component in frame coordinates."""
    s = s or ms.structure
    F = np.zeros(dm.n_dofs)
    for c in s.components:
        cm = ms[c.id]
        pts, w = cm.quadrature()
        fq = _eval(_as_component_func(f, c.id), pts) * _eval(c.theta, pts)
        Fe = np.einsum("eq,qa->ea", w * fq, cm.shape_values())
        np.add.at(F, dm.local_to_global[c.id][cm.cells], Fe)
    return Field(F, dm)


def _disc_integral(c, g, h, order=8):
    """Exact-geometry polar quadrature over a disc component."""
    R = c.shape.radius
    nr = max(8, math.ceil(R / h))
    nt = max(48, math.ceil(2 * math.pi * R / h))
    x, w = gauss_segment(order)
    r = (np.arange(nr)[:, None] + x[None, :]).ravel() * R / nr
    wr = np.tile(w, nr) * R / nr
    t = (np.arange(nt)[:, None] + x[None, :]).ravel() * 2 * math.pi / nt
    wt = np.tile(w, nt) * 2 * math.pi / nt
    rr, tt = np.meshgrid(r, t, indexing="ij")
    xi = np.asarray(c.shape.center) + np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
    vals = _eval(g, xi) * _eval(c.theta, xi)
    return float(np.sum(vals * (wr[:, None] * wt[None, :] * rr).ravel()))


def integrate(g, ms, s=None, components=None):
    """sum_i int theta_i g dS_i for per-component frame functions g.

    Segments and polygons use the mesh cells; discs are integrated over the
    exact disc with a polar Gauss rule whose panels follow the mesh size.
    """
    s = s or ms.structure
    total = 0.0
    for c in s.components:
        if components is not None and c.id not in components:
            continue
        gc = _as_component_func(g, c.id)
        if isinstance(c.shape, Disc):
            total += _disc_integral(c, gc, ms.h)
            continue
        pts, w = ms[c.id].quadrature()
        total += float(np.sum(w * _eval(gc, pts) * _eval(c.theta, pts)))
    return total


def field_at_quadrature(u, cid):
    """Values of a P1 field at the quadrature points of component cid, (ne, nq)."""
    cm = u.dofmap.meshset[cid]
    loc = u.local(cid) if isinstance(u, Field) else np.asarray(u)
    return np.einsum("qa,ea->eq", cm.shape_values(), loc[cm.cells])


def l2_error(u, oracle, s=None):
    """||u_h - oracle||_{L^2_mu} over the meshed structure."""
    ms = u.dofmap.meshset
    s = s or ms.structure
    total = 0.0
    for c in s.components:
        cm = ms[c.id]
        pts, w = cm.quadrature()
        diff = field_at_quadrature(u, c.id) - _eval(_as_component_func(oracle, c.id), pts)
        total += float(np.sum(w * _eval(c.theta, pts) * diff**2))
    return math.sqrt(total)


@dataclass
class FemSystem:
    """Stiffness and mass matrices with their meshes and dof map."""

    structure: Structure
    meshset: MeshSet
    dofmap: DofMap
    K: sp.csr_matrix
    M: sp.csr_matrix
    coefficients: CoefficientMatrix

    @property
    def h(self):
        return self.meshset.h

    @property
    def n_dofs(self):
        return self.dofmap.n_dofs

    def field(self, values):
        return Field(values, self.dofmap)

    def load(self, f):
        return assemble_load(f, self.meshset, self.dofmap, self.structure)

    def constraint_matrix(self):
        """Rows are the group integral functionals u -> int_{group} u dmu."""
        return (self.M @ self.dofmap.indicators()).T

    def m_norm(self, v):
        v = getattr(v, "values", v)
        return math.sqrt(max(float(v @ (self.M @ v)), 0.0))


def build_system(s, h, B=None):
    """Mesh, number and assemble in one go."""
    ms = mesh(s, h)
    dm = build_dof_map(ms)
    B = B or CoefficientMatrix()
    K = assemble_stiffness(ms, dm, B, s)
    M = assemble_mass(ms, dm, s)
    return FemSystem(s, ms, dm, K, M, B)


def write_coo(A, stream):
    """Coordinate-list text dump, one ``row col value`` triple per line."""
    A = sp.coo_matrix(A)
    order = np.lexsort((A.col, A.row))
    for r, c, v in zip(A.row[order], A.col[order], A.data[order]):
        stream.write(f"{int(r)} {int(c)} {float(v)!r}\n")
