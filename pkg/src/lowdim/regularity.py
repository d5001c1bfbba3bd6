"""Regularity diagnostics: junction traces, the inclusion-exclusion extension,
the Cosserat copy construction, interior H^2 seminorms and continuity jumps.

Fields may be passed either as a coupled :class:`~lowdim.discretize.Field` or
in the uncoupled representation ``{component id: local nodal values}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discretize import Field


class GeometryError(ValueError):
    pass


def _local(u, cid):
    if isinstance(u, Field):
        return u.local(cid)
    return np.asarray(u[cid], dtype=float)


def _junction_index(s, junction):
    if isinstance(junction, int):
        return junction, s.junctions[junction]
    for k, jn in enumerate(s.junctions):
        if jn == junction or set(jn.pair) == set(junction.pair):
            return k, jn
    raise KeyError("junction not in structure")


# --------------------------------------------------------------------------
# traces


@dataclass
class TraceField:
    junction: object
    side: int
    params: np.ndarray  # arc length from the first junction endpoint
    values: np.ndarray


def _sigma_params(system, jk, side):
    jn = system.structure.junctions[jk]
    nodes = system.meshset.junction_nodes[jk][side]
    if jn.kind == "point":
        return np.zeros(1)
    p0, p1 = jn.points
    s_dir = (p1 - p0) / np.linalg.norm(p1 - p0)
    return (system.meshset[side].ambient[nodes] - p0) @ s_dir


def trace_on_junction(u, system, junction, side):
    """Nodal values of u along the junction, seen from component ``side``."""
    jk, jn = _junction_index(system.structure, junction)
    if side not in jn.pair:
        raise KeyError(f"component {side} is not adjacent to junction {jn.pair}")
    nodes = system.meshset.junction_nodes[jk][side]
    return TraceField(jn, side, _sigma_params(system, jk, side), _local(u, side)[nodes])


def trace_mismatch(u, system, junction):
    """(max, L2(Sigma)) norms of the difference of the two side traces."""
    jk, jn = _junction_index(system.structure, junction)
    i, j = jn.pair
    ti, tj = trace_on_junction(u, system, jk, i), trace_on_junction(u, system, jk, j)
    diff = ti.values - tj.values
    mx = float(np.abs(diff).max())
    if jn.kind == "point":
        return mx, mx
    return mx, math.sqrt(float(np.trapezoid(diff**2, ti.params)))


@dataclass
class ContinuityReport:
    jumps: dict = field(default_factory=dict)  # junction pair -> max nodal jump

    @property
    def max_jump(self):
        return max(self.jumps.values(), default=0.0)


def continuity_check(u, system):
    """Maximum inter-component nodal jump at every junction."""
    rep = ContinuityReport()
    for jk, jn in enumerate(system.structure.junctions):
        rep.jumps[jn.pair] = trace_mismatch(u, system, jk)[0]
    return rep


# --------------------------------------------------------------------------
# model geometry (two orthogonal equal-dimension components)


@dataclass
class _Model:
    ci: object
    cj: object
    jk: int
    junction: object
    s_dir: np.ndarray = None  # junction direction for curves
    p0: np.ndarray = None


def _model(system):
    s = system.structure
    if len(s.components) != 2 or len(s.junctions) != 1:
        raise GeometryError("model geometry needs exactly two components and one junction")
    ci, cj = s.components
    jn = s.junctions[0]
    if ci.dim != cj.dim:
        raise GeometryError("model geometry needs equal dimensions")
    if ci.dim == 1:
        if abs(ci.tangents[0] @ cj.tangents[0]) > 1e-12:
            raise GeometryError("segments must be orthogonal")
        return _Model(ci, cj, 0, jn, p0=jn.points[0])
    if abs(ci.normals[0] @ cj.normals[0]) > 1e-12 or jn.kind != "curve":
        raise GeometryError("patches must be orthogonal and meet along a curve")
    p0, p1 = jn.points
    return _Model(ci, cj, 0, jn, (p1 - p0) / np.linalg.norm(p1 - p0), p0)


def _transverse(c, m):
    """Unit tangent of c orthogonal to the junction (ambient)."""
    if c.dim == 1:
        return c.tangents[0]
    t = c.tangents.T @ (c.tangents @ np.cross(m.s_dir, c.normals[0]))
    return t / np.linalg.norm(t)


# --------------------------------------------------------------------------
# interpolation helpers


def _interp_interval(cm, values, xi):
    order = np.argsort(cm.vertices[:, 0])
    return np.interp(xi, cm.vertices[order, 0], values[order])


def _interp_triangles(cm, values, pts, tol=1e-10):
    v = cm.vertices[cm.cells]
    a, e1, e2 = v[:, 0], v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    out = np.empty(len(pts))
    for start in range(0, len(pts), 256):
        P = pts[start:start + 256]
        d = P[:, None, :] - a[None, :, :]
        l1 = (d[..., 0] * e2[:, 1] - d[..., 1] * e2[:, 0]) / det
        l2 = (e1[:, 0] * d[..., 1] - e1[:, 1] * d[..., 0]) / det
        lam = np.stack([1 - l1 - l2, l1, l2], axis=-1)
        score = lam.min(axis=-1)
        best = score.argmax(axis=1)
        if np.any(score[np.arange(len(P)), best] < -tol):
            raise GeometryError("query projection lies outside the component mesh")
        L = lam[np.arange(len(P)), best]
        out[start:start + len(P)] = np.einsum("na,na->n", L, values[cm.cells[best]])
    return out


def evaluate(u, system, cid, xi):
    """P1 interpolation of u on component cid at frame points xi."""
    cm = system.meshset[cid]
    vals = _local(u, cid)
    xi = np.asarray(xi, dtype=float).reshape(-1, cm.dim)
    c = system.structure.component(cid)
    if not np.all(c.contains_frame(xi, tol=1e-10)):
        raise GeometryError(f"query projection lies outside component {cid}")
    if cm.dim == 1:
        return _interp_interval(cm, vals, xi[:, 0])
    return _interp_triangles(cm, vals, xi)


def extend_inclusion_exclusion(u, system, X):
    """u_j(proj_j X) - tr u(proj_Sigma X) + u_i(proj_i X) on the two-component model."""
    m = _model(system)
    X = np.asarray(X, dtype=float).reshape(-1, 3)
    ui = evaluate(u, system, m.ci.id, m.ci.to_frame(X))
    uj = evaluate(u, system, m.cj.id, m.cj.to_frame(X))
    if m.ci.dim == 1:
        nodes = system.meshset.junction_nodes[m.jk][m.ci.id]
        tr = np.full(len(X), _local(u, m.ci.id)[nodes][0])
    else:
        tf = trace_on_junction(u, system, m.jk, m.ci.id)
        sig = (X - m.p0) @ m.s_dir
        if np.any(sig < -1e-10) or np.any(sig > tf.params[-1] + 1e-10):
            raise GeometryError("query projection lies outside the junction")
        tr = np.interp(sig, tf.params, tf.values)
    return uj - tr + ui


# --------------------------------------------------------------------------
# gradient recovery


def recovered_gradient(u, system, cid):
    """Measure-weighted nodal average of P1 cell gradients, frame coordinates (n, dim)."""
    cm = system.meshset[cid]
    vals = _local(u, cid)
    grads = np.einsum("ead,ea->ed", cm.frame_gradients(), vals[cm.cells])
    meas = cm.cell_measures()
    acc = np.zeros((cm.n_vertices, cm.dim))
    wsum = np.zeros(cm.n_vertices)
    for a in range(cm.cells.shape[1]):
        np.add.at(acc, cm.cells[:, a], meas[:, None] * grads)
        np.add.at(wsum, cm.cells[:, a], meas)
    return acc / wsum[:, None]


def _ambient_gradients(u, system, m):
    """Recovered ambient gradients with the junction-tangential part taken from the trace."""
    out = {}
    for c in (m.ci, m.cj):
        out[c.id] = recovered_gradient(u, system, c.id) @ c.tangents
    if m.ci.dim == 2:
        tf = trace_on_junction(u, system, m.jk, m.ci.id)
        dtr = np.gradient(tf.values, tf.params)
        for c in (m.ci, m.cj):
            nodes = system.meshset.junction_nodes[m.jk][c.id]
            g = out[c.id][nodes]
            g = g - np.outer(g @ m.s_dir, m.s_dir) + np.outer(dtr, m.s_dir)
            out[c.id][nodes] = g
    return out


# --------------------------------------------------------------------------
# Cosserat copy


@dataclass
class CosseratField:
    vectors: dict  # component id -> (n_vertices, 3) nodal normal vectors

    def tangential_part(self, system):
        worst = 0.0
        for cid, b in self.vectors.items():
            t = system.structure.component(cid).tangents
            worst = max(worst, float(np.abs(b @ t.T).max()))
        return worst


def cosserat_copy(u, system):
    """Copy each component's transverse slope at the junction onto the other as a normal field."""
    m = _model(system)
    grads = _ambient_gradients(u, system, m)
    vectors = {}
    for c, other in ((m.ci, m.cj), (m.cj, m.ci)):
        tau = _transverse(other, m)
        nodes = system.meshset.junction_nodes[m.jk][other.id]
        slopes = grads[other.id][nodes] @ tau
        amb = system.meshset[c.id].ambient
        if c.dim == 1:
            val = np.full(len(amb), slopes[0])
        else:
            params = _sigma_params(system, m.jk, other.id)
            val = np.interp((amb - m.p0) @ m.s_dir, params, slopes)
        b = np.outer(val, tau)
        # exact zero tangential part (tau is normal to c by orthogonality)
        b -= (b @ c.tangents.T) @ c.tangents
        vectors[c.id] = b
    return CosseratField(vectors)


@dataclass
class CosseratReport:
    slot_mismatch: np.ndarray  # per ambient axis: max side difference on the junction
    h1_norms: dict  # component id -> per-slot discrete H1 norms
    tol: float

    @property
    def passed(self):
        finite = all(np.all(np.isfinite(v)) for v in self.h1_norms.values())
        return bool(finite and np.all(self.slot_mismatch < self.tol))


def _local_h1(cm, vals):
    G = cm.frame_gradients()
    grads = np.einsum("ead,ea->ed", G, vals[cm.cells])
    meas = cm.cell_measures()
    semi = float(np.sum(meas * np.sum(grads**2, axis=1)))
    pts, w = cm.quadrature()
    vq = np.einsum("qa,ea->eq", cm.shape_values(), vals[cm.cells])
    return math.sqrt(semi + float(np.sum(w * vq**2)))


def cosserat_compatibility(u, b, system, tol=1e-10):
    """Check that every slot of grad_mu u + b has matching traces on the junction."""
    m = _model(system)
    grads = _ambient_gradients(u, system, m)
    slots = {}
    for c in (m.ci, m.cj):
        bc = b.vectors[c.id] if b is not None else 0.0
        slots[c.id] = grads[c.id] + bc
    ni = system.meshset.junction_nodes[m.jk][m.ci.id]
    nj = system.meshset.junction_nodes[m.jk][m.cj.id]
    mismatch = np.abs(slots[m.ci.id][ni] - slots[m.cj.id][nj]).max(axis=0)
    norms = {cid: np.array([_local_h1(system.meshset[cid], v[:, k]) for k in range(3)])
             for cid, v in slots.items()}
    return CosseratReport(mismatch, norms, tol)


# --------------------------------------------------------------------------
# interior H^2 seminorm


def h2_seminorm(u, system, cid, offset=None):
    """Dirichlet seminorm of the recovered gradient over cells at distance >= ``offset`` from the boundary.

    The default offset is 2h; pass a fixed offset to compare across refinements
    on one interior region.
    """
    cm = system.meshset[cid]
    c = system.structure.component(cid)
    offset = 2 * system.meshset.h if offset is None else offset
    G = recovered_gradient(u, system, cid)
    dist = c.boundary_distance_frame(cm.vertices)
    inner = np.all(dist[cm.cells] >= offset - 1e-12, axis=1)
    FG = cm.frame_gradients()[inner]
    cells = cm.cells[inner]
    hess = np.einsum("ead,eak->edk", FG, G[cells])  # d/dxi_d of G_k
    meas = cm.cell_measures()[inner]
    return math.sqrt(float(np.sum(meas * np.sum(hess**2, axis=(1, 2)))))
