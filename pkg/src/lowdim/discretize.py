"""Junction-conforming meshes and the global degree-of-freedom map.

Equal-dimension junctions identify their mesh vertices into one global dof
(continuity of traces); mixed-dimension junctions keep both sides independent.
Kernel groups are the classes of the equal-dimension adjacency closure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay
from shapely.geometry import Point

from .quadrature import SEGMENT_RULE, TRIANGLE_RULE
from .structure import Disc, Polygon, Structure


class MeshError(ValueError):
    pass


@dataclass
class ComponentMesh:
    component_id: int
    dim: int
    vertices: np.ndarray  # (n, dim) frame coordinates
    cells: np.ndarray  # (ne, dim + 1)
    boundary: np.ndarray  # (n,) bool
    ambient: np.ndarray  # (n, 3)

    @property
    def n_vertices(self):
        return len(self.vertices)

    def cell_measures(self):
        v = self.vertices[self.cells]
        if self.dim == 1:
            return np.abs(v[:, 1, 0] - v[:, 0, 0])
        e1, e2 = v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]
        return 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def cell_diameters(self):
        v = self.vertices[self.cells]
        if self.dim == 1:
            return np.abs(v[:, 1, 0] - v[:, 0, 0])
        d = [np.linalg.norm(v[:, a] - v[:, b], axis=1) for a, b in ((0, 1), (1, 2), (0, 2))]
        return np.max(d, axis=0)

    def quadrature(self):
        """Quadrature points (ne, nq, dim) and weights (ne, nq) including cell measure."""
        v = self.vertices[self.cells]
        meas = self.cell_measures()
        if self.dim == 1:
            x, w = SEGMENT_RULE
            pts = v[:, :1, :] + x[None, :, None] * (v[:, 1:2, :] - v[:, :1, :])
        else:
            x, w = TRIANGLE_RULE
            pts = (v[:, None, 0, :] + x[None, :, 0, None] * (v[:, None, 1, :] - v[:, None, 0, :])
                   + x[None, :, 1, None] * (v[:, None, 2, :] - v[:, None, 0, :]))
        return pts, meas[:, None] * w[None, :]

    def shape_values(self):
        """P1 basis values at reference quadrature points, (nq, dim + 1)."""
        if self.dim == 1:
            x, _ = SEGMENT_RULE
            return np.column_stack([1 - x, x])
        x, _ = TRIANGLE_RULE
        return np.column_stack([1 - x[:, 0] - x[:, 1], x[:, 0], x[:, 1]])

    def frame_gradients(self):
        """Constant P1 basis gradients per cell in frame coordinates, (ne, dim + 1, dim)."""
        v = self.vertices[self.cells]
        if self.dim == 1:
            L = v[:, 1, 0] - v[:, 0, 0]
            return np.stack([-1.0 / L, 1.0 / L], axis=1)[:, :, None]
        J = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=2)  # columns are edge vectors
        Jinv = np.linalg.inv(J)
        ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        return np.einsum("ad,edk->eak", ref, Jinv)


@dataclass
class MeshSet:
    structure: Structure
    h: float
    meshes: dict  # component id -> ComponentMesh
    junction_nodes: list  # per structure junction: {component id: local vertex indices along the junction}

    def __getitem__(self, cid):
        return self.meshes[cid]


# --------------------------------------------------------------------------
# meshing


def _sigma_sequence(junction, h):
    p0, p1 = junction.points
    n = max(1, math.ceil(junction.length / h - 1e-9))
    t = np.arange(n + 1) / n
    return p0[None, :] + t[:, None] * (p1 - p0)[None, :]


def _interval_mesh(comp, h, breakpoints):
    a, b = comp.shape.a, comp.shape.b
    knots = sorted({a, b, *[float(p) for p in breakpoints]})
    pts = [knots[0]]
    for lo, hi in zip(knots[:-1], knots[1:]):
        if hi - lo < 1e-12:
            continue
        n = max(1, math.ceil((hi - lo) / h - 1e-9))
        pts.extend(lo + (hi - lo) * np.arange(1, n + 1) / n)
    pts[-1] = knots[-1]
    verts = np.array(pts)[:, None]
    cells = np.column_stack([np.arange(len(pts) - 1), np.arange(1, len(pts))])
    return verts, cells


def _disc_cloud(disc, h):
    c, R = np.asarray(disc.center, dtype=float), disc.radius
    N = max(2, math.ceil(R / h - 1e-9))
    nb = max(12, math.ceil(2 * math.pi * R / h - 1e-9))
    th = 2 * math.pi * np.arange(nb) / nb
    boundary = c + R * np.column_stack([np.cos(th), np.sin(th)])
    inner = [c[None, :]]
    for k in range(1, N):
        r = R * k / N
        nk = max(6, math.ceil(2 * math.pi * r / h - 1e-9))
        th = 2 * math.pi * (np.arange(nk) + 0.5 * (k % 2)) / nk
        inner.append(c + r * np.column_stack([np.cos(th), np.sin(th)]))
    return boundary, np.vstack(inner)


def _polygon_cloud(poly, h):
    verts = np.asarray(poly.vertices, dtype=float)
    bnd = []
    for p, q in zip(verts, np.roll(verts, -1, axis=0)):
        n = max(1, math.ceil(np.linalg.norm(q - p) / h - 1e-9))
        bnd.extend(p + (q - p) * k / n for k in range(n))
    sp = poly.shapely
    minx, miny, maxx, maxy = sp.bounds
    dy = h * math.sqrt(3) / 2
    inner = []
    for row, y in enumerate(np.arange(miny + dy / 2, maxy, dy)):
        for x in np.arange(minx + (row % 2) * h / 2, maxx, h):
            pt = Point(x, y)
            if sp.contains(pt) and sp.exterior.distance(pt) > 0.45 * h:
                inner.append((x, y))
    return np.array(bnd), np.array(inner).reshape(-1, 2)


def _point_segment_distance(P, a, b):
    d = b - a
    t = np.clip((P - a) @ d / (d @ d), 0.0, 1.0)
    return np.linalg.norm(P - (a + t[:, None] * d), axis=1)


def _planar_mesh(comp, h, paths, points):
    """Triangulate a planar component with forced vertex paths and points."""
    if isinstance(comp.shape, Disc):
        bnd, inner = _disc_cloud(comp.shape, h)
    elif isinstance(comp.shape, Polygon):
        bnd, inner = _polygon_cloud(comp.shape, h)
    else:  # pragma: no cover - guarded by Component
        raise MeshError("not a planar shape")
    forced = [p for path in paths for p in path] + list(points)
    forced = np.array(forced).reshape(-1, 2)
    free = np.vstack([bnd, inner])
    keep = np.ones(len(free), dtype=bool)
    for path in paths:
        spacing = np.max(np.linalg.norm(np.diff(path, axis=0), axis=1))
        for a, b in zip(path[:-1], path[1:]):
            keep &= _point_segment_distance(free, a, b) > 0.6 * spacing
    for p in points:
        keep &= np.linalg.norm(free - p, axis=1) > 0.5 * h
    pts = np.vstack([forced, free[keep]])
    # collapse forced duplicates (a point junction lying on a path)
    _, first = np.unique(np.round(pts, 12), axis=0, return_index=True)
    if len(first) != len(pts):
        raise MeshError(f"component {comp.id}: coincident forced vertices")
    tri = Delaunay(pts)
    cells = tri.simplices.copy()
    v = pts[cells]
    e1, e2 = v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    flip = det < 0
    cells[flip] = cells[flip][:, [0, 2, 1]]
    ok = np.abs(det) / 2 >= 1e-14
    if isinstance(comp.shape, Polygon):
        cent = v.mean(axis=1)
        sp = comp.shape.shapely
        ok &= np.array([sp.contains(Point(*c)) for c in cent])
    cells = cells[ok]
    used = np.unique(cells)
    remap = -np.ones(len(pts), dtype=int)
    remap[used] = np.arange(len(used))
    if np.any(remap[: len(forced)] < 0):
        raise MeshError(f"component {comp.id}: forced vertex dropped from triangulation")
    pts, cells = pts[used], remap[cells]
    # forced vertices keep their leading indices since used is sorted
    edges = {tuple(sorted(e)) for c in cells for e in ((c[0], c[1]), (c[1], c[2]), (c[0], c[2]))}
    offset = 0
    path_idx = []
    for path in paths:
        idx = np.arange(offset, offset + len(path))
        for a, b in zip(idx[:-1], idx[1:]):
            if (min(a, b), max(a, b)) not in edges:
                raise MeshError(f"component {comp.id}: junction edge not recovered; try a smaller h")
        path_idx.append(idx)
        offset += len(path)
    point_idx = list(range(offset, offset + len(points)))
    return pts, cells, path_idx, point_idx


def mesh(s, h):
    """Junction-conforming simplicial meshes for all components of ``s``."""
    if not h > 0:
        raise MeshError("mesh size must be positive")
    for c in s.components:
        feature = c.measure if c.dim == 1 else math.sqrt(c.measure)
        if h > feature:
            raise MeshError(f"h={h} exceeds the size of component {c.id}")
    paths = {c.id: [] for c in s.components}
    points = {c.id: [] for c in s.components}
    for jk, jn in enumerate(s.junctions):
        if jn.kind == "curve":
            seq = _sigma_sequence(jn, h)
            for cid in jn.pair:
                paths[cid].append((jk, s.component(cid).to_frame(seq)))
        else:
            for cid in jn.pair:
                points[cid].append((jk, s.component(cid).to_frame(jn.points)[0]))
    meshes = {}
    junction_nodes = [dict() for _ in s.junctions]
    for c in s.components:
        if c.dim == 1:
            bps = [p[0] for _, p in points[c.id]]
            verts, cells = _interval_mesh(c, h, bps)
            for jk, p in points[c.id]:
                k = int(np.argmin(np.abs(verts[:, 0] - p[0])))
                junction_nodes[jk][c.id] = np.array([k])
        else:
            verts, cells, path_idx, point_idx = _planar_mesh(
                c, h, [p for _, p in paths[c.id]], [p for _, p in points[c.id]])
            for (jk, _), idx in zip(paths[c.id], path_idx):
                junction_nodes[jk][c.id] = idx
            for (jk, _), k in zip(points[c.id], point_idx):
                junction_nodes[jk][c.id] = np.array([k])
        boundary = c.on_boundary_frame(verts, tol=1e-9)
        meshes[c.id] = ComponentMesh(c.id, c.dim, verts, cells, boundary, c.to_ambient(verts))
    ms = MeshSet(s, float(h), meshes, junction_nodes)
    for jk, jn in enumerate(s.junctions):
        for cid in jn.pair:
            amb = ms[cid].ambient[junction_nodes[jk][cid]]
            if jn.kind == "point" and np.linalg.norm(amb[0] - jn.points[0]) > 1e-10:
                raise MeshError(f"component {cid}: no vertex at junction point")
    return ms


# --------------------------------------------------------------------------
# dof map


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the earlier key as representative for deterministic numbering
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def kernel_groups(s):
    """Equal-dimension adjacency closure of the components, ordered by first member."""
    uf = _UnionFind()
    order = {c.id: k for k, c in enumerate(s.components)}
    for c in s.components:
        uf.find(order[c.id])
    for jn in s.junctions:
        i, j = jn.pair
        if s.component(i).dim == s.component(j).dim:
            uf.union(order[i], order[j])
    groups = {}
    for c in s.components:
        groups.setdefault(uf.find(order[c.id]), []).append(c.id)
    return [tuple(g) for _, g in sorted(groups.items())]


@dataclass
class DofMap:
    n_dofs: int
    local_to_global: dict  # component id -> (n_local,) int array
    kernel_groups: list  # list of tuples of component ids
    group_measures: list  # mu(union of group), from quadrature over the mesh
    policies: list  # per junction: "shared" | "independent"
    meshset: MeshSet = field(repr=False)

    @property
    def n_groups(self):
        return len(self.kernel_groups)

    def group_of(self, cid):
        for k, g in enumerate(self.kernel_groups):
            if cid in g:
                return k
        raise KeyError(cid)

    def group_dofs(self, k):
        return np.unique(np.concatenate([self.local_to_global[c] for c in self.kernel_groups[k]]))

    def group_indicator(self, k):
        ind = np.zeros(self.n_dofs)
        ind[self.group_dofs(k)] = 1.0
        return ind

    def indicators(self):
        return np.column_stack([self.group_indicator(k) for k in range(self.n_groups)])


def _mesh_measure(comp, cm):
    pts, w = cm.quadrature()
    return float(np.sum(w * comp.theta(pts.reshape(-1, cm.dim)).reshape(w.shape)))


def build_dof_map(ms):
    """Piecewise-linear nodal dofs with shared/independent junction coupling."""
    s = ms.structure
    order = {c.id: k for k, c in enumerate(s.components)}
    uf = _UnionFind()
    policies = []
    for jk, jn in enumerate(s.junctions):
        if not jn.equal_dim:
            policies.append("independent")
            continue
        policies.append("shared")
        i, j = jn.pair
        ni, nj = ms.junction_nodes[jk][i], ms.junction_nodes[jk][j]
        if len(ni) != len(nj) or np.abs(ms[i].ambient[ni] - ms[j].ambient[nj]).max() > 1e-10:
            raise MeshError(f"junction {jn.pair}: vertex sequences do not match")
        for a, b in zip(ni, nj):
            uf.union((order[i], int(a)), (order[j], int(b)))
    numbering = {}
    l2g = {}
    for c in s.components:
        idx = np.empty(ms[c.id].n_vertices, dtype=int)
        for v in range(len(idx)):
            root = uf.find((order[c.id], v))
            if root not in numbering:
                numbering[root] = len(numbering)
            idx[v] = numbering[root]
        l2g[c.id] = idx
    groups = kernel_groups(s)
    measures = [sum(_mesh_measure(s.component(cid), ms[cid]) for cid in g) for g in groups]
    return DofMap(len(numbering), l2g, groups, measures, policies, ms)


# --------------------------------------------------------------------------
# fields


@dataclass
class Field:
    values: np.ndarray
    dofmap: DofMap = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.dofmap.n_dofs,):
            raise ValueError("field length does not match the dof map")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field has non-finite entries")

    def local(self, cid):
        return self.values[self.dofmap.local_to_global[cid]]

    def components(self):
        return {cid: self.local(cid) for cid in self.dofmap.local_to_global}


def group_projection(u, k, M):
    """Piecewise constant field: mu-weighted mean of u on group k, zero elsewhere."""
    ind = u.dofmap.group_indicator(k)
    w = M @ ind
    mean = (w @ u.values) / (w @ ind)
    return Field(mean * ind, u.dofmap)


def sample(dofmap, funcs):
    """Nodal interpolant of per-component frame functions ``{cid: f(xi)}``.

    At shared dofs the value of the first component wins; callers should pass
    functions that agree on junctions.
    """
    ms = dofmap.meshset
    vals = np.full(dofmap.n_dofs, np.nan)
    for c in ms.structure.components:
        f = funcs.get(c.id, 0.0) if isinstance(funcs, dict) else funcs
        raw = f(ms[c.id].vertices) if callable(f) else f
        loc = np.broadcast_to(np.asarray(raw, dtype=float), (ms[c.id].n_vertices,))
        g = dofmap.local_to_global[c.id]
        unset = np.isnan(vals[g])
        vals[g[unset]] = loc[unset]
    return Field(vals, dofmap)


def write_mesh_text(ms, stream):
    """Plain text export: one block triple (vertices, cells, junction_nodes) per component."""
    for c in ms.structure.components:
        cm = ms[c.id]
        stream.write(f"component {c.id} dim {c.dim}\n")
        stream.write(f"vertices {cm.n_vertices} {c.dim}\n")
        for v in cm.vertices:
            stream.write(" ".join(repr(float(x)) for x in v) + "\n")
        stream.write(f"cells {len(cm.cells)} {c.dim + 1}\n")
        for cell in cm.cells:
            stream.write(" ".join(str(int(i)) for i in cell) + "\n")
        rows = [(jk, idx) for jk, nodes in enumerate(ms.junction_nodes) for cid, idx in nodes.items() if cid == c.id]
        stream.write(f"junction_nodes {len(rows)}\n")
        for jk, idx in rows:
            stream.write(f"{jk} " + " ".join(str(int(i)) for i in idx) + "\n")
