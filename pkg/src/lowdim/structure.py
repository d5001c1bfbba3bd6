"""Low-dimensional structures: flat 1D/2D components glued along junctions in R^3.

A component is described in its own flat frame: an origin in R^3 plus one
(segment) or two (planar patch) orthonormal tangent vectors. Shapes are given
in frame coordinates. Junction geometry is computed analytically from frames.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from shapely.geometry import LineString, Point, Polygon as ShapelyPolygon

GEOM_TOL = 1e-10
FRAME_TOL = 1e-12


class StructureError(ValueError):
    """Raised for malformed structure configs or invalid geometry."""


class ConfigParseError(StructureError):
    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(StructureError):
    def __init__(self, report):
        self.report = report
        super().__init__("structure validation failed: " + "; ".join(report.violations))


# --------------------------------------------------------------------------
# shapes and densities


@dataclass(frozen=True)
class Interval:
    a: float
    b: float
    kind: str = field(default="interval", init=False)

    def __post_init__(self):
        if not self.b > self.a:
            raise StructureError(f"interval needs a < b, got [{self.a}, {self.b}]")

    @property
    def measure(self):
        return self.b - self.a


@dataclass(frozen=True)
class Disc:
    center: tuple
    radius: float
    kind: str = field(default="disc", init=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise StructureError("disc radius must be positive")

    @property
    def measure(self):
        return math.pi * self.radius**2


@dataclass(frozen=True)
class Polygon:
    vertices: tuple
    kind: str = field(default="polygon", init=False)

    def __post_init__(self):
        poly = ShapelyPolygon(self.vertices)
        if len(self.vertices) < 3 or not poly.is_valid or poly.area <= 0:
            raise StructureError("polygon must be simple with nonzero area")
        if not poly.exterior.is_ccw:
            raise StructureError("polygon must be positively oriented")

    @property
    def shapely(self):
        return ShapelyPolygon(self.vertices)

    @property
    def measure(self):
        return self.shapely.area


Shape = Union[Interval, Disc, Polygon]


@dataclass(frozen=True)
class Theta:
    """Polynomial density in frame coordinates: sum of coef * prod(xi_k ** p_k)."""

    terms: tuple = ((1.0, ()),)
    lower_bound: float = 1.0

    @classmethod
    def constant(cls, value):
        value = float(value)
        if value <= 0:
            raise StructureError("density must be positive")
        return cls(((value, ()),), value)

    @property
    def is_constant(self):
        return all(not any(p) for _, p in self.terms)

    def __call__(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        out = np.zeros(xi.shape[0])
        for coef, powers in self.terms:
            term = np.full(xi.shape[0], float(coef))
            for k, p in enumerate(powers):
                if p:
                    term = term * xi[:, k] ** p
            out += term
        return out


# --------------------------------------------------------------------------
# components, junctions, structure


@dataclass(frozen=True)
class Component:
    id: int
    dim: int
    origin: np.ndarray
    tangents: np.ndarray  # (dim, 3)
    shape: Shape
    theta: Theta = Theta()

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float).reshape(3)
        tangents = np.atleast_2d(np.asarray(self.tangents, dtype=float))
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "tangents", tangents)
        if self.dim not in (1, 2):
            raise StructureError(f"component {self.id}: dim must be 1 or 2")
        if tangents.shape != (self.dim, 3):
            raise StructureError(f"component {self.id}: expected {self.dim} tangent vector(s)")
        if np.abs(tangents @ tangents.T - np.eye(self.dim)).max() > FRAME_TOL:
            raise StructureError(f"component {self.id}: frame vectors are not orthonormal")
        expected = Interval if self.dim == 1 else (Disc, Polygon)
        if not isinstance(self.shape, expected):
            raise StructureError(f"component {self.id}: shape {self.shape.kind} does not fit dim {self.dim}")
        if self.theta.lower_bound <= 0:
            raise StructureError(f"component {self.id}: density lower bound must be positive")

    # frame <-> ambient
    def to_ambient(self, xi):
        xi = np.asarray(xi, dtype=float).reshape(-1, self.dim)
        return self.origin + xi @ self.tangents

    def to_frame(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, 3)
        return (X - self.origin) @ self.tangents.T

    def distance_to_affine_hull(self, X):
        X = np.asarray(X, dtype=float).reshape(-1, 3)
        return np.linalg.norm(X - self.to_ambient(self.to_frame(X)), axis=1)

    @property
    def normals(self):
        return _complete_basis(self.tangents)

    @property
    def measure(self):
        return self.shape.measure

    def contains_frame(self, xi, tol=GEOM_TOL):
        xi = np.asarray(xi, dtype=float).reshape(-1, self.dim)
        sh = self.shape
        if isinstance(sh, Interval):
            return (xi[:, 0] >= sh.a - tol) & (xi[:, 0] <= sh.b + tol)
        if isinstance(sh, Disc):
            return np.linalg.norm(xi - np.asarray(sh.center), axis=1) <= sh.radius + tol
        poly = sh.shapely
        return np.array([poly.distance(Point(p)) <= tol for p in xi])

    def contains(self, X, tol=GEOM_TOL):
        X = np.asarray(X, dtype=float).reshape(-1, 3)
        return (self.distance_to_affine_hull(X) <= tol) & self.contains_frame(self.to_frame(X), tol)

    def on_boundary_frame(self, xi, tol=GEOM_TOL):
        xi = np.asarray(xi, dtype=float).reshape(-1, self.dim)
        sh = self.shape
        if isinstance(sh, Interval):
            return (np.abs(xi[:, 0] - sh.a) <= tol) | (np.abs(xi[:, 0] - sh.b) <= tol)
        if isinstance(sh, Disc):
            r = np.linalg.norm(xi - np.asarray(sh.center), axis=1)
            return np.abs(r - sh.radius) <= tol
        ring = sh.shapely.exterior
        return np.array([ring.distance(Point(p)) <= tol for p in xi])

    def boundary_distance_frame(self, xi):
        """Distance from frame points (assumed inside) to the component boundary."""
        xi = np.asarray(xi, dtype=float).reshape(-1, self.dim)
        sh = self.shape
        if isinstance(sh, Interval):
            return np.minimum(xi[:, 0] - sh.a, sh.b - xi[:, 0])
        if isinstance(sh, Disc):
            return sh.radius - np.linalg.norm(xi - np.asarray(sh.center), axis=1)
        ring = sh.shapely.exterior
        return np.array([ring.distance(Point(p)) for p in xi])

    def line_intervals(self, p, d):
        """Parameter intervals [t0, t1] where the frame line p + t d lies in a 2D shape."""
        p = np.asarray(p, dtype=float)
        d = np.asarray(d, dtype=float)
        sh = self.shape
        if isinstance(sh, Disc):
            q = p - np.asarray(sh.center)
            a, b, c = d @ d, 2 * q @ d, q @ q - sh.radius**2
            disc = b * b - 4 * a * c
            if disc < -GEOM_TOL:
                return []
            root = math.sqrt(max(disc, 0.0))
            return [((-b - root) / (2 * a), (-b + root) / (2 * a))]
        poly = sh.shapely
        minx, miny, maxx, maxy = poly.bounds
        span = 2 * (abs(minx) + abs(miny) + abs(maxx) + abs(maxy)) + 1 + np.abs(p).sum()
        dn = d / np.linalg.norm(d)
        line = LineString([p - span * dn, p + span * dn])
        inter = poly.intersection(line)
        pieces = []
        for g in getattr(inter, "geoms", [inter]):
            if g.is_empty:
                continue
            coords = np.asarray(g.coords)
            ts = (coords - p) @ d / (d @ d)
            pieces.append((ts.min(), ts.max()))
        return sorted(pieces)


@dataclass(frozen=True)
class Junction:
    pair: tuple  # (component id i, component id j), i listed first
    kind: str  # "point" | "curve"
    geometry: tuple  # (P,) for a point, (P0, P1) for a curve; each a 3-vector
    equal_dim: bool

    @property
    def points(self):
        return np.array(self.geometry, dtype=float).reshape(-1, 3)

    @property
    def length(self):
        if self.kind == "point":
            return 0.0
        p0, p1 = self.points
        return float(np.linalg.norm(p1 - p0))

    def other(self, cid):
        i, j = self.pair
        if cid == i:
            return j
        if cid == j:
            return i
        raise KeyError(f"component {cid} is not adjacent to junction {self.pair}")


@dataclass(frozen=True)
class Structure:
    components: tuple
    junctions: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "junctions", tuple(self.junctions))
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise StructureError("duplicate component ids")

    def component(self, cid):
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(f"no component with id {cid}")

    def index(self, cid):
        for k, c in enumerate(self.components):
            if c.id == cid:
                return k
        raise KeyError(f"no component with id {cid}")

    @property
    def ids(self):
        return [c.id for c in self.components]

    def junction(self, i, j):
        for jn in self.junctions:
            if set(jn.pair) == {i, j}:
                return jn
        raise KeyError(f"no junction between {i} and {j}")

    def junctions_of(self, cid):
        return [jn for jn in self.junctions if cid in jn.pair]

    @property
    def measure(self):
        """mu(S) for constant densities (exact shape measure times density)."""
        total = 0.0
        for c in self.components:
            if not c.theta.is_constant:
                raise NotImplementedError("use assembly.integrate for variable densities")
            total += c.theta(np.zeros((1, c.dim)))[0] * c.measure
        return total


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        return "OK" if self.ok else "\n".join(self.violations)


# --------------------------------------------------------------------------
# geometry helpers


def _complete_basis(tangents):
    """Orthonormal complement of the rows of ``tangents`` in R^3, deterministic."""
    tangents = np.atleast_2d(tangents)
    if tangents.shape[0] == 2:
        n = np.cross(tangents[0], tangents[1])
        return (n / np.linalg.norm(n))[None, :]
    t = tangents[0]
    axis = np.eye(3)[np.argmin(np.abs(t))]
    n1 = axis - (axis @ t) * t
    n1 /= np.linalg.norm(n1)
    n2 = np.cross(t, n1)
    return np.vstack([n1, n2 / np.linalg.norm(n2)])


class _Degenerate:
    """Marker for a nonempty intersection that is not transversal."""

    def __init__(self, pair, reason):
        self.pair = pair
        self.reason = reason


def _line_line(c1, c2):
    t1, t2 = c1.tangents[0], c2.tangents[0]
    r = c2.origin - c1.origin
    cr = np.cross(t1, t2)
    s1, s2 = c1.shape, c2.shape
    if np.linalg.norm(cr) < FRAME_TOL:
        if np.linalg.norm(r - (r @ t1) * t1) > GEOM_TOL:
            return None
        # collinear: parameters of c2 endpoints on the line of c1
        lo_hi = sorted([r @ t1 + s2.a * (t2 @ t1), r @ t1 + s2.b * (t2 @ t1)])
        lo, hi = max(lo_hi[0], s1.a), min(lo_hi[1], s1.b)
        if hi < lo - GEOM_TOL:
            return None
        if hi - lo <= GEOM_TOL:
            return [c1.to_ambient([[lo]])[0]]
        return _Degenerate((c1.id, c2.id), "collinear overlapping segments")
    A = np.column_stack([t1, -t2])
    sol, *_ = np.linalg.lstsq(A, r, rcond=None)
    if np.linalg.norm(A @ sol - r) > GEOM_TOL:
        return None
    a, b = sol
    if s1.a - GEOM_TOL <= a <= s1.b + GEOM_TOL and s2.a - GEOM_TOL <= b <= s2.b + GEOM_TOL:
        return [c1.origin + a * t1]
    return None


def _line_plane(c1, c2):
    """c1 one-dimensional, c2 two-dimensional."""
    t = c1.tangents[0]
    n = c2.normals[0]
    denom = t @ n
    if abs(denom) > FRAME_TOL:
        s = (c2.origin - c1.origin) @ n / denom
        if not (c1.shape.a - GEOM_TOL <= s <= c1.shape.b + GEOM_TOL):
            return None
        X = c1.origin + s * t
        if c2.contains_frame(c2.to_frame(X))[0]:
            return [X]
        return None
    if abs((c1.origin - c2.origin) @ n) > GEOM_TOL:
        return None
    p = c2.to_frame(c1.origin)[0]
    d = c2.tangents @ t
    for t0, t1 in c2.line_intervals(p, d):
        if min(t1, c1.shape.b) >= max(t0, c1.shape.a) - GEOM_TOL:
            return _Degenerate((c1.id, c2.id), "segment lies in the plane of a patch")
    return None


def _plane_plane(c1, c2):
    n1, n2 = c1.normals[0], c2.normals[0]
    d = np.cross(n1, n2)
    if np.linalg.norm(d) < FRAME_TOL:
        if abs((c2.origin - c1.origin) @ n1) > GEOM_TOL:
            return None
        g1, g2 = _planar_shapely(c1), _planar_shapely(c2, frame=c1)
        if g1.intersection(g2).area > GEOM_TOL:
            return _Degenerate((c1.id, c2.id), "coplanar overlapping patches")
        if g1.distance(g2) <= GEOM_TOL:
            return _Degenerate((c1.id, c2.id), "coplanar touching patches")
        return None
    d = d / np.linalg.norm(d)
    A = np.vstack([n1, n2, d])
    p = np.linalg.solve(A, np.array([n1 @ c1.origin, n2 @ c2.origin, 0.0]))
    ranges = []
    for c in (c1, c2):
        pieces = c.line_intervals(c.to_frame(p)[0], c.tangents @ d)
        if not pieces:
            return None
        if len(pieces) > 1:
            raise StructureError(f"component {c.id}: disconnected junction is not supported")
        ranges.append(pieces[0])
    lo = max(ranges[0][0], ranges[1][0])
    hi = min(ranges[0][1], ranges[1][1])
    if hi < lo - GEOM_TOL:
        return None
    if hi - lo <= GEOM_TOL:
        return [p + lo * d]
    return [p + lo * d, p + hi * d]


def _planar_shapely(c, frame=None):
    """Shapely geometry of a 2D component, optionally expressed in another coplanar frame."""
    frame = frame or c
    sh = c.shape
    if isinstance(sh, Disc):
        th = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        pts = np.asarray(sh.center) + sh.radius * np.column_stack([np.cos(th), np.sin(th)])
    else:
        pts = np.asarray(sh.vertices, dtype=float)
    return ShapelyPolygon(frame.to_frame(c.to_ambient(pts)))


def _intersect(c1, c2):
    if c1.dim > c2.dim:
        res = _intersect(c2, c1)
        if isinstance(res, _Degenerate):
            res.pair = (c1.id, c2.id)
        return res
    if c1.dim == 1 and c2.dim == 1:
        return _line_line(c1, c2)
    if c1.dim == 1:
        return _line_plane(c1, c2)
    return _plane_plane(c1, c2)


def _canonical_curve(p0, p1):
    """Order curve endpoints lexicographically so (i,j) and (j,i) agree."""
    if tuple(np.round(p1, 12)) < tuple(np.round(p0, 12)):
        p0, p1 = p1, p0
    return p0, p1


def detect_junctions(s):
    """One junction per nonempty transversal pairwise intersection, computed from the frames."""
    out = []
    for c1, c2 in itertools.combinations(s.components, 2):
        res = _intersect(c1, c2)
        if res is None or isinstance(res, _Degenerate):
            continue
        pts = [np.asarray(p, dtype=float) for p in res]
        if len(pts) == 1:
            geom = (pts[0],)
            kind = "point"
        else:
            geom = _canonical_curve(*pts)
            kind = "curve"
        out.append(Junction((c1.id, c2.id), kind, tuple(tuple(map(float, p)) for p in geom), c1.dim == c2.dim))
    return out


def _segment_meets(p0, p1, c):
    """Whether the closed R^3 segment [p0, p1] meets component c."""
    L = np.linalg.norm(p1 - p0)
    probe = Component(-1, 1, p0, ((p1 - p0) / L,), Interval(0.0, L)) if L > GEOM_TOL else None
    if probe is None:
        return bool(c.contains(p0)[0])
    return _intersect(probe, c) is not None


def validate(s):
    """Check transversality, boundary contact and triple intersections."""
    report = ValidationReport()
    comps = s.components
    for c1, c2 in itertools.combinations(comps, 2):
        res = _intersect(c1, c2)
        if isinstance(res, _Degenerate):
            report.violations.append(f"transversality: components {c1.id},{c2.id}: {res.reason}")
            continue
        if res is None:
            continue
        span = np.linalg.matrix_rank(np.vstack([c1.tangents, c2.tangents]), tol=1e-9)
        if span != min(c1.dim + c2.dim, 3):
            report.violations.append(f"transversality: components {c1.id},{c2.id}: tangent spaces span {span}")
        if len(res) == 1:
            X = res[0]
            if c1.on_boundary_frame(c1.to_frame(X))[0] and c2.on_boundary_frame(c2.to_frame(X))[0]:
                report.violations.append(f"boundary contact: components {c1.id},{c2.id} at {np.round(X, 12).tolist()}")
        else:
            mid = 0.5 * (res[0] + res[1])
            if c1.on_boundary_frame(c1.to_frame(mid))[0] and c2.on_boundary_frame(c2.to_frame(mid))[0]:
                report.violations.append(f"boundary contact: components {c1.id},{c2.id} along a curve")
    for jn in detect_junctions(s):
        for c in comps:
            if c.id in jn.pair:
                continue
            pts = jn.points
            hit = bool(c.contains(pts[0])[0]) if jn.kind == "point" else _segment_meets(pts[0], pts[1], c)
            if hit:
                i, j = jn.pair
                report.violations.append(f"triple intersection: components {i},{j},{c.id}")
    return report


def tangent_basis(s, component_id, point):
    """Orthonormal tangent and normal vectors of a component at a frame point."""
    c = s.component(component_id)
    if not c.contains_frame(point)[0]:
        raise StructureError(f"point {list(np.ravel(point))} is outside component {component_id}")
    return c.tangents.copy(), c.normals


def with_junctions(components, name=""):
    s = Structure(tuple(components), (), name)
    return Structure(s.components, tuple(detect_junctions(s)), name)


# --------------------------------------------------------------------------
# builtins

E_X, E_Y, E_Z = np.eye(3)


def builtin(name, scale=1.0):
    """Model structures from the worked examples."""
    r = float(scale)
    o = np.zeros(3)
    if name == "cross_segments":
        comps = [
            Component(1, 1, o, (E_Y,), Interval(-r, r)),
            Component(2, 1, o, (E_Z,), Interval(-r, r)),
        ]
    elif name == "cross_discs":
        comps = [
            Component(1, 2, o, (E_X, E_Y), Disc((0.0, 0.0), r)),
            Component(2, 2, o, (E_Y, E_Z), Disc((0.0, 0.0), r)),
        ]
    elif name == "disc_plus_segment":
        comps = [
            Component(1, 1, o, (E_Z,), Interval(-r, r)),
            Component(2, 2, o, (E_X, E_Y), Disc((0.0, 0.0), r)),
        ]
    elif name == "segment":
        comps = [Component(1, 1, o, (E_Y,), Interval(-r, r))]
    elif name == "disc":
        comps = [Component(1, 2, o, (E_X, E_Y), Disc((0.0, 0.0), r))]
    else:
        raise StructureError(f"unknown builtin structure {name!r}")
    return with_junctions(comps, name)


BUILTINS = ("cross_segments", "cross_discs", "disc_plus_segment", "segment", "disc")


# --------------------------------------------------------------------------
# config ingestion


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigParseError(f"missing field {key!r}", where)
    return obj[key]


def _floats(val, n, where):
    try:
        arr = [float(v) for v in val]
    except (TypeError, ValueError):
        raise ConfigParseError("expected a list of numbers", where) from None
    if n is not None and len(arr) != n:
        raise ConfigParseError(f"expected {n} numbers, got {len(arr)}", where)
    return arr


def _parse_theta(val, dim, where):
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        if val <= 0:
            raise ConfigParseError("density must be positive", where)
        return Theta.constant(val)
    terms = _require(val, "terms", where)
    parsed = []
    for k, term in enumerate(terms):
        nums = _floats(term, None, f"{where}.terms[{k}]")
        if len(nums) != dim + 1:
            raise ConfigParseError(f"term needs coefficient + {dim} powers", f"{where}.terms[{k}]")
        powers = tuple(int(p) for p in nums[1:])
        if any(p < 0 or p != q for p, q in zip(powers, nums[1:])):
            raise ConfigParseError("powers must be nonnegative integers", f"{where}.terms[{k}]")
        parsed.append((nums[0], powers))
    lb = float(_require(val, "lower_bound", where))
    if lb <= 0:
        raise ConfigParseError("lower_bound must be positive", where)
    return Theta(tuple(parsed), lb)


def _parse_shape(val, where):
    kind = _require(val, "kind", where)
    if kind == "interval":
        return Interval(float(_require(val, "a", where)), float(_require(val, "b", where)))
    if kind == "disc":
        center = _floats(_require(val, "center", where), 2, f"{where}.center")
        return Disc(tuple(center), float(_require(val, "radius", where)))
    if kind == "polygon":
        verts = _require(val, "vertices", where)
        return Polygon(tuple(tuple(_floats(v, 2, f"{where}.vertices[{k}]")) for k, v in enumerate(verts)))
    raise ConfigParseError(f"unknown shape kind {kind!r}", f"{where}.kind")


def parse_structure(config_text):
    """Parse config text into an unvalidated Structure with detected junctions."""
    try:
        doc = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    name = doc.get("name", "") if isinstance(doc, dict) else ""
    comps_raw = _require(doc, "components", "<root>")
    if not isinstance(comps_raw, list) or not comps_raw:
        raise ConfigParseError("expected a nonempty array", "components")
    comps, seen = [], set()
    for k, raw in enumerate(comps_raw):
        where = f"components[{k}]"
        cid = _require(raw, "id", where)
        if not isinstance(cid, int) or isinstance(cid, bool):
            raise ConfigParseError("id must be an integer", f"{where}.id")
        if cid in seen:
            raise ConfigParseError(f"duplicate component id {cid}", f"{where}.id")
        seen.add(cid)
        dim = _require(raw, "dim", where)
        if dim not in (1, 2):
            raise ConfigParseError("dim must be 1 or 2", f"{where}.dim")
        origin = _floats(_require(raw, "origin", where), 3, f"{where}.origin")
        tangents = [_floats(t, 3, f"{where}.tangents[{m}]") for m, t in enumerate(_require(raw, "tangents", where))]
        try:
            shape = _parse_shape(_require(raw, "shape", where), f"{where}.shape")
            theta = _parse_theta(raw.get("theta", 1.0), dim, f"{where}.theta")
            comps.append(Component(cid, dim, origin, tangents, shape, theta))
        except ConfigParseError:
            raise
        except StructureError as exc:
            raise ConfigParseError(str(exc), where) from None
    return with_junctions(comps, str(name))


def load_structure(config_text):
    """Parse and validate a structure config; raises on any violation."""
    s = parse_structure(config_text)
    report = validate(s)
    if not report.ok:
        raise ValidationError(report)
    return s


def structure_to_config(s):
    """Inverse of :func:`parse_structure` (JSON-ready dict)."""
    comps = []
    for c in s.components:
        sh = c.shape
        if isinstance(sh, Interval):
            shape = {"kind": "interval", "a": sh.a, "b": sh.b}
        elif isinstance(sh, Disc):
            shape = {"kind": "disc", "center": list(sh.center), "radius": sh.radius}
        else:
            shape = {"kind": "polygon", "vertices": [list(v) for v in sh.vertices]}
        if c.theta.is_constant:
            theta = float(sum(cf for cf, _ in c.theta.terms))
        else:
            theta = {
                "terms": [[cf, *(list(p) + [0] * (c.dim - len(p)))] for cf, p in c.theta.terms],
                "lower_bound": c.theta.lower_bound,
            }
        comps.append({
            "id": c.id,
            "dim": c.dim,
            "origin": c.origin.tolist(),
            "tangents": c.tangents.tolist(),
            "shape": shape,
            "theta": theta,
        })
    return {"name": s.name, "components": comps}
