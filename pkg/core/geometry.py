"""
Supported domains, their enlargement and mesh generation.

Domains are intervals, rectangles, disks and strictly convex polygons. The
enlarged domain used by the construction pushes every edge (or the radius)
outward by tau. Meshes are P1 meshes: uniform grids in 1D, structured
triangulations for rectangles, hexagonal ring meshes for disks and Delaunay
triangulations for convex polygons.

`mesh_enlarged` builds a mesh of the enlarged domain that contains the mesh
of the original domain as a submesh (same nodes, same elements), so that
functions on the enlarged mesh restrict to the smaller one without
interpolation error.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import Delaunay

from config.settings import DEFAULT_H_1D, DEFAULT_H_2D_FRACTION
from core.exceptions import InvalidGeometry, MeshTooCoarse
from core.logger import setup_logger

logger = setup_logger(__name__)

DOMAIN_KINDS = ("interval", "rectangle", "disk", "convex_polygon")


@dataclass(frozen=True)
class DomainSpec:
    """
    A supported domain.

    `coords` holds (a, b) for an interval, (a, b, c, d) for the rectangle
    (a, b) x (c, d) and (cx, cy, R) for a disk. `vertices` holds the
    counterclockwise vertex list of a convex polygon.
    """

    kind: str
    coords: Tuple[float, ...] = ()
    vertices: Tuple[Tuple[float, float], ...] = ()

    @classmethod
    def interval(cls, a: float, b: float) -> "DomainSpec":
        return cls("interval", (float(a), float(b)))

    @classmethod
    def rectangle(cls, a: float, b: float, c: float, d: float) -> "DomainSpec":
        return cls("rectangle", (float(a), float(b), float(c), float(d)))

    @classmethod
    def disk(cls, center: Tuple[float, float] = (0.0, 0.0), radius: float = 1.0) -> "DomainSpec":
        return cls("disk", (float(center[0]), float(center[1]), float(radius)))

    @classmethod
    def convex_polygon(cls, vertices) -> "DomainSpec":
        return cls("convex_polygon", (), tuple((float(x), float(y)) for x, y in vertices))

    @property
    def dim(self) -> int:
        return 1 if self.kind == "interval" else 2

    @property
    def radius(self) -> float:
        return self.coords[2]

    @property
    def center(self) -> Tuple[float, float]:
        return (self.coords[0], self.coords[1])

    def polygon_vertices(self) -> np.ndarray:
        """Vertices as an (n, 2) array; rectangles are treated as polygons."""
        if self.kind == "convex_polygon":
            return np.array(self.vertices, dtype=float)
        if self.kind == "rectangle":
            a, b, c, d = self.coords
            return np.array([[a, c], [b, c], [b, d], [a, d]], dtype=float)
        raise InvalidGeometry(f"{self.kind} has no vertex list")

    def measure(self) -> float:
        """Exact length (1D) or area (2D)."""
        if self.kind == "interval":
            return self.coords[1] - self.coords[0]
        if self.kind == "rectangle":
            a, b, c, d = self.coords
            return (b - a) * (d - c)
        if self.kind == "disk":
            return math.pi * self.radius ** 2
        v = self.polygon_vertices()
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def inradius(self) -> float:
        """Radius of the largest inscribed ball."""
        if self.kind == "interval":
            return 0.5 * (self.coords[1] - self.coords[0])
        if self.kind == "rectangle":
            a, b, c, d = self.coords
            return 0.5 * min(b - a, d - c)
        if self.kind == "disk":
            return self.radius
        normals, offsets = _edge_lines(self.polygon_vertices())
        # maximize r subject to n_e . x + r <= h_e
        a_ub = np.column_stack([normals, np.ones(len(offsets))])
        res = linprog(c=[0.0, 0.0, -1.0], A_ub=a_ub, b_ub=offsets,
                      bounds=[(None, None), (None, None), (0, None)], method="highs")
        if not res.success:
            raise InvalidGeometry(f"Could not compute inradius: {res.message}")
        return float(res.x[2])

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.kind == "interval":
            return np.array([self.coords[0]]), np.array([self.coords[1]])
        if self.kind == "disk":
            cx, cy, r = self.coords
            return np.array([cx - r, cy - r]), np.array([cx + r, cy + r])
        v = self.polygon_vertices()
        return v.min(axis=0), v.max(axis=0)

    def diameter_of_bounding_box(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        """Boolean mask of points lying in the closed domain (up to tol)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "interval":
            x = pts.reshape(-1)
            return (x >= self.coords[0] - tol) & (x <= self.coords[1] + tol)
        if self.kind == "disk":
            cx, cy, r = self.coords
            return np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) <= r + tol
        normals, offsets = _edge_lines(self.polygon_vertices())
        return np.all(pts @ normals.T <= offsets + tol, axis=1)

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "interval":
            return {"kind": "interval", "a": self.coords[0], "b": self.coords[1]}
        if self.kind == "rectangle":
            a, b, c, d = self.coords
            return {"kind": "rectangle", "a": a, "b": b, "c": c, "d": d}
        if self.kind == "disk":
            return {"kind": "disk", "center": list(self.center), "radius": self.radius}
        return {"kind": "convex_polygon", "vertices": [list(v) for v in self.vertices]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DomainSpec":
        kind = data.get("kind")
        try:
            if kind == "interval":
                return cls.interval(data["a"], data["b"])
            if kind == "rectangle":
                return cls.rectangle(data["a"], data["b"], data["c"], data["d"])
            if kind == "disk":
                return cls.disk(tuple(data.get("center", (0.0, 0.0))), data["radius"])
            if kind == "convex_polygon":
                return cls.convex_polygon(data["vertices"])
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidGeometry(f"Malformed {kind} domain description: {e}") from e
        raise InvalidGeometry(f"Unknown domain kind: {kind!r} (expected one of {DOMAIN_KINDS})")


def _edge_lines(vertices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Outward unit normals n_e and offsets h_e with n_e . x <= h_e inside."""
    edges = np.roll(vertices, -1, axis=0) - vertices
    lengths = np.linalg.norm(edges, axis=1)
    normals = np.column_stack([edges[:, 1], -edges[:, 0]]) / lengths[:, None]
    offsets = np.einsum("ij,ij->i", normals, vertices)
    return normals, offsets


def _offset_polygon(vertices: np.ndarray, distance: float) -> np.ndarray:
    """Translate every edge outward by `distance` and intersect neighbours."""
    normals, offsets = _edge_lines(vertices)
    offsets = offsets + distance
    n = len(vertices)
    out = np.empty_like(vertices)
    for i in range(n):
        prev = (i - 1) % n
        system = np.array([normals[prev], normals[i]])
        out[i] = np.linalg.solve(system, [offsets[prev], offsets[i]])
    return out


def make_domain(spec: DomainSpec) -> DomainSpec:
    """
    Validate a domain description.

    Returns:
        The same spec, unchanged

    Raises:
        InvalidGeometry: If the domain is degenerate or unsupported
    """
    if spec.kind not in DOMAIN_KINDS:
        raise InvalidGeometry(f"Unknown domain kind: {spec.kind!r}")

    values = np.array(spec.coords + tuple(c for v in spec.vertices for c in v), dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidGeometry(f"Non-finite coordinates in {spec.kind}")

    if spec.kind == "interval":
        if len(spec.coords) != 2 or not spec.coords[0] < spec.coords[1]:
            raise InvalidGeometry(f"Degenerate interval {spec.coords}: need a < b")
    elif spec.kind == "rectangle":
        if len(spec.coords) != 4:
            raise InvalidGeometry("Rectangle needs (a, b, c, d)")
        a, b, c, d = spec.coords
        if not (a < b and c < d):
            raise InvalidGeometry(f"Degenerate rectangle {spec.coords}: need a < b and c < d")
    elif spec.kind == "disk":
        if len(spec.coords) != 3 or not spec.radius > 0:
            raise InvalidGeometry(f"Disk radius must be positive, got {spec.coords}")
    else:
        _validate_polygon(np.array(spec.vertices, dtype=float))
    return spec


def _validate_polygon(vertices: np.ndarray) -> None:
    if vertices.ndim != 2 or len(vertices) < 3 or vertices.shape[1] != 2:
        raise InvalidGeometry("Polygon needs at least 3 vertices in the plane")
    edges = np.roll(vertices, -1, axis=0) - vertices
    if np.any(np.linalg.norm(edges, axis=1) == 0):
        raise InvalidGeometry("Polygon has repeated vertices")
    nxt = np.roll(edges, -1, axis=0)
    cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    if np.any(cross <= 0):
        raise InvalidGeometry("Polygon must be strictly convex and counterclockwise")
    # all left turns could still wind more than once
    dot = np.einsum("ij,ij->i", edges, nxt)
    turning = float(np.sum(np.arctan2(cross, dot)))
    if not math.isclose(turning, 2 * math.pi, rel_tol=1e-9):
        raise InvalidGeometry("Polygon is self-intersecting")


def enlarge(spec: DomainSpec, tau: float) -> DomainSpec:
    """
    Domain of the same kind pushed outward by tau.

    Intervals and rectangles move each side by tau, disks grow their radius and
    convex polygons translate every edge along its outward normal. The result
    contains the metric enlargement {d(x, Omega) < tau}.

    Raises:
        InvalidGeometry: If tau is not positive
    """
    if not tau > 0:
        raise InvalidGeometry(f"Enlargement parameter must be positive, got tau={tau}")
    make_domain(spec)
    if spec.kind == "interval":
        a, b = spec.coords
        return DomainSpec.interval(a - tau, b + tau)
    if spec.kind == "rectangle":
        a, b, c, d = spec.coords
        return DomainSpec.rectangle(a - tau, b + tau, c - tau, d + tau)
    if spec.kind == "disk":
        return DomainSpec.disk(spec.center, spec.radius + tau)
    return DomainSpec.convex_polygon(_offset_polygon(spec.polygon_vertices(), tau))


def hausdorff_to_enlargement(spec: DomainSpec, tau: float) -> float:
    """Hausdorff distance between a domain and enlarge(spec, tau)."""
    if spec.kind in ("interval", "disk"):
        return float(tau)
    v = spec.polygon_vertices()
    w = _offset_polygon(v, tau)
    return float(np.max(np.linalg.norm(w - v, axis=1)))


def default_h(spec: DomainSpec) -> float:
    """Default mesh size: pi/2000 in 1D, 1/64 of the bounding-box diagonal in 2D."""
    if spec.dim == 1:
        return DEFAULT_H_1D
    return DEFAULT_H_2D_FRACTION * spec.diameter_of_bounding_box()


@dataclass(frozen=True, eq=False)
class Mesh:
    """P1 mesh: node coordinates, element connectivity and boundary flags."""

    domain: DomainSpec
    nodes: np.ndarray
    elements: np.ndarray
    boundary_mask: np.ndarray
    h: float

    def __post_init__(self):
        for arr in (self.nodes, self.elements, self.boundary_mask):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)

    @property
    def boundary(self) -> np.ndarray:
        return np.flatnonzero(self.boundary_mask)

    def element_measures(self) -> np.ndarray:
        """Signed lengths (1D) or signed areas (2D) of the elements."""
        p = self.nodes[self.elements]
        if self.dim == 1:
            return p[:, 1, 0] - p[:, 0, 0]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def measure(self) -> float:
        return float(np.sum(np.abs(self.element_measures())))

    def max_diameter(self) -> float:
        p = self.nodes[self.elements]
        if self.dim == 1:
            return float(np.max(np.abs(p[:, 1, 0] - p[:, 0, 0])))
        lengths = [np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in ((0, 1), (1, 2), (0, 2))]
        return float(np.max(np.maximum.reduce(lengths)))

    def to_text(self) -> str:
        """Plain-text node/element listing."""
        lines = [f"# nodes {self.n_nodes} dim {self.dim} h {self.h!r} domain {self.domain.kind}"]
        for i, (coords, on_boundary) in enumerate(zip(self.nodes, self.boundary_mask)):
            xs = " ".join(f"{c:.17g}" for c in coords)
            lines.append(f"{i} {xs} {int(on_boundary)}")
        lines.append(f"# elements {self.n_elements}")
        for e, conn in enumerate(self.elements):
            lines.append(f"{e} " + " ".join(str(int(n)) for n in conn))
        return "\n".join(lines) + "\n"


def _finalize(domain: DomainSpec, nodes: np.ndarray, elements: np.ndarray,
              boundary_mask: np.ndarray, h: float) -> Mesh:
    """Orient elements positively and check the mesh invariants."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim == 1:
        nodes = nodes[:, None]
    elements = np.asarray(elements, dtype=np.int64).copy()
    measures = Mesh(domain, nodes, elements.copy(), np.asarray(boundary_mask, dtype=bool).copy(),
                    h).element_measures()
    negative = measures < 0
    if np.any(negative):
        elements[negative, :2] = elements[negative, :2][:, ::-1].copy()
    scale = h ** nodes.shape[1]
    if np.any(np.abs(measures) <= 1e-12 * scale):
        raise InvalidGeometry("Mesh contains elements of zero measure")
    boundary_mask = np.asarray(boundary_mask, dtype=bool)
    if np.count_nonzero(~boundary_mask) < 1:
        raise MeshTooCoarse(f"Mesh of {domain.kind} with h={h} has no interior node")
    return Mesh(domain, nodes, elements, boundary_mask.copy(), float(h))


def _axis(a: float, b: float, h: float, rounding: str = "ceil") -> np.ndarray:
    ratio = (b - a) / h
    n = int(round(ratio)) if rounding == "round" else int(math.ceil(ratio - 1e-9))
    return np.linspace(a, b, max(n, 1) + 1)


def _collar(edge: float, tau: float, spacing: float, side: int) -> np.ndarray:
    """Points strictly beyond `edge` up to edge + side*tau, spacing <= `spacing`."""
    m = max(int(math.ceil(tau / spacing - 1e-9)), 1)
    steps = np.arange(1, m + 1) * (tau / m)
    return edge + side * steps


def _structured_triangles(nx: int, ny: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    n00 = (j * (nx + 1) + i).ravel()
    n10 = n00 + 1
    n01 = n00 + (nx + 1)
    n11 = n01 + 1
    return np.vstack([np.column_stack([n00, n10, n11]), np.column_stack([n00, n11, n01])])


def _tensor_mesh(domain: DomainSpec, xs: np.ndarray, ys: np.ndarray, h: float) -> Mesh:
    xx, yy = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([xx.ravel(), yy.ravel()])
    boundary = ((nodes[:, 0] == xs[0]) | (nodes[:, 0] == xs[-1])
                | (nodes[:, 1] == ys[0]) | (nodes[:, 1] == ys[-1]))
    return _finalize(domain, nodes, _structured_triangles(len(xs) - 1, len(ys) - 1), boundary, h)


def _disk_radii(radius: float, h: float) -> np.ndarray:
    n_rings = max(int(math.ceil(radius / h - 1e-9)), 1)
    return np.linspace(0.0, radius, n_rings + 1)


def _ring_mesh(domain: DomainSpec, radii: np.ndarray, h: float) -> Mesh:
    """
    Hexagonal ring mesh: ring k carries 6k nodes, strips between rings are
    stitched sector by sector (2k + 1 triangles per sector).
    """
    cx, cy = domain.center
    nodes: List[Tuple[float, float]] = [(cx, cy)]
    starts = [0]
    for k in range(1, len(radii)):
        starts.append(len(nodes))
        theta = 2 * np.pi * np.arange(6 * k) / (6 * k)
        nodes.extend(zip(cx + radii[k] * np.cos(theta), cy + radii[k] * np.sin(theta)))

    elements: List[Tuple[int, int, int]] = []
    for i in range(6):
        elements.append((0, starts[1] + i, starts[1] + (i + 1) % 6))
    for k in range(1, len(radii) - 1):
        n_in, n_out = 6 * k, 6 * (k + 1)

        def inner(q: int) -> int:
            return starts[k] + q % n_in

        def outer(q: int) -> int:
            return starts[k + 1] + q % n_out

        for s in range(6):
            for p in range(k):
                elements.append((inner(s * k + p), outer(s * (k + 1) + p), outer(s * (k + 1) + p + 1)))
                elements.append((inner(s * k + p), outer(s * (k + 1) + p + 1), inner(s * k + p + 1)))
            elements.append((inner((s + 1) * k), outer(s * (k + 1) + k), outer(s * (k + 1) + k + 1)))

    boundary = np.zeros(len(nodes), dtype=bool)
    boundary[starts[-1]:] = True
    return _finalize(domain, np.array(nodes), np.array(elements), boundary, h)


def _polygon_boundary_samples(vertices: np.ndarray, h: float,
                              counts: Optional[List[int]] = None) -> Tuple[np.ndarray, List[int]]:
    """Points along the polygon boundary, counterclockwise, spacing <= h per edge."""
    n = len(vertices)
    if counts is None:
        counts = []
        for i in range(n):
            length = float(np.linalg.norm(vertices[(i + 1) % n] - vertices[i]))
            counts.append(max(int(math.ceil(length / h - 1e-9)), 1))
    points = []
    for i in range(n):
        p1, p2 = vertices[i], vertices[(i + 1) % n]
        t = np.arange(counts[i]) / counts[i]
        points.append(p1 + t[:, None] * (p2 - p1))
    return np.vstack(points), counts


def _polygon_mesh(domain: DomainSpec, h: float) -> Mesh:
    vertices = domain.polygon_vertices()
    boundary_pts, _ = _polygon_boundary_samples(vertices, h)
    n_boundary = len(boundary_pts)

    lo, hi = vertices.min(axis=0), vertices.max(axis=0)
    gx = np.arange(lo[0] + h / 2, hi[0], h)
    gy = np.arange(lo[1] + h / 2, hi[1], h)
    xx, yy = np.meshgrid(gx, gy)
    grid = np.column_stack([xx.ravel(), yy.ravel()])
    normals, offsets = _edge_lines(vertices)
    depth = np.min(offsets - grid @ normals.T, axis=1) if len(grid) else np.empty(0)
    interior_pts = grid[depth > 0.5 * h]

    nodes = np.vstack([boundary_pts, interior_pts])
    tri = Delaunay(nodes)
    elements = tri.simplices
    p = nodes[elements]
    area = 0.5 * np.abs((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                        - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
    elements = elements[area > 1e-12 * h * h]

    used = np.zeros(len(nodes), dtype=bool)
    used[elements.ravel()] = True
    if not np.all(used[:n_boundary]):
        raise InvalidGeometry("Delaunay triangulation dropped boundary nodes of the polygon")
    if not np.all(used):
        logger.warning(f"Dropping {np.count_nonzero(~used)} unreferenced interior nodes")
        remap = np.cumsum(used) - 1
        nodes = nodes[used]
        elements = remap[elements]

    boundary = np.zeros(len(nodes), dtype=bool)
    boundary[:n_boundary] = True
    return _finalize(domain, nodes, elements, boundary, h)


def mesh(spec: DomainSpec, h: Optional[float] = None) -> Mesh:
    """
    Generate a conforming P1 mesh of a domain.

    Args:
        spec: Domain to mesh
        h: Target element size (default: `default_h(spec)`)

    Returns:
        Mesh whose boundary nodes lie on the domain boundary

    Raises:
        MeshTooCoarse: If h is not positive or leaves no interior node
    """
    make_domain(spec)
    if h is None:
        h = default_h(spec)
    if not h > 0:
        raise MeshTooCoarse(f"Mesh size must be positive, got h={h}")

    if spec.kind == "interval":
        xs = _axis(spec.coords[0], spec.coords[1], h, rounding="round")
        n = len(xs) - 1
        if n < 2:
            raise MeshTooCoarse(f"h={h} leaves no interior node on {spec.coords}")
        elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
        boundary = np.zeros(n + 1, dtype=bool)
        boundary[[0, n]] = True
        result = _finalize(spec, xs, elements, boundary, h)
    elif spec.kind == "rectangle":
        a, b, c, d = spec.coords
        result = _tensor_mesh(spec, _axis(a, b, h), _axis(c, d, h), h)
    elif spec.kind == "disk":
        result = _ring_mesh(spec, _disk_radii(spec.radius, h), h)
    else:
        result = _polygon_mesh(spec, h)

    logger.debug(
        f"Meshed {spec.kind}: {result.n_nodes} nodes, {result.n_elements} elements, "
        f"{len(result.interior)} interior, h={h:.6g}"
    )
    return result


def mesh_enlarged(inner: Mesh, tau: float) -> Mesh:
    """
    Mesh of enlarge(inner.domain, tau) containing `inner` as a submesh.

    The collar outside the original domain is meshed with spacing at most
    inner.h; every node and element of `inner` appears unchanged.

    Args:
        inner: Mesh produced by `mesh()`
        tau: Enlargement parameter

    Returns:
        Mesh of the enlarged domain
    """
    outer_spec = enlarge(inner.domain, tau)
    spec, h = inner.domain, inner.h

    if spec.kind == "interval":
        a, b = spec.coords
        xs = np.sort(inner.nodes[:, 0])
        spacing = float(np.max(np.diff(xs)))
        left = _collar(a, tau, spacing, -1)[::-1]
        right = _collar(b, tau, spacing, +1)
        all_x = np.concatenate([left, xs, right])
        n = len(all_x) - 1
        elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
        boundary = np.zeros(n + 1, dtype=bool)
        boundary[[0, n]] = True
        result = _finalize(outer_spec, all_x, elements, boundary, h)

    elif spec.kind == "rectangle":
        a, b, c, d = spec.coords
        xs, ys = _axis(a, b, h), _axis(c, d, h)
        hx, hy = xs[1] - xs[0], ys[1] - ys[0]
        all_x = np.concatenate([_collar(a, tau, hx, -1)[::-1], xs, _collar(b, tau, hx, +1)])
        all_y = np.concatenate([_collar(c, tau, hy, -1)[::-1], ys, _collar(d, tau, hy, +1)])
        result = _tensor_mesh(outer_spec, all_x, all_y, h)

    elif spec.kind == "disk":
        radii = _disk_radii(spec.radius, h)
        spacing = radii[1] - radii[0]
        all_radii = np.concatenate([radii, _collar(spec.radius, tau, spacing, +1)])
        result = _ring_mesh(outer_spec, all_radii, h)
        if not np.array_equal(result.nodes[:inner.n_nodes], inner.nodes):
            raise InvalidGeometry("Inner disk mesh was not produced by mesh()")

    else:
        vertices = spec.polygon_vertices()
        samples, counts = _polygon_boundary_samples(vertices, h)
        n_b = len(samples)
        if not np.array_equal(inner.nodes[:n_b], samples):
            raise InvalidGeometry("Inner polygon mesh was not produced by mesh()")
        m = max(int(math.ceil(tau / h - 1e-9)), 1)
        nodes = [inner.nodes]
        layers = [np.arange(n_b)]
        next_index = inner.n_nodes
        for j in range(1, m + 1):
            layer_pts, _ = _polygon_boundary_samples(_offset_polygon(vertices, j * tau / m), h, counts)
            nodes.append(layer_pts)
            layers.append(np.arange(next_index, next_index + n_b))
            next_index += n_b
        collar = []
        for j in range(m):
            lo_ring, hi_ring = layers[j], layers[j + 1]
            lo_next, hi_next = np.roll(lo_ring, -1), np.roll(hi_ring, -1)
            collar.append(np.column_stack([lo_ring, lo_next, hi_next]))
            collar.append(np.column_stack([lo_ring, hi_next, hi_ring]))
        all_nodes = np.vstack(nodes)
        elements = np.vstack([inner.elements] + collar)
        boundary = np.zeros(len(all_nodes), dtype=bool)
        boundary[layers[-1]] = True
        result = _finalize(outer_spec, all_nodes, elements, boundary, h)

    logger.debug(
        f"Enlarged mesh tau={tau:.6g}: {result.n_nodes} nodes ({inner.n_nodes} shared), "
        f"{result.n_elements} elements"
    )
    return result
