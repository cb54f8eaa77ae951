"""
P1 stiffness/mass assembly, H1_0 seminorms and mesh-to-mesh restriction.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from config.settings import POINT_LOCATION_CANDIDATES, POINT_LOCATION_TOL
from core.exceptions import DimensionMismatch, PointLocationFailure
from core.geometry import Mesh
from core.logger import setup_logger

logger = setup_logger(__name__)

_MASS_1D = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
_MASS_2D = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values of a P1 function on a given mesh."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.mesh.n_nodes,):
            raise DimensionMismatch(
                f"Field has {values.shape} values, mesh has {self.mesh.n_nodes} nodes"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def scaled(self, factor: float) -> "Field":
        return Field(self.mesh, factor * self.values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class OperatorPair:
    """Stiffness K and mass Mm of a mesh, as CSR matrices."""

    mesh: Mesh
    K: sp.csr_matrix
    Mm: sp.csr_matrix

    @property
    def lumped_mass(self) -> np.ndarray:
        """Row sums of Mm, i.e. Mm applied to the constant 1."""
        return np.asarray(self.Mm.sum(axis=1)).ravel()

    def interior_block(self, matrix: sp.csr_matrix) -> sp.csr_matrix:
        idx = self.mesh.interior
        return matrix[idx][:, idx]


def _element_matrices(mesh: Mesh):
    p = mesh.nodes[mesh.elements]
    if mesh.dim == 1:
        lengths = p[:, 1, 0] - p[:, 0, 0]
        ke = np.array([[1.0, -1.0], [-1.0, 1.0]])[None] / lengths[:, None, None]
        me = _MASS_1D[None] * lengths[:, None, None]
        return ke, me

    x, y = p[:, :, 0], p[:, :, 1]
    # gradient coefficients of the three barycentric hats, times 2*area
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = 0.5 * (b[:, 1] * c[:, 2] - b[:, 2] * c[:, 1])
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area)[:, None, None]
    me = _MASS_2D[None] * area[:, None, None]
    return ke, me


def assemble(mesh: Mesh) -> OperatorPair:
    """
    Assemble the P1 stiffness and mass matrices of a mesh.

    Element integrals are exact for P1 hats: segments in 1D, triangles in 2D.
    Contributions are gathered in COO form and summed into CSR.

    Args:
        mesh: Mesh from core.geometry

    Returns:
        OperatorPair with K (int grad u . grad v) and Mm (int u v)
    """
    ke, me = _element_matrices(mesh)
    n_loc = mesh.elements.shape[1]
    rows = np.repeat(mesh.elements, n_loc, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, n_loc)).ravel()
    shape = (mesh.n_nodes, mesh.n_nodes)
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=shape).tocsr()
    Mm = sp.coo_matrix((me.ravel(), (rows, cols)), shape=shape).tocsr()
    logger.debug(f"Assembled {mesh.dim}D operators: {mesh.n_nodes} nodes, nnz(K)={K.nnz}")
    return OperatorPair(mesh, K, Mm)


def h1_norm_sq(field: Field, ops: OperatorPair) -> float:
    """
    Squared H1_0 seminorm v^T K v of a field.

    Raises:
        DimensionMismatch: If the field is not defined on the operators' mesh
    """
    if field.mesh.n_nodes != ops.K.shape[0]:
        raise DimensionMismatch(
            f"Field on {field.mesh.n_nodes} nodes, operators on {ops.K.shape[0]}"
        )
    v = field.values
    return max(float(v @ (ops.K @ v)), 0.0)


def _barycentric(mesh: Mesh, element_ids: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of points[i] in element element_ids[i]."""
    p = mesh.nodes[mesh.elements[element_ids]]
    v0, v1, v2 = p[:, 0], p[:, 1], p[:, 2]
    d1, d2, dp = v1 - v0, v2 - v0, points - v0
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    l1 = (dp[:, 0] * d2[:, 1] - dp[:, 1] * d2[:, 0]) / det
    l2 = (d1[:, 0] * dp[:, 1] - d1[:, 1] * dp[:, 0]) / det
    return np.column_stack([1.0 - l1 - l2, l1, l2])


def _locate_2d(source: Mesh, points: np.ndarray, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """Containing element and barycentric weights for each point."""
    p = source.nodes[source.elements]
    centroids = p.mean(axis=1)
    tree = cKDTree(centroids)
    k = min(POINT_LOCATION_CANDIDATES, source.n_elements)
    _, candidates = tree.query(points, k=k)
    candidates = np.asarray(candidates).reshape(len(points), k)

    found = np.full(len(points), -1, dtype=np.int64)
    weights = np.zeros((len(points), 3))
    for j in range(k):
        todo = np.flatnonzero(found < 0)
        if len(todo) == 0:
            break
        lam = _barycentric(source, candidates[todo, j], points[todo])
        inside = np.all(lam >= -tol, axis=1)
        found[todo[inside]] = candidates[todo[inside], j]
        weights[todo[inside]] = lam[inside]

    for i in np.flatnonzero(found < 0):
        # brute force over every element
        lam = _barycentric(source, np.arange(source.n_elements), np.repeat(points[i:i + 1], source.n_elements, 0))
        hits = np.flatnonzero(np.all(lam >= -tol, axis=1))
        if len(hits) == 0:
            raise PointLocationFailure(f"Node at {points[i]} lies outside every source element")
        found[i] = hits[0]
        weights[i] = lam[hits[0]]
    return found, weights


def restrict(field_on_enlarged: Field, target: Mesh, tol: Optional[float] = None) -> Field:
    """
    Piecewise-linear interpolation of a field onto the nodes of another mesh.

    Target nodes that coincide with source nodes take the source value
    exactly; the rest are located in a source element and interpolated with
    barycentric weights (nonnegative up to `tol`, so positivity is kept).

    Args:
        field_on_enlarged: Source field
        target: Mesh whose nodes lie in the source mesh
        tol: Point location tolerance relative to h (default POINT_LOCATION_TOL)

    Returns:
        Field on `target`

    Raises:
        PointLocationFailure: If a target node is outside all source elements
        DimensionMismatch: If the meshes have different dimensions
    """
    source = field_on_enlarged.mesh
    if source.dim != target.dim:
        raise DimensionMismatch(f"Cannot restrict a {source.dim}D field onto a {target.dim}D mesh")
    tol = POINT_LOCATION_TOL if tol is None else tol
    values = field_on_enlarged.values
    points = target.nodes
    scale = max(source.h, 1e-300)

    if source.dim == 1:
        order = np.argsort(source.nodes[:, 0], kind="stable")
        xs, vs = source.nodes[order, 0], values[order]
        x = points[:, 0]
        outside = (x < xs[0] - tol * scale) | (x > xs[-1] + tol * scale)
        if np.any(outside):
            raise PointLocationFailure(
                f"{np.count_nonzero(outside)} target nodes outside [{xs[0]}, {xs[-1]}]"
            )
        return Field(target, np.interp(x, xs, vs))

    tree = cKDTree(source.nodes)
    dist, nearest = tree.query(points)
    exact = dist <= 1e-12 * scale
    result = np.empty(target.n_nodes)
    result[exact] = values[nearest[exact]]

    rest = np.flatnonzero(~exact)
    if len(rest):
        elem, lam = _locate_2d(source, points[rest], tol)
        lam = np.clip(lam, 0.0, None)
        lam /= lam.sum(axis=1, keepdims=True)
        result[rest] = np.einsum("ij,ij->i", lam, values[source.elements[elem]])

    logger.debug(f"Restricted field: {np.count_nonzero(exact)} shared nodes, {len(rest)} interpolated")
    return Field(target, result)
