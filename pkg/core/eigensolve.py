"""Principal Dirichlet eigenpair of -Laplace by inverse power iteration."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import splu

from config.settings import (
    EIGEN_DOMAIN_ORDER_TOL,
    EIGEN_MAX_ITER,
    EIGEN_REL_INCREMENT_TOL,
    EIGEN_RESIDUAL_TOL,
    EIGEN_ROUNDOFF_FACTOR,
)
from core.assembly import Field, OperatorPair
from core.exceptions import DomainOrderViolation, EigenSolveError, MeshTooCoarse, NoConvergence
from core.geometry import Mesh
from core.logger import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True, eq=False)
class EigenPair:
    """
    Principal eigenpair, phi sup-normalized and positive inside.

    `residual` is max |K phi - lam Mm phi|_i / (Mm 1)_i over interior rows,
    the same density scale the supersolution checks use.
    """

    lam: float
    phi: Field
    residual: float
    iterations: int

    @property
    def mesh(self) -> Mesh:
        return self.phi.mesh


def _residual_density(K_ii, M_ii, mass: np.ndarray, x: np.ndarray, lam: float) -> float:
    return float(np.max(np.abs(K_ii @ x - lam * (M_ii @ x)) / mass)) / float(np.max(np.abs(x)))


def principal_eigenpair(ops: OperatorPair, mesh: Optional[Mesh] = None) -> EigenPair:
    """
    Smallest generalized eigenvalue of (K, Mm) with homogeneous Dirichlet data.

    Inverse iteration on the interior unknowns, started from the all-ones
    vector, with one sparse LU factorization of the interior stiffness block.
    Stops once the Rayleigh quotient increment is at most
    EIGEN_REL_INCREMENT_TOL and the mass-normalized residual is at most
    EIGEN_RESIDUAL_TOL * lam. On fine meshes that level can sit below
    rounding; the iteration then also stops when the residual no longer
    decreases and is within EIGEN_ROUNDOFF_FACTOR times the rounding level
    of the stiffness rows.

    Args:
        ops: Assembled operators
        mesh: Mesh the operators were assembled on (default: ops.mesh)

    Returns:
        EigenPair with phi extended by zero to the boundary

    Raises:
        NoConvergence: If EIGEN_MAX_ITER iterations do not suffice
        EigenSolveError: If the factorization fails or phi is not positive
    """
    mesh = ops.mesh if mesh is None else mesh
    idx = mesh.interior
    if len(idx) == 0:
        raise MeshTooCoarse("No interior nodes to solve for")

    K_ii = ops.interior_block(ops.K).tocsc()
    M_ii = ops.interior_block(ops.Mm).tocsr()
    mass = ops.lumped_mass[idx]
    try:
        lu = splu(K_ii)
    except RuntimeError as e:
        logger.error(f"Factorization of the interior stiffness block failed: {e}", exc_info=True)
        raise EigenSolveError(f"Stiffness factorization failed: {e}") from e

    row_scale = float(np.max(np.asarray(abs(K_ii).sum(axis=1)).ravel() / mass))
    rounding_floor = EIGEN_ROUNDOFF_FACTOR * np.finfo(float).eps * row_scale

    x = np.ones(len(idx))
    x /= np.sqrt(x @ (M_ii @ x))
    lam = float(x @ (K_ii @ x))
    residual = np.inf
    converged = False

    for it in range(1, EIGEN_MAX_ITER + 1):
        y = lu.solve(M_ii @ x)
        y /= np.sqrt(y @ (M_ii @ y))
        lam_new = float(y @ (K_ii @ y))
        previous = residual
        residual = _residual_density(K_ii, M_ii, mass, y, lam_new)
        increment = abs(lam_new - lam) / abs(lam_new)
        x, lam = y, lam_new
        if increment <= EIGEN_REL_INCREMENT_TOL and (
            residual <= EIGEN_RESIDUAL_TOL * lam or (residual >= previous and residual <= rounding_floor)
        ):
            converged = True
            break

    if not converged:
        raise NoConvergence(
            f"Inverse iteration did not converge in {EIGEN_MAX_ITER} iterations "
            f"(lam={lam:.12g}, residual={residual:.3e}, rounding level {rounding_floor:.3e})"
        )

    # sign fix on the max-magnitude entry, then sup normalization
    x = x * np.sign(x[np.argmax(np.abs(x))])
    x = x / np.max(x)
    if np.any(x <= 0):
        raise EigenSolveError(
            f"Principal eigenvector has {np.count_nonzero(x <= 0)} nonpositive interior entries"
        )

    values = np.zeros(mesh.n_nodes)
    values[idx] = x
    residual = _residual_density(K_ii, M_ii, mass, x, lam)
    logger.debug(f"Eigenpair on {mesh.domain.kind}: lam={lam:.12g}, {it} iterations, residual={residual:.3e}")
    return EigenPair(lam=lam, phi=Field(mesh, values), residual=residual, iterations=it)


def eigenvalue_ratio(inner: EigenPair, outer: EigenPair) -> float:
    """
    lam(enlarged) / lam(original), which lies in (0, 1] for nested domains.

    Raises:
        DomainOrderViolation: If the ratio exceeds 1 + EIGEN_DOMAIN_ORDER_TOL
    """
    ratio = outer.lam / inner.lam
    if not ratio > 0 or ratio > 1.0 + EIGEN_DOMAIN_ORDER_TOL:
        raise DomainOrderViolation(
            f"Eigenvalue ratio {ratio:.12g} is inconsistent with the enlarged domain containing the original"
        )
    return ratio
