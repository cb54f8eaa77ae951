"""
Construction of an ordered sub/supersolution pair that violates the
comparison principle (or the sub/supersolution method) for
-M(||u||^2) Laplace u = Theta u.

Steps: pick tau so that lambda_tau / lambda_1 > M(t1) / M(t2), take Theta in
(lambda_1 M(t1), lambda_tau M(t2)), compute the touching constant c_tau, glue
u_eps = min(c_tau phi_tau, phi_1 / eps), scale the subsolution A alpha phi_1 to
norm t1 and pick eps so that A u_eps has norm t2.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from config.settings import (
    EPSILON_FLOOR,
    EPSILON_REL_TOL,
    NORM_REL_TOL,
    TAU_MAX_HALVINGS,
    TAU_SAFETY,
    WEAK_ALPHA_CAP,
)
from core.assembly import Field, OperatorPair, assemble, h1_norm_sq, restrict
from core.eigensolve import EigenPair, eigenvalue_ratio, principal_eigenpair
from core.exceptions import (
    BracketFailure,
    ConstructionError,
    EmptyInterval,
    NoAdmissibleTau,
    PositivityFailure,
    PreconditionViolated,
)
from core.geometry import DomainSpec, Mesh, make_domain, mesh, mesh_enlarged
from core.logger import setup_logger
from core.mcatalog import IncreasingPair, MFunctionSpec

logger = setup_logger(__name__)


class Mode(str, Enum):
    SSM = "SSM"
    STRONG_CP = "STRONG_CP"
    WEAK_CP = "WEAK_CP"
    CLASSIFY = "CLASSIFY"
    NECESSITY = "NECESSITY"

    @property
    def builds_counterexample(self) -> bool:
        return self in (Mode.SSM, Mode.STRONG_CP, Mode.WEAK_CP)


@dataclass(frozen=True, eq=False)
class TouchingData:
    """c_tau = max phi_1 / phi_tau over interior nodes, attained at p_tilde."""

    c_tau: float
    p_index: int
    p_coords: Tuple[float, ...]
    gap_field: Field


@dataclass(frozen=True, eq=False)
class GluedFunction:
    epsilon: float
    values: Field
    inner_set_mask: np.ndarray


@dataclass(frozen=True)
class CounterexampleParams:
    mode: Mode
    tau: float
    theta: float
    alpha: float
    A: float
    epsilon: float
    t1: float
    t2: float
    M1: float
    M2: float
    lambda1: float
    lambda_tau: float
    c_tau: float
    p_index: int
    p_coords: Tuple[float, ...]
    norm_phi1_sq: float
    norm_u_sq: float
    alpha_max: float
    h: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.value,
            "tau": self.tau,
            "theta": self.theta,
            "theta_interval": [self.lambda1 * self.M1, self.lambda_tau * self.M2],
            "alpha": self.alpha,
            "alpha_max": self.alpha_max,
            "A": self.A,
            "epsilon": self.epsilon,
            "t1": self.t1,
            "t2": self.t2,
            "M1": self.M1,
            "M2": self.M2,
            "lambda1": self.lambda1,
            "lambda_tau": self.lambda_tau,
            "c_tau": self.c_tau,
            "p_tilde": {"index": self.p_index, "coords": list(self.p_coords)},
            "norm_phi1_sq": self.norm_phi1_sq,
            "norm_u_sq": self.norm_u_sq,
            "h": self.h,
        }


@dataclass(frozen=True, eq=False)
class Counterexample:
    """
    lower = A alpha phi_1 and upper = A u_eps on the mesh of the original domain.

    In STRONG_CP and WEAK_CP mode the pair is read as (l, w).
    """

    lower: Field
    upper: Field
    params: CounterexampleParams
    eigen_inner: EigenPair
    eigen_outer: EigenPair
    ops: OperatorPair
    touching: TouchingData
    glued: GluedFunction
    phi_tau_restricted: Field

    @property
    def mesh(self) -> Mesh:
        return self.lower.mesh


def select_tau(M: MFunctionSpec, pair: IncreasingPair, domain: DomainSpec, h: Optional[float] = None,
               tau0: Optional[float] = None, inner_mesh: Optional[Mesh] = None,
               inner: Optional[EigenPair] = None) -> Tuple[float, EigenPair, EigenPair]:
    """
    Largest tau = tau0 / 2**k with lambda_tau / lambda_1 > (M1 / M2)(1 + TAU_SAFETY).

    Args:
        M: Coefficient (only the pair values enter)
        pair: Increasing pair
        domain: Original domain
        h: Mesh size (default per dimension)
        tau0: First trial (default: a quarter of the inradius)
        inner_mesh: Mesh of the original domain, reused when given
        inner: Eigenpair on inner_mesh, reused when given

    Returns:
        (tau, eigenpair on the original domain, eigenpair on the enlarged domain)

    Raises:
        PreconditionViolated: If pair.M1 >= pair.M2
        NoAdmissibleTau: If TAU_MAX_HALVINGS halvings do not suffice
    """
    if not pair.M1 < pair.M2:
        raise PreconditionViolated(f"select_tau needs M(t1) < M(t2), got {pair.M1} and {pair.M2}")
    target = (pair.M1 / pair.M2) * (1.0 + TAU_SAFETY)
    if target >= 1.0:
        raise NoAdmissibleTau(
            f"M(t1)/M(t2) = {pair.M1 / pair.M2:.12g} leaves no room for the safety factor {TAU_SAFETY}"
        )

    if inner_mesh is None:
        inner_mesh = mesh(domain, h)
    if inner is None:
        inner = principal_eigenpair(assemble(inner_mesh))

    tau = tau0 if tau0 is not None else 0.25 * domain.inradius()
    if not tau > 0:
        raise PreconditionViolated(f"Initial tau must be positive, got {tau}")

    for attempt in range(TAU_MAX_HALVINGS + 1):
        outer_mesh = mesh_enlarged(inner_mesh, tau)
        outer = principal_eigenpair(assemble(outer_mesh))
        ratio = eigenvalue_ratio(inner, outer)
        logger.debug(f"tau={tau:.6g}: lambda ratio {ratio:.9g} (target {target:.9g})")
        if ratio > target:
            logger.info(f"Selected tau={tau:.9g} after {attempt} halvings (ratio {ratio:.9g})")
            return tau, inner, outer
        tau *= 0.5

    raise NoAdmissibleTau(
        f"No tau in {TAU_MAX_HALVINGS} halvings gives a ratio above {target:.12g}; "
        "M(t1)/M(t2) is too close to 1 for this mesh"
    )


def select_theta(lambda1: float, lambda_tau: float, M1: float, M2: float) -> float:
    """
    Midpoint of (lambda1 * M1, lambda_tau * M2).

    Raises:
        EmptyInterval: If the interval is empty
    """
    lo, hi = lambda1 * M1, lambda_tau * M2
    if not lo < hi:
        raise EmptyInterval(f"No Theta with {lo:.12g} < Theta < {hi:.12g}")
    return 0.5 * (lo + hi)


def compute_c_tau(phi1: EigenPair, phi_tau_restricted: Field) -> TouchingData:
    """
    Smallest c with phi_1 <= c phi_tau on the original mesh, and where it touches.

    Ties in the maximizing node go to the smallest node index.

    Raises:
        PositivityFailure: If the restricted phi_tau is not positive everywhere
    """
    values = phi_tau_restricted.values
    if np.any(values <= 0):
        bad = np.flatnonzero(values <= 0)
        raise PositivityFailure(
            f"Restricted phi_tau is nonpositive at {len(bad)} nodes (first: {bad[0]})"
        )
    interior = phi1.mesh.interior
    ratio = phi1.phi.values[interior] / values[interior]
    k = int(np.argmax(ratio))
    c_tau = float(ratio[k])
    p_index = int(interior[k])
    gap = c_tau * values - phi1.phi.values
    mesh_ = phi1.mesh
    return TouchingData(
        c_tau=c_tau,
        p_index=p_index,
        p_coords=tuple(float(c) for c in mesh_.nodes[p_index]),
        gap_field=Field(mesh_, gap),
    )


def glue(c_tau_data: TouchingData, phi1: EigenPair, phi_tau_restricted: Field, epsilon: float) -> GluedFunction:
    """Nodal min(c_tau phi_tau, phi_1 / epsilon)."""
    if not 0 < epsilon <= 1:
        raise PreconditionViolated(f"epsilon must lie in (0, 1], got {epsilon}")
    capped = c_tau_data.c_tau * phi_tau_restricted.values
    scaled = phi1.phi.values / epsilon
    return GluedFunction(
        epsilon=epsilon,
        values=Field(phi1.mesh, np.minimum(capped, scaled)),
        inner_set_mask=scaled < capped,
    )


def select_scale_A(alpha: float, norm_phi1_sq: float, t1: float) -> float:
    """A with A**2 alpha**2 ||phi_1||**2 = t1."""
    if not (alpha > 0 and norm_phi1_sq > 0 and t1 > 0):
        raise PreconditionViolated(
            f"select_scale_A needs positive inputs, got alpha={alpha}, norm={norm_phi1_sq}, t1={t1}"
        )
    return math.sqrt(t1) / (alpha * math.sqrt(norm_phi1_sq))


def select_epsilon(builder: Callable[[float], GluedFunction], A: float, t2: float,
                   ops: OperatorPair) -> Tuple[float, GluedFunction]:
    """
    epsilon in (0, 1] with A**2 ||u_eps||**2 = t2.

    The lower end of the bracket moves down by factors of 10 until the norm
    exceeds t2, then bisection runs on log(epsilon).

    Raises:
        PreconditionViolated: If already A**2 ||u_1||**2 > t2
        BracketFailure: If epsilon reaches EPSILON_FLOOR without bracketing
    """
    def norm_sq(eps: float) -> float:
        return A * A * h1_norm_sq(builder(eps).values, ops)

    at_one = norm_sq(1.0)
    if abs(at_one - t2) <= EPSILON_REL_TOL * t2:
        return 1.0, builder(1.0)
    if at_one > t2:
        raise PreconditionViolated(f"A^2 |u_1|^2 = {at_one:.12g} already exceeds t2 = {t2:.12g}")

    hi = 1.0
    lo = 0.1
    while norm_sq(lo) <= t2:
        hi = lo
        lo *= 0.1
        if lo < EPSILON_FLOOR * (1 - 1e-9):
            raise BracketFailure(
                f"Norm stays below t2={t2:.6g} down to epsilon={hi:.1e}: the boundary layer of u_eps carries "
                f"energy of order 1/h only, so refine the mesh (h={ops.mesh.h:.4g}; 2D pairs with t2/t1 = 4 "
                "need h near 1/128 of the domain width)"
            )

    log_eps = bisect(lambda s: norm_sq(math.exp(s)) - t2, math.log(lo), math.log(hi), xtol=1e-14, maxiter=400)
    epsilon = math.exp(log_eps)
    glued = builder(epsilon)
    achieved = norm_sq(epsilon)
    if abs(achieved - t2) > EPSILON_REL_TOL * t2:
        raise ConstructionError(
            f"epsilon={epsilon:.12g} reaches |A u|^2 = {achieved:.12g}, target {t2:.12g}"
        )
    logger.debug(f"epsilon={epsilon:.12g} from bracket [{lo:.1e}, {hi:.1e}]")
    return epsilon, glued


def weak_alpha(alpha_max: float) -> float:
    """Geometric mean of 1 and alpha_max, capped at WEAK_ALPHA_CAP."""
    return min(math.sqrt(alpha_max), WEAK_ALPHA_CAP)


def build_counterexample(domain: DomainSpec, M: MFunctionSpec, pair: IncreasingPair, mode: Mode,
                         h: Optional[float] = None, tau0: Optional[float] = None) -> Tuple[Counterexample, CounterexampleParams]:
    """
    Run the whole construction for one domain, coefficient and pair.

    Args:
        domain: Original domain
        M: Coefficient
        pair: Increasing pair t1 < t2
        mode: SSM, STRONG_CP or WEAK_CP
        h: Mesh size (default per dimension)
        tau0: First trial for tau

    Returns:
        (Counterexample, CounterexampleParams)

    Raises:
        EmptyInterval: If M(t1) >= M(t2), before any meshing
        ConstructionError: If a norm postcondition fails
    """
    mode = Mode(mode)
    if not mode.builds_counterexample:
        raise PreconditionViolated(f"Mode {mode.value} does not build a counterexample")
    if not 0 < pair.t1 < pair.t2:
        raise PreconditionViolated(f"Need 0 < t1 < t2, got t1={pair.t1}, t2={pair.t2}")
    if not pair.M1 < pair.M2:
        raise EmptyInterval(
            f"M(t1)={pair.M1:.12g} >= M(t2)={pair.M2:.12g}: no Theta below lambda_tau M(t2) "
            "and above lambda_1 M(t1)"
        )
    make_domain(domain)

    logger.info(f"Building {mode.value} counterexample on {domain.kind} with t1={pair.t1}, t2={pair.t2}")
    inner_mesh = mesh(domain, h)
    ops = assemble(inner_mesh)
    eigen_inner = principal_eigenpair(ops)
    tau, eigen_inner, eigen_outer = select_tau(M, pair, domain, inner_mesh.h, tau0, inner_mesh, eigen_inner)

    phi_tau_restricted = restrict(eigen_outer.phi, inner_mesh)
    touching = compute_c_tau(eigen_inner, phi_tau_restricted)
    theta = select_theta(eigen_inner.lam, eigen_outer.lam, pair.M1, pair.M2)

    alpha_max = (pair.M2 * eigen_outer.lam) / (pair.M1 * eigen_inner.lam) if pair.M1 > 0 else math.inf
    alpha = weak_alpha(alpha_max) if mode == Mode.WEAK_CP else 1.0

    norm_phi1_sq = h1_norm_sq(eigen_inner.phi, ops)
    A = select_scale_A(alpha, norm_phi1_sq, pair.t1)
    epsilon, glued = select_epsilon(
        lambda eps: glue(touching, eigen_inner, phi_tau_restricted, eps), A, pair.t2, ops
    )

    lower = eigen_inner.phi.scaled(A * alpha)
    upper = glued.values.scaled(A)
    lower_norm = h1_norm_sq(lower, ops)
    upper_norm = h1_norm_sq(upper, ops)
    for name, value, target in (("lower", lower_norm, pair.t1), ("upper", upper_norm, pair.t2)):
        if abs(value - target) > NORM_REL_TOL * target:
            raise ConstructionError(f"|{name}|^2 = {value:.12g} misses its target {target:.12g}")

    params = CounterexampleParams(
        mode=mode,
        tau=tau,
        theta=theta,
        alpha=alpha,
        A=A,
        epsilon=epsilon,
        t1=pair.t1,
        t2=pair.t2,
        M1=pair.M1,
        M2=pair.M2,
        lambda1=eigen_inner.lam,
        lambda_tau=eigen_outer.lam,
        c_tau=touching.c_tau,
        p_index=touching.p_index,
        p_coords=touching.p_coords,
        norm_phi1_sq=norm_phi1_sq,
        norm_u_sq=h1_norm_sq(glued.values, ops),
        alpha_max=alpha_max,
        h=inner_mesh.h,
    )
    logger.info(
        f"tau={tau:.6g} Theta={theta:.9g} alpha={alpha:.6g} A={A:.9g} "
        f"epsilon={epsilon:.6g} c_tau={touching.c_tau:.9g}"
    )
    cex = Counterexample(
        lower=lower,
        upper=upper,
        params=params,
        eigen_inner=eigen_inner,
        eigen_outer=eigen_outer,
        ops=ops,
        touching=touching,
        glued=glued,
        phi_tau_restricted=phi_tau_restricted,
    )
    return cex, params
