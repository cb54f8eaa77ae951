"""
Certification of a constructed counterexample.

Every differential inequality is checked in discrete weak form: against each
nonnegative P1 hat function of an interior node, normalized by the hat's mass
so that margins read as per-node densities.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from config.settings import (
    FORCED_VALUE_TOL,
    MONOTONE_TOL,
    ORDERING_TOL,
    ROOT_RESIDUAL_TOL,
    ROOT_SCAN_POINTS,
    SOLUTION_SCAN_FACTOR,
    STRICT_MARGIN_TOL,
    SUPERSOLUTION_TOL,
    TOUCH_TOL,
    VERSION,
)
from core.assembly import Field, OperatorPair, h1_norm_sq
from core.eigensolve import EigenPair
from core.exceptions import PreconditionViolated
from core.logger import setup_logger
from core.mcatalog import MFunctionSpec, eval_M
from pipeline.construct import Counterexample, Mode

logger = setup_logger(__name__)

__all__ = [
    "Certificate",
    "Counterexample",
    "ReversedPairReport",
    "SolutionSet",
    "CertificateVerdict",
    "certify",
    "check_comparison",
    "check_pair_ordering",
    "check_strict_inequalities",
    "check_weak_supersolution",
    "demonstrate_product_necessity",
    "nonlocal_linear_solution_set",
]


class CertificateVerdict(str, Enum):
    CERTIFIED_FAILURE = "CERTIFIED_FAILURE"
    NOT_CERTIFIED = "NOT_CERTIFIED"


@dataclass(frozen=True)
class SolutionSet:
    """Positive roots s of M(s^2 ||phi_1||^2) lambda_1 = Theta on (0, s_max]."""

    roots: Tuple[float, ...]
    residuals: Tuple[float, ...]
    s_max: float
    n_scan: int
    status: str = "OK"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "roots": list(self.roots),
            "residuals": list(self.residuals),
            "scan": {"s_max": self.s_max, "n_points": self.n_scan},
        }


@dataclass(frozen=True)
class Certificate:
    mode: Mode
    verdict: CertificateVerdict
    margins: Dict[str, float]
    tolerances: Dict[str, float]
    failed: Tuple[str, ...]
    solution_set: Optional[SolutionSet]
    forced_s: Optional[float]
    admissible_roots: Tuple[float, ...]
    touch_nodes: Tuple[int, ...]
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == CertificateVerdict.CERTIFIED_FAILURE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool_version": VERSION,
            "mode": self.mode.value,
            "verdict": self.verdict.value,
            "failed": list(self.failed),
            "margins": dict(self.margins),
            "tolerances": dict(self.tolerances),
            "forced_s": self.forced_s,
            "admissible_roots": list(self.admissible_roots),
            "touch_nodes": list(self.touch_nodes),
            "solution_set": self.solution_set.to_dict() if self.solution_set else None,
            **self.provenance,
        }


@dataclass(frozen=True)
class ReversedPairReport:
    """
    l = t2 phi, w = t1 phi with ||phi|| = 1: when M(t1^2) t1 >= M(t2^2) t2 the
    operator inequality for (l, w) holds while l > w inside.
    """

    t1: float
    t2: float
    product_t1: float
    product_t2: float
    rhs_margin: float
    order_margin: float
    boundary_max_abs: float
    degenerate: bool
    demonstrated: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool_version": VERSION,
            "mode": Mode.NECESSITY.value,
            "t1": self.t1,
            "t2": self.t2,
            "product_t1": self.product_t1,
            "product_t2": self.product_t2,
            "margins": {
                "rhs_margin": self.rhs_margin,
                "order_margin": self.order_margin,
                "boundary_max_abs": self.boundary_max_abs,
            },
            "degenerate": self.degenerate,
            "verdict": "CP_VIOLATED" if self.demonstrated else "NOT_DEMONSTRATED",
        }


def _densities(ops: OperatorPair, vector: np.ndarray) -> np.ndarray:
    idx = ops.mesh.interior
    return vector[idx] / ops.lumped_mass[idx]


def check_weak_supersolution(u: Field, coeff: float, ops: OperatorPair) -> float:
    """
    min over interior rows of (K u - coeff Mm u)_i / (Mm 1)_i.

    Nonnegative (up to SUPERSOLUTION_TOL) means -Laplace u >= coeff u against
    every nonnegative hat test function.
    """
    v = u.values
    return float(np.min(_densities(ops, ops.K @ v - coeff * (ops.Mm @ v))))


def check_pair_ordering(cex: Counterexample) -> Tuple[float, Tuple[int, ...]]:
    """
    Smallest nodal gap upper - lower, and the nodes where |gap| is at most
    TOUCH_TOL * max |upper|.
    """
    gap = cex.upper.values - cex.lower.values
    tol = TOUCH_TOL * float(np.max(np.abs(cex.upper.values)))
    touch = np.flatnonzero(np.abs(gap) <= tol)
    return float(np.min(gap)), tuple(int(i) for i in touch)


def _coefficient(M: MFunctionSpec, u: Field, ops: OperatorPair) -> float:
    return float(eval_M(M, h1_norm_sq(u, ops)))


def check_strict_inequalities(cex: Counterexample, M: MFunctionSpec) -> Tuple[float, float]:
    """
    Density margins of -M(||lower||^2) Laplace lower < Theta lower and
    -M(||upper||^2) Laplace upper > Theta upper.

    Returns:
        (sub_margin, super_margin); both positive for a valid construction
    """
    ops, theta = cex.ops, cex.params.theta
    lo, up = cex.lower.values, cex.upper.values
    m_lo = _coefficient(M, cex.lower, ops)
    m_up = _coefficient(M, cex.upper, ops)
    sub = np.min(_densities(ops, theta * (ops.Mm @ lo) - m_lo * (ops.K @ lo)))
    sup = np.min(_densities(ops, m_up * (ops.K @ up) - theta * (ops.Mm @ up)))
    return float(sub), float(sup)


def check_comparison(cex: Counterexample, M: MFunctionSpec) -> float:
    """Density margin of -M(||l||^2) Laplace l < -M(||w||^2) Laplace w."""
    ops = cex.ops
    lo, up = cex.lower.values, cex.upper.values
    diff = _coefficient(M, cex.upper, ops) * (ops.K @ up) - _coefficient(M, cex.lower, ops) * (ops.K @ lo)
    return float(np.min(_densities(ops, diff)))


def nonlocal_linear_solution_set(M: MFunctionSpec, lambda1: float, norm_phi1_sq: float,
                                 theta: float, s_max: float) -> SolutionSet:
    """
    All s in (0, s_max] with g(s) = M(s^2 norm_phi1_sq) lambda1 - Theta = 0.

    Sign changes on a uniform scan are refined by bisection. Two consecutive
    scan points with |g| <= ROOT_RESIDUAL_TOL * Theta mark a plateau, and
    the set is reported with status UNKNOWN.
    """
    lo, hi = M.t_range
    if np.isfinite(hi):
        s_max = min(s_max, float(np.sqrt(hi / norm_phi1_sq)))

    def level(s):
        # s_max squared back can overshoot the table end by an ulp
        return np.minimum(np.square(s) * norm_phi1_sq, hi)

    def g(s: float) -> float:
        return float(eval_M(M, level(s))) * lambda1 - theta

    s = np.linspace(0.0, s_max, ROOT_SCAN_POINTS + 1)[1:]
    s = s[level(s) >= lo]
    values = np.asarray(eval_M(M, level(s))) * lambda1 - theta
    tol = ROOT_RESIDUAL_TOL * abs(theta)

    flat = np.abs(values) <= tol
    if np.any(flat[1:] & flat[:-1]):
        logger.warning("g vanishes on a whole scan interval; solution set reported as UNKNOWN")
        return SolutionSet((), (), s_max, len(s), status="UNKNOWN")

    roots: List[float] = [float(x) for x in s[flat]]
    for i in np.flatnonzero(values[:-1] * values[1:] < 0):
        if flat[i] or flat[i + 1]:
            continue
        roots.append(float(bisect(g, s[i], s[i + 1], xtol=1e-15, rtol=1e-13)))
    roots.sort()
    residuals = tuple(abs(g(r)) for r in roots)
    for r, res in zip(roots, residuals):
        if res > tol:
            logger.warning(f"Root s={r:.15g} has residual {res:.3e} above {tol:.3e}")
    return SolutionSet(tuple(roots), residuals, s_max, len(s))


def _provenance(cex: Counterexample, M: MFunctionSpec) -> Dict[str, Any]:
    mesh = cex.mesh
    params = cex.params
    return {
        "tau": params.tau,
        "theta": params.theta,
        "alpha": params.alpha,
        "A": params.A,
        "epsilon": params.epsilon,
        "parameters": params.to_dict(),
        "coefficient": M.to_dict(),
        "mesh": {
            "domain": mesh.domain.to_dict(),
            "h": mesh.h,
            "n_nodes": mesh.n_nodes,
            "n_elements": mesh.n_elements,
            "n_interior": int(len(mesh.interior)),
            "max_diameter": mesh.max_diameter(),
            "enlarged_domain": cex.eigen_outer.mesh.domain.to_dict(),
            "enlarged_n_nodes": cex.eigen_outer.mesh.n_nodes,
        },
        "eigen": {
            "inner_residual": cex.eigen_inner.residual,
            "inner_iterations": cex.eigen_inner.iterations,
            "outer_residual": cex.eigen_outer.residual,
            "outer_iterations": cex.eigen_outer.iterations,
        },
    }


def certify(cex: Counterexample, M: MFunctionSpec) -> Certificate:
    """
    Check every inequality the construction promises and issue a verdict.

    SSM and STRONG_CP need strict sub/super margins, ordering, touching at
    p_tilde and, for SSM, no admissible root of the nonlocal linear problem:
    touching forces s = A alpha, which must miss the roots. WEAK_CP needs a
    strict comparison margin while lower(p_tilde) > upper(p_tilde).

    Returns:
        Certificate; NOT_CERTIFIED lists the failing margins in `failed`
    """
    params = cex.params
    mode = params.mode
    p = params.p_index
    upper_max = float(np.max(np.abs(cex.upper.values)))

    sub, sup = check_strict_inequalities(cex, M)
    min_gap, touch_nodes = check_pair_ordering(cex)
    boundary = cex.mesh.boundary
    margins: Dict[str, float] = {
        "sub_strict": sub,
        "super_strict": sup,
        "ordering_min_gap": min_gap,
        "touch_gap_at_p_tilde": float(cex.upper.values[p] - cex.lower.values[p]),
        "weak_supersolution_min": check_weak_supersolution(cex.glued.values, params.lambda_tau, cex.ops),
        "boundary_max_abs": float(max(np.max(np.abs(cex.lower.values[boundary])),
                                      np.max(np.abs(cex.upper.values[boundary])))),
    }
    tolerances = {
        "strict_margin": STRICT_MARGIN_TOL,
        "supersolution": SUPERSOLUTION_TOL,
        "ordering": ORDERING_TOL,
        "touch": TOUCH_TOL * upper_max,
        "forced_value": FORCED_VALUE_TOL,
        "root_residual": ROOT_RESIDUAL_TOL,
    }

    checks = {
        "sub_strict": sub > STRICT_MARGIN_TOL,
        "super_strict": sup > STRICT_MARGIN_TOL,
        "weak_supersolution_min": margins["weak_supersolution_min"] >= -SUPERSOLUTION_TOL,
        "boundary_max_abs": margins["boundary_max_abs"] <= ORDERING_TOL,
    }

    solution_set: Optional[SolutionSet] = None
    forced_s: Optional[float] = None
    admissible: Tuple[float, ...] = ()

    if mode in (Mode.SSM, Mode.STRONG_CP):
        checks["ordering_min_gap"] = min_gap >= -ORDERING_TOL
        checks["touch_gap_at_p_tilde"] = abs(margins["touch_gap_at_p_tilde"]) <= TOUCH_TOL * upper_max
    if mode in (Mode.STRONG_CP, Mode.WEAK_CP):
        margins["comparison_strict"] = check_comparison(cex, M)
        checks["comparison_strict"] = margins["comparison_strict"] > STRICT_MARGIN_TOL
    if mode == Mode.WEAK_CP:
        margins["reversal_at_p_tilde"] = -margins["touch_gap_at_p_tilde"]
        checks["reversal_at_p_tilde"] = margins["reversal_at_p_tilde"] > TOUCH_TOL

    if mode == Mode.SSM:
        forced_s = params.A * params.alpha
        s_max = SOLUTION_SCAN_FACTOR * forced_s
        solution_set = nonlocal_linear_solution_set(M, params.lambda1, params.norm_phi1_sq, params.theta, s_max)
        if not forced_s < solution_set.s_max:
            raise PreconditionViolated(f"Scan range {solution_set.s_max:.6g} does not cover s = {forced_s:.6g}")
        phi = cex.eigen_inner.phi.values
        admissible = tuple(
            r for r in solution_set.roots
            if np.all(r * phi >= cex.lower.values - ORDERING_TOL) and np.all(r * phi <= cex.upper.values + ORDERING_TOL)
        )
        forced_residual = abs(float(eval_M(M, forced_s ** 2 * params.norm_phi1_sq)) * params.lambda1 - params.theta)
        margins["forced_value_residual"] = forced_residual / params.theta
        checks["forced_value_residual"] = forced_residual > FORCED_VALUE_TOL * params.theta
        checks["solution_set"] = solution_set.status == "OK" and not admissible

    failed = tuple(name for name, ok in checks.items() if not ok)
    verdict = CertificateVerdict.NOT_CERTIFIED if failed else CertificateVerdict.CERTIFIED_FAILURE
    if failed:
        logger.warning(f"{mode.value}: not certified, failing {', '.join(failed)}")
    else:
        logger.info(f"{mode.value}: certified failure (sub={sub:.3e}, super={sup:.3e})")

    return Certificate(
        mode=mode,
        verdict=verdict,
        margins=margins,
        tolerances=tolerances,
        failed=failed,
        solution_set=solution_set,
        forced_s=forced_s,
        admissible_roots=admissible,
        touch_nodes=touch_nodes,
        provenance=_provenance(cex, M),
    )


def demonstrate_product_necessity(M: MFunctionSpec, t1: float, t2: float, phi1: EigenPair,
                                  ops: OperatorPair) -> ReversedPairReport:
    """
    Reversed pair showing that s -> M(s^2) s must increase for comparison.

    With phi the H-normalized eigenfunction, l = t2 phi and w = t1 phi satisfy
    -M(||l||^2) Laplace l <= -M(||w||^2) Laplace w and l = w = 0 on the
    boundary, yet l > w inside.

    Raises:
        PreconditionViolated: If not 0 < t1 < t2 or M(t1^2) t1 < M(t2^2) t2
    """
    if not 0 < t1 < t2:
        raise PreconditionViolated(f"Need 0 < t1 < t2, got t1={t1}, t2={t2}")
    prod1 = float(eval_M(M, t1 * t1)) * t1
    prod2 = float(eval_M(M, t2 * t2)) * t2
    if prod1 < prod2:
        raise PreconditionViolated(
            f"M(t1^2) t1 = {prod1:.12g} < M(t2^2) t2 = {prod2:.12g}: no reversed pair"
        )

    phi_hat = phi1.phi.scaled(1.0 / np.sqrt(h1_norm_sq(phi1.phi, ops)))
    ell = phi_hat.scaled(t2)
    w = phi_hat.scaled(t1)
    m_ell = _coefficient(M, ell, ops)
    m_w = _coefficient(M, w, ops)
    rhs = np.min(_densities(ops, m_w * (ops.K @ w.values) - m_ell * (ops.K @ ell.values)))
    idx = ops.mesh.interior
    order = np.min(ell.values[idx] - w.values[idx])
    boundary = ops.mesh.boundary
    boundary_max = float(max(np.max(np.abs(ell.values[boundary])), np.max(np.abs(w.values[boundary]))))
    degenerate = abs(prod1 - prod2) <= MONOTONE_TOL

    report = ReversedPairReport(
        t1=t1,
        t2=t2,
        product_t1=prod1,
        product_t2=prod2,
        rhs_margin=float(rhs),
        order_margin=float(order),
        boundary_max_abs=boundary_max,
        degenerate=degenerate,
        demonstrated=bool((not degenerate) and rhs > STRICT_MARGIN_TOL and order > 0
                          and boundary_max <= ORDERING_TOL),
    )
    logger.info(
        f"Product necessity: M(t1^2)t1={prod1:.9g}, M(t2^2)t2={prod2:.9g}, "
        f"rhs margin {report.rhs_margin:.3e}, degenerate={degenerate}"
    )
    return report
