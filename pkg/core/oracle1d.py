"""
Closed-form reference values on the interval (-pi/2, pi/2).

There phi_1 = cos x with lambda_1 = 1, and the enlarged interval
(-pi/2 - tau, pi/2 + tau) has phi_tau = cos(x / L), lambda_tau = 1 / L**2,
L = 1 + 2 tau / pi. Both eigenfunctions touch at the origin, so c_tau = 1.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict

import numpy as np
from scipy.integrate import quad
from scipy.optimize import bisect

from core.exceptions import PreconditionViolated
from core.logger import setup_logger

logger = setup_logger(__name__)

HALF_PI = 0.5 * math.pi
RATIO_SAMPLES = 20001


def stretch(tau: float) -> float:
    return 1.0 + 2.0 * tau / math.pi


def phi1(x):
    return np.cos(x)


def phi_tau(x, tau: float):
    return np.cos(np.asarray(x) / stretch(tau))


def glued(x, tau: float, epsilon: float):
    """min(phi_tau, phi_1 / epsilon), the glued supersolution."""
    return np.minimum(phi_tau(x, tau), phi1(x) / epsilon)


def kink_x(tau: float, epsilon: float) -> float:
    """Positive x where cos(x) / epsilon = cos(x / L); 0 when epsilon = 1."""
    if epsilon >= 1.0:
        return 0.0
    L = stretch(tau)
    return bisect(lambda x: math.cos(x) - epsilon * math.cos(x / L), 0.0, HALF_PI, xtol=1e-15)


def norm_u_sq(tau: float, epsilon: float) -> float:
    """Squared H1_0 seminorm of the glued function, by adaptive quadrature."""
    L = stretch(tau)
    k = kink_x(tau, epsilon)
    inner, _ = quad(lambda x: math.sin(x / L) ** 2, 0.0, k, epsabs=0.0, epsrel=1e-12, limit=200) if k > 0 else (0.0, 0.0)
    outer, _ = quad(lambda x: math.sin(x) ** 2, k, HALF_PI, epsabs=0.0, epsrel=1e-12, limit=200)
    return 2.0 * (inner / L ** 2 + outer / epsilon ** 2)


@dataclass(frozen=True)
class Oracle1DReport:
    tau: float
    epsilon: float
    alpha: float
    L: float
    lambda1: float
    lambda_tau: float
    c_tau: float
    p_tilde: float
    norm_phi1_sq: float
    norm_ell_sq: float
    kink_x: float
    norm_u_sq: float
    ratio_max: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def oracle_report(tau: float, epsilon: float = 1.0, alpha: float = 1.0) -> Oracle1DReport:
    """
    Reference values for given tau, epsilon and alpha.

    Args:
        tau: Enlargement parameter, > 0
        epsilon: Gluing parameter in (0, 1]
        alpha: Multiplier of phi_1 in the subsolution, >= 1

    Returns:
        Oracle1DReport; `ratio_max` is max cos(x)/cos(x/L) on a dense sample

    Raises:
        PreconditionViolated: For parameters outside their ranges
    """
    if not tau > 0:
        raise PreconditionViolated(f"tau must be positive, got {tau}")
    if not 0 < epsilon <= 1:
        raise PreconditionViolated(f"epsilon must lie in (0, 1], got {epsilon}")
    if not alpha >= 1:
        raise PreconditionViolated(f"alpha must be at least 1, got {alpha}")

    L = stretch(tau)
    x = np.linspace(-HALF_PI, HALF_PI, RATIO_SAMPLES)[1:-1]
    ratio_max = float(np.max(phi1(x) / phi_tau(x, tau)))

    report = Oracle1DReport(
        tau=tau,
        epsilon=epsilon,
        alpha=alpha,
        L=L,
        lambda1=1.0,
        lambda_tau=1.0 / L ** 2,
        c_tau=1.0,
        p_tilde=0.0,
        norm_phi1_sq=HALF_PI,
        norm_ell_sq=alpha ** 2 * HALF_PI,
        kink_x=kink_x(tau, epsilon),
        norm_u_sq=norm_u_sq(tau, epsilon),
        ratio_max=ratio_max,
    )
    logger.debug(f"Oracle tau={tau}, eps={epsilon}: L={L:.9g}, |u|^2={report.norm_u_sq:.12g}")
    return report


@dataclass(frozen=True)
class KirchhoffOracle:
    """Closed-form construction values for M(t) = a + b t on (-pi/2, pi/2)."""

    theta: float
    A: float
    root: float
    target_norm_u_sq: float


def kirchhoff_constants(a: float, b: float, t1: float, t2: float, tau: float,
                        alpha: float = 1.0) -> KirchhoffOracle:
    """
    Theta (interval midpoint), A, and the unique positive s with
    M(s^2 pi/2) = Theta for the affine coefficient.
    """
    lambda_tau = 1.0 / stretch(tau) ** 2
    lo, hi = a + b * t1, lambda_tau * (a + b * t2)
    theta = 0.5 * (lo + hi)
    A = math.sqrt(t1) / (alpha * math.sqrt(HALF_PI))
    root = math.sqrt((theta - a) / (b * HALF_PI)) if b > 0 and theta > a else float("nan")
    return KirchhoffOracle(theta=theta, A=A, root=root, target_norm_u_sq=t2 / A ** 2)
