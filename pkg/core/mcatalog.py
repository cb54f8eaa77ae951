"""
Nonlocal coefficients M and their classification.

The comparison principle for -M(||u||^2) Laplace u holds exactly when M is
nonincreasing and t -> M(t^2) t is increasing. This module evaluates the
supported coefficient families and checks both conditions on a geometric grid.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from config.settings import M_GRID_POINTS, M_GRID_SPAN, M_SCAN_T_MAX, MONOTONE_TOL
from core.exceptions import CoefficientError, OutOfRange
from core.logger import setup_logger

logger = setup_logger(__name__)

M_KINDS = ("affine", "power", "rational_decay", "tabulated")

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class MFunctionSpec:
    """
    A nonlocal coefficient.

    affine:          M(t) = a + b t
    power:           M(t) = a + b t**p
    rational_decay:  M(t) = a / (1 + t)**q
    tabulated:       linear interpolation of (table_t, table_m)

    Every kind is multiplied by `scale`.
    """

    kind: str
    a: float = 1.0
    b: float = 0.0
    p: float = 1.0
    q: float = 1.0
    table_t: Tuple[float, ...] = ()
    table_m: Tuple[float, ...] = ()
    scale: float = 1.0
    source: Optional[str] = field(default=None, compare=False)

    @classmethod
    def affine(cls, a: float, b: float) -> "MFunctionSpec":
        return cls("affine", a=float(a), b=float(b)).validated()

    @classmethod
    def power(cls, a: float, b: float, p: float) -> "MFunctionSpec":
        return cls("power", a=float(a), b=float(b), p=float(p)).validated()

    @classmethod
    def rational_decay(cls, a: float, q: float = 1.0) -> "MFunctionSpec":
        return cls("rational_decay", a=float(a), q=float(q)).validated()

    @classmethod
    def tabulated(cls, t, values, source: Optional[str] = None) -> "MFunctionSpec":
        return cls(
            "tabulated",
            table_t=tuple(float(x) for x in t),
            table_m=tuple(float(x) for x in values),
            source=source,
        ).validated()

    def scaled(self, factor: float) -> "MFunctionSpec":
        """The coefficient factor * M."""
        if not factor > 0:
            raise CoefficientError(f"Scaling factor must be positive, got {factor}")
        return replace(self, scale=self.scale * factor)

    @property
    def t_range(self) -> Tuple[float, float]:
        if self.kind == "tabulated":
            return self.table_t[0], self.table_t[-1]
        return 0.0, float("inf")

    def validated(self) -> "MFunctionSpec":
        """
        Check the parameters of the coefficient.

        Raises:
            CoefficientError: If the parameters cannot give M >= 0
        """
        if self.kind not in M_KINDS:
            raise CoefficientError(f"Unknown coefficient kind {self.kind!r} (expected one of {M_KINDS})")
        if not self.scale > 0:
            raise CoefficientError(f"Scale must be positive, got {self.scale}")
        if self.kind == "affine":
            if not (self.a > 0 and self.b >= 0):
                raise CoefficientError(f"affine needs a > 0 and b >= 0, got a={self.a}, b={self.b}")
        elif self.kind == "power":
            if self.a < 0 or self.b < 0 or self.a + self.b <= 0:
                raise CoefficientError(f"power needs a, b >= 0 not both zero, got a={self.a}, b={self.b}")
        elif self.kind == "rational_decay":
            if not self.a > 0 or self.q < 0:
                raise CoefficientError(f"rational_decay needs a > 0 and q >= 0, got a={self.a}, q={self.q}")
        else:
            t = np.asarray(self.table_t)
            m = np.asarray(self.table_m)
            if len(t) < 2 or len(t) != len(m):
                raise CoefficientError("tabulated M needs at least two (t, M) rows of equal length")
            if np.any(np.diff(t) <= 0) or t[0] < 0:
                raise CoefficientError("tabulated t grid must be nonnegative and strictly increasing")
            if np.any(m < 0) or not np.all(np.isfinite(m)):
                raise CoefficientError("tabulated M values must be finite and nonnegative")
        return self

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "affine":
            data: Dict[str, Any] = {"kind": "affine", "a": self.a, "b": self.b}
        elif self.kind == "power":
            data = {"kind": "power", "a": self.a, "b": self.b, "p": self.p}
        elif self.kind == "rational_decay":
            data = {"kind": "rational_decay", "a": self.a, "q": self.q}
        else:
            data = {"kind": "tabulated", "t": list(self.table_t), "values": list(self.table_m)}
            if self.source:
                data["csv"] = self.source
        if self.scale != 1.0:
            data["scale"] = self.scale
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None) -> "MFunctionSpec":
        kind = data.get("kind")
        try:
            if kind == "affine":
                spec = cls.affine(data["a"], data["b"])
            elif kind == "power":
                spec = cls.power(data["a"], data["b"], data["p"])
            elif kind == "rational_decay":
                spec = cls.rational_decay(data.get("a", 1.0), data.get("q", 1.0))
            elif kind == "tabulated" and "t" in data:
                spec = cls.tabulated(data["t"], data["values"], source=data.get("csv"))
            elif kind == "tabulated":
                path = Path(data["csv"])
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                spec = load_tabulated_csv(path)
            else:
                raise CoefficientError(f"Unknown coefficient kind {kind!r} (expected one of {M_KINDS})")
        except (KeyError, TypeError, ValueError) as e:
            raise CoefficientError(f"Malformed {kind} coefficient: {e}") from e
        if "scale" in data:
            spec = spec.scaled(float(data["scale"]))
        return spec


def load_tabulated_csv(path: Path) -> MFunctionSpec:
    """
    Read a two-column (t, M(t)) CSV file; a non-numeric header row is skipped.

    Raises:
        CoefficientError: If the file cannot be read or parsed
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            first = f.readline()
        skip = 0
        try:
            [float(x) for x in first.split(",")]
        except ValueError:
            skip = 1
        table = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    except (OSError, ValueError) as e:
        logger.error(f"Failed to read coefficient table {path}: {e}", exc_info=True)
        raise CoefficientError(f"Cannot read coefficient table {path}: {e}") from e
    if table.shape[1] != 2:
        raise CoefficientError(f"{path}: expected 2 columns, found {table.shape[1]}")
    logger.debug(f"Loaded {table.shape[0]} coefficient rows from {path}")
    return MFunctionSpec.tabulated(table[:, 0], table[:, 1], source=str(path))


def eval_M(spec: MFunctionSpec, t: ArrayLike) -> ArrayLike:
    """
    Evaluate M at t (scalar or array).

    Raises:
        OutOfRange: For t < 0 or t outside a tabulated range
    """
    arr = np.asarray(t, dtype=float)
    lo, hi = spec.t_range
    if np.any(arr < lo) or np.any(arr > hi) or np.any(np.isnan(arr)):
        raise OutOfRange(f"M of kind {spec.kind} evaluated outside [{lo}, {hi}]")

    if spec.kind == "affine":
        out = spec.a + spec.b * arr
    elif spec.kind == "power":
        if spec.p < 0 and np.any(arr == 0):
            raise OutOfRange(f"power coefficient with p={spec.p} is undefined at t=0")
        out = spec.a + spec.b * np.power(arr, spec.p)
    elif spec.kind == "rational_decay":
        out = spec.a / np.power(1.0 + arr, spec.q)
    else:
        out = np.interp(arr, spec.table_t, spec.table_m)
    out = spec.scale * out
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class IncreasingPair:
    """0 < t1 < t2 with M1 = M(t1) < M2 = M(t2)."""

    t1: float
    t2: float
    M1: float
    M2: float

    @classmethod
    def at(cls, spec: MFunctionSpec, t1: float, t2: float) -> "IncreasingPair":
        return cls(float(t1), float(t2), eval_M(spec, t1), eval_M(spec, t2))

    def to_dict(self) -> Dict[str, float]:
        return {"t1": self.t1, "t2": self.t2, "M1": self.M1, "M2": self.M2}


class Verdict(str, Enum):
    CP_HOLDS = "CP_HOLDS"
    CP_FAILS_BY_INCREASE = "CP_FAILS_BY_INCREASE"
    CP_FAILS_BY_PRODUCT = "CP_FAILS_BY_PRODUCT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True, eq=False)
class MClassification:
    nonincreasing: bool
    product_increasing: bool
    verdict: Verdict
    grid: np.ndarray
    increasing_pair: Optional[IncreasingPair] = None
    product_reversal: Optional[Tuple[float, float]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "nonincreasing": self.nonincreasing,
            "product_increasing": self.product_increasing,
            "verdict": self.verdict.value,
            "grid": {
                "kind": "geometric",
                "t_min": float(self.grid[0]),
                "t_max": float(self.grid[-1]),
                "n_grid": int(len(self.grid)),
            },
            "increasing_pair": self.increasing_pair.to_dict() if self.increasing_pair else None,
            "product_reversal": list(self.product_reversal) if self.product_reversal else None,
        }


def scan_grid(spec: MFunctionSpec, t_max: float = M_SCAN_T_MAX, n_grid: int = M_GRID_POINTS) -> np.ndarray:
    """Geometric grid on (0, t_max], clipped to a tabulated range."""
    if not t_max > 0:
        raise CoefficientError(f"t_max must be positive, got {t_max}")
    if n_grid < 3:
        raise CoefficientError(f"n_grid must be at least 3, got {n_grid}")
    lo, hi = spec.t_range
    t_max = min(t_max, hi)
    t_min = max(t_max * M_GRID_SPAN, lo)
    if not t_min < t_max:
        raise CoefficientError(f"Empty scan range [{t_min}, {t_max}] for {spec.kind}")
    return np.geomspace(t_min, t_max, n_grid)


def find_increasing_pair(spec: MFunctionSpec, t_max: float = M_SCAN_T_MAX,
                         n_grid: int = M_GRID_POINTS) -> Optional[IncreasingPair]:
    """
    Increasing pair of grid points with the largest ratio M(t2)/M(t1).

    Returns:
        The pair, or None when M is nonincreasing on the grid
    """
    grid = scan_grid(spec, t_max, n_grid)
    m = np.asarray(eval_M(spec, grid))
    upper = np.triu(np.ones((len(grid), len(grid)), dtype=bool), k=1)
    increasing = upper & (m[None, :] - m[:, None] > MONOTONE_TOL)
    if not np.any(increasing):
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(m[:, None] > 0, m[None, :] / m[:, None], np.inf)
    ratio = np.where(increasing, ratio, -np.inf)
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    pair = IncreasingPair(float(grid[i]), float(grid[j]), float(m[i]), float(m[j]))
    logger.debug(f"Increasing pair for {spec.kind}: {pair}")
    return pair


def _product_values(spec: MFunctionSpec, grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    s = np.sqrt(grid)
    return s, np.asarray(eval_M(spec, grid)) * s


def find_product_reversal(spec: MFunctionSpec, t_max: float = M_SCAN_T_MAX,
                          n_grid: int = M_GRID_POINTS) -> Optional[Tuple[float, float]]:
    """
    Points s1 < s2 with M(s1^2) s1 > M(s2^2) s2, largest drop first.

    Returns:
        (s1, s2), or None when s -> M(s^2) s never strictly drops on the grid
    """
    s, prod = _product_values(spec, scan_grid(spec, t_max, n_grid))
    running_max = np.maximum.accumulate(prod)
    drop = running_max[:-1] - prod[1:]
    j = int(np.argmax(drop)) + 1
    if drop[j - 1] <= MONOTONE_TOL:
        return None
    i = int(np.argmax(prod[:j]))
    return float(s[i]), float(s[j])


def classify(spec: MFunctionSpec, t_max: float = M_SCAN_T_MAX, n_grid: int = M_GRID_POINTS) -> MClassification:
    """
    Check M nonincreasing and s -> M(s^2) s strictly increasing on a grid.

    Differences within MONOTONE_TOL are ties; ties count against strict
    increase. The verdict is UNKNOWN when M is nonincreasing and the product
    is flat on the whole grid.
    """
    grid = scan_grid(spec, t_max, n_grid)
    m = np.asarray(eval_M(spec, grid))
    running_min = np.minimum.accumulate(m)
    nonincreasing = bool(np.all(m[1:] - running_min[:-1] <= MONOTONE_TOL))

    _, prod = _product_values(spec, grid)
    steps = np.diff(prod)
    product_increasing = bool(np.all(steps > MONOTONE_TOL))

    if not nonincreasing:
        verdict = Verdict.CP_FAILS_BY_INCREASE
    elif product_increasing:
        verdict = Verdict.CP_HOLDS
    elif np.all(np.abs(steps) <= MONOTONE_TOL):
        verdict = Verdict.UNKNOWN
    else:
        verdict = Verdict.CP_FAILS_BY_PRODUCT

    result = MClassification(
        nonincreasing=nonincreasing,
        product_increasing=product_increasing,
        verdict=verdict,
        grid=grid,
        increasing_pair=None if nonincreasing else find_increasing_pair(spec, t_max, n_grid),
        product_reversal=find_product_reversal(spec, t_max, n_grid) if verdict == Verdict.CP_FAILS_BY_PRODUCT else None,
    )
    logger.info(f"Classified M ({spec.kind}): {verdict.value}")
    return result
