import os
from typing import Any, Dict, List, Sequence

from core.exceptions import ConfigurationError

ORACLE_KEYS = {"tau": "tau", "eps": "epsilon", "epsilon": "epsilon", "alpha": "alpha"}


def parse_key_value_args(items: Sequence[str]) -> Dict[str, float]:
    """
    Parse ["tau=0.5", "eps=0.1"] into {"tau": 0.5, "epsilon": 0.1}.

    Raises:
        ConfigurationError: On a malformed pair or an unknown key
    """
    values: Dict[str, float] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        key = key.strip().lower()
        if not sep or key not in ORACLE_KEYS:
            raise ConfigurationError(f"Expected one of tau=.., eps=.., alpha=.., got {item!r}")
        try:
            values[ORACLE_KEYS[key]] = float(raw)
        except ValueError as e:
            raise ConfigurationError(f"Not a number in {item!r}") from e
    return values


def format_summary(results: Dict[str, Any]) -> List[str]:
    """Console lines summarizing a pipeline run."""
    lines = [f"Mode: {results['mode']}"]
    if results.get("error"):
        lines.append(f"Error: {results['error_type']}: {results['error']}")
    if results.get("verdict"):
        lines.append(f"Verdict: {results['verdict']}")
    result = results.get("result")
    margins = getattr(result, "margins", None)
    if isinstance(margins, dict):
        for name, value in margins.items():
            lines.append(f"  {name}: {value:.6e}")
    for kind, path in results.get("report_paths", {}).items():
        lines.append(f"Wrote {kind}: {path}")
    return lines


def validate_environment() -> List[str]:
    """
    Validate the environment setup.

    Returns:
        List of issues found (empty if everything is OK)
    """
    issues = []
    from config.settings import DATA_DIR, EIGEN_RESIDUAL_TOL, REPORTS_DIR

    if not DATA_DIR.exists():
        issues.append(f"Data directory not found: {DATA_DIR}")
    elif not os.access(REPORTS_DIR, os.W_OK):
        issues.append(f"Reports directory is not writable: {REPORTS_DIR}")

    if EIGEN_RESIDUAL_TOL > 1e-9:
        issues.append(
            f"KIRCHHOFF_EIGEN_RESIDUAL_TOL={EIGEN_RESIDUAL_TOL} is looser than 1e-9; "
            "certificates may not be trustworthy"
        )
    return issues
