# config/scenario.py
"""Scenario files: one JSON document per run."""

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional

from config.settings import M_GRID_POINTS, M_SCAN_T_MAX, SCENARIOS_DIR
from core.exceptions import ConfigurationError, KirchhoffError
from core.geometry import DomainSpec, make_domain
from core.logger import setup_logger
from core.mcatalog import MFunctionSpec
from pipeline.construct import Mode

logger = setup_logger(__name__)

KNOWN_KEYS = {"name", "domain", "M", "t1", "t2", "mode", "h", "tau0", "output_path", "t_max", "n_grid"}


@dataclass(frozen=True)
class ScenarioConfig:
    """
    A validated scenario.

    `domain` may be omitted for CLASSIFY. `t1`/`t2` are given together or not
    at all; when absent they are located on the coefficient's scan grid.
    """

    M: MFunctionSpec
    mode: Mode
    domain: Optional[DomainSpec] = None
    t1: Optional[float] = None
    t2: Optional[float] = None
    h: Optional[float] = None
    tau0: Optional[float] = None
    output_path: Optional[str] = None
    t_max: float = M_SCAN_T_MAX
    n_grid: int = M_GRID_POINTS
    name: str = "scenario"

    def __post_init__(self):
        if (self.t1 is None) != (self.t2 is None):
            raise ConfigurationError("t1 and t2 must be given together")
        if self.t1 is not None and not 0 < self.t1 < self.t2:
            raise ConfigurationError(f"Need 0 < t1 < t2, got t1={self.t1}, t2={self.t2}")
        if self.h is not None and not self.h > 0:
            raise ConfigurationError(f"h must be positive, got {self.h}")
        if self.tau0 is not None and not self.tau0 > 0:
            raise ConfigurationError(f"tau0 must be positive, got {self.tau0}")
        if not self.t_max > 0 or self.n_grid < 3:
            raise ConfigurationError(f"Invalid scan grid t_max={self.t_max}, n_grid={self.n_grid}")
        if self.domain is None and self.mode != Mode.CLASSIFY:
            raise ConfigurationError(f"Mode {self.mode.value} needs a domain")

    def with_overrides(self, **changes: Any) -> "ScenarioConfig":
        """Copy with the non-None keyword arguments applied."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"name": self.name, "mode": self.mode.value}
        if self.domain is not None:
            data["domain"] = self.domain.to_dict()
        data["M"] = self.M.to_dict()
        for key in ("t1", "t2", "h", "tau0", "output_path"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        data["t_max"] = self.t_max
        data["n_grid"] = self.n_grid
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Optional[Path] = None) -> "ScenarioConfig":
        """
        Build a scenario from a parsed JSON document.

        Raises:
            ConfigurationError: If a field is missing or invalid
        """
        if not isinstance(data, dict):
            raise ConfigurationError("Scenario must be a JSON object")
        unknown = set(data) - KNOWN_KEYS
        if unknown:
            raise ConfigurationError(f"Unknown scenario keys: {sorted(unknown)}")
        try:
            mode = Mode(str(data.get("mode", "SSM")).upper())
            domain = None
            if "domain" in data:
                domain = make_domain(DomainSpec.from_dict(data["domain"]))
            if "M" not in data:
                raise ConfigurationError("Scenario needs a coefficient 'M'")
            M = MFunctionSpec.from_dict(data["M"], base_dir=base_dir)

            def optional_float(key: str) -> Optional[float]:
                return None if data.get(key) is None else float(data[key])

            return cls(
                M=M,
                mode=mode,
                domain=domain,
                t1=optional_float("t1"),
                t2=optional_float("t2"),
                h=optional_float("h"),
                tau0=optional_float("tau0"),
                output_path=data.get("output_path"),
                t_max=float(data.get("t_max", M_SCAN_T_MAX)),
                n_grid=int(data.get("n_grid", M_GRID_POINTS)),
                name=str(data.get("name", "scenario")),
            )
        except ConfigurationError:
            raise
        except (KirchhoffError, ValueError, TypeError) as e:
            raise ConfigurationError(f"Invalid scenario: {e}") from e

    @classmethod
    def load(cls, path: Path) -> "ScenarioConfig":
        """
        Read a scenario file; bare names are looked up in the bundled scenarios.

        Raises:
            ConfigurationError: If the file is missing or not valid JSON
        """
        path = Path(path)
        if not path.exists() and (SCENARIOS_DIR / path).exists():
            path = SCENARIOS_DIR / path
        if not path.exists() and (SCENARIOS_DIR / f"{path.name}.json").exists():
            path = SCENARIOS_DIR / f"{path.name}.json"
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigurationError(f"Scenario file not found: {path}") from e
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Failed to read scenario {path}: {e}", exc_info=True)
            raise ConfigurationError(f"Cannot parse scenario {path}: {e}") from e
        config = cls.from_dict(data, base_dir=path.parent)
        logger.debug(f"Loaded scenario {config.name} ({config.mode.value}) from {path}")
        return config
