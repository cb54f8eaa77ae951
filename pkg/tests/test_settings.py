"""Tests for the settings module."""

import re
from pathlib import Path

import config.settings as settings

ROOT = Path(__file__).resolve().parents[1]
SOURCES = [p for d in ("core", "pipeline", "config", "utils") for p in (ROOT / d).rglob("*.py")]
SOURCES += [ROOT / "cli.py", ROOT / "main.py"]


class TestSettings:
    """Tests for the configured constants."""

    def test_every_constant_is_used(self):
        """Each constant is read somewhere besides its own definition."""
        own = (ROOT / "config" / "settings.py").read_text(encoding="utf-8")
        others = "\n".join(p.read_text(encoding="utf-8") for p in SOURCES if p.name != "settings.py"
                           or p.parent.name != "config")
        names = [n for n in vars(settings) if n.isupper()]
        unused = [
            n for n in names
            if not re.search(rf"\b{n}\b", others) and len(re.findall(rf"\b{n}\b", own)) < 2
        ]
        assert unused == []

    def test_residual_tolerance_below_supersolution_tolerance(self):
        """The eigen residual stop sits far below the supersolution check."""
        assert settings.EIGEN_RESIDUAL_TOL < 1e-3 * settings.SUPERSOLUTION_TOL
