# /core/storage.py
import json
import re
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from config.settings import REPORTS_DIR
from core.exceptions import StorageError
from core.logger import setup_logger

logger = setup_logger(__name__)


class ReportWriter:
    def __init__(self, reports_dir: Path = REPORTS_DIR):
        """
        Initializes the ReportWriter.
        Args:
            reports_dir: Directory for reports written without an explicit path.
        """
        self.reports_dir = Path(reports_dir)
        try:
            self.reports_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Failed to create report directory {self.reports_dir}: {e}") from e

    def report_path(self, name: Optional[str], path: Optional[Path] = None) -> Path:
        """Explicit path if given, else <reports_dir>/<sanitized name>.json."""
        if path is not None:
            path = Path(path)
            return path if path.suffix else path.with_suffix(".json")
        return self.reports_dir / f"{self._sanitize_filename(name)}.json"

    def emit_report(self, result: Any, path: Optional[Path] = None, name: Optional[str] = None,
                    cex: Optional[Any] = None) -> Dict[str, Path]:
        """
        Writes a result document and, for counterexamples, the nodal plot data.

        The document is JSON with fixed key order and shortest round-trip
        floats, so identical inputs give identical bytes. The plot data is a
        CSV with columns x[, y], lower, upper, phi1, phi_tau_restricted.

        Args:
            result: Certificate, MClassification, ReversedPairReport or a dict
            path: Target document path (default: derived from name)
            name: Report name used for the default path
            cex: Counterexample whose fields go into the plot data

        Returns:
            Dict with "report" and, when cex is given, "plot" paths.

        Raises:
            StorageError: If a file cannot be written.
        """
        document = result.to_dict() if hasattr(result, "to_dict") else dict(result)
        report_path = self.report_path(name, path)
        paths = {"report": report_path}

        try:
            report_path.parent.mkdir(parents=True, exist_ok=True)
            report_path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
            if cex is not None:
                plot_path = report_path.with_suffix(".csv")
                self._write_plot_data(cex, plot_path)
                paths["plot"] = plot_path
        except OSError as e:
            logger.error(f"Failed to write report {report_path}: {e}", exc_info=True)
            raise StorageError(f"Failed to write report {report_path}: {e}") from e

        logger.info(f"Report written to {report_path}")
        return paths

    def _write_plot_data(self, cex: Any, plot_path: Path) -> None:
        mesh = cex.mesh
        coords = ["x", "y"][: mesh.dim]
        columns = [mesh.nodes[:, i] for i in range(mesh.dim)] + [
            cex.lower.values,
            cex.upper.values,
            cex.eigen_inner.phi.values,
            cex.phi_tau_restricted.values,
        ]
        header = ",".join(coords + ["lower", "upper", "phi1", "phi_tau_restricted"])
        np.savetxt(plot_path, np.column_stack(columns), fmt="%.17g", delimiter=",",
                   header=header, comments="")

    def _sanitize_filename(self, name: Optional[str]) -> str:
        """
        Converts a string to a safe format for use as a filename.
        Replaces spaces with hyphens, removes unsafe characters, and converts to lowercase.

        Args:
            name: The string to sanitize.

        Returns:
            A sanitized string suitable for a filename.
        """
        if not name or not name.strip():
            return "report"
        safe_name = re.sub(r"[^\w\s-]", "", name)
        safe_name = re.sub(r"\s+", "-", safe_name)
        safe_name = safe_name.lower().strip("-_")
        return safe_name if safe_name else "report"
