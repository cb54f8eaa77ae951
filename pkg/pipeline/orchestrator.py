# pipeline/orchestrator.py
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from config.scenario import ScenarioConfig
from core.assembly import assemble
from core.eigensolve import principal_eigenpair
from core.exceptions import ConfigurationError, EmptyInterval, KirchhoffError, PreconditionViolated
from core.geometry import mesh
from core.logger import setup_logger
from core.mcatalog import IncreasingPair, classify, find_increasing_pair, find_product_reversal
from core.storage import ReportWriter
from pipeline.construct import Mode, build_counterexample
from pipeline.verify import certify, demonstrate_product_necessity

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 1
EXIT_CONFIG_ERROR = 2
EXIT_PIPELINE_ERROR = 3


class CertificationPipeline:
    """
    Runs one scenario end to end: construction and certification, coefficient
    classification, or the reversed-pair demonstration, then writes the report.
    """

    def __init__(self, writer: Optional[ReportWriter] = None):
        self.writer = writer or ReportWriter()

    def _increasing_pair(self, config: ScenarioConfig) -> IncreasingPair:
        if config.t1 is not None:
            return IncreasingPair.at(config.M, config.t1, config.t2)
        pair = find_increasing_pair(config.M, config.t_max, config.n_grid)
        if pair is None:
            raise EmptyInterval(
                f"M is nonincreasing on (0, {config.t_max}]: no increasing pair, no Theta interval"
            )
        logger.info(f"Located increasing pair t1={pair.t1:.9g}, t2={pair.t2:.9g}")
        return pair

    def _reversed_pair(self, config: ScenarioConfig) -> Tuple[float, float]:
        if config.t1 is not None:
            return config.t1, config.t2
        found = find_product_reversal(config.M, config.t_max, config.n_grid)
        if found is None:
            raise PreconditionViolated("M(s^2) s never decreases on the scan grid: no reversed pair")
        return found

    def _run_mode(self, config: ScenarioConfig, output: Optional[Path]) -> Tuple[int, Any, Dict[str, Path]]:
        if config.mode == Mode.CLASSIFY:
            classification = classify(config.M, config.t_max, config.n_grid)
            paths = self.writer.emit_report(classification, output, config.name)
            return EXIT_OK, classification, paths

        if config.mode == Mode.NECESSITY:
            t1, t2 = self._reversed_pair(config)
            ops = assemble(mesh(config.domain, config.h))
            report = demonstrate_product_necessity(config.M, t1, t2, principal_eigenpair(ops), ops)
            paths = self.writer.emit_report(report, output, config.name)
            return (EXIT_OK if report.demonstrated else EXIT_NOT_CERTIFIED), report, paths

        pair = self._increasing_pair(config)
        cex, _ = build_counterexample(config.domain, config.M, pair, config.mode, config.h, config.tau0)
        certificate = certify(cex, config.M)
        paths = self.writer.emit_report(certificate, output, config.name, cex=cex)
        return (EXIT_OK if certificate.certified else EXIT_NOT_CERTIFIED), certificate, paths

    def run(self, config: ScenarioConfig, output_path: Optional[Path] = None) -> Dict[str, Any]:
        """
        Run a scenario.

        Args:
            config: Validated scenario
            output_path: Report path (default: config.output_path, then the reports directory)

        Returns:
            Dict with success, exit_code, mode, verdict, result, report_paths,
            error and error_type
        """
        results: Dict[str, Any] = {
            "success": False,
            "exit_code": EXIT_PIPELINE_ERROR,
            "mode": config.mode.value,
            "verdict": None,
            "result": None,
            "report_paths": {},
            "error": None,
            "error_type": None,
        }
        output = output_path or (Path(config.output_path) if config.output_path else None)
        logger.info(f"Running scenario {config.name} in mode {config.mode.value}")

        try:
            exit_code, result, paths = self._run_mode(config, output)
            document = result.to_dict()
            results.update(
                success=exit_code == EXIT_OK,
                exit_code=exit_code,
                verdict=document.get("verdict"),
                result=result,
                report_paths=paths,
            )
        except ConfigurationError as e:
            logger.error(f"Configuration error: {e}")
            results.update(exit_code=EXIT_CONFIG_ERROR, error=str(e), error_type=type(e).__name__)
        except KirchhoffError as e:
            logger.error(f"{type(e).__name__}: {e}", exc_info=True)
            results.update(exit_code=EXIT_PIPELINE_ERROR, error=str(e), error_type=type(e).__name__)
            results["report_paths"] = self._emit_error(config, output, e)

        return results

    def _emit_error(self, config: ScenarioConfig, output: Optional[Path], error: Exception) -> Dict[str, Path]:
        document = {
            "mode": config.mode.value,
            "verdict": "ERROR",
            "error_type": type(error).__name__,
            "error": str(error),
            "scenario": config.to_dict(),
        }
        try:
            return self.writer.emit_report(document, output, config.name)
        except KirchhoffError as e:
            logger.warning(f"Could not write error report: {e}")
            return {}
