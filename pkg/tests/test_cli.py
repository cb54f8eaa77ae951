"""Tests for the command line, scenarios and the pipeline orchestrator."""

import json
from pathlib import Path
from unittest.mock import Mock

import numpy as np
import pytest

from cli import main
from config.scenario import ScenarioConfig
from core.exceptions import ConfigurationError
from core.geometry import DomainSpec
from core.mcatalog import MFunctionSpec
from core.storage import ReportWriter
from pipeline.construct import Mode
from pipeline.orchestrator import (
    EXIT_CONFIG_ERROR,
    EXIT_NOT_CERTIFIED,
    EXIT_OK,
    EXIT_PIPELINE_ERROR,
    CertificationPipeline,
)
from utils.helpers import format_summary, parse_key_value_args


class TestScenarioConfig:
    """Tests for scenario parsing."""

    def test_load_bundled_by_name(self):
        """Bundled scenarios resolve by bare name."""
        config = ScenarioConfig.load(Path("kirchhoff_1d_ssm"))
        assert config.mode == Mode.SSM
        assert config.M == MFunctionSpec.affine(1.0, 1.0)
        assert (config.t1, config.t2, config.tau0) == (1.0, 4.0, 0.5)

    def test_round_trip(self):
        """to_dict/from_dict reproduce the scenario."""
        config = ScenarioConfig.load(Path("kirchhoff_1d_weak"))
        assert ScenarioConfig.from_dict(json.loads(config.dumps())) == config

    @pytest.mark.parametrize(
        "data",
        [
            {"M": {"kind": "affine", "a": 1, "b": 1}, "mode": "SSM"},
            {"M": {"kind": "affine", "a": 1, "b": 1}, "mode": "CLASSIFY", "colour": "red"},
            {"M": {"kind": "affine", "a": 1, "b": 1}, "mode": "CLASSIFY", "t1": 1.0},
            {"M": {"kind": "affine", "a": 1, "b": 1}, "mode": "CLASSIFY", "t1": 2.0, "t2": 1.0},
            {"M": {"kind": "affine", "a": 0, "b": 1}, "mode": "CLASSIFY"},
            {"M": {"kind": "affine", "a": 1, "b": 1}, "mode": "EXPLAIN"},
            {"mode": "CLASSIFY"},
            {"M": {"kind": "affine", "a": 1, "b": 1}, "mode": "SSM",
             "domain": {"kind": "interval", "a": 1, "b": 0}},
        ],
    )
    def test_invalid(self, data):
        """Invalid scenarios raise ConfigurationError."""
        with pytest.raises(ConfigurationError):
            ScenarioConfig.from_dict(data)

    def test_missing_file(self, tmp_path):
        """A missing file is a configuration error."""
        with pytest.raises(ConfigurationError):
            ScenarioConfig.load(tmp_path / "absent.json")

    def test_overrides_skip_none(self):
        """with_overrides ignores None values."""
        config = ScenarioConfig.load(Path("kirchhoff_1d_ssm"))
        assert config.with_overrides(h=None) == config
        assert config.with_overrides(h=0.01).h == 0.01


class TestHelpers:
    """Tests for the CLI helpers."""

    def test_parse_key_value_args(self):
        """eps is an alias of epsilon."""
        assert parse_key_value_args(["tau=0.5", "eps=0.1"]) == {"tau": 0.5, "epsilon": 0.1}

    @pytest.mark.parametrize("items", [["tau"], ["beta=1"], ["tau=abc"]])
    def test_parse_errors(self, items):
        """Malformed pairs raise ConfigurationError."""
        with pytest.raises(ConfigurationError):
            parse_key_value_args(items)

    def test_format_summary(self):
        """Summary lists mode, verdict and written files."""
        lines = format_summary({"mode": "CLASSIFY", "verdict": "CP_HOLDS", "result": None,
                                "report_paths": {"report": Path("r.json")}})
        assert lines == ["Mode: CLASSIFY", "Verdict: CP_HOLDS", "Wrote report: r.json"]


class TestCertificationPipeline:
    """Tests for the orchestrator."""

    def test_classify_with_mock_writer(self):
        """Classification runs without a domain and hands the result to the writer."""
        writer = Mock()
        writer.emit_report.return_value = {"report": Path("x.json")}
        config = ScenarioConfig(M=MFunctionSpec.rational_decay(1, 1), mode=Mode.CLASSIFY)
        results = CertificationPipeline(writer=writer).run(config)

        assert results["success"] is True
        assert results["exit_code"] == EXIT_OK
        assert results["verdict"] == "CP_FAILS_BY_PRODUCT"
        writer.emit_report.assert_called_once()

    def test_cp_holds_never_certifies(self, tmp_path):
        """Coefficients satisfying both conditions never yield a counterexample."""
        rng = np.random.default_rng(2024)
        pipeline = CertificationPipeline(ReportWriter(tmp_path))
        domain = DomainSpec.interval(-0.5 * np.pi, 0.5 * np.pi)
        for i in range(20):
            M = MFunctionSpec.rational_decay(rng.uniform(0.1, 5.0), rng.uniform(0.0, 0.49))
            mode = [Mode.SSM, Mode.STRONG_CP, Mode.WEAK_CP][i % 3]
            results = pipeline.run(ScenarioConfig(M=M, mode=mode, domain=domain, name=f"holds-{i}"))
            assert results["exit_code"] == EXIT_PIPELINE_ERROR
            assert results["error_type"] == "EmptyInterval"
            assert results["verdict"] is None

    def test_necessity(self, tmp_path):
        """The bundled reversed-pair scenario is demonstrated."""
        config = ScenarioConfig.load(Path("necessity_rational"))
        results = CertificationPipeline(ReportWriter(tmp_path)).run(config)
        assert results["exit_code"] == EXIT_OK
        assert results["verdict"] == "CP_VIOLATED"

    def test_degenerate_necessity(self, tmp_path):
        """A flat product is reported but not demonstrated."""
        config = ScenarioConfig(M=MFunctionSpec.power(0, 1, -0.5), mode=Mode.NECESSITY,
                                domain=DomainSpec.interval(-0.5 * np.pi, 0.5 * np.pi), t1=1.0, t2=2.0)
        results = CertificationPipeline(ReportWriter(tmp_path)).run(config)
        assert results["exit_code"] == EXIT_NOT_CERTIFIED
        assert results["verdict"] == "NOT_DEMONSTRATED"


class TestMain:
    """Tests for the command line entry point."""

    def test_oracle(self, capsys):
        """--oracle prints the closed-form values."""
        assert main(["--oracle", "tau=0.5", "eps=0.5"]) == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["L"] == pytest.approx(1.3183099, abs=1e-7)
        assert 0 < data["kink_x"] < 0.5 * np.pi

    @pytest.mark.parametrize("items", [["eps=0.5"], ["tau=0.5", "eps=2"], ["tau=x"]])
    def test_oracle_errors(self, items):
        """Missing tau or out-of-range values exit with 2."""
        assert main(["--oracle", *items]) == EXIT_CONFIG_ERROR

    def test_no_command(self):
        """Without a subcommand the help is shown."""
        assert main([]) == EXIT_CONFIG_ERROR

    def test_dump_config(self, capsys):
        """--dump-config prints the normalized scenario."""
        assert main(["run", "kirchhoff_1d_strong", "--dump-config", "--h", "0.01"]) == EXIT_OK
        out = capsys.readouterr().out
        data = json.loads(out[out.index("{"):])
        config = ScenarioConfig.from_dict(data)
        assert config == ScenarioConfig.load(Path("kirchhoff_1d_strong")).with_overrides(h=0.01)

    def test_classify(self, tmp_path):
        """classify works on any scenario and exits 0."""
        out = tmp_path / "classify.json"
        assert main(["classify", "classify_affine", "--out", str(out)]) == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["verdict"] == "CP_FAILS_BY_INCREASE"

    def test_run_ssm(self, tmp_path):
        """The bundled 1D scenario certifies and writes report and plot data."""
        out = tmp_path / "ssm.json"
        assert main(["run", "kirchhoff_1d_ssm", "--out", str(out)]) == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["verdict"] == "CERTIFIED_FAILURE"
        assert out.with_suffix(".csv").exists()

    def test_run_square_ssm(self, tmp_path):
        """The bundled unit-square scenario certifies at its mesh size."""
        out = tmp_path / "square.json"
        assert main(["run", "kirchhoff_square_ssm", "--out", str(out)]) == EXIT_OK
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["verdict"] == "CERTIFIED_FAILURE"
        assert data["mesh"]["h"] == pytest.approx(1 / 128)
        assert out.with_suffix(".csv").read_text(encoding="utf-8").startswith("x,y,lower")

    def test_constant_coefficient(self, tmp_path):
        """Constant M leaves no Theta interval: exit 3 with an error report."""
        out = tmp_path / "constant.json"
        assert main(["run", "constant_ssm", "--out", str(out)]) == EXIT_PIPELINE_ERROR
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["verdict"] == "ERROR"
        assert data["error_type"] == "EmptyInterval"

    def test_bad_config(self, tmp_path):
        """Unknown keys are configuration errors."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"M": {"kind": "affine", "a": 1, "b": 1}, "mode": "CLASSIFY", "x": 1}),
                        encoding="utf-8")
        assert main(["run", str(path)]) == EXIT_CONFIG_ERROR

    def test_unparseable_config(self, tmp_path):
        """Invalid JSON is a configuration error."""
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        assert main(["run", str(path)]) == EXIT_CONFIG_ERROR
