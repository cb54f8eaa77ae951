"""Tests for certification of constructed counterexamples."""

import math
from dataclasses import replace

import numpy as np
import pytest

from core.assembly import h1_norm_sq
from core.exceptions import PreconditionViolated
from core.geometry import DomainSpec
from core.mcatalog import IncreasingPair, MFunctionSpec
from pipeline.construct import Mode, build_counterexample
from pipeline.verify import (
    CertificateVerdict,
    certify,
    check_comparison,
    check_pair_ordering,
    check_strict_inequalities,
    check_weak_supersolution,
    demonstrate_product_necessity,
    nonlocal_linear_solution_set,
)

HALF_PI = 0.5 * math.pi


class TestCertify:
    """Tests for certify on (-pi/2, pi/2) with M(t) = 1 + t."""

    def test_ssm_certified(self, ssm_cex, kirchhoff):
        """The sub/supersolution method fails: no solution between the pair."""
        cert = certify(ssm_cex, kirchhoff)
        assert cert.verdict == CertificateVerdict.CERTIFIED_FAILURE
        assert cert.certified
        assert cert.failed == ()
        assert cert.forced_s == pytest.approx(0.797885, abs=1e-5)
        assert cert.solution_set.status == "OK"
        assert cert.solution_set.roots == pytest.approx((0.956937,), abs=1e-3)
        assert cert.admissible_roots == ()
        assert cert.margins["forced_value_residual"] > 0.1

    def test_strong_certified(self, strong_cex, kirchhoff):
        """Strong comparison fails with strict margins."""
        cert = certify(strong_cex, kirchhoff)
        assert cert.verdict == CertificateVerdict.CERTIFIED_FAILURE
        assert cert.margins["sub_strict"] > 0
        assert cert.margins["super_strict"] > 0
        assert cert.margins["comparison_strict"] > 0
        assert cert.margins["ordering_min_gap"] >= -1e-9
        assert strong_cex.params.p_index in cert.touch_nodes
        assert cert.solution_set is None

    def test_weak_certified(self, weak_cex, kirchhoff):
        """Weak comparison fails: l > w at p_tilde despite the operator inequality."""
        cert = certify(weak_cex, kirchhoff)
        assert cert.verdict == CertificateVerdict.CERTIFIED_FAILURE
        p = weak_cex.params
        assert cert.margins["reversal_at_p_tilde"] == pytest.approx(p.A * (p.alpha - 1.0), rel=1e-6)
        assert cert.margins["comparison_strict"] > 0

    def test_tampered_theta(self, strong_cex, kirchhoff):
        """Theta below lambda_1 M(t1) breaks the strict subsolution inequality."""
        tampered = replace(strong_cex, params=replace(strong_cex.params, theta=1.9))
        cert = certify(tampered, kirchhoff)
        assert cert.verdict == CertificateVerdict.NOT_CERTIFIED
        assert "sub_strict" in cert.failed
        assert cert.margins["sub_strict"] < 0

    def test_deterministic(self, strong_cex, kirchhoff):
        """Certifying twice gives identical margins."""
        assert certify(strong_cex, kirchhoff).margins == certify(strong_cex, kirchhoff).margins

    def test_to_dict(self, ssm_cex, kirchhoff):
        """Reports carry version, parameters, mesh and the solution set."""
        data = certify(ssm_cex, kirchhoff).to_dict()
        assert data["verdict"] == "CERTIFIED_FAILURE"
        assert data["mode"] == "SSM"
        assert {"tool_version", "parameters", "coefficient", "mesh", "eigen", "margins"} <= set(data)
        assert data["mesh"]["n_nodes"] == 2001
        assert data["solution_set"]["scan"]["n_points"] == 4096


class TestChecks:
    """Tests for the individual checks."""

    def test_glued_is_weak_supersolution(self, ssm_cex):
        """u_eps satisfies -Laplace u >= lambda_tau u in weak form."""
        margin = check_weak_supersolution(ssm_cex.glued.values, ssm_cex.params.lambda_tau, ssm_cex.ops)
        assert margin >= -1e-8

    def test_supersolution_margin_decreases_in_coefficient(self, ssm_cex):
        """A larger zero-order coefficient lowers the margin of a positive function."""
        u, ops = ssm_cex.glued.values, ssm_cex.ops
        margins = [check_weak_supersolution(u, c, ops) for c in (0.0, 0.3, ssm_cex.params.lambda_tau)]
        assert margins[0] >= margins[1] >= margins[2]

    def test_ordering(self, ssm_cex):
        """lower <= upper and they touch at p_tilde."""
        min_gap, touch = check_pair_ordering(ssm_cex)
        assert min_gap >= -1e-12
        assert 1000 in touch

    def test_strict_inequalities(self, ssm_cex, kirchhoff):
        """Both strict margins are positive."""
        sub, sup = check_strict_inequalities(ssm_cex, kirchhoff)
        assert sub > 0 and sup > 0

    def test_comparison_margin(self, weak_cex, kirchhoff):
        """Operator inequality between l and w holds strictly."""
        assert check_comparison(weak_cex, kirchhoff) > 0


class TestSolutionSet:
    """Tests for the nonlocal linear solution set."""

    def test_random_affine(self):
        """For M = a + b t the unique root is sqrt((Theta - a) / (b pi/2))."""
        rng = np.random.default_rng(12345)
        for _ in range(100):
            a, b = rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0)
            theta = a + rng.uniform(0.05, 10.0)
            root = math.sqrt((theta - a) / (b * HALF_PI))
            result = nonlocal_linear_solution_set(MFunctionSpec.affine(a, b), 1.0, HALF_PI, theta, 2 * root + 1)
            assert result.status == "OK"
            assert len(result.roots) == 1
            assert result.roots[0] == pytest.approx(root, rel=1e-9)
            assert result.residuals[0] <= 1e-9 * theta

    def test_no_root(self):
        """Theta at most M(0) lambda_1 leaves no positive root."""
        result = nonlocal_linear_solution_set(MFunctionSpec.affine(2.0, 1.0), 1.0, HALF_PI, 1.5, 5.0)
        assert result.roots == ()
        assert result.status == "OK"

    def test_plateau_is_unknown(self):
        """Constant M lambda_1 equal to Theta vanishes identically."""
        result = nonlocal_linear_solution_set(MFunctionSpec.affine(2.0, 0.0), 1.0, HALF_PI, 2.0, 5.0)
        assert result.status == "UNKNOWN"
        assert result.roots == ()

    def test_two_roots(self):
        """A hump-shaped M crosses Theta twice."""
        M = MFunctionSpec.tabulated([0.0, 1.0, 2.0], [1.0, 3.0, 1.0])
        result = nonlocal_linear_solution_set(M, 1.0, 1.0, 2.0, 1.5)
        assert result.roots == pytest.approx((math.sqrt(0.5), math.sqrt(1.5)), rel=1e-9)

    def test_scan_clipped_to_table(self):
        """s_max shrinks so that s^2 ||phi_1||^2 stays inside the table."""
        M = MFunctionSpec.tabulated([0.0, 4.0], [1.0, 2.0])
        result = nonlocal_linear_solution_set(M, 1.0, 1.0, 1.5, 10.0)
        assert result.s_max == pytest.approx(2.0)
        assert result.roots == pytest.approx((math.sqrt(2.0),), rel=1e-9)

    @pytest.mark.parametrize("table_end", [2.0, 3.0, 7.0, 0.1])
    @pytest.mark.parametrize("norm", [1.0, 0.3, HALF_PI])
    def test_scan_reaches_table_end(self, table_end, norm):
        """The last scan point maps onto the table end even when squaring rounds up."""
        M = MFunctionSpec.tabulated([0.0, table_end], [1.0, 3.0])
        result = nonlocal_linear_solution_set(M, 1.0, norm, 2.0, 100.0)
        assert result.s_max == pytest.approx(math.sqrt(table_end / norm))
        assert result.roots == pytest.approx((math.sqrt(0.5 * table_end / norm),), rel=1e-9)


class TestProductNecessity:
    """Tests for the reversed pair when s -> M(s^2) s decreases."""

    def test_decreasing_product(self, interval_eigen, interval_ops):
        """M(t) = 1/(1+t), t1 = 1, t2 = 2 gives a reversed pair."""
        report = demonstrate_product_necessity(MFunctionSpec.rational_decay(1, 1), 1.0, 2.0,
                                               interval_eigen, interval_ops)
        assert report.product_t1 == pytest.approx(0.5)
        assert report.product_t2 == pytest.approx(0.4)
        assert report.rhs_margin > 0
        assert report.order_margin > 0
        assert report.boundary_max_abs == 0.0
        assert report.demonstrated
        assert report.to_dict()["verdict"] == "CP_VIOLATED"

    def test_degenerate_product(self, interval_eigen, interval_ops):
        """M(t) = t^(-1/2) has M(s^2) s = 1, so nothing strict is shown."""
        report = demonstrate_product_necessity(MFunctionSpec.power(0, 1, -0.5), 1.0, 2.0,
                                               interval_eigen, interval_ops)
        assert report.degenerate
        assert not report.demonstrated
        assert report.to_dict()["verdict"] == "NOT_DEMONSTRATED"

    def test_increasing_product_rejected(self, interval_eigen, interval_ops):
        """M(t) = 1 + t has an increasing product."""
        with pytest.raises(PreconditionViolated):
            demonstrate_product_necessity(MFunctionSpec.affine(1, 1), 1.0, 2.0, interval_eigen, interval_ops)

    def test_unordered_levels_rejected(self, interval_eigen, interval_ops):
        """t1 must be below t2."""
        with pytest.raises(PreconditionViolated):
            demonstrate_product_necessity(MFunctionSpec.rational_decay(1, 1), 2.0, 1.0,
                                          interval_eigen, interval_ops)

    def test_mode_in_report(self, interval_eigen, interval_ops):
        """The necessity report names its mode."""
        report = demonstrate_product_necessity(MFunctionSpec.rational_decay(1, 1), 1.0, 2.0,
                                               interval_eigen, interval_ops)
        assert report.to_dict()["mode"] == Mode.NECESSITY.value


class TestReferenceChecks:
    """Reference values for the individual checks."""

    def test_eigenfunction_is_borderline_supersolution(self, interval_eigen, interval_ops):
        """phi_1 with coefficient lambda_1 has margin close to zero."""
        margin = check_weak_supersolution(interval_eigen.phi, interval_eigen.lam, interval_ops)
        assert margin == pytest.approx(0.0, abs=1e-6)

    def test_doubled_coefficient_fails(self, interval_eigen, interval_ops):
        """phi_1 with coefficient 2 lambda_1 is not a supersolution."""
        assert check_weak_supersolution(interval_eigen.phi, 2 * interval_eigen.lam, interval_ops) < 0

    def test_identical_fields_touch_everywhere(self, ssm_cex):
        """upper = lower gives a zero gap at every node."""
        min_gap, touch = check_pair_ordering(replace(ssm_cex, upper=ssm_cex.lower))
        assert min_gap == 0.0
        assert len(touch) == ssm_cex.mesh.n_nodes

    def test_weak_pair_is_reversed(self, weak_cex):
        """The WEAK_CP pair has its most negative gap at p_tilde."""
        min_gap, _ = check_pair_ordering(weak_cex)
        p = weak_cex.params.p_index
        assert min_gap < 0
        assert min_gap == pytest.approx(weak_cex.upper.values[p] - weak_cex.lower.values[p], rel=1e-9)

    def test_theta_at_lower_endpoint(self, ssm_cex, kirchhoff):
        """Theta = M(||lower||^2) lambda_1 leaves no strict subsolution margin."""
        m_lo = 1.0 + h1_norm_sq(ssm_cex.lower, ssm_cex.ops)
        cex = replace(ssm_cex, params=replace(ssm_cex.params, theta=m_lo * ssm_cex.params.lambda1))
        sub, _ = check_strict_inequalities(cex, kirchhoff)
        assert sub == pytest.approx(0.0, abs=1e-7)

    def test_ssm_root_away_from_forced_level(self, ssm_cex, kirchhoff):
        """The only solution level differs from the one the pair forces."""
        cert = certify(ssm_cex, kirchhoff)
        root = cert.solution_set.roots[0]
        assert abs(cert.forced_s - root) == pytest.approx(0.159, abs=0.005)

    def test_constant_product_increases(self, interval_eigen, interval_ops):
        """For constant M the product s increases, so no reversed pair exists."""
        with pytest.raises(PreconditionViolated):
            demonstrate_product_necessity(MFunctionSpec.affine(1, 0), 1.0, 2.0, interval_eigen, interval_ops)


@pytest.fixture(scope="module")
def kirchhoff_2d():
    return MFunctionSpec.affine(1.0, 1.0)


class TestPlanarCertificates:
    """End-to-end constructions on the unit square and the unit disk."""

    def test_square_weak(self, kirchhoff_2d):
        """Weak comparison fails on the unit square at h = 1/128."""
        pair = IncreasingPair.at(kirchhoff_2d, 1.0, 2.5)
        cex, params = build_counterexample(DomainSpec.rectangle(0, 1, 0, 1), kirchhoff_2d, pair,
                                           Mode.WEAK_CP, h=1 / 128)
        cert = certify(cex, kirchhoff_2d)
        assert cert.verdict == CertificateVerdict.CERTIFIED_FAILURE
        assert params.alpha > 1
        assert cert.margins["reversal_at_p_tilde"] > 0
        assert cert.margins["weak_supersolution_min"] >= -1e-8

    def test_disk_ssm(self, kirchhoff_2d):
        """The sub/supersolution method fails on the unit disk at h = 0.01."""
        pair = IncreasingPair.at(kirchhoff_2d, 1.0, 4.0)
        cex, params = build_counterexample(DomainSpec.disk((0, 0), 1.0), kirchhoff_2d, pair, Mode.SSM, h=0.01)
        cert = certify(cex, kirchhoff_2d)
        assert cert.verdict == CertificateVerdict.CERTIFIED_FAILURE
        assert cert.admissible_roots == ()
        assert params.p_index in cert.touch_nodes
        assert max(cex.eigen_inner.residual, cex.eigen_outer.residual) < 1e-8

    def test_disk_weak(self, kirchhoff_2d):
        """Weak comparison fails on the unit disk at h = 0.02."""
        pair = IncreasingPair.at(kirchhoff_2d, 1.0, 2.5)
        cex, _ = build_counterexample(DomainSpec.disk((0, 0), 1.0), kirchhoff_2d, pair, Mode.WEAK_CP, h=0.02)
        cert = certify(cex, kirchhoff_2d)
        assert cert.verdict == CertificateVerdict.CERTIFIED_FAILURE
        assert cert.margins["comparison_strict"] > 0
