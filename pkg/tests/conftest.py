"""Shared fixtures: the 1D Kirchhoff setting on (-pi/2, pi/2)."""

import math

import pytest

from core.assembly import assemble, restrict
from core.eigensolve import principal_eigenpair
from core.geometry import DomainSpec, mesh, mesh_enlarged
from core.mcatalog import IncreasingPair, MFunctionSpec
from pipeline.construct import Mode, build_counterexample

HALF_PI = 0.5 * math.pi


@pytest.fixture(scope="session")
def interval():
    return DomainSpec.interval(-HALF_PI, HALF_PI)


@pytest.fixture(scope="session")
def interval_mesh(interval):
    return mesh(interval)


@pytest.fixture(scope="session")
def interval_ops(interval_mesh):
    return assemble(interval_mesh)


@pytest.fixture(scope="session")
def interval_eigen(interval_ops):
    return principal_eigenpair(interval_ops)


@pytest.fixture(scope="session")
def enlarged_eigen(interval_mesh):
    """Eigenpair of (-pi/2 - 0.5, pi/2 + 0.5) on the nested mesh."""
    return principal_eigenpair(assemble(mesh_enlarged(interval_mesh, 0.5)))


@pytest.fixture(scope="session")
def phi_tau_restricted(enlarged_eigen, interval_mesh):
    return restrict(enlarged_eigen.phi, interval_mesh)


@pytest.fixture(scope="session")
def kirchhoff():
    return MFunctionSpec.affine(1.0, 1.0)


@pytest.fixture(scope="session")
def kirchhoff_pair(kirchhoff):
    return IncreasingPair.at(kirchhoff, 1.0, 4.0)


def _build(interval, kirchhoff, kirchhoff_pair, mode):
    return build_counterexample(interval, kirchhoff, kirchhoff_pair, mode, tau0=0.5)


@pytest.fixture(scope="session")
def ssm_cex(interval, kirchhoff, kirchhoff_pair):
    return _build(interval, kirchhoff, kirchhoff_pair, Mode.SSM)[0]


@pytest.fixture(scope="session")
def strong_cex(interval, kirchhoff, kirchhoff_pair):
    return _build(interval, kirchhoff, kirchhoff_pair, Mode.STRONG_CP)[0]


@pytest.fixture(scope="session")
def weak_cex(interval, kirchhoff, kirchhoff_pair):
    return _build(interval, kirchhoff, kirchhoff_pair, Mode.WEAK_CP)[0]
