import numpy as np
import pytest

from jslab.boundary import DomainSpec
from jslab.geometry import ModelParams
from jslab.mesh import build_mesh
from jslab.solver import make_probe, run_jenkins_serrin

HALF_PI = np.pi / 2


def scherk(x, y):
    return np.log(np.cos(y) / np.cos(x))


@pytest.fixture(scope="session")
def euclid():
    return ModelParams()


@pytest.fixture(scope="session")
def scherk_spec(euclid):
    a = HALF_PI
    return DomainSpec.polygon(euclid, [(-a, -a), (a, -a), (a, a), (-a, a)], "BABA")


@pytest.fixture(scope="session")
def unit_square_abab(euclid):
    return DomainSpec.polygon(euclid, [(0, 0), (1, 0), (1, 1), (0, 1)], "ABAB")


@pytest.fixture(scope="session")
def scherk_mesh(scherk_spec):
    # graded at the corner (pi/2, pi/2) so its fiber can serve as a seam
    return build_mesh(scherk_spec, 0.02, graded_corners=(2,))


@pytest.fixture(scope="session")
def scherk_run(scherk_spec, scherk_mesh):
    probe = make_probe(scherk_spec, scherk_mesh, (0.0, 0.0), 0.5)
    return run_jenkins_serrin(scherk_spec, scherk_mesh, (1, 2, 3, 4, 5), probes=[probe])
