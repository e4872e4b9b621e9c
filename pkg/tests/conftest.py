import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from anisohardy.atoms import AdmissibleTriplet, make_atom
from anisohardy.dilation import validate_dilation
from anisohardy.quasinorm import build_quasinorm, dual_quasinorm

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SHEAR = [[2.0, 1.0], [0.0, 3.0]]
DIAG23 = [[2.0, 0.0], [0.0, 3.0]]
ISO2 = [[2.0, 0.0], [0.0, 2.0]]
ROT = [[1.0, 1.0], [-1.0, 1.0]]  # complex pair, modulus sqrt 2


@pytest.fixture(scope="session")
def shear():
    D = validate_dilation(SHEAR)
    Q = build_quasinorm(D)
    return D, Q, dual_quasinorm(Q)


@pytest.fixture(scope="session")
def iso():
    D = validate_dilation(ISO2)
    Q = build_quasinorm(D)
    return D, Q, dual_quasinorm(Q)


@pytest.fixture(scope="session")
def half_triplet(shear):
    return AdmissibleTriplet.for_dilation(0.5, 2.0, "auto", shear[0])


@pytest.fixture(scope="session")
def unit_atom(shear, half_triplet):
    return make_atom(shear[1], half_triplet, k=0, seed=7)


@pytest.fixture(scope="session")
def small_atoms(shear, half_triplet):
    return [make_atom(shear[1], half_triplet, k=k, grid_res=32, seed=s) for s, k in enumerate((-2, -1, 0, 1, 2))]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
