import numpy as np
import pytest

from hyperbn.geometry import make_params
from hyperbn.radial_ode import integrate
from hyperbn.shooting import bracket_scan, find_knode


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile (or load) the integrator once so timing checks see run time only
    integrate(1.0, make_params(3, 0.5, 4.0))


@pytest.fixture(scope="session")
def gs_params():
    return make_params(5, 3.9, "critical")


@pytest.fixture(scope="session")
def ground_state(gs_params):
    br = [b for b in bracket_scan(gs_params) if b.key_lo <= 0 < b.key_hi]
    return find_knode(gs_params, 0, br[0].as_tuple())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
