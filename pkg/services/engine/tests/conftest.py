import numpy as np
import pytest

from macrodiv.core import mpsk_params
from macrodiv.logging_config import configure_logging
from macrodiv.schemas import PowerProfile
from macrodiv.simulation.scenarios import build_scenario, table1_scenario


@pytest.fixture(autouse=True)
def _fresh_log_stream():
    # structlog binds to sys.stderr at configure time; rebind per test so a
    # stream captured (and closed) by an earlier test is not reused.
    configure_logging()
    yield


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(1234))


@pytest.fixture
def qpsk():
    return mpsk_params(4)


@pytest.fixture
def two_antenna_profile():
    # P1 = diag(2, 1), P2 = I
    return PowerProfile(p1=(2.0, 1.0), p2=(1.0, 1.0))


@pytest.fixture
def generic_profile():
    return PowerProfile(p1=(1.7, 0.6, 0.25), p2=(0.3, 0.9, 1.4))


@pytest.fixture
def s1():
    return build_scenario(table1_scenario("S1"))


@pytest.fixture
def random_profiles():
    gen = np.random.Generator(np.random.Philox(99))
    return [PowerProfile.from_arrays(gen.uniform(0.2, 3.0, 3), gen.uniform(0.2, 3.0, 3)) for _ in range(10)]
