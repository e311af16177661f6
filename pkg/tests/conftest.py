import pytest
from hypothesis import HealthCheck, settings

from carnot_acf.group import make_engel, make_euclidean, make_heisenberg

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def engel():
    return make_engel()


@pytest.fixture(scope="session")
def heis1():
    return make_heisenberg(1)


@pytest.fixture(scope="session")
def heis1_pol():
    return make_heisenberg(1, "polarized")


@pytest.fixture(scope="session")
def heis2():
    return make_heisenberg(2)


@pytest.fixture(scope="session")
def eucl3():
    return make_euclidean(3)
