"""Shared fixtures and hypothesis settings."""

import pytest
from hypothesis import HealthCheck, settings

from cpelab import Grid, PhysParams, make_initial

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    derandomize=True,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def grid16():
    return Grid(16, 16, 16)


@pytest.fixture(scope="session")
def grid12():
    return Grid(12, 12, 12)


@pytest.fixture(scope="session")
def params():
    return PhysParams()


@pytest.fixture(scope="session")
def weak_params():
    # weak diffusion keeps stable_dt large, so multi-step tests stay cheap
    return PhysParams(mu=0.02, lam=0.02, kappa=0.02)


@pytest.fixture
def constant_state(grid16, params):
    return make_initial("constant", grid16, params)


@pytest.fixture
def example_a(grid16, params):
    return make_initial("example-A", grid16, params, amplitude=1.0)


@pytest.fixture
def random_state(grid16, params):
    return make_initial("smooth-random", grid16, params, amplitude=0.1, seed=3)
