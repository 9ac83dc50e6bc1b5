"""Shared test configuration: deterministic hypothesis profile, warm kernels."""
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wasserstat.kernels import warm_up

settings.register_profile(
    "deterministic",
    deadline=None,
    derandomize=True,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("deterministic")


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # first jit compile can take seconds; keep it out of timed tests
    warm_up()


@pytest.fixture
def rng():
    return np.random.default_rng(0)
