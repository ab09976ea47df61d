import pytest
from hypothesis import HealthCheck, settings

from d2dcache.distributions import NetworkParams

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def ref_params():
    return NetworkParams(lam=1.0, p_a=0.5, q=0.5, alpha=4.0)
