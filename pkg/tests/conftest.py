import numpy as np
import pytest

from twochan.instances import random_certified_problem, scalar_instance


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def scalar_problem():
    return scalar_instance()


@pytest.fixture(params=range(6))
def certified_problem(request):
    """A handful of replayable certified random instances."""
    return random_certified_problem(np.random.default_rng(1000 + request.param))
