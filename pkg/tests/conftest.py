import pytest

from loglab.dynamics import ModelParams


@pytest.fixture
def logistic_params():
    return ModelParams(r=0.1, k=150.0)


@pytest.fixture
def quota_params():
    # carrying capacity and growth rate of the quota examples
    return ModelParams(r=0.5, k=0.8)


@pytest.fixture
def harvest_params():
    return ModelParams(r=0.01, k=0.05)
