import logging

import numpy as np
import pytest

from src.config import get_bool_setting
from src.glm.dataset import Dataset
from src.glm.families import GAUSSIAN
from src.simulation.generators import gen_linear, gen_logistic, orthonormal_design

TRUE_BETA = [2.0, 1.6, 1.2, 0.8, 0.4]


def pytest_collection_modifyitems(config, items):
    if get_bool_setting("CCV_ACCEPTANCE"):
        return
    skip = pytest.mark.skip(reason="set CCV_ACCEPTANCE=1 to run the acceptance reproductions")
    for item in items:
        if "acceptance" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def _drop_cli_log_handler():
    yield
    logger = logging.getLogger("src")
    for handler in list(logger.handlers):
        if getattr(handler, "_ccv_handler", False):
            logger.removeHandler(handler)


@pytest.fixture
def sparse_linear():
    """(train, test) with n=100, p=30 and five leading signals."""
    return gen_linear(n=100, p=30, rho=0.0, beta=TRUE_BETA, sigma=1.0, seed=11)


@pytest.fixture
def sparse_logistic():
    return gen_logistic(n=200, p=20, rho=0.0, beta=[1.5, -1.0, 1.0], seed=5)


@pytest.fixture
def orthonormal_data():
    """n=200, p=50, X'X/n = I exactly (to round-off)."""
    X = orthonormal_design(200, 50, seed=3)
    beta = np.zeros(50)
    beta[:5] = TRUE_BETA
    y = X @ beta + np.random.default_rng(4).standard_normal(200)
    return Dataset(X=X, y=y, family=GAUSSIAN)
