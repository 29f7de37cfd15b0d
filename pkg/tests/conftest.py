import numpy as np
import pytest

from coalseek.corpus import random_quadratic_game
from coalseek.scenario import load_scenario


@pytest.fixture(scope="session")
def example2():
    return load_scenario("example2")


@pytest.fixture(scope="session")
def example2_game(example2):
    return example2.game


@pytest.fixture(scope="session")
def congestion_demo():
    return load_scenario("congestion-demo")


@pytest.fixture(scope="session")
def fig1_demo():
    return load_scenario("coalition1-fig1")


@pytest.fixture(scope="session")
def quadratic_corpus():
    """20 strongly monotone quadratic games with pinned seeds."""
    rng = np.random.default_rng(20240517)
    return [random_quadratic_game(rng) for _ in range(20)]


STATIONARY_SECOND = np.array([49.0, 14.0, 7.0, 0.0, 98.0, 0.0, 0.0, 0.0, 0.0, 0.0])
