import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from moire_dos import Lattice, System, clear_cache, gaussian_model, square_lattice, zero_potential

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SQRT5M1 = math.sqrt(5.0) - 1.0


@pytest.fixture
def ex1_lattices():
    return Lattice([[SQRT5M1]]), Lattice([[2.0]])


@pytest.fixture
def ex2_lattices():
    return square_lattice(2.0), square_lattice(2.0, math.pi / 10)


@pytest.fixture
def ex1_system(ex1_lattices):
    a, b = ex1_lattices
    return System(gaussian_model(a, 0.01), gaussian_model(b, 0.01))


@pytest.fixture
def ex2_system(ex2_lattices):
    a, b = ex2_lattices
    return System(gaussian_model(a, 0.01), gaussian_model(b, 0.01))


@pytest.fixture
def free_system(ex1_lattices):
    a, b = ex1_lattices
    return System(zero_potential(a), zero_potential(b))


@pytest.fixture(autouse=True)
def _fresh_cache():
    clear_cache()
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run tests that take tens of minutes")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
