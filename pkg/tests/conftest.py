"""
Shared fixtures for the frustration-lab test suite.

Long acceptance runs are marked ``slow`` and only run with ``--runslow``.
"""

import os
import sys

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.config import get_settings
from core.lattice import BoundaryCondition, LatticeKind, build_lattice
from solvers.solver_manager import reset_solver_manager


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance test (needs --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    """Seeded generator; every test gets the same stream."""
    return np.random.default_rng(20240611)


@pytest.fixture
def square_2x2():
    return build_lattice(LatticeKind.SQUARE, 2, 2, BoundaryCondition.FREE)


@pytest.fixture
def square_5x5():
    return build_lattice(LatticeKind.SQUARE, 5, 5, BoundaryCondition.FREE)


@pytest.fixture
def torus_6x6():
    return build_lattice(LatticeKind.SQUARE, 6, 6, BoundaryCondition.TOROIDAL)


@pytest.fixture(autouse=True)
def isolated_settings():
    """Restore mutable settings and the shared solver manager after each test."""
    settings = get_settings()
    saved = settings.model_dump()
    yield settings
    for name, value in saved.items():
        setattr(settings, name, value)
    reset_solver_manager()
