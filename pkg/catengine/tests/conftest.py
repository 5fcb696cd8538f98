"""
Pytest configuration and shared fixtures.

Reproduction tests run minutes of optimization; they carry the ``slow``
marker and only run with ``--runslow``.
"""

import numpy as np
import pytest

from catengine.optimizer import OptimizerBudget


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run table and figure reproductions")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running reproduction test (needs --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    """Seeded generator for randomized property checks."""
    return np.random.default_rng(20240229)


@pytest.fixture
def small_budget():
    """A budget small enough for unit tests."""
    return OptimizerBudget(restarts=2, seed=7, threads=2, max_evaluations=150)


@pytest.fixture
def output_dir(tmp_path):
    path = tmp_path / "output"
    path.mkdir()
    return path
