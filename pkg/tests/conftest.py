"""Shared fixtures; puts the repository root on sys.path like main.py does."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from phasefront.field_grid import GridSpec1D, SignalSpec, synthesize  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: end-to-end sweeps that take tens of seconds")


@pytest.fixture(scope="session")
def detection_grid():
    return GridSpec1D(L=40.0, N=4096)


@pytest.fixture(scope="session")
def evolution_grid():
    return GridSpec1D(L=80.0, N=4096)


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec1D(L=10.0, N=256)


@pytest.fixture(scope="session")
def constant_field(detection_grid):
    return synthesize(SignalSpec(kind="constant"), detection_grid)


@pytest.fixture(scope="session")
def chirp_field(detection_grid):
    return synthesize(SignalSpec.model_validate("chirp(1)"), detection_grid)
