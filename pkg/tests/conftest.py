import json
from pathlib import Path

import numpy as np
import pytest

from gaussian_tournament.function_class import CovarianceStructure, FunctionClass
from gaussian_tournament.harness import ExperimentConfig, build_class, default_z0

FIXTURES = Path(__file__).parent / "fixtures"
_VERDICTS = []


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte-Carlo runs")


@pytest.fixture(scope="session")
def calibration():
    return json.loads((FIXTURES / "calibration.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def eye2():
    return CovarianceStructure.identity(2)


@pytest.fixture(scope="session")
def testbed():
    cfg = ExperimentConfig()
    F = build_class(cfg)
    return cfg, F, default_z0(F)


@pytest.fixture(scope="session")
def verdicts():
    return _VERDICTS


def segment_class(n=21, length=1.0, dim=1):
    pts = np.zeros((n, dim))
    pts[:, 0] = np.linspace(-length, length, n)
    return FunctionClass(pts, CovarianceStructure.identity(dim))


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
