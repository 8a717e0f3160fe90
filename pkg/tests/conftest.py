import logging

import pytest

from witsenhausen_zec import MonteCarloConfig, ProblemParams, QuadratureConfig


@pytest.fixture(autouse=True)
def configure_test_logging(caplog):
    caplog.set_level(logging.DEBUG)


@pytest.fixture()
def params():
    return ProblemParams(Q=1.0, N=0.15)


@pytest.fixture()
def cfg():
    return QuadratureConfig()


@pytest.fixture()
def fast_mc():
    return MonteCarloConfig(samples=400_000, batch=100_000, threads=2)
