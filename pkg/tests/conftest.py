"""Shared fixtures.

The scenario runs are the expensive part of the suite (a couple of
seconds each), so they are computed once per session and shared
between the scenario tests and the acceptance tests.
"""

import pytest

from nphoton.scenarios import (
    Example1Config,
    Example2Config,
    run_example1,
    run_example2,
)


@pytest.fixture(scope="session")
def ex1_default():
    return run_example1(Example1Config.default())


@pytest.fixture(scope="session")
def ex1_interleaved_zero():
    return run_example1(Example1Config.interleaved(phase=0.0))


@pytest.fixture(scope="session")
def ex1_interleaved_pi():
    import math

    return run_example1(Example1Config.interleaved(phase=math.pi))


@pytest.fixture(scope="session")
def ex2_default():
    return run_example2(Example2Config.default())


@pytest.fixture(scope="session")
def ex2_demagnified():
    return run_example2(Example2Config.demagnified())
