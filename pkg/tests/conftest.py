"""Shared fixtures: the Boeing 737 model, its matched gains, and the
long closed-loop runs reused by several test modules."""

import numpy as np
import pytest

from mracsim.harness import (boeing_baseline_scenario, boeing_model,
                             boeing_scenario, run_scenario)
from mracsim.matching import solve_matching
from mracsim.poly import Polynomial


@pytest.fixture(scope="session")
def boeing():
    return boeing_model()


@pytest.fixture(scope="session")
def boeing_omega():
    return Polynomial([11.25, 18.25, 8.0, 1.0])


@pytest.fixture(scope="session")
def boeing_rm():
    return Polynomial([108.0, 21.0, 1.0])


@pytest.fixture(scope="session")
def boeing_gains(boeing, boeing_omega, boeing_rm):
    return solve_matching(boeing.P, boeing.Z, boeing.kp,
                          Omega=boeing_omega, Rm=boeing_rm)


def _timed_run(cfg):
    import time

    t0 = time.time()
    rec = run_scenario(cfg)
    rec.metrics["wall_time"] = time.time() - t0
    return rec


@pytest.fixture(scope="session")
def case_i_record():
    return _timed_run(boeing_scenario("i"))


@pytest.fixture(scope="session")
def case_ii_record():
    return _timed_run(boeing_scenario("ii"))


@pytest.fixture(scope="session")
def baseline_record():
    return _timed_run(boeing_baseline_scenario())
