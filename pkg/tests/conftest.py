import numpy as np
import pytest

from pkirchhoff import (DescentConfig, KirchhoffModel, ProblemExponents, RadialFunction,
                        RadialGrid, TrialFamily, extremal_minimizer, lambda_star)
from pkirchhoff.solver import random_bumps


@pytest.fixture(scope="session")
def exps():
    return ProblemExponents(4, 2.0, 3.0)


@pytest.fixture(scope="session")
def model():
    return KirchhoffModel(1.0, 1.0, 3.0)


@pytest.fixture(scope="session")
def grid():
    return RadialGrid(4, 1.0, 201)


@pytest.fixture(scope="session")
def family(grid, exps):
    return TrialFamily.default(grid, exps, seed=42)


@pytest.fixture(scope="session")
def est0(family, model, exps):
    return lambda_star(0, family, model, exps)


@pytest.fixture(scope="session")
def est1(family, model, exps):
    return lambda_star(1, family, model, exps)


@pytest.fixture(scope="session")
def extremal_point(est0, model, exps):
    """Nonzero minimizer of the energy at the estimated lambda0*."""
    r = extremal_minimizer(est0, model, exps)
    return RadialFunction(est0.argmin.grid, r.values)


def random_profiles(grid, count, seed):
    return random_bumps(grid, count, np.random.default_rng(seed))


ACCEPTANCE_LINES = {}


@pytest.fixture
def verdict(request):
    """Record one pass/fail line per acceptance criterion."""
    def record(number: int, title: str, ok: bool, detail: str):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
