import numpy as np

import hessdir

import pytest
from hessdir.grid import BoxGrid, GridField
from hessdir.model import make_problem


@pytest.fixture(autouse=True)
def add_hessdir(doctest_namespace):
    doctest_namespace["hessdir"] = hessdir


@pytest.fixture(autouse=True)
def _reset_options():
    yield
    hessdir.options.reset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def paraboloid_problem():
    """Standard 2-Hessian problem whose solution is |x|^2 / 2."""
    return make_problem("zero_A_const_B", 2, 2, lo=-1.0, hi=1.0)


@pytest.fixture(scope="session")
def skew_problem():
    return make_problem("skew_A_const_B", 2, 2, lo=-0.5, hi=0.5, params={"s": 0.1})


@pytest.fixture(scope="session")
def skew_solution(skew_problem):
    from hessdir.solver import solve

    u, report = solve(skew_problem, 17)
    assert report.converged
    return u


@pytest.fixture
def paraboloid_field(paraboloid_problem):
    grid = BoxGrid.for_problem(paraboloid_problem, 9)
    return GridField.from_function(grid, paraboloid_problem.phi, name="u")
