"""
Quick end-to-end self test behind ``hessctl selftest``.

Every check is a small function taking a ``numpy.random.Generator`` and
raising ``AssertionError`` on failure; the runner collects the outcomes in a
table.
"""
import io
import json
import logging
import os
import tempfile
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from hessdir.tools._random import _generator

logger = logging.getLogger(__name__)

_CHECKS = []


def _check(suite):
    def register(func):
        _CHECKS.append((suite, func.__name__.lstrip("_"), func))
        return func

    return register


@_check("symfun")
def _elem_sym_worked_example(rng):
    from hessdir.symfun import elem_sym

    assert abs(elem_sym([1.0, 1.0, -0.4], 2) - 0.2) <= 1e-12


@_check("symfun")
def _elem_sym_matches_subsets(rng):
    from hessdir.symfun import elem_sym
    from hessdir.testing import esp_subsets

    for n in range(1, 6):
        lam = rng.normal(size=n)
        for k in range(1, n + 1):
            expected = esp_subsets(lam, k)
            assert abs(elem_sym(lam, k) - expected) <= 1e-12 * (1 + abs(expected))


@_check("symfun")
def _matrix_Sk_matches_minors(rng):
    from hessdir.symfun import matrix_Sk
    from hessdir.testing import sk_principal_minors

    for n in (2, 3, 4):
        X = rng.normal(size=(n, n))
        W = X + X.T
        for k in range(1, n + 1):
            expected = sk_principal_minors(W, k)
            assert abs(matrix_Sk(W, k) - expected) <= 1e-10 * (1 + abs(expected))


@_check("symfun")
def _F_grad_matches_differences(rng):
    from hessdir.testing import assert_F_grad_matches

    for n in (2, 3):
        X = rng.normal(size=(n, n))
        W = np.eye(n) * (n + 1.0) + 0.3 * (X + X.T)
        for k in range(1, n + 1):
            assert_F_grad_matches(W, k)


@_check("structure")
def _skew_projector_strictly_regular(rng):
    from hessdir.model import SkewProjectorA
    from hessdir.structure import SamplingSpec, check_regular

    s = SamplingSpec(n=2, n_x=2, n_z=1, n_p=8, n_pairs=4, seed=int(rng.integers(2**31)))
    report = check_regular(SkewProjectorA(1.0), s, strict=True)
    assert report.holds
    assert abs(report.margin - 1.0) <= 1e-6


@_check("structure")
def _conformal_as_printed_fails(rng):
    from hessdir.model import ConformalA
    from hessdir.structure import SamplingSpec, check_regular

    s = SamplingSpec(n=2, n_x=2, n_z=1, n_p=8, n_pairs=4, seed=int(rng.integers(2**31)))
    report = check_regular(ConformalA(sign=1), s)
    assert report.fails
    assert abs(report.margin + 1.0) <= 1e-6


@_check("structure")
def _power_source_convexity(rng):
    from hessdir.model import PowerB
    from hessdir.structure import SamplingSpec, check_Btilde_convex

    s = SamplingSpec(n=2, n_x=2, n_z=1, n_p=32, P=2.0, seed=int(rng.integers(2**31)))
    assert check_Btilde_convex(PowerB(1.0, 1.0), 1, s).holds
    report = check_Btilde_convex(PowerB(1.0, 0.25), 1, s)
    assert report.fails
    assert report.witness["p_norm"] ** 2 >= 0.95 * 2.0


@_check("solver")
def _quadratic_solution_is_exact(rng):
    from hessdir.grid import BoxGrid
    from hessdir.model import make_problem
    from hessdir.solver import solve

    prob = make_problem("zero_A_const_B", 2, 2, lo=-1.0, hi=1.0)
    u, report = solve(prob, 9)
    assert report.converged and report.residual <= 1e-10
    exact = prob.phi(BoxGrid.for_problem(prob, 9).coords)
    assert np.max(np.abs(u.values - exact)) <= 1e-9


@_check("verify")
def _d2_stats_of_paraboloid(rng):
    from hessdir.grid import BoxGrid, GridField
    from hessdir.model import make_problem
    from hessdir.verify import d2_stats

    prob = make_problem("zero_A_const_B", 2, 2)
    u = GridField.from_function(BoxGrid.for_problem(prob, 7), prob.phi)
    audit = d2_stats(u, prob)
    assert abs(audit.C_emp - 0.5) <= 1e-9


@_check("verify")
def _normal_decomposition_identity(rng):
    from hessdir.symfun import matrix_Sk
    from hessdir.verify import normal_decomposition

    X = rng.normal(size=(3, 3))
    W = 4.0 * np.eye(3) + 0.5 * (X + X.T)
    w_nn, s_km1, R = normal_decomposition(W, 2, 2)
    assert abs(w_nn * s_km1 + R - matrix_Sk(W, 2)) <= 1e-12 * (1 + abs(matrix_Sk(W, 2)))


@_check("verify")
def _tangential_frame_diagonal(rng):
    from hessdir.verify import tangential_frame_check

    assert tangential_frame_check(np.diag([3.0, 2.0, 1.0]), 2).holds


@_check("io")
def _field_round_trip(rng):
    from hessdir.grid import BoxGrid, GridField
    from hessdir.io.fields import emit_field, read_field

    grid = BoxGrid([0.0, -1.0], [1.0, 2.5], [4, 5])
    u = GridField(grid, rng.normal(size=grid.m))
    buf = io.StringIO()
    emit_field(u, buf)
    buf.seek(0)
    assert np.array_equal(read_field(buf).values, u.values)


@_check("io")
def _config_rejects_k_above_n(rng):
    from hessdir.errors import ConfigError
    from hessdir.io.config import RunConfig

    raw = {"command": "solve", "problem": {"catalog": "zero_A_const_B", "n": 2, "k": 3}}
    try:
        RunConfig.from_dict(raw)
    except ConfigError as err:
        assert err.pointer == "/problem/k"
    else:
        raise AssertionError("k > n accepted")


def _run_cli(command, config, tmp):
    from hessdir.cli import main

    path = os.path.join(tmp, "config.json")
    with open(path, "w") as f:
        f.write(config if isinstance(config, str) else json.dumps(config))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return main([command, "--config", path, "--out", tmp])


@_check("cli")
def _exit_codes(rng):
    base = {"n": 2, "k": 2}
    cases = [
        (
            {
                "command": "solve",
                "problem": {"catalog": "zero_A_const_B", **base},
                "grid": {"m": [9, 9]},
            },
            0,
        ),
        (
            {
                "command": "structure",
                "problem": {
                    "custom": {"A": {"name": "conformal_A_as_printed"}},
                    **base,
                },
                "checks": {"seed": 0, "samples": 2},
            },
            2,
        ),
        (
            {
                "command": "solve",
                "problem": {"catalog": "skew_A_const_B", **base},
                "grid": {"m": [9, 9]},
                "solver": {
                    "rtol": 1e-14,
                    "max_newton": 1,
                    "homotopy_stages": 0,
                    "max_bisections": 0,
                },
            },
            3,
        ),
        ('{"command": "solve", "command": "solve"}', 4),
    ]
    with tempfile.TemporaryDirectory() as tmp:
        for config, expected in cases:
            command = config["command"] if isinstance(config, dict) else "solve"
            code = _run_cli(command, config, tmp)
            assert code == expected, f"exit {code}, expected {expected}"


@dataclass
class SelftestResult:
    """Outcome table with one row per check."""

    table: pd.DataFrame

    @property
    def n_passed(self):
        return int(self.table["passed"].sum())

    @property
    def n_failed(self):
        return int((~self.table["passed"]).sum())

    @property
    def ok(self):
        return self.n_failed == 0

    def summary(self):
        """Pass counts per suite."""
        return self.table.groupby("suite", sort=False)["passed"].agg(["sum", "count"])

    def to_dict(self):
        return {
            "passed": self.n_passed,
            "failed": self.n_failed,
            "checks": self.table.to_dict(orient="records"),
        }


def run_selftest(seed=0, suites=None):
    """
    Run the self test.

    Parameters
    ----------
    seed : int, default 0
    suites : sequence of str, optional
        Restrict to these suites (``symfun``, ``structure``, ``solver``,
        ``verify``, ``io``, ``cli``).

    Returns
    -------
    SelftestResult
    """
    rows = []
    for i, (suite, name, func) in enumerate(_CHECKS):
        if suites is not None and suite not in suites:
            continue
        rng = _generator([seed, i])
        try:
            func(rng)
        except Exception as err:  # noqa: BLE001
            logger.info("selftest %s.%s failed: %s", suite, name, err)
            rows.append(
                {"suite": suite, "name": name, "passed": False,
                 "detail": f"{type(err).__name__}: {err}"}
            )
        else:
            rows.append({"suite": suite, "name": name, "passed": True, "detail": ""})
    table = pd.DataFrame(rows, columns=["suite", "name", "passed", "detail"])
    table["passed"] = table["passed"].astype(bool)
    return SelftestResult(table)
