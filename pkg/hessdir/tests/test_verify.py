import numpy as np

from hessdir.errors import DomainError, HypothesisWarning
from hessdir.grid import BoxGrid, GridField
from hessdir.solver import apply_linearized, boundary_bump, operator_trace
from hessdir.structure import FAILS, HOLDS, INCONCLUSIVE
from hessdir.symfun import matrix_Sk
from hessdir.verify import (
    AUDIT_COLUMNS,
    BarrierParams,
    auxiliary_function_probe,
    barrier_field,
    boundary_barrier_audit,
    boundary_barrier_sweep,
    boundary_decomposition_check,
    d2_stats,
    double_tangential_check,
    interior_barrier_audit,
    normal_decomposition,
    tangential_frame_check,
    trace_ellipticity_check,
)

import pytest
from hessdir.testing import assert_certificate


@pytest.fixture
def scaled(paraboloid_field):
    def make(factor):
        values = factor * paraboloid_field.values
        return GridField(paraboloid_field.grid, values, name="w")

    return make


@pytest.fixture
def bumped(paraboloid_problem, paraboloid_field):
    bump = boundary_bump(paraboloid_field.grid, paraboloid_problem.center)
    return GridField(paraboloid_field.grid, paraboloid_field.values + 0.1 * bump)


class TestParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"K": 0.0},
            {"K": 1.0, "eps1": -1.0},
            {"K": 1.0, "mu": 0.0},
            {"K": 1.0, "theta": 1.0},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(DomainError):
            BarrierParams(**kwargs)

    def test_to_dict(self):
        params = BarrierParams(K=2.0, mu=1.0)
        assert params.to_dict()["mu"] == 1.0
        assert params.to_dict()["theta"] == pytest.approx(1 / 3)


class TestDecomposition:
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_identity(self, rng, k):
        X = rng.normal(size=(10, 3, 3))
        W = X + np.swapaxes(X, -1, -2)
        for axis in range(3):
            w_nn, s_km1, R = normal_decomposition(W, k, axis)
            np.testing.assert_allclose(w_nn * s_km1 + R, matrix_Sk(W, k), atol=1e-10)

    def test_one_dimensional(self):
        w_nn, s_km1, R = normal_decomposition([[3.0]], 1, 0)
        assert (float(w_nn), float(s_km1), float(R)) == (3.0, 1.0, 0.0)

    def test_bad_axis(self):
        with pytest.raises(DomainError):
            normal_decomposition(np.eye(2), 1, 2)


class TestD2Stats:
    def test_paraboloid(self, paraboloid_problem, paraboloid_field):
        audit = d2_stats(paraboloid_field, paraboloid_problem)
        assert audit.sup_interior == pytest.approx(1.0)
        assert audit.sup_boundary == pytest.approx(1.0)
        assert audit.C_emp == pytest.approx(0.5)
        assert audit.double_normal["nodes"] == 36
        assert audit.double_normal["max_discrepancy"] <= 1e-10
        assert audit.to_dict()["argmax_interior"] == audit.argmax_interior

    def test_skew_solution(self, skew_problem, skew_solution):
        audit = d2_stats(skew_solution, skew_problem)
        assert audit.sup_interior > 0
        expected = audit.sup_interior / (1 + audit.sup_boundary)
        assert audit.C_emp == pytest.approx(expected)
        grid = skew_solution.grid
        assert not grid.boundary_mask[tuple(audit.argmax_interior)]
        assert grid.boundary_mask[tuple(audit.argmax_boundary)]


class TestInteriorAudit:
    def test_table(self, paraboloid_problem, paraboloid_field, scaled):
        audit = interior_barrier_audit(
            paraboloid_field, scaled(1.2), paraboloid_problem,
            K_list=[1.0, 4.0], eps1_list=[0.0, 0.5],
        )
        assert list(audit.table.columns) == AUDIT_COLUMNS
        assert audit.table["K"].tolist() == [1.0, 1.0, 4.0, 4.0]
        assert (audit.table["C"] >= 0).all()
        assert audit.informative
        assert audit.hypothesis.condition == "strict_subsolution"
        assert audit.hypothesis.holds
        assert audit.trace_min == pytest.approx(1.0)
        assert len(audit.feasible_rows()) == 2

    def test_constant_matches_direct_evaluation(
        self, paraboloid_problem, paraboloid_field, scaled
    ):
        w = scaled(1.2)
        audit = interior_barrier_audit(
            paraboloid_field, w, paraboloid_problem, K_list=[2.0], eps1_list=[3.0]
        )
        phi = barrier_field(paraboloid_field, w, 2.0)
        trace = operator_trace(paraboloid_field, paraboloid_problem)
        gap = 3.0 * trace - apply_linearized(paraboloid_field, paraboloid_problem, phi)
        row = audit.table.iloc[0]
        assert row["C"] == pytest.approx(max(gap.max(), 0.0))
        grid = paraboloid_field.grid
        node = np.unravel_index(int(row["worst_node_index"]), grid.m)
        assert not grid.boundary_mask[node]
        assert row["margin"] == pytest.approx(audit.C_cap - row["C"])

    def test_supersolution(self, paraboloid_problem, paraboloid_field, scaled):
        audit = interior_barrier_audit(
            paraboloid_field, scaled(0.8), paraboloid_problem,
            K_list=[1.0], eps1_list=[0.1], supersolution=True,
        )
        assert audit.variant == "supersolution"
        assert audit.hypothesis.holds

    def test_strictly_admissible_fallback(
        self, paraboloid_problem, paraboloid_field, scaled
    ):
        audit = interior_barrier_audit(
            paraboloid_field,
            scaled(0.9),
            paraboloid_problem,
            K_list=[1.0],
            eps1_list=[0.1],
        )
        assert audit.hypothesis.condition == "strict_gamma"
        assert audit.hypothesis.holds

    def test_exact_solution_is_not_strict_subsolution(
        self, paraboloid_problem, paraboloid_field
    ):
        audit = interior_barrier_audit(
            paraboloid_field,
            paraboloid_field,
            paraboloid_problem,
            K_list=[1.0],
            eps1_list=[0.1],
        )
        assert audit.hypothesis.condition == "strict_gamma"
        assert audit.hypothesis.holds

    def test_hypothesis_warning(self, paraboloid_problem, paraboloid_field, scaled):
        with pytest.warns(HypothesisWarning):
            interior_barrier_audit(
                paraboloid_field, scaled(-1.0), paraboloid_problem,
                K_list=[1.0], eps1_list=[0.1],
            )

    def test_grid_mismatch(self, paraboloid_problem, paraboloid_field):
        other = GridField(BoxGrid.for_problem(paraboloid_problem, 5), np.zeros((5, 5)))
        with pytest.raises(DomainError):
            interior_barrier_audit(paraboloid_field, other, paraboloid_problem)


class TestBoundaryBarrier:
    def test_sweep_finds_constants(self, paraboloid_problem, paraboloid_field, bumped):
        params, report, table = boundary_barrier_sweep(
            paraboloid_field, bumped, paraboloid_problem, face=(0, 0),
            K_list=[10.0, 30.0],
            N_list=[1.0, 10.0],
            mu_list=[0.5, 1.0],
            delta_steps=[2, 4],
        )
        assert len(table) == 16
        assert report.holds
        assert report.extras["combinations"] == 16
        assert report.extras["sign_margin"] == 0.0
        assert report.margin == pytest.approx(table["margin"].max())
        assert params.delta in (0.5, 1.0)

    def test_large_constant_fails(self, paraboloid_problem, paraboloid_field, bumped):
        params = BarrierParams(K=10.0, mu=1.0, N=1.0, delta=0.5, M=1e6)
        report = boundary_barrier_audit(
            paraboloid_field, bumped, paraboloid_problem, params
        )
        assert report.fails
        assert report.witness["inequality"] == "operator"
        assert report.extras["face"] == [0, 0]

    def test_missing_params(self, paraboloid_problem, paraboloid_field, bumped):
        with pytest.raises(DomainError, match="needs"):
            boundary_barrier_audit(
                paraboloid_field, bumped, paraboloid_problem, BarrierParams(K=1.0)
            )

    def test_empty_slab(self, paraboloid_problem, paraboloid_field, bumped):
        params = BarrierParams(K=1.0, mu=1.0, N=1.0, delta=0.1, M=1.0)
        with pytest.raises(DomainError, match="slab"):
            boundary_barrier_audit(paraboloid_field, bumped, paraboloid_problem, params)

    def test_bad_face(self, paraboloid_problem, paraboloid_field, bumped):
        params = BarrierParams(K=1.0, mu=1.0, N=1.0, delta=0.5, M=1.0)
        with pytest.raises(DomainError):
            boundary_barrier_audit(
                paraboloid_field, bumped, paraboloid_problem, params, face=0
            )


@pytest.fixture
def skew_subsolution(skew_problem, skew_solution):
    bump = boundary_bump(skew_solution.grid, skew_problem.center)
    return GridField(skew_solution.grid, skew_solution.values + 0.1 * bump, name="w")


class TestSkewBarriers:
    def test_interior_default_sweep(
        self, skew_problem, skew_solution, skew_subsolution, recwarn
    ):
        audit = interior_barrier_audit(skew_solution, skew_subsolution, skew_problem)
        assert not any(
            issubclass(w.category, HypothesisWarning) for w in recwarn.list
        )
        assert audit.hypothesis.holds
        assert audit.informative
        feasible = audit.feasible_rows()
        assert (feasible["eps1"] > 0).any()
        assert (feasible["C"] <= 1e3).all()
        assert len(audit.table) == 36

    def test_boundary_face_with_unit_constant(
        self, skew_problem, skew_solution, skew_subsolution
    ):
        params, report, table = boundary_barrier_sweep(
            skew_solution,
            skew_subsolution,
            skew_problem,
            face=(0, 0),
            K_list=[10.0, 30.0, 100.0],
            N_list=[1.0, 10.0],
            mu_list=[0.5, 1.0],
            delta_steps=[2, 4, 8],
            M=1.0,
        )
        assert len(table) == 36
        assert report.holds
        assert params.M == 1.0

class TestBoundaryChecks:
    def test_decomposition_paraboloid(self, paraboloid_problem, paraboloid_field):
        report = boundary_decomposition_check(
            paraboloid_field, paraboloid_problem, face=(1, 1), atol=1e-8
        )
        assert report.holds
        assert report.extras["equation_residual"] <= 1e-9
        assert report.witness["node"][1] == 8

    def test_decomposition_skew(self, skew_problem, skew_solution):
        report = boundary_decomposition_check(skew_solution, skew_problem)
        assert report.holds
        assert report.extras["identity_error"] <= 1e-12
        strict = boundary_decomposition_check(skew_solution, skew_problem, atol=0.0)
        assert strict.margin <= 0.0

    def test_decomposition_default_tolerance_catches_bad_field(
        self, paraboloid_problem, paraboloid_field
    ):
        grid = paraboloid_field.grid
        bump = boundary_bump(grid, paraboloid_problem.center)
        bad = GridField(grid, paraboloid_field.values + bump)
        good = boundary_decomposition_check(paraboloid_field, paraboloid_problem)
        assert good.holds
        assert good.extras["atol"] == pytest.approx(0.5)
        report = boundary_decomposition_check(bad, paraboloid_problem)
        assert report.fails
        assert report.extras["equation_residual"] > report.extras["atol"]

    def test_tangential_frame(self):
        assert_certificate(tangential_frame_check(np.diag([3.0, 2.0, 1.0]), 2), HOLDS)
        X = np.array([[3.0, 0.5, 0.2], [0.5, 2.0, 0.1], [0.2, 0.1, 1.0]])
        report = tangential_frame_check(X, 2)
        assert report.verdict == INCONCLUSIVE
        assert report.margin < 0

    def test_trace(self, paraboloid_problem, paraboloid_field):
        report = trace_ellipticity_check(paraboloid_field, paraboloid_problem)
        assert_certificate(report, HOLDS, margin=2.0, atol=1e-12)
        assert report.extras["label"] == "interior"
        concave = GridField(paraboloid_field.grid, -paraboloid_field.values)
        failed = trace_ellipticity_check(concave, paraboloid_problem)
        assert_certificate(failed, FAILS, margin=-2.0, atol=1e-12)
        assert failed.extras["label"] == "outside"

    def test_double_tangential(self, paraboloid_problem, paraboloid_field, bumped):
        report = double_tangential_check(paraboloid_field, bumped, paraboloid_problem)
        assert report.holds
        x2 = paraboloid_field.grid.coords[..., 1]
        other = GridField(paraboloid_field.grid, paraboloid_field.values + 0.1 * x2**2)
        report = double_tangential_check(
            paraboloid_field, other, paraboloid_problem, face=(0, 1)
        )
        assert_certificate(report, FAILS, margin=-0.2, atol=1e-10)


class TestAuxiliary:
    def test_diagnostic_field(self, paraboloid_problem, paraboloid_field, bumped):
        report = auxiliary_function_probe(
            paraboloid_field, bumped, paraboloid_problem, K=2.0
        )
        assert report.holds
        assert report.extras["params"]["a"] == pytest.approx(1.0 / 1.5625**2)
        assert np.isfinite(report.extras["v_max"])
        assert len(report.witness["node"]) == 2

    def test_requires_positive_eigenvalue(self, paraboloid_problem, paraboloid_field):
        concave = GridField(paraboloid_field.grid, -paraboloid_field.values)
        with pytest.raises(DomainError):
            auxiliary_function_probe(concave, concave, paraboloid_problem)
