import numpy as np

from hessdir.errors import DomainError
from hessdir.grid import GridField
from hessdir.model import (
    CoefficientA,
    ConformalA,
    ConstB,
    ExpUB,
    PowerB,
    ProblemSpec,
    SkewProjectorA,
    UDiagA,
    XDiagA,
    ZeroA,
    quadratic_field,
)
from hessdir.solver import solve
from hessdir.structure import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    BoundaryFrame,
    SamplingSpec,
    ball_frames,
    box_face_frames,
    check_A_bounded,
    check_admissible_field,
    check_Btilde_convex,
    check_domain_convex,
    check_monotone,
    check_regular,
    ellipse_frames,
    is_signed_permutation,
    perturb_admissible,
    perturb_strict,
    transform_problem,
)

import pytest
from hessdir.testing import assert_certificate


@pytest.fixture
def spec():
    return SamplingSpec(n=2, lo=-1.0, hi=1.0, n_x=3, n_z=2, n_p=12, n_pairs=4, seed=7)


def _x_diag_problem(lo=0.0, hi=1.0):
    return ProblemSpec(2, 2, lo, hi, XDiagA(0.1), ConstB(1.0), quadratic_field(1.5))


class TestSamplingSpec:
    def test_deterministic(self, spec):
        x1, z1, p1 = spec.points()
        x2, z2, p2 = spec.points()
        np.testing.assert_array_equal(x1, x2)
        np.testing.assert_array_equal(p1, p2)
        assert x1.shape == (spec.size, 2)
        assert np.all(np.linalg.norm(p1, axis=-1) <= spec.P + 1e-12)

    def test_pairs_orthonormal(self, spec):
        xi, eta = spec.pairs()
        assert xi.shape == (spec.size, 4, 2)
        np.testing.assert_allclose(np.sum(xi * eta, axis=-1), 0.0, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(eta, axis=-1), 1.0)

    @pytest.mark.parametrize(
        "kwargs", [{"n_x": 0}, {"P": 0.0}, {"z_lo": 1.0, "z_hi": 0.0}]
    )
    def test_validation(self, kwargs):
        with pytest.raises(DomainError):
            SamplingSpec(**kwargs)


class TestRegular:
    def test_skew_projector_strict(self, spec):
        report = check_regular(SkewProjectorA(1.0), spec, strict=True)
        assert_certificate(report, HOLDS, margin=1.0, atol=1e-9)
        assert report.condition == "regular_strict"
        assert report.extras["min_form"] == pytest.approx(2.0)

    def test_skew_projector_scaled(self, spec):
        report = check_regular(SkewProjectorA(0.25), spec)
        assert_certificate(report, HOLDS, margin=0.5, atol=1e-9)

    def test_conformal_as_printed_fails(self, spec):
        report = check_regular(ConformalA(1), spec)
        assert_certificate(report, FAILS, margin=-1.0, atol=1e-9)
        xi = np.asarray(report.witness["xi"])
        eta = np.asarray(report.witness["eta"])
        assert abs(xi @ eta) <= 1e-10

    def test_conformal_signflip_holds(self, spec):
        report = check_regular(ConformalA(-1), spec)
        assert_certificate(report, HOLDS, margin=1.0, atol=1e-9)

    def test_covering_radius(self, spec):
        report = check_regular(SkewProjectorA(1.0), spec)
        rho = report.extras["covering_radius"]
        assert rho == pytest.approx(1.0 / (2 * 2 * report.extras["max_dpA"]))
        zero = check_regular(ZeroA(), spec)
        assert zero.extras["covering_radius"] is None
        assert zero.holds

    def test_needs_two_dimensions(self):
        with pytest.raises(DomainError):
            check_regular(ZeroA(), SamplingSpec(n=1))

    def test_seed_recorded(self, spec):
        report = check_regular(ZeroA(), spec)
        assert report.seed == 7
        assert report.samples == spec.size * spec.n_pairs
        assert report.to_dict()["verdict"] == HOLDS


class TestBtildeConvex:
    def test_quadratic_source(self, spec):
        report = check_Btilde_convex(PowerB(1.0, 1.0), 1, spec)
        assert_certificate(report, HOLDS, margin=2.0, atol=1e-9)

    def test_quarter_power_fails_far_out(self):
        s = SamplingSpec(n=2, n_x=2, n_z=1, n_p=32, P=2.0, seed=3)
        report = check_Btilde_convex(PowerB(1.0, 0.25), 1, s)
        assert report.fails
        assert report.witness["p_norm"] ** 2 > 2.0

    def test_quarter_power_holds_near_origin(self):
        s = SamplingSpec(n=2, n_x=2, n_z=1, n_p=32, P=1.0, seed=3)
        assert check_Btilde_convex(PowerB(1.0, 0.25), 1, s).holds


class TestMonotone:
    def test_constant_data(self, spec):
        reports = check_monotone(SkewProjectorA(), ConstB(), 2, spec)
        assert [r.condition for r in reports] == ["A_monotone", "Btilde_monotone"]
        for report in reports:
            assert_certificate(report, HOLDS, margin=0.0)

    def test_decreasing_source(self, spec):
        _, b_report = check_monotone(ZeroA(), ExpUB(1.0, -1.0), 2, spec)
        assert b_report.fails

    def test_decreasing_coefficient(self, spec):
        a_report, _ = check_monotone(UDiagA("linear", -1.0), ConstB(), 2, spec)
        assert_certificate(a_report, FAILS, margin=-1.0)

    def test_missing_z_derivative(self, spec):
        class NoDz(CoefficientA):
            depends_on_z = True

            def _value(self, x, z, p):
                return z[..., None, None] * np.eye(x.shape[-1])

        a_report, _ = check_monotone(NoDz(), ConstB(), 2, spec)
        assert a_report.verdict == INCONCLUSIVE
        assert a_report.extras["reason"] == "no analytic z-derivative"


class TestFieldChecks:
    def test_exact_solution(self, paraboloid_problem, paraboloid_field):
        assert check_admissible_field(paraboloid_field, paraboloid_problem).holds
        strict = check_admissible_field(
            paraboloid_field, paraboloid_problem, "strict_gamma"
        )
        assert strict.holds
        assert strict.extras["delta"] == pytest.approx(1.0)
        for mode in ("subsolution", "supersolution"):
            report = check_admissible_field(paraboloid_field, paraboloid_problem, mode)
            assert_certificate(report, HOLDS, margin=0.0, atol=1e-10)

    def test_strict_default_gap_is_positive(self, paraboloid_problem, paraboloid_field):
        weak = check_admissible_field(
            paraboloid_field, paraboloid_problem, "subsolution"
        )
        assert weak.holds
        report = check_admissible_field(
            paraboloid_field, paraboloid_problem, "strict_subsolution"
        )
        assert report.fails
        assert report.extras["gap"] == pytest.approx(4e-8)
        assert report.margin == pytest.approx(-4e-8, abs=1e-12)

    def test_strict_gap(self, paraboloid_problem, paraboloid_field):
        report = check_admissible_field(
            paraboloid_field, paraboloid_problem, "strict_subsolution", delta=0.1
        )
        assert_certificate(report, FAILS, margin=-0.1, atol=1e-10)

    def test_concave_field(self, paraboloid_problem, paraboloid_field):
        concave = GridField(paraboloid_field.grid, -paraboloid_field.values)
        report = check_admissible_field(concave, paraboloid_problem)
        assert report.fails
        assert len(report.witness["node"]) == 2
        sub = check_admissible_field(concave, paraboloid_problem, "subsolution")
        assert sub.fails
        assert sub.extras["outside_cone"]

    def test_unknown_mode(self, paraboloid_problem, paraboloid_field):
        with pytest.raises(DomainError):
            check_admissible_field(paraboloid_field, paraboloid_problem, "bogus")

    def test_perturb_strict(self, paraboloid_problem, paraboloid_field):
        u_sub = perturb_strict(paraboloid_field, 0.01, 1.0)
        report = check_admissible_field(
            u_sub, paraboloid_problem, "strict_subsolution", delta=1e-3
        )
        assert report.holds

    def test_perturb_admissible(self, paraboloid_problem, paraboloid_field):
        v = perturb_admissible(paraboloid_field, 0.5)
        assert check_admissible_field(v, paraboloid_problem, "strict_gamma").holds
        report = check_admissible_field(v, paraboloid_problem, "supersolution")
        assert_certificate(report, HOLDS, margin=0.75, atol=1e-10)

    def test_A_bounded(self, paraboloid_problem, paraboloid_field):
        report = check_A_bounded(
            paraboloid_field, paraboloid_field, paraboloid_problem, 0.5
        )
        assert_certificate(report, HOLDS, margin=0.5, atol=1e-10)

    def test_A_bounded_grids_differ(self, paraboloid_problem, paraboloid_field):
        from hessdir.grid import BoxGrid

        other = GridField.from_function(
            BoxGrid.for_problem(paraboloid_problem, 5), paraboloid_problem.phi
        )
        with pytest.raises(DomainError):
            check_A_bounded(other, paraboloid_field, paraboloid_problem, 0.5)


class TestDomain:
    def test_ball(self):
        frames = ball_frames(2.0, 3, 6, seed=1)
        np.testing.assert_allclose(frames[0].curvature, 0.5 * np.eye(2), atol=1e-12)
        report = check_domain_convex(frames, ZeroA(), np.zeros((1, 3)), 2, 0.5)
        assert_certificate(report, HOLDS, margin=0.5, atol=1e-12)

    def test_flat_face(self):
        frames = box_face_frames([0.0, 0.0], [1.0, 1.0], 0, 1, 4)
        assert np.all(frames[0].gamma == [1.0, 0.0])
        report = check_domain_convex(frames, ZeroA(), np.zeros((1, 2)), 2, 0.1)
        assert_certificate(report, FAILS, margin=-0.1, atol=1e-12)
        # S_0 = 1 on any boundary
        assert check_domain_convex(frames, ZeroA(), np.zeros((1, 2)), 1, 0.1).holds

    def test_skew_projector_convexifies_flat_face(self):
        frames = box_face_frames([0.0, 0.0], [1.0, 1.0], 1, 0, 3)
        p = np.array([[0.0, 1.0]])
        report = check_domain_convex(frames, SkewProjectorA(1.0), p, 2, 0.0)
        # gamma = -e2, p = e2: -D_p A gamma on the tangent e1 is 2
        assert_certificate(report, HOLDS, margin=2.0, atol=1e-12)

    def test_ellipse(self):
        frames = ellipse_frames(2.0, 1.0, 8)
        report = check_domain_convex(frames, ZeroA(), np.zeros((1, 2)), 2, 0.0)
        assert report.holds
        assert report.margin == pytest.approx(0.25)

    def test_frame_validation(self):
        with pytest.raises(DomainError):
            BoundaryFrame(
                np.zeros(2),
                np.array([2.0, 0.0]),
                np.array([[0.0, 1.0]]),
                np.zeros((2, 2)),
            )
        with pytest.raises(DomainError):
            check_domain_convex([], ZeroA(), np.zeros((1, 2)), 2, 0.0)


class TestTransform:
    def test_translation_moves_solution(self):
        prob = _x_diag_problem()
        moved = transform_problem(prob, translate=[0.5, -2.0])
        assert moved.lo == (0.5, -2.0)
        u, _ = solve(prob, 9)
        v, _ = solve(moved, 9)
        np.testing.assert_allclose(v.values, u.values, atol=1e-8)

    def test_axis_swap_moves_solution(self):
        prob = _x_diag_problem(lo=[0.0, -0.5], hi=[1.0, 0.5])
        Q = np.array([[0.0, 1.0], [1.0, 0.0]])
        moved = transform_problem(prob, rotate=Q)
        assert moved.domain_exact
        assert moved.lo == (-0.5, 0.0)
        u, _ = solve(prob, 9)
        v, _ = solve(moved, 9)
        np.testing.assert_allclose(v.values, u.values.T, atol=1e-8)

    def test_rotation_keeps_regularity(self, spec):
        theta = 0.3
        Q = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        prob = ProblemSpec(2, 2, -1.0, 1.0, ConformalA(1), ConstB(), quadratic_field())
        moved = transform_problem(prob, rotate=Q)
        assert not moved.domain_exact
        report = check_regular(moved.A, spec)
        assert_certificate(report, FAILS, margin=-1.0, atol=1e-9)
        with pytest.raises(DomainError):
            solve(moved, 5)

    def test_rotated_coefficient(self, rng):
        Q = np.array([[0.0, -1.0], [1.0, 0.0]])
        prob = ProblemSpec(2, 2, -1.0, 1.0, XDiagA(1.0), ConstB(), quadratic_field())
        A = transform_problem(prob, rotate=Q).A
        x = rng.normal(size=(4, 2))
        expected = np.einsum("ia,...ab,jb->...ij", Q, XDiagA(1.0)(x @ Q, 0.0, x), Q)
        np.testing.assert_allclose(A(x, 0.0, x), expected)

    def test_arguments(self, paraboloid_problem):
        with pytest.raises(DomainError):
            transform_problem(paraboloid_problem)
        with pytest.raises(DomainError):
            transform_problem(
                paraboloid_problem, translate=[0.0, 0.0], rotate=np.eye(2)
            )
        with pytest.raises(DomainError):
            transform_problem(paraboloid_problem, rotate=2.0 * np.eye(2))

    def test_signed_permutation(self):
        assert is_signed_permutation([[0.0, -1.0], [1.0, 0.0]])
        assert is_signed_permutation(np.eye(3))
        assert not is_signed_permutation([[0.6, -0.8], [0.8, 0.6]])
