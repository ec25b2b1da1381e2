from math import comb

import numpy as np

from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hessdir.errors import AdmissibilityError, DomainError, NumericError
from hessdir.symfun import (
    BOUNDARY,
    INTERIOR,
    OUTSIDE,
    andrews_form,
    as_symmat,
    cone_classify,
    cone_margin,
    elem_sym,
    elem_sym_all,
    elem_sym_grad,
    f_eval,
    f_hessian,
    find_R,
    matrix_F_grad,
    matrix_Sk,
    newton_tensor,
)

import pytest
from hessdir.testing import (
    assert_F_grad_matches,
    esp_subsets,
    fd_andrews_form,
    fd_directional,
    sk_principal_minors,
)


def _admissible_matrix(rng, n, shift=None):
    X = rng.normal(size=(n, n))
    shift = n + 1.0 if shift is None else shift
    return shift * np.eye(n) + 0.3 * (X + X.T)


def _gapped_matrix(rng, n, gap=0.5):
    lam = 2.0 + gap * np.arange(n)
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return Q @ np.diag(lam) @ Q.T


class TestElemSym:
    def test_worked_example(self):
        assert elem_sym([1.0, 1.0, -0.4], 2) == pytest.approx(0.2, abs=1e-12)

    @seed(1)
    @settings(max_examples=200, deadline=None)
    @given(
        lam=arrays(
            np.float64,
            st.integers(1, 8),
            elements=st.floats(-10.0, 10.0, allow_nan=False),
        ),
        data=st.data(),
    )
    def test_matches_subset_enumeration(self, lam, data):
        k = data.draw(st.integers(1, lam.size))
        expected = esp_subsets(lam, k)
        scale = esp_subsets(np.abs(lam), k)
        assert abs(elem_sym(lam, k) - expected) <= 1e-12 * (1.0 + scale)

    def test_all_orders_batch(self, rng):
        lam = rng.normal(size=(5, 4))
        out = elem_sym_all(lam, 3)
        assert out.shape == (5, 4)
        np.testing.assert_array_equal(out[:, 0], 1.0)
        for row, values in zip(lam, out):
            for k in range(1, 4):
                assert values[k] == pytest.approx(esp_subsets(row, k), abs=1e-12)

    def test_order_zero_is_one(self):
        assert elem_sym_all([3.0, -1.0], 0).tolist() == [1.0]

    def test_constant_tuple(self):
        assert elem_sym(np.full(5, 2.0), 3) == pytest.approx(comb(5, 3) * 8.0)

    @pytest.mark.parametrize("k", [0, 4, 2.5])
    def test_bad_order(self, k):
        with pytest.raises(DomainError):
            elem_sym([1.0, 2.0, 3.0], k)

    def test_non_finite(self):
        with pytest.raises(NumericError):
            elem_sym([1.0, np.nan], 1)

    def test_gradient(self, rng):
        lam = rng.normal(size=4)
        grad = elem_sym_grad(lam, 3)
        h = 1e-6
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            fd = (elem_sym(lam + e, 3) - elem_sym(lam - e, 3)) / (2 * h)
            assert grad[i] == pytest.approx(fd, abs=1e-7)


class TestCone:
    def test_interior(self):
        cc = cone_classify([1.0, 1.0, -0.4], 2)
        assert cc.label == INTERIOR
        assert cc.violated is None
        assert cc.margins == pytest.approx((1.6, 0.2))

    def test_outside_names_order(self):
        cc = cone_classify([1.0, 1.0, -0.4], 3)
        assert cc.label == OUTSIDE
        assert cc.violated == 3
        assert not cc.is_admissible

    def test_boundary(self):
        cc = cone_classify([1.0, 0.0, 0.0], 2)
        assert cc.label == BOUNDARY
        assert cc.is_admissible

    def test_margin_of_constant_tuple(self):
        assert cone_margin([2.0, 2.0, 2.0], 2) == pytest.approx(2.0)
        assert cone_margin([-1.0, -1.0], 1) == pytest.approx(-1.0)

    def test_margin_sign_matches_label(self, rng):
        lam = rng.normal(size=(500, 3)) + 0.5
        margins = cone_margin(lam, 2)
        for row, margin in zip(lam, margins):
            label = cone_classify(row, 2, tol=0.0).label
            assert (margin > 0) == (label == INTERIOR)

    def test_nesting(self, rng):
        lam = rng.normal(size=(2000, 4)) + 0.7
        for row in lam:
            labels = [cone_classify(row, k, tol=0.0).label for k in range(1, 5)]
            for lower, upper in zip(labels, labels[1:]):
                if upper == INTERIOR:
                    assert lower == INTERIOR

    def test_maclaurin_chain(self, rng):
        lam = np.abs(rng.normal(size=(300, 5))) + 0.01
        n = 5
        for row in lam:
            means = [
                (elem_sym(row, j) / comb(n, j)) ** (1.0 / j) for j in range(1, n + 1)
            ]
            assert np.all(np.diff(means) <= 1e-12 * (1 + max(means)))


class TestOperator:
    def test_gradient_positive_inside(self, rng):
        jet = f_eval([3.0, 2.0, 1.0], 2)
        assert jet.value == pytest.approx(np.sqrt(11.0))
        assert np.all(jet.grad > 0)

    def test_gradient_ordering(self):
        # larger eigenvalues get smaller weights
        jet = f_eval([3.0, 2.0, 1.0], 2)
        assert jet.grad[0] < jet.grad[1] < jet.grad[2]

    def test_outside_raises(self):
        with pytest.raises(AdmissibilityError) as err:
            f_eval([1.0, -2.0], 2)
        assert err.value.index == 1

    def test_boundary_value_zero(self):
        jet = f_eval([1.0, 0.0], 2)
        assert jet.value == 0.0
        assert np.all(np.isnan(jet.grad))

    def test_concavity_along_segments(self, rng):
        for _ in range(2000):
            a = np.abs(rng.normal(size=3)) + 0.1
            b = np.abs(rng.normal(size=3)) + 0.1
            t = rng.uniform()
            mid = f_eval(t * a + (1 - t) * b, 2).value
            ends = t * f_eval(a, 2).value + (1 - t) * f_eval(b, 2).value
            assert mid >= ends - 1e-12

    def test_hessian_matches_gradient_differences(self):
        lam = np.array([3.0, 2.0, 1.5])
        H = f_hessian(lam, 2)
        h = 1e-6
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd = (f_eval(lam + e, 2).grad - f_eval(lam - e, 2).grad) / (2 * h)
            np.testing.assert_allclose(H[i], fd, atol=1e-6)


class TestMatrix:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_Sk_matches_principal_minors(self, rng, n):
        for _ in range(20):
            X = rng.normal(size=(n, n))
            W = X + X.T
            for k in range(1, n + 1):
                expected = sk_principal_minors(W, k)
                assert matrix_Sk(W, k) == pytest.approx(expected, rel=1e-10, abs=1e-10)

    def test_as_symmat_rejects_asymmetric(self):
        with pytest.raises(DomainError):
            as_symmat([[1.0, 2.0], [0.0, 1.0]])

    def test_as_symmat_rejects_non_square(self):
        with pytest.raises(DomainError):
            as_symmat(np.ones((2, 3)))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_F_grad_matches_differences(self, rng, n):
        for _ in range(10):
            W = _admissible_matrix(rng, n)
            for k in range(1, n + 1):
                assert_F_grad_matches(W, k)

    def test_F_grad_positive_definite(self, rng):
        W = _admissible_matrix(rng, 3)
        _, F = matrix_F_grad(W, 2)
        assert np.all(np.linalg.eigvalsh(F) > 0)

    def test_F_grad_degenerate_eigenvalues(self):
        W = np.diag([2.0, 2.0, 1.0])
        _, F = matrix_F_grad(W, 2)
        expected = np.diag(f_eval([2.0, 2.0, 1.0], 2).grad)
        np.testing.assert_allclose(F, expected, atol=1e-14)

    def test_F_grad_outside(self):
        with pytest.raises(AdmissibilityError):
            matrix_F_grad(-np.eye(2), 1)

    def test_newton_tensor_trace(self, rng):
        n, k = 4, 3
        W = _admissible_matrix(rng, n)
        T, e = newton_tensor(W, k)
        assert np.trace(T) == pytest.approx((n - k + 1) * e[k - 1])

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_andrews_form_matches_second_differences(self, rng, n):
        for k in range(1, n + 1):
            W = _gapped_matrix(rng, n)
            X = rng.normal(size=(n, n))
            Eta = X + X.T
            value = andrews_form(W, Eta, k)
            expected = fd_andrews_form(W, Eta, k)
            assert value == pytest.approx(expected, rel=1e-5, abs=1e-5)

    def test_andrews_form_concave(self, rng):
        for _ in range(50):
            W = _admissible_matrix(rng, 3)
            X = rng.normal(size=(3, 3))
            assert andrews_form(W, X + X.T, 2) <= 1e-10

    def test_andrews_form_degenerate_limit(self, rng):
        W = np.eye(3) * 2.0
        X = rng.normal(size=(3, 3))
        Eta = X + X.T
        value = andrews_form(W, Eta, 2)
        assert value == pytest.approx(fd_andrews_form(W, Eta, 2), rel=1e-4, abs=1e-5)

    def test_directional_derivative(self, rng):
        W = _admissible_matrix(rng, 3)
        X = rng.normal(size=(3, 3))
        Eta = X + X.T
        _, F = matrix_F_grad(W, 3)
        assert np.sum(F * Eta) == pytest.approx(fd_directional(W, Eta, 3), rel=1e-6)


class TestFindR:
    def test_shift(self):
        R = find_R([np.array([1.0, 1.0])], 2.0, 2, tol=1e-8)
        assert R == pytest.approx(3.0, abs=1e-7)

    def test_already_above(self):
        assert find_R([np.array([4.0, 4.0])], 1.0, 2) == 0.0

    def test_bad_level(self):
        with pytest.raises(DomainError):
            find_R([np.array([1.0, 1.0])], 0.0, 2)

    def test_sample_outside(self):
        with pytest.raises(AdmissibilityError):
            find_R([np.array([1.0, -3.0])], 1.0, 2)
