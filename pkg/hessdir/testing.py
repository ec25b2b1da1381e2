"""
Testing functionality for hessdir objects: assertion helpers and
brute-force oracles.
"""
from itertools import combinations

import numpy as np

from hessdir.grid import GridField
from hessdir.symfun import matrix_F_grad, matrix_Sk


def esp_subsets(lam, k):
    """
    ``S_k`` by explicit enumeration of k-subsets.

    Parameters
    ----------
    lam : array-like, shape (n,)
    k : int

    Returns
    -------
    float
    """
    lam = np.asarray(lam, dtype=float)
    if k == 0:
        return 1.0
    return float(sum(np.prod(lam[list(c)]) for c in combinations(range(lam.size), k)))


def sk_principal_minors(W, k):
    """``S_k`` of a symmetric matrix as the sum of its principal k x k minors."""
    W = np.asarray(W, dtype=float)
    if k == 0:
        return 1.0
    n = W.shape[0]
    return float(
        sum(np.linalg.det(W[np.ix_(c, c)]) for c in combinations(range(n), k))
    )


def fd_F_grad(W, k, step=1e-6):
    """
    Central finite differences of ``S_k(W) ** (1/k)`` per matrix entry.

    Off-diagonal entries are perturbed symmetrically and halved, matching
    the convention that ``F^{ij}`` and ``F^{ji}`` share the change.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]

    def f(M):
        return matrix_Sk(M, k) ** (1.0 / k)

    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = step
            diff = (f(W + E) - f(W - E)) / (2.0 * step)
            out[i, j] = out[j, i] = diff if i == j else 0.5 * diff
    return out


def fd_andrews_form(W, Eta, k, step=1e-4):
    """Second central difference of ``S_k ** (1/k)`` along ``Eta``."""
    W = np.asarray(W, dtype=float)
    Eta = np.asarray(Eta, dtype=float)

    def f(M):
        return matrix_Sk(M, k) ** (1.0 / k)

    return (f(W + step * Eta) - 2.0 * f(W) + f(W - step * Eta)) / step**2


def fd_directional(W, Eta, k, step=1e-6):
    """First central difference of ``S_k ** (1/k)`` along ``Eta``; compare
    with ``sum F^{ij} Eta_ij`` from :func:`hessdir.symfun.matrix_F_grad`."""
    W = np.asarray(W, dtype=float)
    Eta = np.asarray(Eta, dtype=float)

    def f(M):
        return matrix_Sk(M, k) ** (1.0 / k)

    return (f(W + step * Eta) - f(W - step * Eta)) / (2.0 * step)


def assert_field_equal(left, right, atol=0.0, rtol=0.0, check_name=False):
    """
    Check that two grid fields live on one grid and agree.

    Parameters
    ----------
    left, right : GridField
    atol, rtol : float, default 0.0
        Zero tolerances require bitwise equality.
    check_name : bool, default False
    """
    assert isinstance(left, GridField), f"left is a {type(left)}"
    assert isinstance(right, GridField), f"right is a {type(right)}"
    assert left.grid == right.grid, f"grids differ: {left.grid} != {right.grid}"
    if check_name:
        assert left.name == right.name, f"names differ: {left.name} != {right.name}"
    if atol == 0.0 and rtol == 0.0:
        assert np.array_equal(left.values, right.values), "field values differ"
    else:
        np.testing.assert_allclose(left.values, right.values, atol=atol, rtol=rtol)


def assert_certificate(report, verdict, margin=None, atol=1e-8):
    """
    Check a certificate's verdict and, optionally, its margin.

    The margin sign must agree with the verdict: a failing certificate has
    ``margin < -tol``.
    """
    assert report.verdict == verdict, (
        f"{report.condition}: expected {verdict}, got {report.verdict} "
        f"(margin {report.margin!r}, witness {report.witness!r})"
    )
    if report.verdict == "fails":
        assert report.margin < -report.tol
    if margin is not None:
        assert abs(report.margin - margin) <= atol, (
            f"{report.condition}: margin {report.margin!r} != {margin!r}"
        )


def assert_F_grad_matches(W, k, rtol=1e-6, step=1e-6):
    """Compare :func:`hessdir.symfun.matrix_F_grad` with finite differences."""
    _, F = matrix_F_grad(W, k)
    expected = fd_F_grad(W, k, step)
    scale = max(1.0, float(np.max(np.abs(expected))))
    np.testing.assert_allclose(F, expected, rtol=0, atol=rtol * scale)
