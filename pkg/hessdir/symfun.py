"""
Elementary symmetric functions, Garding cones and the normalized k-Hessian.

Eigenvalue tuples are 1-D float arrays (or stacks of them along the last
axis); symmetric matrices are ``(..., n, n)`` float arrays. The operator is
the normalized ``f(lambda) = S_k(lambda) ** (1/k)``, concave on the open cone
``Gamma_k^+ = {S_j > 0, 1 <= j <= k}``.
"""
from dataclasses import dataclass
from math import comb

import numpy as np

from hessdir._config import options
from hessdir.errors import AdmissibilityError, DomainError, NumericError

INTERIOR = "interior"
BOUNDARY = "boundary"
OUTSIDE = "outside"

#: relative eigenvalue gap below which divided differences use their limit
DEGENERATE_GAP = 1e-8

#: relative asymmetry accepted by :func:`as_symmat` before symmetrizing
SYMMETRY_TOL = 1e-12


def _as_tuple(lam):
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0 or lam.shape[-1] < 1:
        raise DomainError("an eigenvalue tuple needs at least one entry")
    if not np.all(np.isfinite(lam)):
        raise NumericError("eigenvalue tuple has non-finite entries")
    return lam


def _check_order(k, n, low=1):
    if isinstance(k, (bool, np.bool_)) or int(k) != k:
        raise DomainError(f"order k={k!r} is not an integer")
    k = int(k)
    if not low <= k <= n:
        raise DomainError(f"order k={k} must satisfy {low} <= k <= n={n}")
    return k


def _esp(lam, k):
    """S_0..S_k of the last axis by the one-pass recurrence (no checks).

    Coefficients of prod(1 + lam_i t) truncated at degree k. Negative ``k``
    yields an empty trailing axis.
    """
    e = np.zeros(lam.shape[:-1] + (max(k, -1) + 1,))
    if k < 0:
        return e
    e[..., 0] = 1.0
    for i in range(lam.shape[-1]):
        # right-hand side is evaluated on the old coefficients
        e[..., 1:] = e[..., 1:] + lam[..., i, None] * e[..., :-1]
    return e


def _esp_order(lam, k):
    if k < 0:
        return np.zeros(lam.shape[:-1])
    return _esp(lam, k)[..., k]


def _esp_drop_one(lam, k):
    """S_k of ``lam`` with entry i removed, for every i (last axis)."""
    n = lam.shape[-1]
    out = np.empty(lam.shape)
    for i in range(n):
        out[..., i] = _esp_order(np.delete(lam, i, axis=-1), k)
    return out


def _esp_drop_two(lam, k):
    """S_k of ``lam`` with entries i and j removed; zero diagonal."""
    n = lam.shape[-1]
    out = np.zeros(lam.shape + (n,))
    for i in range(n):
        for j in range(i + 1, n):
            val = _esp_order(np.delete(lam, [i, j], axis=-1), k)
            out[..., i, j] = val
            out[..., j, i] = val
    return out


def default_cone_tol(lam):
    """Tolerance band ``cone_tol * (1 + |lambda|_1)`` of a tuple."""
    lam = np.asarray(lam, dtype=float)
    return options.cone_tol * (1.0 + np.abs(lam).sum(axis=-1))


def elem_sym_all(lam, k):
    """
    All elementary symmetric functions ``S_0, ..., S_k``.

    Parameters
    ----------
    lam : array-like, shape (..., n)
        Eigenvalue tuple(s) along the last axis.
    k : int
        Highest order, ``0 <= k <= n``.

    Returns
    -------
    np.ndarray, shape (..., k + 1)
    """
    lam = _as_tuple(lam)
    k = _check_order(k, lam.shape[-1], low=0)
    return _esp(lam, k)


def elem_sym(lam, k):
    """
    The k-th elementary symmetric function of an eigenvalue tuple.

    ``S_k(lambda)`` is the degree-k coefficient of ``prod(1 + lambda_i t)``,
    accumulated in a single pass in O(nk) operations.

    Parameters
    ----------
    lam : array-like, shape (..., n)
    k : int
        ``1 <= k <= n``.

    Returns
    -------
    float or np.ndarray

    Examples
    --------
    >>> round(elem_sym([1.0, 1.0, -0.4], 2), 12)
    0.2
    """
    lam = _as_tuple(lam)
    k = _check_order(k, lam.shape[-1])
    out = _esp(lam, k)[..., k]
    return float(out) if out.ndim == 0 else out


def elem_sym_grad(lam, k):
    """
    Gradient of ``S_k`` with respect to the tuple entries.

    The i-th entry is ``S_{k-1}`` of the tuple with entry i deleted.

    Parameters
    ----------
    lam : array-like, shape (..., n)
    k : int

    Returns
    -------
    np.ndarray, shape (..., n)
    """
    lam = _as_tuple(lam)
    k = _check_order(k, lam.shape[-1])
    return _esp_drop_one(lam, k - 1)


@dataclass(frozen=True)
class ConeClass:
    """Classification of a tuple against ``Gamma_k``.

    ``margins[j - 1]`` holds ``S_j(lambda)`` for ``j = 1..k``.
    """

    label: str
    margins: tuple
    tol: float

    @property
    def violated(self):
        """The first order j with ``S_j < -tol``, or None."""
        for j, margin in enumerate(self.margins, start=1):
            if margin < -self.tol:
                return j
        return None

    @property
    def is_admissible(self):
        return self.label != OUTSIDE


@dataclass(frozen=True)
class OperatorJet:
    """Value and gradient of ``f = S_k ** (1/k)`` at a tuple."""

    value: float
    grad: np.ndarray
    coneclass: ConeClass


def cone_classify(lam, k, tol=None):
    """
    Classify an eigenvalue tuple against the Garding cone.

    Parameters
    ----------
    lam : array-like, shape (n,)
    k : int
    tol : float, optional
        Width of the boundary band. Defaults to
        ``options.cone_tol * (1 + |lambda|_1)``.

    Returns
    -------
    ConeClass
        ``interior`` iff every ``S_j > tol``; ``outside`` iff some
        ``S_j < -tol``; ``boundary`` otherwise.
    """
    lam = _as_tuple(lam)
    if lam.ndim != 1:
        raise DomainError("cone_classify expects a single tuple")
    k = _check_order(k, lam.size)
    if tol is None:
        tol = float(default_cone_tol(lam))
    if tol < 0:
        raise DomainError(f"tol={tol} must be non-negative")
    margins = _esp(lam, k)[1:]
    if np.all(margins > tol):
        label = INTERIOR
    elif np.any(margins < -tol):
        label = OUTSIDE
    else:
        label = BOUNDARY
    return ConeClass(label, tuple(float(m) for m in margins), float(tol))


def cone_margin(lam, k):
    """
    Signed distance-like margin of tuples from the cone boundary.

    ``min_j sign(S_j) |S_j / C(n, j)| ** (1/j)`` over ``j = 1..k``. It has the
    units of ``lambda``, is positive exactly on ``Gamma_k^+`` and equals the
    common value for a constant tuple.

    Parameters
    ----------
    lam : array-like, shape (..., n)
    k : int

    Returns
    -------
    float or np.ndarray, shape (...)
    """
    lam = _as_tuple(lam)
    n = lam.shape[-1]
    k = _check_order(k, n)
    e = _esp(lam, k)
    out = None
    for j in range(1, k + 1):
        mean = e[..., j] / comb(n, j)
        root = np.sign(mean) * np.abs(mean) ** (1.0 / j)
        out = root if out is None else np.minimum(out, root)
    return float(out) if np.ndim(out) == 0 else out


def _raise_outside(coneclass, where=""):
    j = coneclass.violated
    margin = coneclass.margins[j - 1]
    raise AdmissibilityError(
        f"tuple lies outside Gamma_k{where}: S_{j} = {margin!r} < "
        f"-{coneclass.tol!r}",
        index=j,
        margin=margin,
    )


def f_eval(lam, k, tol=None):
    """
    Evaluate ``f = S_k ** (1/k)`` and its gradient.

    Parameters
    ----------
    lam : array-like, shape (n,)
    k : int
    tol : float, optional
        Cone tolerance, see :func:`cone_classify`.

    Returns
    -------
    OperatorJet
        ``value`` is zero on the cone boundary. ``grad`` is strictly positive
        inside the cone; on the boundary it is undefined (NaN) for k > 1.

    Raises
    ------
    AdmissibilityError
        If the tuple is outside the cone; ``index`` is the violated order.
    """
    lam = _as_tuple(lam)
    cc = cone_classify(lam, k, tol)
    if cc.label == OUTSIDE:
        _raise_outside(cc)
    k = int(k)
    sk = max(cc.margins[-1], 0.0)
    value = sk ** (1.0 / k)
    dsk = _esp_drop_one(lam, k - 1)
    if k == 1:
        grad = dsk
    elif sk > 0:
        grad = (1.0 / k) * sk ** (1.0 / k - 1.0) * dsk
    else:
        grad = np.full(lam.shape, np.nan)
    return OperatorJet(value, grad, cc)


def f_hessian(lam, k):
    """
    Hessian of ``f = S_k ** (1/k)`` in eigenvalue space.

    Parameters
    ----------
    lam : array-like, shape (n,)
        A tuple in ``Gamma_k^+``.
    k : int

    Returns
    -------
    np.ndarray, shape (n, n)
    """
    lam = _as_tuple(lam)
    cc = cone_classify(lam, k)
    if cc.label != INTERIOR:
        raise AdmissibilityError(
            "the Hessian of f needs a tuple inside Gamma_k^+",
            index=cc.violated,
            margin=min(cc.margins),
        )
    k = int(k)
    sk = cc.margins[-1]
    d1 = _esp_drop_one(lam, k - 1)
    d2 = _esp_drop_two(lam, k - 2)
    c1 = (1.0 / k) * (1.0 / k - 1.0) * sk ** (1.0 / k - 2.0)
    c2 = (1.0 / k) * sk ** (1.0 / k - 1.0)
    return c1 * np.outer(d1, d1) + c2 * d2


def as_symmat(W, name="W"):
    """
    Validate and symmetrize a (stack of) square matrices.

    Entries must be finite and ``|w_ij - w_ji| <= 1e-12 * max(1, |W|_max)``.

    Returns
    -------
    np.ndarray
        ``(W + W^T) / 2``.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim < 2 or W.shape[-1] != W.shape[-2] or W.shape[-1] < 1:
        raise DomainError(f"{name} must be a square matrix, got shape {W.shape}")
    if not np.all(np.isfinite(W)):
        raise NumericError(f"{name} has non-finite entries")
    Wt = np.swapaxes(W, -1, -2)
    scale = max(1.0, float(np.max(np.abs(W))))
    if np.max(np.abs(W - Wt)) > SYMMETRY_TOL * scale:
        raise DomainError(f"{name} is not symmetric")
    return 0.5 * (W + Wt)


def _eigvalsh(W):
    try:
        return np.linalg.eigvalsh(W)
    except np.linalg.LinAlgError as err:
        raise NumericError(f"symmetric eigendecomposition failed: {err}")


def matrix_Sk(W, k):
    """
    ``S_k`` of the eigenvalues of a symmetric matrix.

    Equal to the sum of the principal k x k minors of ``W``.

    Parameters
    ----------
    W : array-like, shape (..., n, n)
    k : int

    Returns
    -------
    float or np.ndarray
    """
    W = as_symmat(W)
    k = _check_order(k, W.shape[-1])
    out = _esp(_eigvalsh(W), k)[..., k]
    return float(out) if out.ndim == 0 else out


def newton_tensor(W, k):
    """
    The derivative ``dS_k / dW`` as a polynomial in ``W``.

    ``T_{k-1}(W) = sum_j (-1)^j S_{k-1-j}(W) W^j``; exact under eigenvalue
    degeneracy.

    Parameters
    ----------
    W : np.ndarray, shape (..., n, n), symmetric
    k : int

    Returns
    -------
    T : np.ndarray, shape (..., n, n)
    e : np.ndarray, shape (..., k + 1)
        ``S_0..S_k`` of ``W``.
    """
    n = W.shape[-1]
    e = _esp(_eigvalsh(W), k)
    power = np.broadcast_to(np.eye(n), W.shape).copy()
    T = np.zeros(W.shape)
    for j in range(k):
        T += (-1) ** j * e[..., k - 1 - j, None, None] * power
        power = power @ W
    T = 0.5 * (T + np.swapaxes(T, -1, -2))
    return T, e


def operator_batch(W, k):
    """
    ``f(W)``, ``F^{ij}`` and ``S_0..S_k`` for a stack of matrices, unchecked.

    Nodes with ``S_k <= 0`` get ``f = 0`` and (for k > 1) an infinite
    scale clipped at ``S_k = tiny``; callers check the cone first.
    """
    T, e = newton_tensor(W, k)
    sk = np.clip(e[..., k], np.finfo(float).tiny, None)
    value = np.clip(e[..., k], 0.0, None) ** (1.0 / k)
    if k == 1:
        F = T
    else:
        F = ((1.0 / k) * sk ** (1.0 / k - 1.0))[..., None, None] * T
    return value, F, e


def matrix_F_grad(W, k, tol=None):
    """
    ``F = S_k(W) ** (1/k)`` and its gradient ``F^{ij} = dF / dw_ij``.

    Parameters
    ----------
    W : array-like, shape (n, n)
        Symmetric with eigenvalues in the closed cone ``Gamma_k``.
    k : int
    tol : float, optional
        Cone tolerance, see :func:`cone_classify`.

    Returns
    -------
    value : float
    Fij : np.ndarray, shape (n, n)
        Symmetric, positive definite inside ``Gamma_k^+``. Entries treat
        ``w_ij`` and ``w_ji`` as independent, so a symmetric perturbation
        ``E`` changes ``F`` by ``sum_ij F^{ij} E_ij``.

    Raises
    ------
    AdmissibilityError
    """
    W = as_symmat(W)
    if W.ndim != 2:
        raise DomainError("matrix_F_grad expects a single matrix")
    k = _check_order(k, W.shape[-1])
    cc = cone_classify(_eigvalsh(W), k, tol)
    if cc.label == OUTSIDE:
        _raise_outside(cc, " (eigenvalues of W)")
    value, F, _ = operator_batch(W, k)
    return float(value), F


def andrews_form(W, Eta, k, tol=None):
    """
    Second derivative ``F^{ij,kl} eta_ij eta_kl`` of ``F`` at ``W``.

    Evaluated in the eigenframe of ``W`` as the lambda-space Hessian form on
    the diagonal of the rotated ``Eta`` plus the divided-difference sum over
    its off-diagonal entries. Divided differences of nearly equal eigenvalues
    (gap below ``1e-8 * (1 + spectral radius)``) are replaced by their limit.

    Parameters
    ----------
    W : array-like, shape (n, n)
        Symmetric with eigenvalues in ``Gamma_k^+``.
    Eta : array-like, shape (n, n)
        Symmetric direction.
    k : int

    Returns
    -------
    float
        The off-diagonal contribution is non-positive, so the result never
        exceeds the diagonal (lambda-space) part.
    """
    W = as_symmat(W)
    Eta = as_symmat(Eta, name="Eta")
    if W.shape != Eta.shape or W.ndim != 2:
        raise DomainError("W and Eta must be single matrices of equal shape")
    n = W.shape[-1]
    k = _check_order(k, n)
    lam, Q = np.linalg.eigh(W)
    cc = cone_classify(lam, k, tol)
    if cc.label != INTERIOR:
        raise AdmissibilityError(
            "andrews_form needs W inside Gamma_k^+",
            index=cc.violated,
            margin=min(cc.margins),
        )
    Et = Q.T @ Eta @ Q
    diag = np.diag(Et)
    first = float(diag @ f_hessian(lam, k) @ diag)

    sk = cc.margins[-1]
    c2 = (1.0 / k) * sk ** (1.0 / k - 1.0)
    grad = c2 * _esp_drop_one(lam, k - 1)
    limit = -c2 * _esp_drop_two(lam, k - 2)
    scale = 1.0 + float(np.max(np.abs(lam)))
    second = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            gap = lam[i] - lam[j]
            if abs(gap) < DEGENERATE_GAP * scale:
                quotient = limit[i, j]
            else:
                quotient = (grad[i] - grad[j]) / gap
            second += quotient * Et[i, j] ** 2
    return first + second


def find_R(samples, C, k, tol=1e-6):
    """
    Smallest shift R with ``f(lambda_1, ..., lambda_n + R) >= C`` on samples.

    Parameters
    ----------
    samples : sequence of array-like, each shape (n,)
        Tuples inside ``Gamma_k^+``.
    C : float
        Target level, positive.
    k : int
    tol : float, default 1e-6
        Bisection tolerance on R.

    Returns
    -------
    float
        Zero when every sample already reaches ``C``; otherwise an upper
        bracket within ``tol`` of the exact shift.
    """
    samples = [_as_tuple(s) for s in samples]
    if len(samples) == 0:
        raise DomainError("find_R needs at least one sample")
    if not C > 0:
        raise DomainError(f"target level C={C} must be positive")

    def level(lam, shift):
        shifted = lam.copy()
        shifted[-1] += shift
        return max(elem_sym(shifted, k), 0.0) ** (1.0 / k)

    R = 0.0
    for lam in samples:
        cc = cone_classify(lam, k)
        if cc.label != INTERIOR:
            raise AdmissibilityError(
                "find_R samples must lie inside Gamma_k^+",
                index=cc.violated,
                margin=min(cc.margins),
            )
        if level(lam, 0.0) >= C:
            continue
        hi = 1.0
        while level(lam, hi) < C:
            hi *= 2.0
            if hi > 1e300:
                raise NumericError("no finite shift reaches the target level")
        lo = 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if level(lam, mid) >= C:
                hi = mid
            else:
                lo = mid
        R = max(R, hi)
    return R
