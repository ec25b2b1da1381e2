"""
Audits of second-derivative estimates and barrier inequalities on computed
grid fields.

Nothing here proves an estimate. The audits evaluate the inequalities the
estimates rest on at every grid node and report the constants that make them
hold, with the worst node as witness.
"""
import logging
import warnings
from dataclasses import asdict, dataclass, field, replace
from itertools import product

import numpy as np
import pandas as pd

from hessdir._config import options
from hessdir.errors import DomainError, HypothesisWarning
from hessdir.grid import GridField, discrete_jet, full_gradient, full_hessian
from hessdir.solver import apply_linearized, operator_trace
from hessdir.structure import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    CertificateReport,
    check_admissible_field,
)
from hessdir.symfun import (
    _eigvalsh,
    _esp,
    as_symmat,
    cone_classify,
    matrix_F_grad,
)
from hessdir.tools._parallel import map_ordered

logger = logging.getLogger(__name__)

DEFAULT_K = tuple(2.0**j for j in range(9))
DEFAULT_EPS1 = (0.0, 0.01, 0.1, 1.0)
DEFAULT_N = (0.1, 1.0, 10.0, 100.0)
DEFAULT_MU = (0.1, 0.5, 1.0)
DEFAULT_DELTA_STEPS = (2, 4, 8)

#: lower bound on S_{k-1}(W') for the double-normal cross-check
DOUBLE_NORMAL_FLOOR = 0.1

AUDIT_COLUMNS = ["K", "eps1", "C", "worst_node_index", "margin"]


@dataclass(frozen=True)
class BarrierParams:
    """
    Constants of the barrier inequalities.

    ``K``, ``eps1`` and ``C`` belong to the interior barrier; the boundary
    barrier adds ``mu``, ``N``, ``delta`` and ``M``; the auxiliary function
    adds ``a``, ``b`` and ``theta``.
    """

    K: float
    eps1: float = 0.0
    C: float = 0.0
    mu: float = None
    N: float = None
    delta: float = None
    M: float = None
    a: float = None
    b: float = None
    theta: float = 1.0 / 3.0

    def __post_init__(self):
        if not self.K > 0:
            raise DomainError(f"K={self.K!r} must be positive")
        if not (self.eps1 >= 0 and self.C >= 0):
            raise DomainError("eps1 and C must be non-negative")
        for name in ("mu", "N", "delta", "M", "a", "b"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise DomainError(f"{name}={value!r} must be positive")
        if not 0 < self.theta < 1:
            raise DomainError(f"theta={self.theta!r} must lie in (0, 1)")

    def to_dict(self):
        return asdict(self)


@dataclass
class EstimateAudit:
    """
    Second-derivative sizes of a grid field.

    ``C_emp = sup_interior / (1 + sup_boundary)`` with spectral norms of the
    Hessian; boundary Hessians use second-order one-sided stencils.
    """

    sup_interior: float
    sup_boundary: float
    C_emp: float
    argmax_interior: list
    argmax_boundary: list
    double_normal: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def normal_decomposition(W, k, axis):
    """
    Split ``S_k(W)`` along one coordinate direction.

    ``S_k(W) = w_nn S_{k-1}(W') + R`` where ``W'`` deletes row and column
    ``axis`` and ``R`` is ``S_k`` of ``W`` with ``w_nn`` set to zero.

    Parameters
    ----------
    W : array-like, shape (..., n, n)
    k : int
    axis : int

    Returns
    -------
    w_nn, s_km1, R : np.ndarray, shape (...)
    """
    W = as_symmat(W)
    n = W.shape[-1]
    if not 0 <= axis < n:
        raise DomainError(f"axis {axis} out of range for n={n}")
    w_nn = W[..., axis, axis]
    keep = [i for i in range(n) if i != axis]
    if keep:
        Wp = W[..., keep, :][..., :, keep]
        s_km1 = _esp(_eigvalsh(Wp), k - 1)[..., k - 1]
    else:
        s_km1 = np.ones(W.shape[:-2])
    W0 = W.copy()
    W0[..., axis, axis] = 0.0
    R = _esp(_eigvalsh(W0), k)[..., k]
    return w_nn, s_km1, R


def _spectral_norm(H):
    return np.max(np.abs(_eigvalsh(H)), axis=-1)


def _boundary_W(u, prob):
    grid = u.grid
    H = full_hessian(u.values, grid)
    Du = full_gradient(u.values, grid)
    A = prob.A(grid.coords, u.values, Du)
    return H, Du, 0.5 * (H - A + np.swapaxes(H - A, -1, -2))


def d2_stats(u, prob):
    """
    Interior and boundary second-derivative sups and ``C_emp``.

    The double-normal entry ``w_nn`` at face nodes is cross-checked against
    ``(B - R) / S_{k-1}(W')`` wherever ``S_{k-1}(W') >= 0.1``.

    Parameters
    ----------
    u : GridField
    prob : ProblemSpec

    Returns
    -------
    EstimateAudit
    """
    grid = u.grid
    H, Du, W = _boundary_W(u, prob)
    norms = _spectral_norm(H)
    inner = np.full(grid.m, -np.inf)
    inner[grid.interior] = norms[grid.interior]
    outer = np.where(grid.boundary_mask, norms, -np.inf)
    i_int = np.unravel_index(int(np.argmax(inner)), grid.m)
    i_bdry = np.unravel_index(int(np.argmax(outer)), grid.m)
    sup_int = float(inner[i_int])
    sup_bdry = float(outer[i_bdry])

    checked = 0
    worst = 0.0
    for axis in range(grid.n):
        for side in (0, 1):
            idx = grid.face_index(axis, side)
            w_nn, s_km1, R = normal_decomposition(W[idx], prob.k, axis)
            B = prob.B(grid.coords[idx], u.values[idx], Du[idx])
            ok = s_km1 >= DOUBLE_NORMAL_FLOOR
            if np.any(ok):
                inverted = (B[ok] - R[ok]) / s_km1[ok]
                worst = max(worst, float(np.max(np.abs(inverted - w_nn[ok]))))
                checked += int(ok.sum())
    return EstimateAudit(
        sup_interior=sup_int,
        sup_boundary=sup_bdry,
        C_emp=sup_int / (1.0 + sup_bdry),
        argmax_interior=[int(i) for i in i_int],
        argmax_boundary=[int(i) for i in i_bdry],
        double_normal={"nodes": checked, "max_discrepancy": worst},
    )


@dataclass
class BarrierAudit:
    """
    Table of ``C(K, eps1) = max_nodes (eps1 sum F^ii - calL phi)``, clamped
    at zero, for ``phi = exp(K (w - u))``.

    ``informative`` is set when a row has ``eps1 > 0`` and ``C <= C_cap``.
    """

    table: pd.DataFrame
    informative: bool
    C_cap: float
    variant: str
    trace_min: float
    trace_max: float
    hypothesis: CertificateReport = None

    def feasible_rows(self):
        t = self.table
        return t[(t["eps1"] > 0) & (t["C"] <= self.C_cap)]

    def to_dict(self):
        return {
            "table": self.table.to_dict(orient="records"),
            "informative": self.informative,
            "C_cap": self.C_cap,
            "variant": self.variant,
            "trace_min": self.trace_min,
            "trace_max": self.trace_max,
            "hypothesis": (
                None if self.hypothesis is None else self.hypothesis.to_dict()
            ),
        }


def interior_barrier_audit(
    u,
    w,
    prob,
    K_list=DEFAULT_K,
    eps1_list=DEFAULT_EPS1,
    C_cap=1e3,
    supersolution=False,
    operator="calL",
):
    """
    Audit the interior barrier inequality ``calL phi >= eps1 sum F^ii - C``.

    Parameters
    ----------
    u : GridField
        Admissible (computed) solution.
    w : GridField
        Strict subsolution or strictly admissible function (or, with
        ``supersolution=True``, a strict supersolution) on the same grid.
    prob : ProblemSpec
    K_list, eps1_list : sequence of float
    C_cap : float, default 1e3
    supersolution : bool, default False
    operator : {"calL", "L", "full"}

    Returns
    -------
    BarrierAudit
        One table row per ``(K, eps1)`` with the node attaining the maximum
        (flat index over the full grid) and ``margin = C_cap - C``.
    """
    if w.grid != u.grid:
        raise DomainError("u and the barrier field must share a grid")
    grid = u.grid
    if supersolution:
        hypothesis = check_admissible_field(w, prob, "strict_supersolution")
    else:
        # a strictly admissible field serves in place of a subsolution
        hypothesis = check_admissible_field(w, prob, "strict_subsolution")
        if not hypothesis.holds:
            hypothesis = check_admissible_field(w, prob, "strict_gamma")
    if not hypothesis.holds:
        warnings.warn(
            f"barrier field fails its {hypothesis.condition} check "
            f"(margin {hypothesis.margin!r})",
            HypothesisWarning,
            stacklevel=2,
        )
    trace = operator_trace(u, prob)
    diff = w.values - u.values

    def rows_for(K):
        phi = np.exp(K * diff)
        Lphi = apply_linearized(u, prob, phi, operator)
        rows = []
        for eps1 in eps1_list:
            gap = eps1 * trace - Lphi
            flat = int(np.argmax(gap))
            C = max(float(gap.ravel()[flat]), 0.0)
            inner = np.unravel_index(flat, grid.interior_shape)
            node = tuple(int(i) + 1 for i in inner)
            rows.append(
                {
                    "K": float(K),
                    "eps1": float(eps1),
                    "C": C,
                    "worst_node_index": int(np.ravel_multi_index(node, grid.m)),
                    "margin": float(C_cap) - C,
                }
            )
        return rows

    rows = [row for chunk in map_ordered(rows_for, K_list) for row in chunk]
    table = pd.DataFrame(rows, columns=AUDIT_COLUMNS)
    informative = bool(((table["eps1"] > 0) & (table["C"] <= C_cap)).any())
    logger.debug(
        "interior barrier audit: %d rows, informative=%s", len(table), informative
    )
    return BarrierAudit(
        table=table,
        informative=informative,
        C_cap=float(C_cap),
        variant="supersolution" if supersolution else "subsolution",
        trace_min=float(trace.min()),
        trace_max=float(trace.max()),
        hypothesis=hypothesis,
    )


def _face(face):
    try:
        axis, side = face
    except (TypeError, ValueError):
        raise DomainError(f"face must be (axis, side), got {face!r}")
    return int(axis), int(side)


def boundary_barrier_audit(u, u_sub, prob, params, face=(0, 0), tol=None):
    """
    Audit the boundary barrier near one box face.

    With ``d`` the distance to the face,
    ``psi = 1 - exp(K [(u_sub - u) - mu d + N d^2])`` must satisfy
    ``calL psi <= -(eps1 / 2) sum F^ii - M`` at interior nodes with
    ``d < delta`` and ``psi >= 0`` on the slab's two faces.

    Parameters
    ----------
    u, u_sub : GridField
    prob : ProblemSpec
    params : BarrierParams
        ``mu``, ``N``, ``delta`` and ``M`` are required.
    face : (int, int)
        Axis and side (0 for ``lo``, 1 for ``hi``).

    Returns
    -------
    CertificateReport
        ``margin`` is the smaller of the operator margin and the sign
        margin; both are in ``extras``.
    """
    axis, side = _face(face)
    missing = [
        name for name in ("mu", "N", "delta", "M") if getattr(params, name) is None
    ]
    if missing:
        raise DomainError(f"boundary barrier needs {missing}")
    tol = options.check_tol if tol is None else tol
    grid = u.grid
    d = grid.face_distance(axis, side)
    slab = np.zeros(grid.m, dtype=bool)
    slab[grid.interior] = d[grid.interior] < params.delta
    if not np.any(slab):
        raise DomainError(
            f"slab d < {params.delta!r} holds no interior node at h={grid.h[axis]!r}"
        )
    K = params.K
    exponent = (u_sub.values - u.values) - params.mu * d + params.N * d**2
    psi = 1.0 - np.exp(K * exponent)
    Lpsi = apply_linearized(u, prob, psi, "calL")
    trace = operator_trace(u, prob)
    op_margin = -(params.eps1 / 2.0) * trace - params.M - Lpsi
    in_slab = slab[grid.interior]
    op_vals = np.where(in_slab, op_margin, np.inf)
    flat = int(np.argmin(op_vals))
    node = [int(i) + 1 for i in np.unravel_index(flat, grid.interior_shape)]
    m1 = float(op_vals.ravel()[flat])

    # the two faces of the slab: d = 0 and the first layer with d >= delta
    face_nodes = d <= 0.5 * grid.h[axis]
    layer = np.min(np.where(d >= params.delta, d, np.inf))
    inner_nodes = np.isclose(d, layer) & ~grid.boundary_mask
    edge = face_nodes | inner_nodes
    sign_vals = np.where(edge, psi, np.inf)
    sflat = int(np.argmin(sign_vals))
    m2 = float(sign_vals.ravel()[sflat])

    margin = min(m1, m2)
    if m1 <= m2:
        witness = {"node": node, "inequality": "operator"}
    else:
        witness = {
            "node": [int(i) for i in np.unravel_index(sflat, grid.m)],
            "inequality": "sign",
        }
    return CertificateReport(
        condition="boundary_barrier",
        verdict=HOLDS if margin >= -tol else FAILS,
        margin=margin,
        witness=witness,
        tol=tol,
        samples=int(in_slab.sum() + edge.sum()),
        extras={
            "face": [axis, side],
            "operator_margin": m1,
            "sign_margin": m2,
            "params": params.to_dict(),
        },
    )


def boundary_barrier_sweep(
    u,
    u_sub,
    prob,
    face=(0, 0),
    K_list=DEFAULT_K,
    N_list=DEFAULT_N,
    mu_list=DEFAULT_MU,
    delta_steps=DEFAULT_DELTA_STEPS,
    M=1.0,
    eps1=0.0,
):
    """
    Search the boundary barrier constants over a parameter grid.

    ``delta`` runs over multiples ``delta_steps`` of the spacing normal to
    the face.

    Returns
    -------
    best : BarrierParams
        The parameters with the largest certificate margin.
    report : CertificateReport
    table : pandas.DataFrame
        One row per combination with both margins.
    """
    axis, _ = _face(face)
    h = float(u.grid.h[axis])
    combos = [
        BarrierParams(K=K, eps1=eps1, mu=mu, N=N, delta=steps * h, M=M)
        for K, N, mu, steps in product(K_list, N_list, mu_list, delta_steps)
    ]
    reports = map_ordered(
        lambda params: boundary_barrier_audit(u, u_sub, prob, params, face), combos
    )
    table = pd.DataFrame(
        [
            {
                "K": p.K,
                "N": p.N,
                "mu": p.mu,
                "delta": p.delta,
                "operator_margin": r.extras["operator_margin"],
                "sign_margin": r.extras["sign_margin"],
                "margin": r.margin,
            }
            for p, r in zip(combos, reports)
        ]
    )
    best = int(np.argmax([r.margin for r in reports]))
    extras = {**reports[best].extras, "combinations": len(combos)}
    report = replace(reports[best], extras=extras)
    return combos[best], report, table


def boundary_decomposition_check(u, prob, face=(0, 0), atol=None, tol=None):
    """
    Check ``S_k(W) = (D_nn u - A_nn) S_{k-1}(W') + R`` at the nodes of a
    face, with one-sided boundary stencils.

    The algebraic identity is verified exactly; the gap between its left-hand
    side and ``B`` is the discretization residual, bounded by ``atol``. The
    default ``atol = (1 + max |B|) max(h)`` sits above the second-order
    error of the one-sided stencils on a converged solve.

    Returns
    -------
    CertificateReport
        ``extras`` holds ``identity_error``, ``equation_residual`` and the
        ``atol`` used.
    """
    axis, side = _face(face)
    tol = options.check_tol if tol is None else tol
    grid = u.grid
    idx = grid.face_index(axis, side)
    _, Du, W = _boundary_W(u, prob)
    Wf = W[idx]
    w_nn, s_km1, R = normal_decomposition(Wf, prob.k, axis)
    lhs = w_nn * s_km1 + R
    sk = _esp(_eigvalsh(Wf), prob.k)[..., prob.k]
    scale = 1.0 + np.abs(sk).max()
    identity_error = float(np.max(np.abs(lhs - sk)) / scale)
    B = prob.B(grid.coords[idx], u.values[idx], Du[idx])
    gap = np.abs(lhs - B)
    flat = int(np.argmax(gap))
    eq_res = float(gap.ravel()[flat])
    if atol is None:
        atol = (1.0 + float(np.max(np.abs(B)))) * float(grid.h.max())
    margin = min(-identity_error, float(atol) - eq_res)
    face_shape = gap.shape
    node = list(np.unravel_index(flat, face_shape))
    node.insert(axis, 0 if side == 0 else grid.m[axis] - 1)
    return CertificateReport(
        condition="boundary_decomposition",
        verdict=HOLDS if margin >= -tol else FAILS,
        margin=margin,
        witness={"node": [int(i) for i in node]},
        tol=tol,
        samples=int(gap.size),
        extras={
            "face": [axis, side],
            "identity_error": identity_error,
            "equation_residual": eq_res,
            "atol": float(atol),
            "h": float(grid.h.max()),
        },
    )


def tangential_frame_check(W, k, tol=None):
    """
    Residual of ``sum_j F^{bj} w_{nj}`` for ``b < n``.

    The residual vanishes when ``W`` is diagonal; for other ``W`` it is
    recorded and the verdict is inconclusive.

    Returns
    -------
    CertificateReport
    """
    tol = options.check_tol if tol is None else tol
    W = as_symmat(W)
    _, F = matrix_F_grad(W, k)
    n = W.shape[-1]
    res = F[: n - 1, :] @ W[n - 1, :]
    worst = float(np.max(np.abs(res))) if res.size else 0.0
    diagonal = not np.any(W - np.diag(np.diag(W)))
    if diagonal:
        verdict = HOLDS if worst <= tol else FAILS
    else:
        verdict = INCONCLUSIVE
    return CertificateReport(
        condition="tangential_frame",
        verdict=verdict,
        margin=-worst,
        witness={"residual": res.tolist()},
        tol=tol,
        samples=1,
        extras={"diagonal": diagonal},
    )


def trace_ellipticity_check(u, prob, tol=None):
    """
    ``min tr(D^2 u - A)`` over interior nodes; holds iff ``>= -tol``.

    ``extras['label']`` classifies the worst node against ``Gamma_1``.
    """
    tol = options.check_tol if tol is None else tol
    jet = discrete_jet(u, prob)
    tr = np.einsum("...ii->...", jet.W).ravel()
    flat = int(np.argmin(tr))
    margin = float(tr[flat])
    label = cone_classify(np.array([margin]), 1, tol=tol).label
    return CertificateReport(
        condition="trace_ellipticity",
        verdict=HOLDS if margin >= -tol else FAILS,
        margin=margin,
        witness={
            "node": [int(i) + 1 for i in np.unravel_index(flat, u.grid.interior_shape)]
        },
        tol=tol,
        samples=int(tr.size),
        extras={"label": label},
    )


def double_tangential_check(u, u_sub, prob, face=(0, 0), tol=None):
    """
    Tangential second differences of ``u - u_sub`` along a flat face.

    Both fields carry the same boundary data, so these vanish.
    """
    axis, side = _face(face)
    tol = options.check_tol if tol is None else tol
    grid = u.grid
    if u_sub.grid != grid:
        raise DomainError("u and u_sub must share a grid")
    diff = (u.values - u_sub.values)[grid.face_index(axis, side)]
    worst = 0.0
    h = np.delete(grid.h, axis)
    for a in range(grid.n - 1):
        v = np.moveaxis(diff, a, 0)
        second = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h[a] ** 2
        if second.size:
            worst = max(worst, float(np.max(np.abs(second))))
    return CertificateReport(
        condition="double_tangential",
        verdict=HOLDS if worst <= tol else FAILS,
        margin=-worst,
        witness={"face": [axis, side]},
        tol=tol,
        samples=int(diff.size),
    )


def auxiliary_function_probe(u, u_sub, prob, K=1.0, b=1.0):
    """
    Locate the maximum of ``v = log lambda_max(W) + eta(|Du|^2 / 2) + b phi``.

    ``phi = exp(K (u_sub - u))`` and ``eta(t) = a (1 + t)^2 / 2`` with
    ``a = 1 / (1 + t_max)^2``, the largest ``a`` keeping
    ``eta'' - eta'^2 >= 0`` on the observed range of ``t``.

    Returns
    -------
    CertificateReport
        ``margin`` is ``min (eta'' - eta'^2)`` over nodes; ``witness`` is the
        maximizing node and ``extras`` holds the maximum value.
    """
    jet = discrete_jet(u, prob)
    lam_max = _eigvalsh(jet.W)[..., -1]
    if np.any(lam_max <= 0):
        raise DomainError("largest eigenvalue of W is not positive at some node")
    t = 0.5 * np.einsum("...i,...i->...", jet.Du, jet.Du)
    a = 1.0 / (1.0 + float(t.max())) ** 2
    params = BarrierParams(K=K, a=a, b=b)
    eta = 0.5 * a * (1.0 + t) ** 2
    phi = np.exp(K * (u_sub.interior - u.interior))
    v = np.log(lam_max) + eta + b * phi
    smallness = a - (a * (1.0 + t)) ** 2
    flat = int(np.argmax(v))
    node = [int(i) + 1 for i in np.unravel_index(flat, u.grid.interior_shape)]
    margin = float(smallness.min())
    return CertificateReport(
        condition="auxiliary_function",
        verdict=HOLDS if margin >= -options.check_tol else FAILS,
        margin=margin,
        witness={"node": node, "x": jet.x.reshape(-1, prob.n)[flat].tolist()},
        tol=options.check_tol,
        samples=int(v.size),
        extras={"v_max": float(v.ravel()[flat]), "params": params.to_dict()},
    )


def barrier_field(u, w, K):
    """``exp(K (w - u))`` as a grid field."""
    return GridField(u.grid, np.exp(K * (w.values - u.values)), name="phi")
