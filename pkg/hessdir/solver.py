"""
Finite-difference Dirichlet solver for ``f(W_h(u)) = B~(x, u, Du_h)``.

The scheme is the central one of :mod:`hessdir.grid`; Newton iterates are
damped so that every accepted iterate stays strictly inside the Garding cone
at every interior node, and the source is reached by a homotopy from the
operator value of the initial field.
"""
import logging
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from hessdir._compat import gmres_tolerance_kwargs
from hessdir._config import options
from hessdir.errors import (
    AdmissibilityError,
    AdmissibilityLost,
    ConvergenceWarning,
    DomainError,
    LinearSolveFailure,
    NoConvergence,
)
from hessdir.grid import BoxGrid, GridField, discrete_jet, stencil_offsets
from hessdir.model import eval_A_jet, eval_Btilde_jet
from hessdir.symfun import _eigvalsh, cone_margin, default_cone_tol, operator_batch

logger = logging.getLogger(__name__)

VARIANTS = ("L", "calL", "full")

#: relative floor of the cone margin accepted by the line search
MARGIN_FLOOR = 1e-12

_MIN_STEP = 2.0**-30


@dataclass
class _Evaluation:
    jet: object
    value: np.ndarray
    F: np.ndarray
    margin: np.ndarray
    outside: np.ndarray
    btilde: object
    rhs: np.ndarray
    residual: np.ndarray


def _evaluate(u, prob, t=1.0, g0=None, order=0):
    jet = discrete_jet(u, prob)
    k = prob.k
    lam = _eigvalsh(jet.W)
    value, F, e = operator_batch(jet.W, k)
    margin = np.asarray(cone_margin(lam, k))
    outside = np.any(e[..., 1:] < -default_cone_tol(lam)[..., None], axis=-1)
    bt = eval_Btilde_jet(prob.B, k, jet.x, jet.z, jet.Du, order)
    rhs = bt.value if g0 is None or t == 1.0 else (1.0 - t) * g0 + t * bt.value
    return _Evaluation(jet, value, F, margin, outside, bt, rhs, value - rhs)


def _node_witness(grid, state, flat):
    node = tuple(int(i) + 1 for i in np.unravel_index(flat, grid.interior_shape))
    return node, {
        "node": list(node),
        "x": state.jet.x[tuple(i - 1 for i in node)].tolist(),
        "margin": float(state.margin.ravel()[flat]),
    }


def _raise_if_outside(u, state, cls=AdmissibilityError):
    if np.any(state.outside):
        flat = int(np.argmin(np.where(state.outside, state.margin, np.inf)))
        node, witness = _node_witness(u.grid, state, flat)
        raise cls(
            f"W_h(u) leaves Gamma_k at node {node}: cone margin "
            f"{witness['margin']!r}",
            index=node,
            margin=witness["margin"],
            witness=witness,
        )


def residual(u, prob):
    """
    The discrete residual ``f(W_h(u)) - B~(x, u, Du_h)`` at interior nodes.

    Parameters
    ----------
    u : GridField
    prob : ProblemSpec

    Returns
    -------
    np.ndarray, shape ``u.grid.interior_shape``

    Raises
    ------
    AdmissibilityError
        If ``W_h(u)`` is outside ``Gamma_k`` at some node; the worst node is
        the witness.
    PositivityError
        If ``B <= 0`` at some node.
    """
    state = _evaluate(u, prob)
    _raise_if_outside(u, state)
    return state.residual


def _coefficients(state, prob, variant, t=1.0):
    """First- and zero-order coefficients ``(b, c)`` of a linearized operator
    ``F^{ij} D_ij v - b_k D_k v - c v``."""
    if variant not in VARIANTS:
        raise DomainError(
            f"unknown operator variant {variant!r}, use one of {VARIANTS}"
        )
    jet = state.jet
    F = state.F
    ajet = eval_A_jet(prob.A, jet.x, jet.z, jet.Du, order=1)
    drift = np.einsum("...ij,...ijk->...k", F, ajet.dp)
    zero_order = np.zeros(F.shape[:-2])
    if variant in ("calL", "full"):
        bt = state.btilde
        if bt.dp is None:
            bt = eval_Btilde_jet(prob.B, prob.k, jet.x, jet.z, jet.Du, order=1)
        drift = drift + t * bt.dp
        if variant == "full":
            zero_order = np.einsum("...ij,...ij->...", F, ajet.dz) + t * bt.dz
    return drift, zero_order


def _stencil(grid, F, first_order, zero_order):
    """Weights ``{offset: interior array}`` of ``F:D2v + b.Dv - c v``."""
    n = grid.n
    h = grid.h
    coeffs = {}
    center = -zero_order.copy()
    for i in range(n):
        plus = [0] * n
        plus[i] = 1
        minus = [0] * n
        minus[i] = -1
        diffusion = F[..., i, i] / h[i] ** 2
        advection = first_order[..., i] / (2.0 * h[i])
        coeffs[tuple(plus)] = diffusion + advection
        coeffs[tuple(minus)] = diffusion - advection
        center -= 2.0 * diffusion
    for offset in stencil_offsets(n)[1 + 2 * n :]:
        i, j = [a for a, o in enumerate(offset) if o != 0]
        sign = offset[i] * offset[j]
        # w_ij and w_ji both carry D_ij v
        coeffs[offset] = 2.0 * sign * F[..., i, j] / (4.0 * h[i] * h[j])
    coeffs[(0,) * n] = center
    return coeffs


def _operator_stencil(state, prob, variant, t, grid):
    drift, zero_order = _coefficients(state, prob, variant, t)
    return _stencil(grid, state.F, -drift, zero_order)


def _apply(grid, coeffs, values):
    out = np.zeros(grid.interior_shape)
    for offset, coef in coeffs.items():
        out += coef * grid.shifted(values, offset)
    return out


def _assemble(grid, coeffs):
    shape = grid.interior_shape
    size = grid.n_interior
    idx = np.indices(shape).reshape(grid.n, -1)
    upper = np.asarray(shape)[:, None]
    rows, cols, vals = [], [], []
    all_rows = np.arange(size)
    for offset, coef in coeffs.items():
        nb = idx + np.asarray(offset)[:, None]
        ok = np.all((nb >= 0) & (nb < upper), axis=0)
        rows.append(all_rows[ok])
        cols.append(np.ravel_multi_index(tuple(nb[:, ok]), shape))
        vals.append(np.broadcast_to(coef, shape).ravel()[ok])
    matrix = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    )
    return matrix.tocsr()


def assemble_linearized(u, prob, variant="calL", t=1.0):
    """
    Sparse matrix of a linearized operator on the interior unknowns.

    Parameters
    ----------
    u : GridField
        Admissible field.
    prob : ProblemSpec
    variant : {"L", "calL", "full"}
        ``L v = F^{ij} [D_ij v - D_{p_k} A_ij D_k v]``; ``calL`` further
        subtracts ``B~_{p_k} D_k v``; ``full`` further subtracts
        ``(F^{ij} D_z A_ij + B~_z) v`` and is the Jacobian of :func:`residual`.
    t : float, default 1.0
        Homotopy weight of the source derivatives.

    Returns
    -------
    scipy.sparse.csr_matrix
        Square over interior nodes in C order; boundary neighbours are
        dropped (Dirichlet data is fixed).
    """
    state = _evaluate(u, prob, order=1)
    _raise_if_outside(u, state)
    return _assemble(u.grid, _operator_stencil(state, prob, variant, t, u.grid))


def apply_linearized(u, prob, v, variant="calL", t=1.0):
    """
    Apply a linearized operator at ``u`` to a full grid function ``v``.

    Unlike :func:`assemble_linearized`, boundary values of ``v`` take part.

    Parameters
    ----------
    u : GridField
    prob : ProblemSpec
    v : GridField or array-like, shape ``u.grid.m``
    variant : {"L", "calL", "full"}

    Returns
    -------
    np.ndarray, shape ``u.grid.interior_shape``
    """
    values = v.values if isinstance(v, GridField) else np.asarray(v, dtype=float)
    if values.shape != u.grid.m:
        raise DomainError(f"v has shape {values.shape}, expected {u.grid.m}")
    state = _evaluate(u, prob, order=1)
    _raise_if_outside(u, state)
    return _apply(u.grid, _operator_stencil(state, prob, variant, t, u.grid), values)


def operator_trace(u, prob):
    """``sum_i F^{ii}`` at the interior nodes."""
    state = _evaluate(u, prob)
    _raise_if_outside(u, state)
    return np.einsum("...ii->...", state.F)


def _laplacian_stencil(grid):
    n = grid.n
    eye = np.broadcast_to(np.eye(n), grid.interior_shape + (n, n))
    zero = np.zeros(grid.interior_shape)
    return _stencil(grid, eye, np.zeros(grid.interior_shape + (n,)), zero)


def harmonic_extension(grid, values):
    """
    Discrete harmonic function with the boundary values of ``values``.

    Parameters
    ----------
    grid : BoxGrid
    values : array-like, shape ``grid.m``
        Only the boundary layer is read.

    Returns
    -------
    np.ndarray, shape ``grid.m``
    """
    values = np.array(values, dtype=float)
    values[grid.interior] = 0.0
    coeffs = _laplacian_stencil(grid)
    rhs = -_apply(grid, coeffs, values).ravel()
    inner = _linear_solve(_assemble(grid, coeffs), rhs)
    values[grid.interior] = inner.reshape(grid.interior_shape)
    return values


def _linear_solve(matrix, rhs):
    size = matrix.shape[0]
    if size <= options.direct_solve_limit:
        out = splinalg.spsolve(matrix.tocsc(), rhs)
    else:
        diag = matrix.diagonal()
        if np.any(diag == 0):
            raise LinearSolveFailure("zero diagonal entry in the Newton matrix")
        precond = splinalg.LinearOperator(matrix.shape, matvec=lambda v: v / diag)
        out, info = splinalg.gmres(
            matrix, rhs, M=precond, restart=200, maxiter=50,
            **gmres_tolerance_kwargs(1e-12),
        )
        if info != 0:
            raise LinearSolveFailure(f"GMRES did not converge (info={info})")
    out = np.atleast_1d(np.asarray(out, dtype=float))
    if not np.all(np.isfinite(out)):
        raise LinearSolveFailure("linear sub-solve produced non-finite values")
    return out


def boundary_bump(grid, center=None):
    """``q - H_h[q]`` for ``q = (|x - center|^2 - R^2) / 2``; zero on the
    boundary, discrete Laplacian ``n``."""
    if center is None:
        center = 0.5 * (np.asarray(grid.lo) + np.asarray(grid.hi))
    d = grid.coords - center
    sq = np.einsum("...i,...i->...", d, d)
    q = 0.5 * (sq - sq.max())
    return q - harmonic_extension(grid, q)


def _strictly_admissible(u, prob, state):
    floor = MARGIN_FLOOR * (1.0 + float(np.max(np.abs(u.values))))
    return bool(np.min(state.margin) > floor), floor


def initial_field(prob, grid, mode="harmonic", mu0=1.0, max_doublings=30):
    """
    A strictly admissible field with the problem's boundary data.

    The base is the discrete harmonic extension of the boundary values of
    ``phi`` (``mode="harmonic"``) or ``phi`` sampled at every node
    (``mode="phi"``). A paraboloid bump ``mu (q - H_h[q])``, zero on the
    boundary, is added with ``mu = 0, mu0, 2 mu0, ...`` until every interior
    node is strictly inside the cone.

    Returns
    -------
    u : GridField
    mu : float

    Raises
    ------
    AdmissibilityLost
        If no tried ``mu`` gives a strictly admissible field.
    """
    if mode not in ("phi", "harmonic"):
        raise DomainError(f"unknown init mode {mode!r}")
    if not mu0 > 0:
        raise DomainError(f"mu0={mu0!r} must be positive")
    phi = np.asarray(prob.phi(grid.coords), dtype=float)
    base = phi if mode == "phi" else harmonic_extension(grid, phi)
    bump = boundary_bump(grid, prob.center)
    mus = [0.0] + [mu0 * 2.0**j for j in range(max_doublings + 1)]
    state = None
    for mu in mus:
        u = GridField(grid, base + mu * bump, name="u0")
        u.values[grid.boundary_mask] = phi[grid.boundary_mask]
        state = _evaluate(u, prob)
        ok, _ = _strictly_admissible(u, prob, state)
        if ok:
            logger.debug("initial field: mode=%s mu=%g", mode, mu)
            return u, mu
    flat = int(np.argmin(state.margin))
    node, witness = _node_witness(grid, state, flat)
    raise AdmissibilityLost(
        f"no strictly admissible initial field up to mu={mus[-1]!r}; "
        f"worst node {node} has margin {witness['margin']!r}",
        index=node,
        margin=witness["margin"],
        witness=witness,
    )


@dataclass
class SolveReport:
    """Outcome of :func:`solve`.

    ``damping`` has one record per accepted Newton step with the homotopy
    weight, the step length and the residual and cone margin after the
    step.
    """

    converged: bool = False
    iterations: int = 0
    stages: list = field(default_factory=list)
    residual: float = float("inf")
    min_cone_margin: float = float("-inf")
    damping: list = field(default_factory=list)
    wall_time: float = 0.0
    mu: float = 0.0
    init_mode: str = None
    m: tuple = ()
    failure: str = None

    @property
    def n_stages(self):
        return len(self.stages)

    def to_dict(self):
        out = asdict(self)
        out["m"] = list(self.m)
        out["n_stages"] = self.n_stages
        return out


def _newton(u, prob, t, g0, tol, max_newton, report):
    grid = u.grid
    state = _evaluate(u, prob, t, g0)
    res = float(np.max(np.abs(state.residual)))
    for it in range(1, max_newton + 1):
        if res <= tol:
            return u, state
        coeffs = _operator_stencil(state, prob, "full", t, grid)
        du = _linear_solve(_assemble(grid, coeffs), -state.residual.ravel())
        base = u.interior_vector()
        step = 1.0
        while True:
            trial = u.with_interior(base + step * du)
            tstate = _evaluate(trial, prob, t, g0)
            admissible, floor = _strictly_admissible(trial, prob, tstate)
            tres = float(np.max(np.abs(tstate.residual)))
            if admissible and tres < res:
                break
            step *= 0.5
            if step < _MIN_STEP:
                if not admissible:
                    flat = int(np.argmin(tstate.margin))
                    node, witness = _node_witness(grid, tstate, flat)
                    raise AdmissibilityLost(
                        f"line search cannot keep node {node} inside the cone "
                        f"(t={t}, iteration {it})",
                        index=node,
                        margin=witness["margin"],
                        witness=witness,
                    )
                raise NoConvergence(
                    f"line search stalled at residual {res!r} (t={t}, iteration {it})",
                    stage=t,
                    iteration=it,
                    residual=res,
                )
        u, state, res = trial, tstate, tres
        report.iterations += 1
        report.damping.append(
            {
                "t": t,
                "iteration": it,
                "step": step,
                "residual": res,
                "min_cone_margin": float(np.min(state.margin)),
            }
        )
        logger.debug(
            "t=%.6g it=%d step=%g residual=%.3e margin=%.3e",
            t, it, step, res, report.damping[-1]["min_cone_margin"],
        )
    if res <= tol:
        return u, state
    raise NoConvergence(
        f"Newton did not reach {tol!r} in {max_newton} iterations (t={t}, "
        f"residual {res!r})",
        stage=t,
        iteration=max_newton,
        residual=res,
    )


def homotopy_schedule(stages):
    """Weights ``1 - 2**-j`` for ``j = 1..stages`` followed by 1."""
    if stages < 0:
        raise DomainError("homotopy_stages must be non-negative")
    return [1.0 - 2.0**-j for j in range(1, stages + 1)] + [1.0]


def solve(
    prob,
    m,
    rtol=1e-10,
    max_newton=50,
    homotopy_stages=8,
    init=None,
    mu0=1.0,
    init_mode="harmonic",
    stage_rtol=1e-8,
    max_bisections=4,
):
    """
    Solve the discrete Dirichlet problem by damped Newton with homotopy.

    The source is deformed as ``B~_t = (1 - t) f(W_h(u0)) + t B~`` over
    :func:`homotopy_schedule`; a failing stage is bisected towards the last
    reached weight up to ``max_bisections`` times.

    Parameters
    ----------
    prob : ProblemSpec
    m : int, sequence of int or BoxGrid
        Nodes per axis.
    rtol : float, default 1e-10
        Final residual tolerance (max norm).
    max_newton : int, default 50
        Newton iterations per stage.
    homotopy_stages : int, default 8
    init : GridField, optional
        Strictly admissible initial field with the problem's boundary data.
    mu0 : float, default 1.0
        First bump weight tried by :func:`initial_field`.
    init_mode : {"harmonic", "phi"}
        Base of the initial field when ``init`` is not given.
    stage_rtol : float, default 1e-8
        Tolerance of intermediate stages.
    max_bisections : int, default 4

    Returns
    -------
    u : GridField
    report : SolveReport

    Raises
    ------
    NoConvergence, AdmissibilityLost, LinearSolveFailure
        The partial report is attached as ``err.report``.
    """
    start = time.perf_counter()
    if not prob.domain_exact:
        raise DomainError("the problem's domain is not an axis-aligned box")
    grid = m if isinstance(m, BoxGrid) else BoxGrid(prob.lo, prob.hi, m)
    if grid.n != prob.n:
        raise DomainError(f"grid dimension {grid.n} != n={prob.n}")
    report = SolveReport(
        m=grid.m, init_mode="supplied" if init is not None else init_mode
    )

    if init is None:
        u, report.mu = initial_field(prob, grid, init_mode, mu0)
    else:
        if init.grid != grid:
            raise DomainError(f"initial field lives on {init.grid}, not {grid}")
        scale = 1.0 + float(np.max(np.abs(init.values)))
        init.check_boundary(prob.phi, atol=1e-12 * scale)
        u = init.copy()
        state = _evaluate(u, prob)
        if not _strictly_admissible(u, prob, state)[0]:
            _raise_if_outside(u, state, AdmissibilityLost)
            raise AdmissibilityLost(
                "initial field is not strictly admissible",
                margin=float(np.min(state.margin)),
            )
    g0 = _evaluate(u, prob).value

    targets = homotopy_schedule(homotopy_stages)
    scheduled = set(targets)
    t_prev = 0.0
    bisections = 0
    while targets:
        t = targets[0]
        tol = rtol if t == 1.0 else max(rtol, stage_rtol)
        try:
            u, state = _newton(u, prob, t, g0, tol, max_newton, report)
        except (NoConvergence, AdmissibilityLost, LinearSolveFailure) as err:
            if bisections >= max_bisections:
                report.failure = f"{type(err).__name__}: {err}"
                report.wall_time = time.perf_counter() - start
                err.report = report
                logger.info("solve failed at t=%g: %s", t, err)
                raise
            bisections += 1
            t_mid = 0.5 * (t_prev + t)
            warnings.warn(
                f"homotopy stage t={t:.6g} failed ({type(err).__name__}); "
                f"retrying from t={t_mid:.6g}",
                ConvergenceWarning,
                stacklevel=2,
            )
            targets.insert(0, t_mid)
            continue
        targets.pop(0)
        report.stages.append(t)
        t_prev = t
        if t in scheduled:
            bisections = 0
        logger.info(
            "stage t=%.6g done after %d iterations", t, report.iterations
        )

    report.residual = float(np.max(np.abs(state.residual)))
    report.min_cone_margin = float(np.min(state.margin))
    report.converged = report.residual <= rtol and report.min_cone_margin > 0
    report.wall_time = time.perf_counter() - start
    u.name = "u"
    return u, report
