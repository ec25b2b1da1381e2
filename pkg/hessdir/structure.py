"""
Sample-based certificates for the structural hypotheses on ``A``, ``B`` and
the domain, and coordinate changes of problems.

A certificate is falsification-strong: ``fails`` comes with a witness, while
``holds`` only means no sampled margin went below ``-tol``.
"""
from dataclasses import asdict, dataclass, field

import numpy as np

from hessdir._config import options
from hessdir._decorator import doc
from hessdir.errors import DomainError
from hessdir.grid import GridField, central_derivatives, discrete_jet
from hessdir.model import CoefficientA, ProblemSpec, SourceB
from hessdir.symfun import _eigvalsh, _esp, cone_margin
from hessdir.tools._parallel import argmin_reduce, batches, map_ordered
from hessdir.tools._random import (
    _generator,
    gram_schmidt_pair,
    orthonormal_pairs,
    uniform_ball,
    uniform_box,
    unit_sphere,
)

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

_BATCH = 256


@dataclass(frozen=True)
class SamplingSpec:
    """
    Where structural conditions are sampled.

    ``n_x`` points in the box, ``n_z`` evenly spaced values in
    ``[z_lo, z_hi]`` and ``n_p`` gradients in the ball of radius ``P`` (the
    origin included) are combined as a tensor product; each combination gets
    ``n_pairs`` orthonormal pairs where a condition needs them.
    """

    n: int = 2
    lo: float = 0.0
    hi: float = 1.0
    n_x: int = 4
    n_z: int = 3
    z_lo: float = -1.0
    z_hi: float = 1.0
    n_p: int = 16
    P: float = 2.0
    n_pairs: int = 8
    seed: int = 0

    def __post_init__(self):
        for name in ("n", "n_x", "n_z", "n_p", "n_pairs"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"SamplingSpec.{name} must be >= 1")
        if not self.P > 0:
            raise DomainError(f"SamplingSpec.P={self.P!r} must be positive")
        if not self.z_lo <= self.z_hi:
            raise DomainError("SamplingSpec needs z_lo <= z_hi")

    @classmethod
    def for_problem(cls, prob, **kwargs):
        return cls(n=prob.n, lo=prob.lo, hi=prob.hi, **kwargs)

    @property
    def size(self):
        return self.n_x * self.n_z * self.n_p

    def points(self):
        """The tensor-product samples ``x (N, n)``, ``z (N,)``, ``p (N, n)``."""
        rng = _generator(self.seed)
        lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (self.n,))
        hi = np.broadcast_to(np.asarray(self.hi, dtype=float), (self.n,))
        xs = uniform_box(lo, hi, self.n_x, rng)
        zs = np.linspace(self.z_lo, self.z_hi, self.n_z)
        ps = uniform_ball(self.n, self.P, self.n_p, rng)
        ix, iz, ip = np.meshgrid(
            np.arange(self.n_x), np.arange(self.n_z), np.arange(self.n_p),
            indexing="ij",
        )
        return xs[ix.ravel()], zs[iz.ravel()], ps[ip.ravel()]

    def pairs(self):
        """``n_pairs`` orthonormal pairs per sample, shape ``(N, n_pairs, n)``."""
        rng = _generator([self.seed, 1])
        xi, eta = orthonormal_pairs(self.n, self.size * self.n_pairs, rng)
        shape = (self.size, self.n_pairs, self.n)
        return xi.reshape(shape), eta.reshape(shape)


@dataclass
class CertificateReport:
    """
    Verdict on one condition.

    ``margin`` is the worst sampled margin (negative means violated);
    ``witness`` locates it.
    """

    condition: str
    verdict: str
    margin: float
    witness: dict = None
    tol: float = 0.0
    seed: int = None
    samples: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def holds(self):
        return self.verdict == HOLDS

    @property
    def fails(self):
        return self.verdict == FAILS

    def to_dict(self):
        return asdict(self)


def _tol(tol):
    return options.check_tol if tol is None else float(tol)


def _verdict(margin, tol):
    if margin != margin:
        return INCONCLUSIVE
    return HOLDS if margin >= -tol else FAILS


def _point_witness(x, z, p, i, **extra):
    out = {"x": x[i].tolist(), "z": float(z[i]), "p": p[i].tolist()}
    out.update({key: np.asarray(v).tolist() for key, v in extra.items()})
    return out


_shared_doc = """
tol : float, optional
    Margin tolerance; defaults to ``options.check_tol``.

Returns
-------
CertificateReport
    {returns}
"""


def _regular_form(dpp, xi, eta):
    return np.einsum("...ijkl,...i,...j,...k,...l->...", dpp, xi, xi, eta, eta)


def _descend(dpp, xi, eta, steps=50):
    """Projected gradient descent of the regularity form over unit
    orthogonal pairs."""
    value = float(_regular_form(dpp, xi, eta))
    rate = 0.5 / (1.0 + float(np.max(np.abs(dpp))))
    for _ in range(steps):
        g_xi = 2.0 * np.einsum("ijkl,j,k,l->i", dpp, xi, eta, eta)
        g_eta = 2.0 * np.einsum("ijkl,i,j,l->k", dpp, xi, xi, eta)
        while rate > 1e-12:
            cand = gram_schmidt_pair(xi - rate * g_xi, eta - rate * g_eta)
            cand_value = float(_regular_form(dpp, *cand))
            if cand_value < value:
                xi, eta = cand
                value = cand_value
                rate *= 2.0
                break
            rate *= 0.5
        else:
            break
    return value, xi, eta


@doc(
    _shared_doc,
    returns="Margin ``min A_{ij,kl} xi_i xi_j eta_k eta_l`` over unit "
    "``xi`` orthogonal to ``eta``, minus ``c0`` when ``strict``. "
    "``extras['covering_radius']`` is ``1 / (2 n max|D_p A|)``.",
)
def check_regular(A, s, strict=False, c0=1.0, tol=None):
    """
    Certify that ``A`` is regular (co-dimension one convex in ``p``).

    Parameters
    ----------
    A : CoefficientA
    s : SamplingSpec
    strict : bool, default False
        Require the form to be at least ``c0`` on unit pairs.
    c0 : float, default 1.0"""
    if s.n < 2:
        raise DomainError("the regular condition needs n >= 2")
    tol = _tol(tol)
    x, z, p = s.points()
    xi, eta = s.pairs()
    threshold = c0 if strict else 0.0

    def run(sl):
        dp = A.dp(x[sl], z[sl], p[sl])
        dpp = A.dpp(x[sl], z[sl], p[sl])
        forms = _regular_form(dpp[:, None], xi[sl], eta[sl])
        flat = int(np.argmin(forms))
        i, j = np.unravel_index(flat, forms.shape)
        return float(forms[i, j]), (sl.start + i, j, dpp[i], float(np.max(np.abs(dp))))

    results = map_ordered(run, batches(s.size, _BATCH))
    dp_max = max(payload[3] for _, payload in results)
    worst, (i, j, dpp, _) = argmin_reduce(results)
    value, wxi, weta = _descend(dpp, xi[i, j], eta[i, j])
    value = min(value, worst)
    margin = value - threshold
    rho = None if dp_max == 0 else 1.0 / (2.0 * s.n * dp_max)
    return CertificateReport(
        condition="regular_strict" if strict else "regular",
        verdict=_verdict(margin, tol),
        margin=float(margin),
        witness=_point_witness(x, z, p, i, xi=wxi, eta=weta),
        tol=tol,
        seed=s.seed,
        samples=s.size * s.n_pairs,
        extras={
            "min_form": float(value),
            "threshold": threshold,
            "covering_radius": rho,
            "max_dpA": dp_max,
        },
    )


@doc(_shared_doc, returns="Margin: least eigenvalue of ``D^2_pp B~``.")
def check_Btilde_convex(B, k, s, tol=None):
    """
    Certify convexity of ``B~ = B ** (1/k)`` in the gradient variable.

    Parameters
    ----------
    B : SourceB
    k : int
    s : SamplingSpec"""
    tol = _tol(tol)
    x, z, p = s.points()

    def run(sl):
        jet = B.btilde_jet(k, x[sl], z[sl], p[sl], order=2)
        low = _eigvalsh(jet.dpp)[..., 0]
        i = int(np.argmin(low))
        return float(low[i]), sl.start + i

    margin, i = argmin_reduce(map_ordered(run, batches(s.size, _BATCH)))
    return CertificateReport(
        condition="Btilde_convex",
        verdict=_verdict(margin, tol),
        margin=float(margin),
        witness=_point_witness(x, z, p, i, p_norm=np.linalg.norm(p[i])),
        tol=tol,
        seed=s.seed,
        samples=s.size,
    )


def _z_derivative_missing(obj):
    return (
        obj.depends_on_z and obj.mode == "analytic" and not obj.has_analytic("dz")
    )


@doc(
    _shared_doc,
    returns="A pair of reports for ``A`` (least eigenvalue of ``D_z A``) "
    "and ``B~`` (``D_z B~``); inconclusive when a u-dependent evaluator has "
    "no analytic z-derivative.",
)
def check_monotone(A, B, k, s, tol=None):
    """
    Certify that ``A`` and ``B~`` are non-decreasing in ``u``.

    Parameters
    ----------
    A : CoefficientA
    B : SourceB
    k : int
    s : SamplingSpec"""
    tol = _tol(tol)
    x, z, p = s.points()
    reports = []
    for name, obj in (("A_monotone", A), ("Btilde_monotone", B)):
        if _z_derivative_missing(obj):
            reports.append(
                CertificateReport(
                    name, INCONCLUSIVE, float("nan"), None, tol, s.seed, 0,
                    {"reason": "no analytic z-derivative"},
                )
            )
            continue
        if isinstance(obj, CoefficientA):
            values = _eigvalsh(obj.dz(x, z, p))[..., 0]
        else:
            values = obj.btilde_jet(k, x, z, p, order=1).dz
        i = int(np.argmin(values))
        margin = float(values[i])
        reports.append(
            CertificateReport(
                name,
                _verdict(margin, tol),
                margin,
                _point_witness(x, z, p, i),
                tol,
                s.seed,
                s.size,
            )
        )
    return tuple(reports)


FIELD_MODES = (
    "admissible",
    "strict_gamma",
    "subsolution",
    "strict_subsolution",
    "supersolution",
    "strict_supersolution",
)


def _node(grid, flat):
    return [int(i) + 1 for i in np.unravel_index(flat, grid.interior_shape)]


@doc(
    _shared_doc,
    returns="Cone modes report the least cone margin; equation modes report "
    "``min (S_k - B) - delta`` (sub) or ``min (B - S_k) - delta`` (super), "
    "and fail at a node outside the cone with that node as witness. "
    "``strict_gamma`` records ``delta = min S_k`` in ``extras``.",
)
def check_admissible_field(u, prob, mode="admissible", delta=None, tol=None):
    """
    Certify the admissibility or sub/supersolution status of a grid field.

    Parameters
    ----------
    u : GridField
    prob : ProblemSpec
    mode : str
        One of ``admissible``, ``strict_gamma``, ``subsolution``,
        ``strict_subsolution``, ``supersolution``, ``strict_supersolution``.
    delta : float, optional
        Gap of the strict equation modes. Defaults to
        ``2 tol (1 + max |B|)``, so a strict mode never holds on a field that
        only meets the equation to within ``tol``."""
    if mode not in FIELD_MODES:
        raise DomainError(f"unknown mode {mode!r}, use one of {FIELD_MODES}")
    tol = _tol(tol)
    jet = discrete_jet(u, prob)
    lam = _eigvalsh(jet.W)
    e = _esp(lam, prob.k)
    cone = np.asarray(cone_margin(lam, prob.k)).ravel()
    sk = e[..., prob.k].ravel()
    extras = {"min_cone_margin": float(cone.min()), "mode": mode}
    worst_cone = int(np.argmin(cone))

    if mode in ("admissible", "strict_gamma"):
        margin = float(cone[worst_cone])
        if mode == "strict_gamma":
            extras["delta"] = float(sk.min())
            verdict = HOLDS if margin > tol else FAILS
        else:
            verdict = _verdict(margin, tol)
        flat = worst_cone
    else:
        if cone[worst_cone] < -tol:
            margin = float(cone[worst_cone])
            flat = worst_cone
            extras["outside_cone"] = True
        else:
            B = prob.B(jet.x, jet.z, jet.Du).ravel()
            gap = sk - B if "sub" in mode else B - sk
            if mode.startswith("strict"):
                if delta is None:
                    delta = 2.0 * tol * (1.0 + float(np.max(np.abs(B))))
                extras["gap"] = float(delta)
                gap = gap - delta
            flat = int(np.argmin(gap))
            margin = float(gap[flat])
        verdict = _verdict(margin, tol)
    x = jet.x.reshape(-1, prob.n)
    return CertificateReport(
        condition=mode,
        verdict=verdict,
        margin=margin,
        witness={"node": _node(u.grid, flat), "x": x[flat].tolist()},
        tol=tol,
        samples=sk.size,
        extras=extras,
    )


@doc(
    _shared_doc,
    returns="Margin: least eigenvalue over interior nodes of "
    "``D^2 vphi - D_{p_k} A(x, u, Du) D_k vphi`` minus ``delta0``.",
)
def check_A_bounded(vphi, u, prob, delta0, tol=None):
    """
    Certify that ``vphi`` is A-bounded with respect to ``u``.

    Parameters
    ----------
    vphi, u : GridField
        Fields on a common grid.
    prob : ProblemSpec
    delta0 : float"""
    if vphi.grid != u.grid:
        raise DomainError("vphi and u must share a grid")
    tol = _tol(tol)
    jet = discrete_jet(u, prob)
    dphi, d2phi = central_derivatives(vphi.values, vphi.grid)
    dpA = prob.A.dp(jet.x, jet.z, jet.Du)
    M = d2phi - np.einsum("...ijk,...k->...ij", dpA, dphi)
    low = (_eigvalsh(0.5 * (M + np.swapaxes(M, -1, -2)))[..., 0] - delta0).ravel()
    flat = int(np.argmin(low))
    margin = float(low[flat])
    return CertificateReport(
        condition="A_bounded",
        verdict=_verdict(margin, tol),
        margin=margin,
        witness={
            "node": _node(u.grid, flat),
            "x": jet.x.reshape(-1, prob.n)[flat].tolist(),
        },
        tol=tol,
        samples=low.size,
        extras={"delta0": float(delta0)},
    )


def perturb_strict(u, a, b, axis=0):
    """
    ``u + a exp(b x_axis)``: a convex-in-one-direction perturbation that
    turns a non-strict subsolution into a strict one for small ``a > 0``.
    """
    x = u.grid.coords[..., axis]
    return GridField(u.grid, u.values + a * np.exp(b * x), name="u_sub")


def perturb_admissible(u, eps, x0=None):
    """``u - eps / 2 |x - x0|^2``: keeps a strictly admissible field
    admissible for small ``eps``."""
    x0 = np.zeros(u.grid.n) if x0 is None else np.asarray(x0, dtype=float)
    d = u.grid.coords - x0
    return GridField(
        u.grid, u.values - 0.5 * eps * np.einsum("...i,...i->...", d, d)
    )


@dataclass(frozen=True, eq=False)
class BoundaryFrame:
    """
    A boundary point with unit outer normal ``gamma``, orthonormal tangents
    (rows of ``tangents``) and the normal's derivative ``dgamma[m, l] =
    D_m gamma_l``.
    """

    x: np.ndarray
    gamma: np.ndarray
    tangents: np.ndarray
    dgamma: np.ndarray

    def __post_init__(self):
        if abs(np.linalg.norm(self.gamma) - 1.0) > 1e-12:
            raise DomainError("boundary frame normal is not a unit vector")
        t = np.atleast_2d(self.tangents)
        gram = t @ t.T
        if not np.allclose(gram, np.eye(len(t)), atol=1e-12) or np.max(
            np.abs(t @ self.gamma)
        ) > 1e-12:
            raise DomainError("boundary frame tangents are not orthonormal to gamma")

    @property
    def curvature(self):
        """``c_ab = xi^a_m xi^b_l D_m gamma_l``."""
        c = self.tangents @ self.dgamma @ self.tangents.T
        return 0.5 * (c + c.T)


def _complement(gamma):
    """Orthonormal basis of the plane orthogonal to ``gamma`` (rows)."""
    _, _, vt = np.linalg.svd(gamma[None, :])
    basis = vt[1:]
    return basis - np.outer(basis @ gamma, gamma)


def ball_frames(radius, n, count, seed=0, center=None):
    """Frames on the sphere of ``radius``; ``D gamma = (I - gamma gamma^T) / R``."""
    if not radius > 0:
        raise DomainError("radius must be positive")
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    frames = []
    for gamma in unit_sphere(n, count, seed):
        dgamma = (np.eye(n) - np.outer(gamma, gamma)) / radius
        frames.append(
            BoundaryFrame(center + radius * gamma, gamma, _complement(gamma), dgamma)
        )
    return frames


def ellipse_frames(a, b, count):
    """Frames at evenly spaced parameters on the ellipse ``x^2/a^2 + y^2/b^2 = 1``."""
    if not (a > 0 and b > 0):
        raise DomainError("ellipse semi-axes must be positive")
    frames = []
    for theta in np.linspace(0.0, 2.0 * np.pi, count, endpoint=False):
        c, s = np.cos(theta), np.sin(theta)
        x = np.array([a * c, b * s])
        gamma = np.array([b * c, a * s])
        gamma /= np.linalg.norm(gamma)
        tangent = np.array([-gamma[1], gamma[0]])
        kappa = a * b / (a**2 * s**2 + b**2 * c**2) ** 1.5
        frames.append(
            BoundaryFrame(
                x, gamma, tangent[None, :], kappa * np.outer(tangent, tangent)
            )
        )
    return frames


def box_face_frames(lo, hi, axis, side, count, seed=0):
    """Frames on a flat face of a box; ``D gamma = 0``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = lo.size
    if side not in (0, 1) or not 0 <= axis < n:
        raise DomainError(f"no face axis={axis}, side={side} in dimension {n}")
    gamma = np.zeros(n)
    gamma[axis] = -1.0 if side == 0 else 1.0
    tangents = np.delete(np.eye(n), axis, axis=0)
    points = uniform_box(lo, hi, count, seed)
    points[:, axis] = lo[axis] if side == 0 else hi[axis]
    return [BoundaryFrame(x, gamma, tangents, np.zeros((n, n))) for x in points]


@doc(
    _shared_doc,
    returns="Margin: ``S_{k-1}(kappa) - delta0`` with ``kappa`` the "
    "eigenvalues of the tangential block of "
    "``D_i gamma_j - D_{p_k} A_ij gamma_k``.",
)
def check_domain_convex(frames, A, p_samples, k, delta0, z=0.0, tol=None):
    """
    Certify uniform (k-1)-A-convexity of a boundary.

    Parameters
    ----------
    frames : sequence of BoundaryFrame
    A : CoefficientA
    p_samples : array-like, shape (P, n)
    k : int
    delta0 : float
    z : float, default 0.0
        Value of ``u`` used for u-dependent ``A``."""
    tol = _tol(tol)
    frames = list(frames)
    if not frames:
        raise DomainError("no boundary frames given")
    p_samples = np.atleast_2d(np.asarray(p_samples, dtype=float))
    worst = (np.inf, None)
    count = 0
    for f_index, frame in enumerate(frames):
        x = np.broadcast_to(frame.x, p_samples.shape)
        dpA = A.dp(x, np.full(len(p_samples), z), p_samples)
        G = frame.dgamma[None] - np.einsum("...ijk,k->...ij", dpA, frame.gamma)
        T = frame.tangents
        block = np.einsum("ai,...ij,bj->...ab", T, G, T)
        kappa = _eigvalsh(0.5 * (block + np.swapaxes(block, -1, -2)))
        margins = _esp(kappa, k - 1)[..., k - 1] - delta0
        count += margins.size
        j = int(np.argmin(margins))
        if margins[j] < worst[0]:
            worst = (
                float(margins[j]),
                {
                    "frame": f_index,
                    "x": frame.x.tolist(),
                    "p": p_samples[j].tolist(),
                    "kappa": kappa[j].tolist(),
                },
            )
    margin, witness = worst
    return CertificateReport(
        condition="domain_k_minus_1_A_convex",
        verdict=_verdict(margin, tol),
        margin=margin,
        witness=witness,
        tol=tol,
        samples=count,
        extras={"delta0": float(delta0)},
    )


class _Translated:
    """Evaluator wrapper reading its inner evaluator at ``x - x0``."""

    def __init__(self, inner, x0):
        super().__init__()
        self.inner = inner
        self.x0 = x0
        self.depends_on_z = inner.depends_on_z
        self.name = f"{inner.name}@translate"
        self.params = dict(inner.params)

    def _value(self, x, z, p):
        return self.inner(x - self.x0, z, p)

    def _dx(self, x, z, p):
        return self.inner.dx(x - self.x0, z, p)

    def _dz(self, x, z, p):
        return self.inner.dz(x - self.x0, z, p)

    def _dp(self, x, z, p):
        return self.inner.dp(x - self.x0, z, p)

    def _dpp(self, x, z, p):
        return self.inner.dpp(x - self.x0, z, p)


class _TranslatedA(_Translated, CoefficientA):
    pass


class _TranslatedB(_Translated, SourceB):
    pass


class _RotatedA(CoefficientA):
    """``A^(x, z, p) = Q A(Q^T x, z, Q^T p) Q^T``."""

    def __init__(self, inner, Q):
        super().__init__()
        self.inner = inner
        self.Q = Q
        self.depends_on_z = inner.depends_on_z
        self.name = f"{inner.name}@rotate"
        self.params = dict(inner.params)

    def _back(self, x, p):
        return x @ self.Q, p @ self.Q

    def _value(self, x, z, p):
        xb, pb = self._back(x, p)
        return np.einsum("ia,...ab,jb->...ij", self.Q, self.inner(xb, z, pb), self.Q)

    def _dx(self, x, z, p):
        xb, pb = self._back(x, p)
        Q = self.Q
        return np.einsum("ia,jb,kc,...abc->...ijk", Q, Q, Q, self.inner.dx(xb, z, pb))

    def _dz(self, x, z, p):
        xb, pb = self._back(x, p)
        return np.einsum("ia,...ab,jb->...ij", self.Q, self.inner.dz(xb, z, pb), self.Q)

    def _dp(self, x, z, p):
        xb, pb = self._back(x, p)
        Q = self.Q
        return np.einsum("ia,jb,kc,...abc->...ijk", Q, Q, Q, self.inner.dp(xb, z, pb))

    def _dpp(self, x, z, p):
        xb, pb = self._back(x, p)
        Q = self.Q
        return np.einsum(
            "ia,jb,kc,ld,...abcd->...ijkl", Q, Q, Q, Q, self.inner.dpp(xb, z, pb)
        )


class _RotatedB(SourceB):
    """``B^(x, z, p) = B(Q^T x, z, Q^T p)``."""

    def __init__(self, inner, Q):
        super().__init__()
        self.inner = inner
        self.Q = Q
        self.depends_on_z = inner.depends_on_z
        self.name = f"{inner.name}@rotate"
        self.params = dict(inner.params)

    def _back(self, x, p):
        return x @ self.Q, p @ self.Q

    def _value(self, x, z, p):
        return self.inner(*self._args(x, z, p))

    def _args(self, x, z, p):
        xb, pb = self._back(x, p)
        return xb, z, pb

    def _dx(self, x, z, p):
        return self.inner.dx(*self._args(x, z, p)) @ self.Q.T

    def _dz(self, x, z, p):
        return self.inner.dz(*self._args(x, z, p))

    def _dp(self, x, z, p):
        return self.inner.dp(*self._args(x, z, p)) @ self.Q.T

    def _dpp(self, x, z, p):
        return np.einsum(
            "ka,...ab,lb->...kl", self.Q, self.inner.dpp(*self._args(x, z, p)), self.Q
        )


def _check_orthogonal(Q, n):
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (n, n):
        raise DomainError(f"rotation must be {n}x{n}, got {Q.shape}")
    if np.max(np.abs(Q.T @ Q - np.eye(n))) > 1e-12:
        raise DomainError("rotation matrix is not orthogonal")
    return Q


def is_signed_permutation(Q):
    """Whether ``Q`` maps axis-aligned boxes to axis-aligned boxes."""
    Q = np.asarray(Q, dtype=float)
    ones = np.isclose(np.abs(Q), 1.0, atol=1e-12)
    zeros = np.isclose(Q, 0.0, atol=1e-12)
    return bool(
        np.all(ones | zeros)
        and np.all(ones.sum(axis=0) == 1)
        and np.all(ones.sum(axis=1) == 1)
    )


def transform_problem(prob, translate=None, rotate=None):
    """
    Move a problem by a translation or a rotation of coordinates.

    With ``x^ = x + x0`` the coefficients become ``A(x^ - x0, z, p)``; with
    ``x^ = Q x`` they become ``Q A(Q^T x^, z, Q^T p^) Q^T`` and
    ``B(Q^T x^, z, Q^T p^)``, so that ``u^(x^) = u(Q^T x^)`` solves the moved
    problem whenever ``u`` solves the original.

    Parameters
    ----------
    prob : ProblemSpec
    translate : array-like, shape (n,), optional
    rotate : array-like, shape (n, n), optional
        Orthogonal. Unless it is a signed permutation, the result has
        ``domain_exact=False`` (bounding box of the rotated box) and is only
        fit for coefficient-level checks.

    Returns
    -------
    ProblemSpec
    """
    if (translate is None) == (rotate is None):
        raise DomainError("give exactly one of translate or rotate")
    n = prob.n
    lo = np.asarray(prob.lo)
    hi = np.asarray(prob.hi)
    if translate is not None:
        x0 = np.broadcast_to(np.asarray(translate, dtype=float), (n,)).copy()
        phi = prob.phi
        return ProblemSpec(
            n, prob.k, lo + x0, hi + x0,
            _TranslatedA(prob.A, x0), _TranslatedB(prob.B, x0),
            lambda x: phi(np.asarray(x) - x0),
            depends_on_u=prob.depends_on_u,
            name=f"{prob.name}@translate",
            domain_exact=prob.domain_exact,
            params=prob.params,
        )
    Q = _check_orthogonal(rotate, n)
    corners = _corners(lo, hi) @ Q.T
    exact = prob.domain_exact and is_signed_permutation(Q)
    phi = prob.phi
    return ProblemSpec(
        n, prob.k, corners.min(axis=0), corners.max(axis=0),
        _RotatedA(prob.A, Q), _RotatedB(prob.B, Q),
        lambda x: phi(np.asarray(x) @ Q),
        depends_on_u=prob.depends_on_u,
        name=f"{prob.name}@rotate",
        domain_exact=exact,
        params=prob.params,
    )


def _corners(lo, hi):
    n = lo.size
    bits = np.array(np.meshgrid(*[[0, 1]] * n, indexing="ij")).reshape(n, -1).T
    return np.where(bits == 1, hi, lo)
