"""
Problem data of the augmented Hessian Dirichlet problem.

    S_k[D^2 u - A(x, u, Du)] = B(x, u, Du)  in a box,   u = phi  on its boundary.

Coefficient matrices ``A`` and sources ``B`` are vectorized over leading axes:
``x`` and ``p`` have shape ``(..., n)``, ``z`` has shape ``(...)``. Derivative
arrays put the differentiation index last, e.g. ``dp[..., i, j, k]`` is
``dA_ij / dp_k`` and ``dpp[..., i, j, k, l]`` is ``A_{ij,kl}``.
"""
from collections import namedtuple
from dataclasses import dataclass, field
from math import comb

import numpy as np

from hessdir._config import options
from hessdir.errors import (
    AdmissibilityError,
    DomainError,
    NumericError,
    PositivityError,
)
from hessdir.symfun import _eigvalsh, _esp, default_cone_tol

AJet = namedtuple("AJet", "value dx dz dp dpp")
BJet = namedtuple("BJet", "value dx dz dp dpp")
Components = namedtuple("Components", "A B")


def _prepare(x, z, p):
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if x.ndim == 0 or p.ndim == 0:
        raise DomainError("x and p need a trailing coordinate axis")
    if x.shape[-1] != p.shape[-1]:
        raise DomainError(
            f"x and p dimensions differ: {x.shape[-1]} != {p.shape[-1]}"
        )
    lead = np.broadcast_shapes(x.shape[:-1], p.shape[:-1], np.shape(z))
    n = x.shape[-1]
    x = np.broadcast_to(x, lead + (n,))
    p = np.broadcast_to(p, lead + (n,))
    z = np.broadcast_to(np.asarray(z, dtype=float), lead)
    return x, z, p


def _gradient(func, base, step):
    """Central differences of ``func`` along the trailing axis of ``base``.

    ``step`` has the leading shape of ``base``; the derivative index is
    appended last.
    """
    n = base.shape[-1]
    parts = []
    for m in range(n):
        shift = np.zeros(base.shape)
        shift[..., m] = step
        plus = func(base + shift)
        minus = func(base - shift)
        h = step.reshape(step.shape + (1,) * (np.ndim(plus) - step.ndim))
        parts.append((plus - minus) / (2.0 * h))
    return np.stack(parts, axis=-1)


def _scalar_derivative(func, base, step):
    plus = func(base + step)
    minus = func(base - step)
    h = step.reshape(step.shape + (1,) * (np.ndim(plus) - step.ndim))
    return (plus - minus) / (2.0 * h)


def _fd_steps(v, scale=1.0):
    """Relative step ``fd_step * (1 + |v|)`` per query point."""
    return scale * options.fd_step * (1.0 + np.linalg.norm(v, axis=-1))


class _Evaluator:
    """Derivative protocol shared by :class:`CoefficientA` and :class:`SourceB`."""

    name = "custom"
    depends_on_z = False
    _jet = None

    def __init__(self, mode="analytic"):
        if mode not in ("analytic", "fd"):
            raise DomainError(f"unknown derivative mode {mode!r}")
        self.mode = mode
        self.params = {}

    def __repr__(self):
        params = ", ".join(f"{key}={value!r}" for key, value in self.params.items())
        return f"{self.__class__.__name__}({params})"

    def __call__(self, x, z, p):
        x, z, p = _prepare(x, z, p)
        return self._value(x, z, p)

    def _value(self, x, z, p):
        raise NotImplementedError

    def _dx(self, x, z, p):
        return None

    def _dz(self, x, z, p):
        return None

    def _dp(self, x, z, p):
        return None

    def _dpp(self, x, z, p):
        return None

    def has_analytic(self, which):
        """Whether the analytic derivative ``which`` (e.g. "dz") exists."""
        value = getattr(self, "_" + which)(np.zeros(1), np.zeros(()), np.zeros(1))
        return value is not None

    def _analytic(self, which, x, z, p):
        if self.mode == "fd":
            return None
        return getattr(self, "_" + which)(x, z, p)

    def dx(self, x, z, p):
        out = self._analytic("dx", x, z, p)
        if out is None:
            out = _gradient(lambda xs: self._value(xs, z, p), x, _fd_steps(x))
        return out

    def dz(self, x, z, p):
        out = self._analytic("dz", x, z, p)
        if out is None:
            step = options.fd_step * (1.0 + np.abs(z))
            out = _scalar_derivative(lambda zs: self._value(x, zs, p), z, step)
        return out

    def dp(self, x, z, p):
        out = self._analytic("dp", x, z, p)
        if out is None:
            out = _gradient(lambda ps: self._value(x, z, ps), p, _fd_steps(p))
        return out

    def dpp(self, x, z, p):
        out = self._analytic("dpp", x, z, p)
        if out is None:
            # outer difference of the (analytic or fd) gradient, wider step
            out = _gradient(lambda ps: self.dp(x, z, ps), p, _fd_steps(p, 10.0))
            out = 0.5 * (out + np.swapaxes(out, -1, -2))
        return out

    def jet(self, x, z, p, order=0):
        """Value and derivatives up to ``order`` (0, 1 or 2)."""
        if order not in (0, 1, 2):
            raise DomainError(f"jet order must be 0, 1 or 2, got {order!r}")
        x, z, p = _prepare(x, z, p)
        value = self._value(x, z, p)
        dx = dz = dp = dpp = None
        if order >= 1:
            dx = self.dx(x, z, p)
            dz = self.dz(x, z, p)
            dp = self.dp(x, z, p)
        if order >= 2:
            dpp = self.dpp(x, z, p)
        return self._jet(value, dx, dz, dp, dpp)


class CoefficientA(_Evaluator):
    """
    A symmetric matrix function ``A(x, z, p)``.

    Subclasses implement ``_value`` and may implement the analytic
    derivatives ``_dx``, ``_dz``, ``_dp`` and ``_dpp``. A missing derivative,
    or ``mode="fd"``, falls back to central finite differences with step
    ``options.fd_step * (1 + |p|)`` (and likewise in x and z).

    Parameters
    ----------
    mode : {"analytic", "fd"}, default "analytic"
    """

    _jet = AJet


class ZeroA(CoefficientA):
    """``A = 0``: the standard k-Hessian equation."""

    name = "zero_A"

    def _value(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n))

    def _dx(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n, n))

    def _dz(self, x, z, p):
        return self._value(x, z, p)

    def _dp(self, x, z, p):
        return self._dx(x, z, p)

    def _dpp(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n, n, n))


class ConformalA(CoefficientA):
    """``A = sign * (-|p|^2 / 2 I + p (x) p)``.

    ``sign=1`` is the conformal-geometry matrix as usually printed,
    ``sign=-1`` its sign flip.
    """

    def __init__(self, sign=1, mode="analytic"):
        super().__init__(mode)
        if sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")
        self.sign = sign
        self.name = "conformal_A_as_printed" if sign == 1 else "conformal_A_signflip"
        self.params = {"sign": sign}

    def _value(self, x, z, p):
        n = p.shape[-1]
        sq = np.einsum("...i,...i->...", p, p)
        outer = np.einsum("...i,...j->...ij", p, p)
        out = -0.5 * sq[..., None, None] * np.eye(n) + outer
        return self.sign * out

    def _dx(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n, n))

    def _dz(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n))

    def _dp(self, x, z, p):
        eye = np.eye(p.shape[-1])
        out = (
            -np.einsum("...k,ij->...ijk", p, eye)
            + np.einsum("ik,...j->...ijk", eye, p)
            + np.einsum("...i,jk->...ijk", p, eye)
        )
        return self.sign * out

    def _dpp(self, x, z, p):
        eye = np.eye(p.shape[-1])
        const = (
            -np.einsum("ij,kl->ijkl", eye, eye)
            + np.einsum("ik,jl->ijkl", eye, eye)
            + np.einsum("il,jk->ijkl", eye, eye)
        )
        return self.sign * np.broadcast_to(const, p.shape[:-1] + const.shape).copy()


class SkewProjectorA(CoefficientA):
    """``A = s (|p|^2 I - p (x) p)``, ``s >= 0``."""

    name = "skew_projector_A"

    def __init__(self, s=1.0, mode="analytic"):
        super().__init__(mode)
        if not s >= 0:
            raise DomainError(f"skew_projector_A needs s >= 0, got {s!r}")
        self.s = float(s)
        self.params = {"s": self.s}

    def _value(self, x, z, p):
        n = p.shape[-1]
        sq = np.einsum("...i,...i->...", p, p)
        return self.s * (
            sq[..., None, None] * np.eye(n) - np.einsum("...i,...j->...ij", p, p)
        )

    def _dx(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n, n))

    def _dz(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n))

    def _dp(self, x, z, p):
        eye = np.eye(p.shape[-1])
        out = (
            2.0 * np.einsum("...k,ij->...ijk", p, eye)
            - np.einsum("ik,...j->...ijk", eye, p)
            - np.einsum("...i,jk->...ijk", p, eye)
        )
        return self.s * out

    def _dpp(self, x, z, p):
        eye = np.eye(p.shape[-1])
        const = (
            2.0 * np.einsum("ij,kl->ijkl", eye, eye)
            - np.einsum("ik,jl->ijkl", eye, eye)
            - np.einsum("il,jk->ijkl", eye, eye)
        )
        return self.s * np.broadcast_to(const, p.shape[:-1] + const.shape).copy()


class XDiagA(CoefficientA):
    """``A = c diag(x_1^2, ..., x_n^2)``, depending on position only."""

    name = "x_diag_A"

    def __init__(self, c=0.1, mode="analytic"):
        super().__init__(mode)
        self.c = float(c)
        self.params = {"c": self.c}

    def _value(self, x, z, p):
        n = x.shape[-1]
        return self.c * (x**2)[..., :, None] * np.eye(n)

    def _dx(self, x, z, p):
        n = x.shape[-1]
        out = np.zeros(x.shape[:-1] + (n, n, n))
        idx = np.arange(n)
        out[..., idx, idx, idx] = 2.0 * self.c * x
        return out

    def _dz(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n))

    def _dp(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n, n))

    def _dpp(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n, n, n))


_G_FUNCTIONS = {
    "exp": (lambda z, c: c * np.exp(z), lambda z, c: c * np.exp(z)),
    "linear": (lambda z, c: c * z, lambda z, c: c * np.ones_like(z)),
}


class UDiagA(CoefficientA):
    """``A = g(z) I`` with ``g(z) = c e^z`` ("exp") or ``g(z) = c z`` ("linear")."""

    name = "u_diag_A"
    depends_on_z = True

    def __init__(self, g="exp", c=1.0, mode="analytic"):
        super().__init__(mode)
        if g not in _G_FUNCTIONS:
            raise DomainError(
                f"u_diag_A: unknown g {g!r}, use one of {sorted(_G_FUNCTIONS)}"
            )
        self.g = g
        self.c = float(c)
        self.params = {"g": g, "c": self.c}

    def _value(self, x, z, p):
        n = x.shape[-1]
        return _G_FUNCTIONS[self.g][0](z, self.c)[..., None, None] * np.eye(n)

    def _dx(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n, n))

    def _dz(self, x, z, p):
        n = x.shape[-1]
        return _G_FUNCTIONS[self.g][1](z, self.c)[..., None, None] * np.eye(n)

    def _dp(self, x, z, p):
        return self._dx(x, z, p)

    def _dpp(self, x, z, p):
        n = x.shape[-1]
        return np.zeros(x.shape[:-1] + (n, n, n, n))


class SourceB(_Evaluator):
    """
    A positive scalar source ``B(x, z, p)``.

    Same derivative protocol as :class:`CoefficientA`; :meth:`jet` returns
    the derivatives of ``B`` itself. The solver works with
    ``B~ = B ** (1/k)``, see :meth:`btilde_jet`.
    """

    _jet = BJet

    def btilde_jet(self, k, x, z, p, order=0):
        """``B~ = B ** (1/k)`` and its chain-rule derivatives as a ``BJet``."""
        x, z, p = _prepare(x, z, p)
        jet = self.jet(x, z, p, order)
        _check_positive(jet.value, x, z, p)
        B = jet.value
        bt = B ** (1.0 / k)
        if order == 0:
            return BJet(bt, None, None, None, None)
        c1 = (1.0 / k) * B ** (1.0 / k - 1.0)
        dx = c1[..., None] * jet.dx
        dz = c1 * jet.dz
        dp = c1[..., None] * jet.dp
        dpp = None
        if order >= 2:
            c2 = (1.0 / k) * (1.0 / k - 1.0) * B ** (1.0 / k - 2.0)
            dpp = c1[..., None, None] * jet.dpp + c2[..., None, None] * np.einsum(
                "...k,...l->...kl", jet.dp, jet.dp
            )
        return BJet(bt, dx, dz, dp, dpp)


def _check_positive(value, x, z, p):
    bad = ~(value > 0)
    if np.any(bad):
        idx = np.unravel_index(np.argmax(bad), bad.shape) if bad.ndim else ()
        witness = {
            "x": np.asarray(x)[idx].tolist(),
            "z": float(np.asarray(z)[idx]),
            "p": np.asarray(p)[idx].tolist(),
            "B": float(np.asarray(value)[idx]),
        }
        raise PositivityError(
            f"B must be positive, got B = {witness['B']!r} at x = {witness['x']}",
            witness=witness,
        )


class ConstB(SourceB):
    """``B = b0``."""

    name = "const_B"

    def __init__(self, b0=1.0, mode="analytic"):
        super().__init__(mode)
        if not b0 > 0:
            raise DomainError(f"const_B needs b0 > 0, got {b0!r}")
        self.b0 = float(b0)
        self.params = {"b0": self.b0}

    def _value(self, x, z, p):
        return np.full(x.shape[:-1], self.b0)

    def _dx(self, x, z, p):
        return np.zeros(x.shape)

    def _dz(self, x, z, p):
        return np.zeros(x.shape[:-1])

    def _dp(self, x, z, p):
        return np.zeros(p.shape)

    def _dpp(self, x, z, p):
        n = p.shape[-1]
        return np.zeros(p.shape[:-1] + (n, n))


class PowerB(SourceB):
    """``B = b0 (1 + |p|^2) ** t``."""

    name = "power_B"

    def __init__(self, b0=1.0, t=1.0, mode="analytic"):
        super().__init__(mode)
        if not b0 > 0:
            raise DomainError(f"power_B needs b0 > 0, got {b0!r}")
        self.b0 = float(b0)
        self.t = float(t)
        self.params = {"b0": self.b0, "t": self.t}

    def _value(self, x, z, p):
        sq = np.einsum("...i,...i->...", p, p)
        return self.b0 * (1.0 + sq) ** self.t

    def _dx(self, x, z, p):
        return np.zeros(x.shape)

    def _dz(self, x, z, p):
        return np.zeros(x.shape[:-1])

    def _dp(self, x, z, p):
        sq = np.einsum("...i,...i->...", p, p)
        return (2.0 * self.t * self.b0 * (1.0 + sq) ** (self.t - 1.0))[..., None] * p

    def _dpp(self, x, z, p):
        n = p.shape[-1]
        sq = np.einsum("...i,...i->...", p, p)
        base = 2.0 * self.t * self.b0 * (1.0 + sq) ** (self.t - 1.0)
        rank1 = 4.0 * self.t * (self.t - 1.0) * self.b0 * (1.0 + sq) ** (self.t - 2.0)
        return base[..., None, None] * np.eye(n) + rank1[..., None, None] * np.einsum(
            "...k,...l->...kl", p, p
        )


class ExpUB(SourceB):
    """``B = b0 exp(c z)``; monotone in ``z`` for ``c >= 0``."""

    name = "exp_u_B"
    depends_on_z = True

    def __init__(self, b0=1.0, c=1.0, mode="analytic"):
        super().__init__(mode)
        if not b0 > 0:
            raise DomainError(f"exp_u_B needs b0 > 0, got {b0!r}")
        self.b0 = float(b0)
        self.c = float(c)
        self.params = {"b0": self.b0, "c": self.c}

    def _value(self, x, z, p):
        return self.b0 * np.exp(self.c * z)

    def _dx(self, x, z, p):
        return np.zeros(x.shape)

    def _dz(self, x, z, p):
        return self.c * self._value(x, z, p)

    def _dp(self, x, z, p):
        return np.zeros(p.shape)

    def _dpp(self, x, z, p):
        n = p.shape[-1]
        return np.zeros(p.shape[:-1] + (n, n))


class OTQuadraticB(SourceB):
    """
    Optimal transport source for the cost ``c(x, y) = -x . y``.

    The target point is ``Y(x, p) = p`` and ``|det D^2_xy c| = 1``, so with a
    uniform source density ``f0`` and Gaussian target density
    ``g(y) = g0 exp(-sigma |y|^2 / 2)`` the source is
    ``B = (f0 / g0) exp(sigma |p|^2 / 2)``.
    """

    name = "ot_quadratic_cost"

    def __init__(self, f0=1.0, g0=1.0, sigma=1.0, mode="analytic"):
        super().__init__(mode)
        if not (f0 > 0 and g0 > 0):
            raise DomainError("ot_quadratic_cost needs positive densities f0, g0")
        if not sigma >= 0:
            raise DomainError(f"ot_quadratic_cost needs sigma >= 0, got {sigma!r}")
        self.f0 = float(f0)
        self.g0 = float(g0)
        self.sigma = float(sigma)
        self.params = {"f0": self.f0, "g0": self.g0, "sigma": self.sigma}

    def _value(self, x, z, p):
        sq = np.einsum("...i,...i->...", p, p)
        return (self.f0 / self.g0) * np.exp(0.5 * self.sigma * sq)

    def _dx(self, x, z, p):
        return np.zeros(x.shape)

    def _dz(self, x, z, p):
        return np.zeros(x.shape[:-1])

    def _dp(self, x, z, p):
        return (self.sigma * self._value(x, z, p))[..., None] * p

    def _dpp(self, x, z, p):
        n = p.shape[-1]
        B = self._value(x, z, p)
        return (self.sigma * B)[..., None, None] * (
            np.eye(n) + self.sigma * np.einsum("...k,...l->...kl", p, p)
        )


class SmoothField:
    """
    A smooth scalar field with analytic gradient and Hessian.

    Parameters
    ----------
    value, grad, hess : callable
        Vectorized over points of shape ``(..., n)``; return ``(...)``,
        ``(..., n)`` and ``(..., n, n)``.
    name : str
    """

    def __init__(self, value, grad, hess, name="field"):
        self.value = value
        self.grad = grad
        self.hess = hess
        self.name = name

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    def __repr__(self):
        return f"SmoothField({self.name!r})"


def quadratic_field(mu=1.0, center=None, offset=0.0):
    """``u(x) = mu / 2 |x - center|^2 + offset``."""

    def _center(x):
        return np.zeros(x.shape[-1]) if center is None else np.asarray(center, float)

    def value(x):
        d = x - _center(x)
        return 0.5 * mu * np.einsum("...i,...i->...", d, d) + offset

    def grad(x):
        return mu * (x - _center(x))

    def hess(x):
        n = x.shape[-1]
        return np.broadcast_to(mu * np.eye(n), x.shape[:-1] + (n, n)).copy()

    return SmoothField(value, grad, hess, name=f"quadratic(mu={mu})")


def exp_radial_field(scale=1.0):
    """``u(x) = exp(scale |x|^2 / 2)``; its Hessian is positive definite."""

    def value(x):
        return np.exp(0.5 * scale * np.einsum("...i,...i->...", x, x))

    def grad(x):
        return (scale * value(x))[..., None] * x

    def hess(x):
        n = x.shape[-1]
        u = value(x)[..., None, None]
        return u * scale * (np.eye(n) + scale * np.einsum("...i,...j->...ij", x, x))

    return SmoothField(value, grad, hess, name=f"exp_radial(scale={scale})")


def _central_jet(u, x, h):
    """Central-difference gradient and Hessian of ``u`` at points ``x``."""
    n = x.shape[-1]
    h = np.asarray(h, dtype=float)
    grad = np.empty(x.shape)
    hess = np.empty(x.shape + (n,))
    center = u(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        up, um = u(x + ei), u(x - ei)
        grad[..., i] = (up - um) / (2.0 * h[i])
        hess[..., i, i] = (up - 2.0 * center + um) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            mixed = (
                u(x + ei + ej) - u(x + ei - ej) - u(x - ei + ej) + u(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
            hess[..., i, j] = mixed
            hess[..., j, i] = mixed
    return center, grad, hess


class ManufacturedB(SourceB):
    """
    Source manufactured from a known admissible solution ``u_star``.

    ``B(x) = S_k[D^2 u*(x) - A(x, u*(x), Du*(x))]``. With ``spacing`` given,
    the derivatives of ``u*`` are the grid's central differences, so the
    discrete residual vanishes at ``u = u*`` on that grid.
    """

    name = "manufactured_B"

    def __init__(self, A, k, u_star, spacing=None, tol=None, mode="analytic"):
        super().__init__(mode)
        self.A = A
        self.k = int(k)
        self.u_star = u_star
        self.spacing = None if spacing is None else tuple(float(h) for h in spacing)
        self.tol = tol
        self.params = {"u_star": u_star.name, "k": self.k, "spacing": self.spacing}

    def augmented_hessian(self, x):
        x = np.asarray(x, dtype=float)
        if self.spacing is None:
            u = self.u_star.value(x)
            du = self.u_star.grad(x)
            d2u = self.u_star.hess(x)
        else:
            u, du, d2u = _central_jet(self.u_star.value, x, self.spacing)
        return d2u - self.A(x, u, du)

    def _value(self, x, z, p):
        W = self.augmented_hessian(x)
        W = 0.5 * (W + np.swapaxes(W, -1, -2))
        e = _esp(_eigvalsh(W), self.k)
        tol = self.tol
        if tol is None:
            tol = default_cone_tol(_eigvalsh(W))
        outside = np.any(e[..., 1:] < -np.asarray(tol)[..., None], axis=-1)
        if np.any(outside):
            idx = ()
            if outside.ndim:
                idx = np.unravel_index(np.argmax(outside), outside.shape)
            raise AdmissibilityError(
                f"u_star is not admissible at x = {x[idx].tolist()}",
                index=idx,
                margin=float(np.min(e[idx][1:])),
                witness={"x": x[idx].tolist()},
            )
        return e[..., self.k]

    def _dz(self, x, z, p):
        return np.zeros(x.shape[:-1])

    def _dp(self, x, z, p):
        return np.zeros(p.shape)

    def _dpp(self, x, z, p):
        n = p.shape[-1]
        return np.zeros(p.shape[:-1] + (n, n))


def manufactured_B(A, k, u_star, spacing=None):
    """
    Source term for which ``u_star`` solves the equation.

    Parameters
    ----------
    A : CoefficientA
    k : int
    u_star : SmoothField
    spacing : sequence of float, optional
        Grid spacing; when given the derivatives of ``u_star`` are taken by
        the solver's central differences.

    Returns
    -------
    ManufacturedB
        Admissibility of ``u_star`` is checked lazily at every evaluation.
    """
    return ManufacturedB(A, k, u_star, spacing=spacing)


_CATALOG = {
    "zero_A": (ZeroA, {}),
    "conformal_A_as_printed": (lambda **kw: ConformalA(sign=1, **kw), {}),
    "conformal_A_signflip": (lambda **kw: ConformalA(sign=-1, **kw), {}),
    "skew_projector_A": (SkewProjectorA, {"s": 1.0}),
    "x_diag_A": (XDiagA, {"c": 0.1}),
    "u_diag_A": (UDiagA, {"g": "exp", "c": 1.0}),
    "const_B": (ConstB, {"b0": 1.0}),
    "power_B": (PowerB, {"b0": 1.0, "t": 1.0}),
    "exp_u_B": (ExpUB, {"b0": 1.0, "c": 1.0}),
    "ot_quadratic_cost": (OTQuadraticB, {"f0": 1.0, "g0": 1.0, "sigma": 1.0}),
}

CATALOG_NAMES = tuple(_CATALOG)


def catalog_instantiate(name, params=None, mode="analytic"):
    """
    Build a catalog coefficient or source.

    Parameters
    ----------
    name : str
        One of ``zero_A``, ``conformal_A_as_printed``,
        ``conformal_A_signflip``, ``skew_projector_A`` (s),
        ``x_diag_A`` (c), ``u_diag_A`` (g, c), ``const_B`` (b0),
        ``power_B`` (b0, t), ``exp_u_B`` (b0, c), ``ot_quadratic_cost``
        (f0, g0, sigma).
    params : dict, optional
        Overrides of the entry's default parameters.
    mode : {"analytic", "fd"}

    Returns
    -------
    Components
        ``(A, B)`` with the entry in its slot and ``None`` in the other; the
        optimal transport entry fills both (``A = 0``).
    """
    if name not in _CATALOG:
        raise DomainError(f"unknown catalog entry {name!r}")
    factory, defaults = _CATALOG[name]
    params = dict(params or {})
    unknown = set(params) - set(defaults)
    if unknown:
        raise DomainError(f"{name}: unknown parameters {sorted(unknown)}")
    kwargs = {**defaults, **params}
    obj = factory(mode=mode, **kwargs)
    if name == "ot_quadratic_cost":
        return Components(ZeroA(mode=mode), obj)
    if isinstance(obj, CoefficientA):
        return Components(obj, None)
    return Components(None, obj)


def _finite_or_raise(arr, what, x, z, p):
    if arr is not None and not np.all(np.isfinite(arr)):
        raise NumericError(
            f"{what} is not finite at the query point(s) x={np.asarray(x).tolist()}, "
            f"z={np.asarray(z).tolist()}, p={np.asarray(p).tolist()}"
        )


def eval_A_jet(A, x, z, p, order=0):
    """
    Evaluate ``A`` and its derivatives at query points.

    Parameters
    ----------
    A : CoefficientA
    x, z, p : array-like
    order : {0, 1, 2}

    Returns
    -------
    AJet
        ``dpp`` is symmetric under ``i <-> j`` and ``k <-> l``.
    """
    jet = A.jet(x, z, p, order)
    for what, arr in zip(AJet._fields, jet):
        _finite_or_raise(arr, f"A.{what}", x, z, p)
    return jet


def eval_Btilde_jet(B, k, x, z, p, order=0):
    """
    Evaluate ``B~ = B ** (1/k)`` and its derivatives at query points.

    Raises
    ------
    PositivityError
        If ``B <= 0`` at a query point.
    """
    jet = B.btilde_jet(k, x, z, p, order)
    for what, arr in zip(BJet._fields, jet):
        _finite_or_raise(arr, f"Btilde.{what}", x, z, p)
    return jet


@dataclass(frozen=True)
class ProblemSpec:
    """
    A Dirichlet problem on an axis-aligned box.

    Parameters
    ----------
    n, k : int
        Dimension and order, ``n >= 2`` and ``1 <= k <= n``.
    lo, hi : sequence of float
        Box corners, ``lo < hi`` componentwise.
    A : CoefficientA
    B : SourceB
    phi : callable
        Boundary data, vectorized over points ``(..., n)``.
    depends_on_u : bool, optional
        Whether ``A`` or ``B`` depend on ``u``; defaults to what the
        coefficients declare.
    name : str
    domain_exact : bool, default True
        False when the box only bounds a rotated domain; such problems are
        for coefficient-level checks and are refused by the solver.
    """

    n: int
    k: int
    lo: tuple
    hi: tuple
    A: CoefficientA
    B: SourceB
    phi: object
    depends_on_u: bool = None
    name: str = "custom"
    domain_exact: bool = True
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n={self.n!r} must be an integer >= 2")
        if (
            isinstance(self.k, bool)
            or int(self.k) != self.k
            or not 1 <= self.k <= self.n
        ):
            raise DomainError(f"k={self.k!r} must satisfy 1 <= k <= n={self.n}")
        lo = tuple(float(v) for v in np.broadcast_to(self.lo, (int(self.n),)))
        hi = tuple(float(v) for v in np.broadcast_to(self.hi, (int(self.n),)))
        if not all(a < b for a, b in zip(lo, hi)):
            raise DomainError(f"box needs lo < hi componentwise, got {lo}, {hi}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        declared = bool(self.A.depends_on_z or self.B.depends_on_z)
        if self.depends_on_u is None:
            object.__setattr__(self, "depends_on_u", declared)
        elif declared and not self.depends_on_u:
            raise DomainError(
                "A or B depend on u; depends_on_u=False would drop those terms"
            )

    @property
    def center(self):
        return 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))

    def with_source(self, B, name=None):
        """A copy with a different source term."""
        return ProblemSpec(
            self.n,
            self.k,
            self.lo,
            self.hi,
            self.A,
            B,
            self.phi,
            depends_on_u=self.depends_on_u or B.depends_on_z,
            name=name or self.name,
            domain_exact=self.domain_exact,
            params=self.params,
        )


def _make_zero_A_const_B(n, k, mu=1.0, b0=None):
    b0 = comb(n, k) * mu**k if b0 is None else b0
    return ZeroA(), ConstB(b0), quadratic_field(mu)


def _make_skew_A_const_B(n, k, s=0.1, b0=1.0, mu=1.0):
    return SkewProjectorA(s), ConstB(b0), quadratic_field(mu)


def _make_conformal_A_const_B(n, k, sign=1, b0=1.0, mu=1.0):
    return ConformalA(sign), ConstB(b0), quadratic_field(mu)


def _make_power_B(n, k, b0=1.0, t=1.0, mu=1.0):
    return ZeroA(), PowerB(b0, t), quadratic_field(mu)


def _make_u_dependent(n, k, g="linear", c=1.0, b0=1.0, cb=0.0, mu=0.0):
    return UDiagA(g, c), ExpUB(b0, cb), quadratic_field(mu)


def _make_ot_quadratic(n, k, f0=1.0, g0=1.0, sigma=0.5, mu=1.0):
    return ZeroA(), OTQuadraticB(f0, g0, sigma), quadratic_field(mu)


_FIELDS = {"exp_radial": exp_radial_field, "quadratic": quadratic_field}


def _make_manufactured(n, k, A="zero_A", A_params=None, u_star="exp_radial", scale=1.0):
    if u_star not in _FIELDS:
        raise DomainError(f"unknown manufactured field {u_star!r}")
    coeff = catalog_instantiate(A, A_params).A
    if coeff is None:
        raise DomainError(f"{A!r} is not a coefficient matrix entry")
    field_ = _FIELDS[u_star](scale)
    return coeff, ManufacturedB(coeff, k, field_), field_


_PRESETS = {
    "zero_A_const_B": _make_zero_A_const_B,
    "skew_A_const_B": _make_skew_A_const_B,
    "conformal_A_const_B": _make_conformal_A_const_B,
    "power_B": _make_power_B,
    "u_dependent": _make_u_dependent,
    "ot_quadratic": _make_ot_quadratic,
    "manufactured": _make_manufactured,
}

PRESET_NAMES = tuple(_PRESETS)


def make_problem(name, n, k, lo=0.0, hi=1.0, params=None):
    """
    Build a preset Dirichlet problem.

    Parameters
    ----------
    name : str
        ``zero_A_const_B`` (mu, b0), ``skew_A_const_B`` (s, b0, mu),
        ``conformal_A_const_B`` (sign, b0, mu), ``power_B`` (b0, t, mu),
        ``u_dependent`` (g, c, b0, cb, mu), ``ot_quadratic`` (f0, g0, sigma,
        mu) or ``manufactured`` (A, A_params, u_star, scale). Boundary data
        is ``mu / 2 |x|^2`` except for ``manufactured``, where it is the
        manufactured solution itself.
    n, k : int
    lo, hi : float or sequence of float
    params : dict, optional

    Returns
    -------
    ProblemSpec
    """
    if name not in _PRESETS:
        raise DomainError(f"unknown problem {name!r}, use one of {list(_PRESETS)}")
    params = dict(params or {})
    try:
        A, B, phi = _PRESETS[name](n, k, **params)
    except TypeError as err:
        raise DomainError(f"{name}: invalid parameters {sorted(params)} ({err})")
    return ProblemSpec(n, k, lo, hi, A, B, phi, name=name, params=params)
