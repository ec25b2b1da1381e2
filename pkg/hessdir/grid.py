"""
Uniform tensor grids on boxes, grid fields and their finite-difference jets.

Node arrays are indexed ``values[i1, ..., in]`` (``"ij"`` ordering). Interior
quantities live on the ``(m1 - 2, ..., mn - 2)`` block; flattened interior
vectors use C order.
"""
from collections import namedtuple
from itertools import product

import numpy as np

from hessdir.errors import DomainError, NumericError

DiscreteJet = namedtuple("DiscreteJet", "x z Du D2u W")
DiscreteJet.__doc__ = """\
Central-difference jet of a grid field at the interior nodes.

x : node coordinates, ``(..., n)``
z : field values, ``(...)``
Du : gradients, ``(..., n)``
D2u : Hessians, ``(..., n, n)``, mixed entries by the 4-point cross stencil
W : augmented Hessians ``D2u - A(x, z, Du)``, symmetric
"""


class BoxGrid:
    """
    Uniform tensor grid on ``[lo, hi]`` with ``m[i]`` nodes along axis i.

    Parameters
    ----------
    lo, hi : sequence of float
    m : int or sequence of int
        Node counts, at least 3 per axis.
    """

    def __init__(self, lo, hi, m):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DomainError("lo and hi must be 1-D with equal length")
        n = lo.size
        m = np.broadcast_to(np.asarray(m), (n,))
        if not np.all(m == np.round(m)) or np.any(m < 3):
            raise DomainError(f"node counts must be integers >= 3, got {m.tolist()}")
        if not np.all(lo < hi):
            raise DomainError("box needs lo < hi componentwise")
        self.n = n
        self.lo = tuple(lo.tolist())
        self.hi = tuple(hi.tolist())
        self.m = tuple(int(v) for v in m)
        self.h = (hi - lo) / (np.asarray(self.m) - 1)
        self.axes = [np.linspace(a, b, mi) for a, b, mi in zip(lo, hi, self.m)]
        self._coords = None

    @classmethod
    def for_problem(cls, prob, m):
        """The grid on a problem's box."""
        return cls(prob.lo, prob.hi, m)

    def __repr__(self):
        return f"BoxGrid(lo={self.lo}, hi={self.hi}, m={self.m})"

    def __eq__(self, other):
        return (
            isinstance(other, BoxGrid)
            and self.m == other.m
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def __hash__(self):
        return hash((self.lo, self.hi, self.m))

    @property
    def shape(self):
        return self.m

    @property
    def interior_shape(self):
        return tuple(mi - 2 for mi in self.m)

    @property
    def n_interior(self):
        return int(np.prod(self.interior_shape))

    @property
    def coords(self):
        """Node coordinates, shape ``m + (n,)``."""
        if self._coords is None:
            mesh = np.meshgrid(*self.axes, indexing="ij")
            self._coords = np.stack(mesh, axis=-1)
        return self._coords

    @property
    def interior(self):
        """Slices selecting the interior block."""
        return tuple(slice(1, mi - 1) for mi in self.m)

    @property
    def interior_coords(self):
        return self.coords[self.interior]

    @property
    def boundary_mask(self):
        mask = np.ones(self.m, dtype=bool)
        mask[self.interior] = False
        return mask

    def shifted(self, values, offset):
        """Interior-shaped view of ``values`` shifted by an integer offset."""
        return values[
            tuple(slice(1 + o, mi - 1 + o) for o, mi in zip(offset, self.m))
        ]

    def face_distance(self, axis, side):
        """Distance of every node to the face ``x[axis] = lo`` (side 0) or
        ``hi`` (side 1)."""
        _check_face(self, axis, side)
        x = self.coords[..., axis]
        return x - self.lo[axis] if side == 0 else self.hi[axis] - x

    def face_index(self, axis, side):
        """Index tuple selecting the nodes of one face."""
        _check_face(self, axis, side)
        idx = [slice(None)] * self.n
        idx[axis] = 0 if side == 0 else self.m[axis] - 1
        return tuple(idx)

    def refine(self):
        """The grid with halved spacing."""
        return BoxGrid(self.lo, self.hi, [2 * mi - 1 for mi in self.m])


def _check_face(grid, axis, side):
    if not 0 <= axis < grid.n:
        raise DomainError(f"face axis {axis} out of range for n={grid.n}")
    if side not in (0, 1):
        raise DomainError(f"face side must be 0 (lo) or 1 (hi), got {side!r}")


class GridField:
    """
    A scalar field sampled at every node of a :class:`BoxGrid`.

    Parameters
    ----------
    grid : BoxGrid
    values : array-like, shape ``grid.m``
    name : str, optional
    """

    def __init__(self, grid, values, name=None):
        values = np.array(values, dtype=float)
        if values.shape != grid.m:
            raise DomainError(
                f"field shape {values.shape} does not match grid {grid.m}"
            )
        if not np.all(np.isfinite(values)):
            raise NumericError("grid field has non-finite values")
        self.grid = grid
        self.values = values
        self.name = name

    def __repr__(self):
        return f"GridField({self.name or 'u'}, m={self.grid.m})"

    @classmethod
    def from_function(cls, grid, func, name=None):
        """Sample ``func`` (vectorized over ``(..., n)`` points) at every node."""
        return cls(grid, func(grid.coords), name=name)

    @classmethod
    def from_problem(cls, prob, grid, interior, name=None):
        """Boundary nodes from ``prob.phi``; interior from an array or callable."""
        values = np.asarray(prob.phi(grid.coords), dtype=float).copy()
        if callable(interior):
            interior = interior(grid.interior_coords)
        values[grid.interior] = np.asarray(interior, dtype=float).reshape(
            grid.interior_shape
        )
        return cls(grid, values, name=name)

    @property
    def interior(self):
        """The interior block (a view)."""
        return self.values[self.grid.interior]

    def interior_vector(self):
        return self.interior.ravel().copy()

    def with_interior(self, vector, name=None):
        """A copy whose interior is replaced by a flat (C-order) vector."""
        values = self.values.copy()
        values[self.grid.interior] = np.asarray(vector, dtype=float).reshape(
            self.grid.interior_shape
        )
        return GridField(self.grid, values, name=name or self.name)

    def copy(self):
        return GridField(self.grid, self.values, name=self.name)

    def boundary_error(self, phi):
        """Largest deviation of the boundary layer from ``phi``."""
        target = np.asarray(phi(self.grid.coords), dtype=float)
        mask = self.grid.boundary_mask
        return float(np.max(np.abs(self.values[mask] - target[mask])))

    def check_boundary(self, phi, atol=0.0):
        """Raise unless the boundary layer equals ``phi`` samples."""
        err = self.boundary_error(phi)
        if err > atol:
            raise DomainError(f"boundary values differ from phi by {err!r}")

    def __add__(self, other):
        other = other.values if isinstance(other, GridField) else other
        return GridField(self.grid, self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, GridField) else other
        return GridField(self.grid, self.values - other)


def _check_size(grid):
    if any(mi < 3 for mi in grid.m):
        raise DomainError("finite differences need at least 3 nodes per axis")


def central_derivatives(values, grid):
    """
    Central first and second differences at the interior nodes.

    Returns
    -------
    Du : np.ndarray, shape ``interior_shape + (n,)``
    D2u : np.ndarray, shape ``interior_shape + (n, n)``
        Exact for quadratic polynomials; mixed entries use the 4-point cross
        stencil and are exact for bilinear terms.
    """
    _check_size(grid)
    n = grid.n
    h = grid.h
    center = grid.shifted(values, (0,) * n)
    Du = np.empty(grid.interior_shape + (n,))
    D2u = np.empty(grid.interior_shape + (n, n))
    for i in range(n):
        ei = np.zeros(n, dtype=int)
        ei[i] = 1
        up = grid.shifted(values, ei)
        um = grid.shifted(values, -ei)
        Du[..., i] = (up - um) / (2.0 * h[i])
        D2u[..., i, i] = (up - 2.0 * center + um) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n, dtype=int)
            ej[j] = 1
            mixed = (
                grid.shifted(values, ei + ej)
                - grid.shifted(values, ei - ej)
                - grid.shifted(values, -ei + ej)
                + grid.shifted(values, -ei - ej)
            ) / (4.0 * h[i] * h[j])
            D2u[..., i, j] = mixed
            D2u[..., j, i] = mixed
    return Du, D2u


def discrete_jet(u, prob):
    """
    The discrete jet of ``u`` at the interior nodes of its grid.

    Parameters
    ----------
    u : GridField
    prob : ProblemSpec

    Returns
    -------
    DiscreteJet
    """
    grid = u.grid
    if grid.n != prob.n:
        raise DomainError(f"field dimension {grid.n} != problem dimension {prob.n}")
    Du, D2u = central_derivatives(u.values, grid)
    x = grid.interior_coords
    z = u.interior
    A = prob.A(x, z, Du)
    W = D2u - A
    W = 0.5 * (W + np.swapaxes(W, -1, -2))
    return DiscreteJet(x, z, Du, D2u, W)


def _second_difference_all(values, h, axis):
    """Second difference along ``axis`` at every node.

    Central in the interior; the 4-point one-sided stencil
    ``(2 u0 - 5 u1 + 4 u2 - u3) / h^2`` at the two ends (the 3-point one when
    only 3 nodes exist).
    """
    v = np.moveaxis(values, axis, 0)
    out = np.empty(v.shape)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2
    if v.shape[0] >= 4:
        out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h**2
        out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h**2
    else:
        out[0] = out[1]
        out[-1] = out[1]
    return np.moveaxis(out, 0, axis)


def full_hessian(values, grid):
    """
    Second derivatives at every node, boundary included.

    Diagonal entries use :func:`_second_difference_all`; mixed entries
    compose two second-order ``np.gradient`` passes, which reduces to the
    cross stencil in the interior.

    Returns
    -------
    np.ndarray, shape ``grid.m + (n, n)``
    """
    _check_size(grid)
    values = np.asarray(values, dtype=float)
    n = grid.n
    out = np.empty(grid.m + (n, n))
    for i in range(n):
        out[..., i, i] = _second_difference_all(values, grid.h[i], i)
        first = np.gradient(values, grid.h[i], axis=i, edge_order=2)
        for j in range(i + 1, n):
            mixed = np.gradient(first, grid.h[j], axis=j, edge_order=2)
            out[..., i, j] = mixed
            out[..., j, i] = mixed
    return out


def full_gradient(values, grid):
    """Second-order gradient at every node, shape ``grid.m + (n,)``."""
    return np.stack(
        [
            np.gradient(values, grid.h[i], axis=i, edge_order=2)
            for i in range(grid.n)
        ],
        axis=-1,
    )


def stencil_offsets(n):
    """Offsets used by the central scheme: centre, axes and diagonals."""
    offsets = [(0,) * n]
    for i in range(n):
        for s in (1, -1):
            e = [0] * n
            e[i] = s
            offsets.append(tuple(e))
    for i in range(n):
        for j in range(i + 1, n):
            for si, sj in product((1, -1), repeat=2):
                e = [0] * n
                e[i] = si
                e[j] = sj
                offsets.append(tuple(e))
    return offsets
