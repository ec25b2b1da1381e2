"""Seeded samplers for points in boxes and balls and orthonormal pairs."""
import numpy


def _generator(rng):
    if rng is None:
        return numpy.random.default_rng()
    if isinstance(rng, numpy.random.Generator):
        return rng
    return numpy.random.default_rng(rng)


def uniform_box(lo, hi, size, rng=None):
    """
    Sample uniformly at random from an axis-aligned box.

    Parameters
    ----------
    lo, hi : sequence of float
        Box corners.
    size : int
        Number of points.
    rng : numpy.random.Generator or int, optional

    Returns
    -------
    numpy.ndarray, shape (size, n)

    Examples
    --------
    >>> uniform_box([0, 0], [1, 2], size=5, rng=0).shape
    (5, 2)
    """
    rng = _generator(rng)
    lo = numpy.atleast_1d(numpy.asarray(lo, dtype=float))
    hi = numpy.atleast_1d(numpy.asarray(hi, dtype=float))
    return rng.uniform(lo, hi, size=(size, lo.size))


def uniform_ball(n, radius, size, rng=None, include_center=True):
    """
    Sample uniformly from the closed ball of ``radius`` about the origin.

    The first point is the centre when ``include_center`` is set, so that
    critical points of radial functions are always probed.
    """
    rng = _generator(rng)
    if size == 0:
        return numpy.zeros((0, n))
    direction = rng.standard_normal((size, n))
    direction /= numpy.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.random(size) ** (1.0 / n)
    points = direction * r[:, None]
    if include_center:
        points[0] = 0.0
    return points


def unit_sphere(n, size, rng=None):
    """Uniform unit vectors, shape (size, n)."""
    rng = _generator(rng)
    v = rng.standard_normal((size, n))
    return v / numpy.linalg.norm(v, axis=1, keepdims=True)


def gram_schmidt_pair(xi, eta):
    """Normalize ``xi`` and make ``eta`` a unit vector orthogonal to it."""
    xi = xi / numpy.linalg.norm(xi, axis=-1, keepdims=True)
    eta = eta - numpy.sum(eta * xi, axis=-1, keepdims=True) * xi
    return xi, eta / numpy.linalg.norm(eta, axis=-1, keepdims=True)


def orthonormal_pairs(n, size, rng=None):
    """
    Random pairs of orthogonal unit vectors.

    A Gaussian pair is orthonormalized by Gram-Schmidt.

    Returns
    -------
    xi, eta : numpy.ndarray, shape (size, n)
    """
    if n < 2:
        raise ValueError("orthogonal unit pairs need n >= 2")
    rng = _generator(rng)
    xi = rng.standard_normal((size, n))
    eta = rng.standard_normal((size, n))
    return gram_schmidt_pair(xi, eta)


def random_rotation(n, rng=None):
    """A Haar-distributed orthogonal matrix."""
    rng = _generator(rng)
    q, r = numpy.linalg.qr(rng.standard_normal((n, n)))
    return q * numpy.sign(numpy.diag(r))
