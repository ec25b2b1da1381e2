import numpy

from hessdir.tools._random import (
    gram_schmidt_pair,
    orthonormal_pairs,
    random_rotation,
    uniform_ball,
    uniform_box,
    unit_sphere,
)

import pytest


def test_uniform_box():
    x = uniform_box([0.0, -1.0, 2.0], [1.0, 1.0, 3.0], 100, rng=1)
    assert x.shape == (100, 3)
    assert numpy.all(x >= [0.0, -1.0, 2.0])
    assert numpy.all(x <= [1.0, 1.0, 3.0])


def test_same_seed_same_points():
    numpy.testing.assert_array_equal(
        uniform_box([0, 0], [1, 1], 10, rng=42), uniform_box([0, 0], [1, 1], 10, rng=42)
    )
    gen = numpy.random.default_rng(42)
    numpy.testing.assert_array_equal(
        uniform_box([0, 0], [1, 1], 10, rng=gen),
        uniform_box([0, 0], [1, 1], 10, rng=42),
    )


@pytest.mark.parametrize("include_center", [True, False])
def test_uniform_ball(include_center):
    x = uniform_ball(3, 2.0, 50, rng=0, include_center=include_center)
    assert x.shape == (50, 3)
    assert numpy.all(numpy.linalg.norm(x, axis=1) <= 2.0 + 1e-12)
    assert numpy.all(x[0] == 0.0) == include_center


def test_uniform_ball_empty():
    assert uniform_ball(2, 1.0, 0).shape == (0, 2)


def test_unit_sphere():
    v = unit_sphere(4, 20, rng=3)
    numpy.testing.assert_allclose(numpy.linalg.norm(v, axis=1), 1.0)


def test_orthonormal_pairs():
    xi, eta = orthonormal_pairs(3, 25, rng=5)
    numpy.testing.assert_allclose(numpy.linalg.norm(xi, axis=1), 1.0)
    numpy.testing.assert_allclose(numpy.linalg.norm(eta, axis=1), 1.0)
    numpy.testing.assert_allclose(numpy.sum(xi * eta, axis=1), 0.0, atol=1e-12)


def test_orthonormal_pairs_dimension():
    with pytest.raises(ValueError):
        orthonormal_pairs(1, 5)


def test_gram_schmidt_pair_keeps_direction():
    xi, eta = gram_schmidt_pair(numpy.array([2.0, 0.0]), numpy.array([1.0, 3.0]))
    numpy.testing.assert_allclose(xi, [1.0, 0.0])
    numpy.testing.assert_allclose(eta, [0.0, 1.0])


def test_random_rotation():
    q = random_rotation(4, rng=9)
    numpy.testing.assert_allclose(q @ q.T, numpy.eye(4), atol=1e-12)
