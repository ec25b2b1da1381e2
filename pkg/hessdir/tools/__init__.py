from ._parallel import map_ordered
from ._random import orthonormal_pairs, random_rotation, uniform_ball, uniform_box
from .selftest import run_selftest

__all__ = [
    "map_ordered",
    "orthonormal_pairs",
    "random_rotation",
    "run_selftest",
    "uniform_ball",
    "uniform_box",
]
