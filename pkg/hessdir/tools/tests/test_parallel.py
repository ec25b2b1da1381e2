import math
import threading

import hessdir
from hessdir.tools._parallel import argmin_reduce, batches, map_ordered

import pytest


@pytest.mark.parametrize("workers", [1, 3, 8])
def test_map_ordered(workers):
    assert map_ordered(lambda x: x * x, range(10), max_workers=workers) == [
        x * x for x in range(10)
    ]


def test_map_ordered_uses_option():
    seen = set()

    def record(x):
        seen.add(threading.get_ident())
        return x

    with hessdir.options.context(max_workers=1):
        assert map_ordered(record, range(5)) == list(range(5))
    assert seen == {threading.get_ident()}


def test_map_ordered_empty():
    assert map_ordered(str, [], max_workers=4) == []


def test_batches():
    assert batches(7, 3) == [slice(0, 3), slice(3, 6), slice(6, 7)]
    assert batches(0, 3) == []
    assert batches(3, 5) == [slice(0, 3)]


def test_argmin_reduce():
    results = [(0.5, "a"), (-1.0, "b"), (float("nan"), "c"), (-1.0, "d")]
    assert argmin_reduce(results) == (-1.0, "b")


def test_argmin_reduce_nothing_left():
    margin, payload = argmin_reduce([(float("nan"), "x")])
    assert math.isnan(margin)
    assert payload is None
