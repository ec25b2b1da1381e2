import io

import numpy as np

from hessdir.errors import FieldFormatError
from hessdir.grid import BoxGrid, GridField
from hessdir.io.fields import emit_field, field_header, parse_header, read_field

import pytest
from hessdir.testing import assert_field_equal


@pytest.fixture
def field(rng):
    grid = BoxGrid([-1.0, 0.0], [1.0, 0.3], [4, 5])
    return GridField(grid, rng.normal(size=grid.m))


def _text(u):
    buf = io.StringIO()
    emit_field(u, buf)
    return buf.getvalue()


def test_round_trip_is_exact(field, tmpdir):
    path = str(tmpdir.join("u.csv"))
    emit_field(field, path)
    result = read_field(path)
    assert_field_equal(result, field)
    assert result.grid == field.grid


def test_buffer_round_trip(field):
    result = read_field(io.StringIO(_text(field)))
    np.testing.assert_array_equal(result.values, field.values)


def test_small_file_layout():
    grid = BoxGrid([0.0, 0.0], [1.0, 1.0], 3)
    text = _text(GridField(grid, np.zeros(grid.m)))
    lines = text.splitlines()
    assert lines[0] == "# n=2 m=3,3 lo=0,0 hi=1,1"
    assert len(lines) == 10
    assert lines[1] == "0,0,0,0,0"
    assert lines[2] == "0,1,0,0.5,0"
    assert text.endswith("\n")


def test_header_round_trip(field):
    assert parse_header(field_header(field.grid)) == field.grid


@pytest.mark.parametrize(
    "line",
    [
        "n=2 m=3,3 lo=0,0 hi=1,1",
        "# n=2 m=3 lo=0,0 hi=1,1",
        "# n=2 m=3,3 lo=0,a hi=1,1",
        "# n=1 m=2 lo=0 hi=1",
        "# n=1 m=3 lo=1 hi=0",
    ],
)
def test_malformed_header(line):
    with pytest.raises(FieldFormatError):
        parse_header(line)


def test_permuted_rows_rejected(field):
    lines = _text(field).splitlines()
    lines[1], lines[2] = lines[2], lines[1]
    with pytest.raises(FieldFormatError, match="node order error at row 0"):
        read_field(io.StringIO("\n".join(lines) + "\n"))


def test_wrong_node_count(field):
    lines = _text(field).splitlines()
    with pytest.raises(FieldFormatError, match="header declares 20"):
        read_field(io.StringIO("\n".join(lines[:-1]) + "\n"))


def test_wrong_column_count():
    text = "# n=1 m=3 lo=0 hi=1\n0,0,1,7\n1,0.5,1,7\n2,1,1,7\n"
    with pytest.raises(FieldFormatError, match="columns"):
        read_field(io.StringIO(text))


def test_coordinates_checked():
    text = "# n=1 m=3 lo=0 hi=1\n0,0,1\n1,0.25,1\n2,1,1\n"
    with pytest.raises(FieldFormatError, match="coordinates"):
        read_field(io.StringIO(text))


def test_no_rows():
    with pytest.raises(FieldFormatError, match="no rows"):
        read_field(io.StringIO("# n=1 m=3 lo=0 hi=1\n"))


def test_expand_user(field, tmpdir, monkeypatch):
    monkeypatch.setenv("HOME", str(tmpdir))
    emit_field(field, "~/u.csv")
    assert tmpdir.join("u.csv").check()
    assert_field_equal(read_field("~/u.csv"), field)
