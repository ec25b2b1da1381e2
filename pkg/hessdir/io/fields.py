"""
CSV serialization of grid fields.

A field file starts with one header line

    # n=<n> m=<m1,...,mn> lo=<lo1,...> hi=<hi1,...>

followed by rows ``i1,...,in,x1,...,xn,value`` in lexicographic node order.
Floats are written with 17 significant digits, so reading back an emitted
file reproduces every value bit for bit.
"""
import io
import os
import re

import numpy as np
import pandas as pd

from hessdir._compat import csv_lineterminator
from hessdir.errors import DomainError, FieldFormatError
from hessdir.grid import BoxGrid, GridField

FLOAT_FORMAT = "%.17g"

_HEADER = re.compile(
    r"^#\s*n=(?P<n>\d+)\s+m=(?P<m>[0-9,]+)\s+lo=(?P<lo>\S+)\s+hi=(?P<hi>\S+)\s*$"
)


def _expand_user(path):
    """Expand paths that use ~."""
    if isinstance(path, (str, os.PathLike)):
        return os.path.expanduser(path)
    return path


def _fmt(values):
    return ",".join(FLOAT_FORMAT % v for v in values)


def field_header(grid):
    """The header line of a field file on ``grid`` (no newline)."""
    return (
        f"# n={grid.n} m={','.join(str(mi) for mi in grid.m)} "
        f"lo={_fmt(grid.lo)} hi={_fmt(grid.hi)}"
    )


def parse_header(line):
    """
    Parse a field header line into a :class:`~hessdir.grid.BoxGrid`.

    Raises
    ------
    FieldFormatError
    """
    match = _HEADER.match(line.strip())
    if match is None:
        raise FieldFormatError(f"malformed field header: {line.strip()!r}")
    try:
        n = int(match["n"])
        m = [int(v) for v in match["m"].split(",")]
        lo = [float(v) for v in match["lo"].split(",")]
        hi = [float(v) for v in match["hi"].split(",")]
    except ValueError as err:
        raise FieldFormatError(f"malformed field header: {err}")
    if not len(m) == len(lo) == len(hi) == n:
        raise FieldFormatError(
            f"header declares n={n} but lists {len(m)} counts, {len(lo)} lower "
            f"and {len(hi)} upper corners"
        )
    try:
        return BoxGrid(lo, hi, m)
    except DomainError as err:
        raise FieldFormatError(f"invalid grid in header: {err}")


def field_frame(u):
    """The rows of a field file as a DataFrame."""
    grid = u.grid
    index = np.indices(grid.m).reshape(grid.n, -1).T
    coords = grid.coords.reshape(-1, grid.n)
    data = {f"i{a + 1}": index[:, a] for a in range(grid.n)}
    data.update({f"x{a + 1}": coords[:, a] for a in range(grid.n)})
    data["value"] = u.values.ravel()
    return pd.DataFrame(data)


def emit_field(u, path):
    """
    Write a grid field as CSV.

    Parameters
    ----------
    u : GridField
    path : str, path object or file-like object
    """
    text = field_header(u.grid) + "\n" + field_frame(u).to_csv(
        header=False, index=False, float_format=FLOAT_FORMAT, **csv_lineterminator()
    )
    path = _expand_user(path)
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", newline="") as f:
            f.write(text)


def read_field(path, name=None):
    """
    Read a grid field written by :func:`emit_field`.

    Parameters
    ----------
    path : str, path object or file-like object
    name : str, optional

    Returns
    -------
    GridField

    Raises
    ------
    FieldFormatError
        On a malformed header, a node count mismatch, rows out of
        lexicographic order or coordinates off the declared grid.
    """
    path = _expand_user(path)
    if hasattr(path, "read"):
        text = path.read()
    else:
        with open(path) as f:
            text = f.read()
    header, _, body = text.partition("\n")
    grid = parse_header(header)
    n = grid.n
    if not body.strip():
        raise FieldFormatError(f"field file has no rows, expected {np.prod(grid.m)}")
    try:
        frame = pd.read_csv(
            io.StringIO(body), header=None, float_precision="round_trip"
        )
    except (pd.errors.ParserError, ValueError) as err:
        raise FieldFormatError(f"unreadable field rows: {err}")
    if frame.shape[1] != 2 * n + 1:
        raise FieldFormatError(
            f"rows have {frame.shape[1]} columns, expected {2 * n + 1}"
        )
    count = int(np.prod(grid.m))
    if len(frame) != count:
        raise FieldFormatError(f"file has {len(frame)} nodes, header declares {count}")
    index = frame.iloc[:, :n].to_numpy()
    expected = np.indices(grid.m).reshape(n, -1).T
    if not np.array_equal(index, expected):
        bad = int(np.argmax(np.any(index != expected, axis=1)))
        raise FieldFormatError(
            f"node order error at row {bad}: got {index[bad].tolist()}, "
            f"expected {expected[bad].tolist()}"
        )
    coords = frame.iloc[:, n : 2 * n].to_numpy(dtype=float)
    scale = 1.0 + float(np.max(np.abs(grid.coords)))
    if not np.allclose(coords, grid.coords.reshape(-1, n), rtol=0, atol=1e-12 * scale):
        raise FieldFormatError("node coordinates do not match the declared grid")
    values = frame.iloc[:, 2 * n].to_numpy(dtype=float).reshape(grid.m)
    return GridField(grid, values, name=name)
