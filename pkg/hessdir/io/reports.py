"""
Run reports (JSON) and audit tables (CSV).

Report JSON has sorted keys and floats in ``repr`` form; the ``timestamp``
member carries everything that differs between identical runs (creation
time and wall times).
"""
import datetime
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from hessdir._compat import csv_lineterminator
from hessdir._version import __version__

TABLE_FLOAT_FORMAT = "%.17g"


def to_jsonable(obj):
    """
    Convert numpy scalars and arrays, tuples and dataclass-like objects into
    plain JSON values; non-finite floats become ``None``.
    """
    if hasattr(obj, "to_dict") and not isinstance(obj, pd.DataFrame):
        obj = obj.to_dict()
    if isinstance(obj, pd.DataFrame):
        return to_jsonable(obj.to_dict(orient="records"))
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def dumps(obj):
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False)
    return text + "\n"


@dataclass
class RunReport:
    """
    Outcome of one ``hessctl`` command.

    Parameters
    ----------
    command : str
    config : dict
        The canonical config echo.
    results : dict
    exit_status : int
    timestamp : dict
        Creation time and timings; excluded from determinism comparisons.
    """

    command: str
    config: dict
    results: dict = field(default_factory=dict)
    exit_status: int = 0
    version: str = __version__
    timestamp: dict = field(default_factory=dict)

    def __post_init__(self):
        self.timestamp.setdefault(
            "created", datetime.datetime.now(datetime.timezone.utc).isoformat()
        )

    def to_dict(self, timestamp=True):
        out = {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "exit_status": self.exit_status,
            "version": self.version,
        }
        if timestamp:
            out["timestamp"] = self.timestamp
        return out


def write_report(report, path):
    """Write a :class:`RunReport` (or any JSON-able object) to ``path``."""
    with open(os.path.expanduser(path), "w", newline="\n") as f:
        f.write(dumps(report))


def read_report(path):
    with open(os.path.expanduser(path)) as f:
        return json.load(f)


def write_table(table, path):
    """
    Write an audit or sweep table as CSV with 17-significant-digit floats.

    Parameters
    ----------
    table : pandas.DataFrame
    path : str or path object
    """
    table.to_csv(
        os.path.expanduser(path),
        index=False,
        float_format=TABLE_FLOAT_FORMAT,
        **csv_lineterminator(),
    )
