from packaging.version import Version

import pandas as pd
import scipy

PANDAS_GE_15 = Version(pd.__version__) >= Version("1.5.0")
SCIPY_GE_112 = Version(scipy.__version__) >= Version("1.12.0")


def gmres_tolerance_kwargs(rtol):
    """The relative-tolerance keywords of ``scipy.sparse.linalg.gmres``.

    SciPy 1.12 renamed ``tol`` to ``rtol``.
    """
    if SCIPY_GE_112:
        return {"rtol": rtol, "atol": 0.0}
    return {"tol": rtol, "atol": 0.0}


def csv_lineterminator(terminator="\n"):
    """The line-terminator keyword of ``DataFrame.to_csv``.

    pandas 1.5 renamed ``line_terminator`` to ``lineterminator``.
    """
    if PANDAS_GE_15:
        return {"lineterminator": terminator}
    return {"line_terminator": terminator}
