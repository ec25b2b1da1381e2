"""Environment report behind ``hessctl --show-versions``."""
import os
import platform
import sys
from importlib import metadata

_DEPENDENCIES = (
    "hessdir",
    "numpy",
    "scipy",
    "pandas",
    "jsonschema",
    "packaging",
    "hypothesis",
)


def _get_sys_info():
    """Interpreter and platform details, as an ordered dict of strings."""
    uname = platform.uname()
    return {
        "python": platform.python_version(),
        "executable": sys.executable,
        "machine": f"{uname.system} {uname.release} {uname.machine}",
        "byteorder": sys.byteorder,
        "LANG": os.environ.get("LANG", "None"),
    }


def _get_blas_info():
    """Name and version of the BLAS numpy was built against.

    Both are ``None`` on numpy releases that cannot report their build
    configuration as a dict.
    """
    import numpy

    try:
        build = numpy.show_config(mode="dicts")["Build Dependencies"]
    except (TypeError, KeyError):
        build = {}
    blas = build.get("blas", {})
    return {"BLAS": blas.get("name"), "BLAS version": blas.get("version")}


def _get_deps_info():
    """Installed versions of the runtime and test dependencies.

    Returns
    -------
    dict
        Distribution name to version string, ``None`` when not installed.
    """
    out = {}
    for name in _DEPENDENCIES:
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            module = sys.modules.get(name)
            out[name] = getattr(module, "__version__", None)
    return out


def show_versions():
    """
    Print system information and installed module versions.

    Examples
    --------

    ::

        $ hessctl --show-versions
    """
    sections = [
        ("System", _get_sys_info()),
        ("Linear algebra", _get_blas_info()),
        ("Python dependencies", _get_deps_info()),
    ]
    for title, info in sections:
        width = max(len(key) for key in info)
        print(f"\n{title}:")
        for key, value in info.items():
            print(f"{key:>{width}}: {value}")
