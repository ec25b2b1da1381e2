__version__ = "0.3.0"


def get_versions():
    return {"version": __version__, "full-revisionid": None, "dirty": False}
