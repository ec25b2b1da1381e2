"""
Lightweight options machinery.

Attribute-style access to a flat dict of numerical defaults (tolerances,
finite-difference steps, fan-out width), each with a validator and a
docstring used in the repr.
"""
import textwrap
from collections import namedtuple
from contextlib import contextmanager
from numbers import Integral, Real

Option = namedtuple("Option", "key default_value doc validator callback")


class Options(object):
    """Provide attribute-style access to configuration dict."""

    def __init__(self, options):
        super().__setattr__("_options", options)
        # populate with default values
        config = {}
        for key, option in options.items():
            config[key] = option.default_value

        super().__setattr__("_config", config)

    def __setattr__(self, key, value):
        # you can't set new keys
        if key in self._config:
            option = self._options[key]
            if option.validator:
                option.validator(value)
            self._config[key] = value
            if option.callback:
                option.callback(key, value)
        else:
            msg = "You can only set the value of existing options"
            raise AttributeError(msg)

    def __getattr__(self, key):
        try:
            return self._config[key]
        except KeyError:
            raise AttributeError("No such option")

    def __dir__(self):
        return list(self._config.keys())

    def reset(self, key=None):
        """Restore one option (or all of them) to the default value."""
        keys = [key] if key is not None else list(self._options)
        for name in keys:
            if name not in self._options:
                raise AttributeError("No such option")
            self._config[name] = self._options[name].default_value

    @contextmanager
    def context(self, **kwargs):
        """Temporarily set options inside a ``with`` block.

        Examples
        --------
        >>> with hessdir.options.context(check_tol=1e-6):
        ...     hessdir.options.check_tol
        1e-06
        """
        saved = {key: getattr(self, key) for key in kwargs}
        try:
            for key, value in kwargs.items():
                setattr(self, key, value)
            yield self
        finally:
            for key, value in saved.items():
                self._config[key] = value

    def __repr__(self):
        cls = self.__class__.__name__
        description = ""
        for key, option in self._options.items():
            descr = "{key}: {cur!r} [default: {default!r}]\n".format(
                key=key, cur=self._config[key], default=option.default_value
            )
            description += descr

            if option.doc:
                doc_text = "\n".join(textwrap.wrap(option.doc, width=70))
            else:
                doc_text = "No description available."
            doc_text = textwrap.indent(doc_text, prefix="    ")
            description += doc_text + "\n"
        space = "\n  "
        description = description.replace("\n", space)
        return "{}({}{})".format(cls, space, description)


def _validate_positive_float(value):
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ValueError("Invalid value, needs to be a positive number")
    if not value > 0:
        raise ValueError("Invalid value, needs to be a positive number")


def _validate_nonnegative_float(value):
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ValueError("Invalid value, needs to be a non-negative number")
    if not value >= 0:
        raise ValueError("Invalid value, needs to be a non-negative number")


def _validate_positive_int(value):
    if isinstance(value, bool) or not isinstance(value, Integral) or value < 1:
        raise ValueError("Invalid value, needs to be an integer >= 1")


cone_tol = Option(
    key="cone_tol",
    default_value=1e-10,
    doc=(
        "Relative tolerance of the Garding cone boundary band. A tuple is "
        "classified on the boundary when every S_j(lambda) lies within "
        "cone_tol * (1 + |lambda|_1) of zero or above."
    ),
    validator=_validate_nonnegative_float,
    callback=None,
)

check_tol = Option(
    key="check_tol",
    default_value=1e-8,
    doc=(
        "Absolute tolerance applied to the margins of structural "
        "certificates. A condition holds when its worst sampled margin is "
        ">= -check_tol."
    ),
    validator=_validate_nonnegative_float,
    callback=None,
)

fd_step = Option(
    key="fd_step",
    default_value=1e-5,
    doc=(
        "Relative step of the central finite differences used for "
        "coefficient derivatives in finite-difference mode; the actual step "
        "is fd_step * (1 + |p|)."
    ),
    validator=_validate_positive_float,
    callback=None,
)

max_workers = Option(
    key="max_workers",
    default_value=1,
    doc=(
        "Number of worker threads used to fan out sample batches, barrier "
        "sweeps and parameter sweeps. Results do not depend on this value."
    ),
    validator=_validate_positive_int,
    callback=None,
)

direct_solve_limit = Option(
    key="direct_solve_limit",
    default_value=257**2,
    doc=(
        "Largest number of unknowns for which Newton sub-solves use a sparse "
        "direct factorization. Larger systems use preconditioned GMRES."
    ),
    validator=_validate_positive_int,
    callback=None,
)

options = Options(
    {
        "cone_tol": cone_tol,
        "check_tol": check_tol,
        "fd_step": fd_step,
        "max_workers": max_workers,
        "direct_solve_limit": direct_solve_limit,
    }
)
