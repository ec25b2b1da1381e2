from textwrap import dedent
from typing import Callable


def doc(*sections: str, **params) -> Callable:
    """
    Append shared docstring sections to the decorated callable.

    Each section is dedented and, when ``params`` are given, filled with
    ``str.format``. The callable's own docstring is never formatted, so it
    may contain literal braces.

    Parameters
    ----------
    *sections : str
        Docstring fragments, appended in order.
    **params
        Values substituted into the ``{name}`` fields of the sections.

    Examples
    --------
    >>> @doc("\\nReturns\\n-------\\n{kind}\\n", kind="float")
    ... def area(r):
    ...     '''Area of a disc.'''
    >>> print(area.__doc__)
    Area of a disc.
    Returns
    -------
    float
    <BLANKLINE>
    """

    def decorator(decorated: Callable) -> Callable:
        parts = [dedent(decorated.__doc__ or "")]
        for section in sections:
            section = dedent(section)
            parts.append(section.format(**params) if params else section)
        decorated.__doc__ = "".join(parts)
        decorated._doc_sections = sections
        return decorated

    return decorator
