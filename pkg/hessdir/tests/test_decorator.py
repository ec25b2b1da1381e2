from hessdir._decorator import doc

_section = """
Returns
-------
{kind}
    The {what}.
"""


@doc(_section, kind="float", what="sum")
def total(values):
    """
    Add up ``values``; braces {like these} stay literal."""


@doc(_section, "\nNotes\n-----\nShared.\n", kind="int", what="count")
def count(values):
    """Count ``values``."""


@doc()
def plain():
    """Nothing appended."""


def test_sections_appended_and_formatted():
    assert total.__doc__ == (
        "\nAdd up ``values``; braces {like these} stay literal."
        "\nReturns\n-------\nfloat\n    The sum.\n"
    )


def test_several_sections():
    assert count.__doc__.startswith("Count ``values``.\nReturns")
    assert count.__doc__.endswith("Notes\n-----\nShared.\n")
    assert count._doc_sections[0] is _section


def test_without_sections():
    assert plain.__doc__ == "Nothing appended."
