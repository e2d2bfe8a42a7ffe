"""Exception hierarchy for the figure renderer.

Every error that can reach the CLI carries an ``exit_code`` so the command
layer can translate failures without inspecting types one by one:
2 = bad figure specification, 3 = input data does not match the expected
table schema.
"""


class FigureError(Exception):
    """Base class for all renderer errors."""

    exit_code = 1


class SpecError(FigureError):
    """A figure specification file is malformed, incomplete, or contradictory."""

    exit_code = 2


class SchemaError(FigureError):
    """An input table is missing required columns or cannot be parsed.

    The message always names the offending column(s) or row so the caller
    can fix the producing run rather than guess.
    """

    exit_code = 3
