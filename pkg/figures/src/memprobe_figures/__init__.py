"""Static figure rendering for memprobe result CSVs.

This package talks to the simulation package only through its CSV files;
it never imports it.  See :mod:`memprobe_figures.spec` for the figure spec
format and :mod:`memprobe_figures.render` for the determinism contract.
"""

from .errors import FigureError, SchemaError, SpecError
from .io import Table, read_table
from .render import render
from .spec import KINDS, FigureSpec, load_spec

__all__ = [
    "FigureError",
    "FigureSpec",
    "KINDS",
    "SchemaError",
    "SpecError",
    "Table",
    "load_spec",
    "read_table",
    "render",
]

__version__ = "0.1.0"
