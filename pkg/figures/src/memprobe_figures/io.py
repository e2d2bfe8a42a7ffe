"""Reading result tables produced by the simulation CLI.

The on-disk contract is plain CSV prefixed with ``#`` provenance comments:
any number of comment lines, one header row naming the columns, then data
rows.  Columns whose every entry parses as a float become float64 arrays
(``inf`` and ``nan`` included); anything else is kept as strings, which
covers the sweep table's ``axis`` column.

Row order is preserved exactly as written.  Nothing in this module sorts,
deduplicates, or interpolates — the figures show the file, not a cleaned-up
version of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FigureError, SchemaError


@dataclass(frozen=True)
class Table:
    """One parsed CSV file: provenance comments, column names, column data."""

    path: str
    comments: tuple[str, ...]
    names: tuple[str, ...]
    columns: dict[str, np.ndarray] = field(repr=False)

    def __len__(self) -> int:
        return len(self.columns[self.names[0]])

    def column(self, name: str) -> np.ndarray:
        """Return one column, failing loudly if the table does not have it."""
        require_columns(self, (name,))
        return self.columns[name]


def read_table(path) -> Table:
    """Parse a result CSV into a :class:`Table`."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise FigureError(f"cannot read {path}: {exc.strerror or exc}") from exc

    comments = []
    body = []
    for line in lines:
        if not body and line.startswith("#"):
            comments.append(line)
        elif line.strip():
            body.append(line)
    if not body:
        raise SchemaError(f"{path}: no header row")

    names = tuple(cell.strip() for cell in body[0].split(","))
    if len(set(names)) != len(names):
        raise SchemaError(f"{path}: duplicate column names in header")
    rows = []
    for number, line in enumerate(body[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(names):
            raise SchemaError(
                f"{path}: row {number} has {len(cells)} fields, expected {len(names)}"
            )
        rows.append([cell.strip() for cell in cells])
    if not rows:
        raise SchemaError(f"{path}: no data rows")

    columns = {}
    for j, name in enumerate(names):
        cells = [row[j] for row in rows]
        try:
            columns[name] = np.array([float(cell) for cell in cells])
        except ValueError:
            columns[name] = np.array(cells)
    return Table(path=str(path), comments=tuple(comments), names=names, columns=columns)


def require_columns(table: Table, names) -> None:
    """Raise :class:`SchemaError` naming every column in `names` the table lacks."""
    missing = [name for name in names if name not in table.columns]
    if missing:
        raise SchemaError(
            f"{table.path}: missing column(s) {', '.join(repr(m) for m in missing)}"
            f" (found: {', '.join(table.names)})"
        )


def grouped(values: np.ndarray):
    """Split row indices by value, keeping first-appearance order.

    Returns a list of ``(value, indices)`` pairs.  Within each group the
    indices stay in file order, so downstream plotting draws the rows in
    the order the producing run wrote them.
    """
    order = []
    members = {}
    for i, value in enumerate(values):
        key = value.item() if hasattr(value, "item") else value
        if key not in members:
            order.append(key)
            members[key] = []
        members[key].append(i)
    return [(key, np.array(members[key])) for key in order]
