"""Turning result tables into static images.

Rendering is a pure function of the input CSV bytes: a fixed style sheet,
a fixed colour cycle, no timestamps, and no environment-dependent metadata
in the output PNG.  Rendering the same table twice yields byte-identical
files, which makes images diffable artifacts in the same way the CSVs are.

Each figure kind validates the columns it consumes *before* any drawing
happens and reports every missing column by name.  Data is drawn in file
order; nothing is sorted, resampled, or interpolated.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import Normalize

from .errors import SchemaError
from .io import Table, grouped, read_table, require_columns
from .spec import FigureSpec

#: rcParams applied around every render; part of the byte-determinism contract.
STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "font.family": "DejaVu Sans",
    "font.size": 9.0,
    "axes.titlesize": 10.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linewidth": 0.6,
    "lines.linewidth": 1.4,
    "legend.frameon": False,
}

#: Fixed colour cycle (one colour per overlaid table or per curve group).
CYCLE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
)

_BAND_ALPHA = 0.25

# Matplotlib stamps its version string into the PNG otherwise.
_PNG_METADATA = {"Software": None}

_AXIS_LABELS = {
    "nbar": r"$\bar{n}$",
    "omega_z": r"$\omega_z/2\pi$ (MHz)",
    "omega_e": r"$\omega_E/2\pi$ (MHz)",
    "eta": r"$\eta$",
    "rabi": r"$\Omega/2\pi$ (kHz)",
}


def render(spec: FigureSpec) -> Path:
    """Render one figure and return the path of the written PNG."""
    tables = [read_table(path) for path in spec.inputs]
    with matplotlib.rc_context(STYLE):
        fig = build_figure(spec, tables)
        try:
            out = Path(spec.output)
            out.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out, format="png", metadata=_PNG_METADATA)
        finally:
            plt.close(fig)
    return out


def build_figure(spec: FigureSpec, tables: list[Table]):
    """Build (but do not save) the matplotlib Figure for a spec."""
    fig = _BUILDERS[spec.kind](tables)
    if spec.title:
        fig.axes[0].set_title(spec.title)
    return fig


def _label_for(table: Table, n_tables: int, single: str) -> str:
    return single if n_tables == 1 else Path(table.path).stem


def _fmt(value: float) -> str:
    """Tick/legend formatting: 'inf' for infinity, no trailing zeros."""
    if np.isinf(value):
        return "inf"
    return f"{value:g}"


def _build_distance(tables: list[Table]):
    for table in tables:
        require_columns(table, ("t_tau", "D_true", "D_noisy_mean", "deltaD"))
    fig, ax = plt.subplots()
    for k, table in enumerate(tables):
        color = CYCLE[k % len(CYCLE)]
        t = table.columns["t_tau"]
        noisy = table.columns["D_noisy_mean"]
        band = table.columns["deltaD"]
        ax.fill_between(
            t, noisy - band, noisy + band, color=color, alpha=_BAND_ALPHA, linewidth=0
        )
        ax.plot(
            t,
            table.columns["D_true"],
            color=color,
            label=_label_for(table, len(tables), "exact"),
        )
        ax.plot(
            t,
            noisy,
            color=color,
            linestyle="none",
            marker="o",
            markersize=2.5,
            label="measured" if len(tables) == 1 else "_nolegend_",
        )
    ax.set_xlabel(r"$t/\tau$")
    ax.set_ylabel("trace distance $D$")
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    return fig


def _build_measure(tables: list[Table]):
    for table in tables:
        require_columns(table, ("t_max_tau", "N_noisy_mean", "deltaN", "N_true"))
    fig, ax = plt.subplots()
    for k, table in enumerate(tables):
        color = CYCLE[k % len(CYCLE)]
        t = table.columns["t_max_tau"]
        noisy = table.columns["N_noisy_mean"]
        band = table.columns["deltaN"]
        ax.fill_between(
            t, noisy - band, noisy + band, color=color, alpha=_BAND_ALPHA, linewidth=0
        )
        ax.plot(
            t,
            table.columns["N_true"],
            color=color,
            drawstyle="steps-post",
            label=_label_for(table, len(tables), "exact"),
        )
        ax.plot(
            t,
            noisy,
            color=color,
            linestyle="none",
            marker="o",
            markersize=3.0,
            label="measured" if len(tables) == 1 else "_nolegend_",
        )
    ax.set_xlabel(r"$t_{\mathrm{max}}/\tau$")
    ax.set_ylabel(r"accumulated measure $N$")
    ax.set_ylim(bottom=0.0)
    ax.legend()
    return fig


def _build_bias_curves(tables: list[Table]):
    for table in tables:
        require_columns(table, ("gamma_tau", "r", "B"))
    fig, ax = plt.subplots()
    k = 0
    for table in tables:
        gamma_tau = table.columns["gamma_tau"]
        bias = table.columns["B"]
        for r_value, idx in grouped(table.columns["r"]):
            label = f"$r$ = {_fmt(r_value)}"
            if len(tables) > 1:
                label = f"{Path(table.path).stem}, {label}"
            ax.plot(
                gamma_tau[idx],
                bias[idx],
                color=CYCLE[k % len(CYCLE)],
                marker="o",
                markersize=3.0,
                label=label,
            )
            k += 1
    ax.axhline(0.0, color="0.4", linestyle="--", linewidth=0.8)
    ax.set_xlabel(r"$\gamma\tau$")
    ax.set_ylabel("relative bias $B$")
    ax.legend()
    return fig


def pivot_bias(table: Table):
    """Arrange the long-format bias table into a (gamma, r) matrix.

    Axis orderings follow first appearance in the file.  A duplicated or
    absent (gamma_tau, r) pair is reported as a schema error: the producing
    run always writes one row per grid cell, so either means a corrupt or
    hand-edited table that a figure should not paper over.
    """
    require_columns(table, ("gamma_tau", "r", "B"))
    gammas = [value for value, _ in grouped(table.columns["gamma_tau"])]
    rs = [value for value, _ in grouped(table.columns["r"])]
    matrix = np.full((len(gammas), len(rs)), np.nan)
    for g, r, b in zip(
        table.columns["gamma_tau"], table.columns["r"], table.columns["B"]
    ):
        i, j = gammas.index(g), rs.index(r)
        if not np.isnan(matrix[i, j]):
            raise SchemaError(
                f"{table.path}: duplicate cell gamma_tau={_fmt(g)}, r={_fmt(r)}"
            )
        matrix[i, j] = b
    holes = np.argwhere(np.isnan(matrix))
    if holes.size:
        i, j = holes[0]
        raise SchemaError(
            f"{table.path}: incomplete grid, no row for"
            f" gamma_tau={_fmt(gammas[i])}, r={_fmt(rs[j])}"
        )
    return np.asarray(gammas), np.asarray(rs), matrix


def _build_bias_surface(tables: list[Table]):
    gammas, rs, matrix = pivot_bias(tables[0])
    # Symmetric limits put B = 0 at the white centre of the diverging map,
    # so the sign structure survives any rescaling of the data.
    vmax = max(float(np.abs(matrix).max()), 1e-12)
    norm = Normalize(vmin=-vmax, vmax=vmax)
    fig, ax = plt.subplots()
    ax.grid(False)
    mesh = ax.pcolormesh(
        np.arange(len(rs) + 1),
        np.arange(len(gammas) + 1),
        matrix,
        cmap="RdBu_r",
        norm=norm,
        edgecolors="0.85",
        linewidth=0.4,
    )
    for i in range(len(gammas)):
        for j in range(len(rs)):
            value = matrix[i, j]
            ax.text(
                j + 0.5,
                i + 0.5,
                f"{value:.3f}",
                ha="center",
                va="center",
                fontsize=7.0,
                color="white" if abs(value) > 0.6 * vmax else "black",
            )
    ax.set_xticks(np.arange(len(rs)) + 0.5, [_fmt(r) for r in rs])
    ax.set_yticks(np.arange(len(gammas)) + 0.5, [_fmt(g) for g in gammas])
    ax.set_xlabel("$r$")
    ax.set_ylabel(r"$\gamma\tau$")
    fig.colorbar(mesh, ax=ax, label="relative bias $B$")
    return fig


def _build_sweep(tables: list[Table]):
    for table in tables:
        require_columns(
            table, ("axis", "value", "t_max_tau", "N_mean", "deltaN", "N_true")
        )
    axes_seen = {str(a) for table in tables for a in table.columns["axis"]}
    if len(axes_seen) != 1:
        raise SchemaError(
            f"sweep inputs mix axes: {', '.join(sorted(axes_seen))}"
        )
    axis_name = axes_seen.pop()
    fig, ax = plt.subplots()
    k = 0
    for table in tables:
        value = table.columns["value"]
        mean = table.columns["N_mean"]
        band = table.columns["deltaN"]
        true = table.columns["N_true"]
        for t_max, idx in grouped(table.columns["t_max_tau"]):
            color = CYCLE[k % len(CYCLE)]
            label = rf"$t_{{\mathrm{{max}}}}$ = {_fmt(t_max)} $\tau$"
            if len(tables) > 1:
                label = f"{Path(table.path).stem}, {label}"
            ax.fill_between(
                value[idx],
                mean[idx] - band[idx],
                mean[idx] + band[idx],
                color=color,
                alpha=_BAND_ALPHA,
                linewidth=0,
            )
            ax.plot(
                value[idx], mean[idx], color=color, marker="o", markersize=3.0,
                label=label,
            )
            ax.plot(value[idx], true[idx], color=color, linestyle="--", linewidth=1.0)
            k += 1
    ax.set_xlabel(_AXIS_LABELS.get(axis_name, axis_name))
    ax.set_ylabel(r"accumulated measure $N$")
    ax.legend()
    return fig


_BUILDERS = {
    "distance": _build_distance,
    "measure": _build_measure,
    "bias_curves": _build_bias_curves,
    "bias_surface": _build_bias_surface,
    "sweep": _build_sweep,
}
