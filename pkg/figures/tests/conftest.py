"""Golden tables for the renderer tests.

These fixtures write small CSVs in exactly the shape the simulation CLI
emits: three ``#`` provenance lines, a header row, then rows whose floats
are formatted with ``repr`` (so ``inf`` appears literally in the ``r``
column).  The files are built from fixed arrays, not captured output, so
the tests keep working without the simulation package installed.
"""

import numpy as np
import pytest

FAKE_HASH = "9c41f2a8d3b7" * 5 + "beef"  # shaped like a sha256 hex digest


def write_table(path, command, names, columns, seed=7):
    """Write one CSV in the producer's on-disk format and return its path."""
    lines = [
        f"# memprobe {command} v0.1.0",
        f"# config_sha256: {FAKE_HASH}",
        f"# seed: {seed}",
        ",".join(names),
    ]
    for row in zip(*columns):
        lines.append(
            ",".join(c if isinstance(c, str) else repr(float(c)) for c in row)
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def drop_column(src, dst, name):
    """Copy a CSV leaving out one column; used to provoke schema errors."""
    lines = src.read_text(encoding="utf-8").splitlines()
    out = []
    index = None
    for line in lines:
        if line.startswith("#"):
            out.append(line)
            continue
        cells = line.split(",")
        if index is None:
            index = cells.index(name)
        out.append(",".join(cells[:index] + cells[index + 1 :]))
    dst.write_text("\n".join(out) + "\n", encoding="utf-8")
    return dst


@pytest.fixture
def simulate_csv(tmp_path):
    """Distance trace of a run without spin-boson coupling: D identically 1."""
    t = np.linspace(0.0, 2.0, 17)
    d_true = np.ones_like(t)
    rng = np.random.default_rng(11)
    d_noisy = d_true + rng.normal(scale=0.004, size=t.size)
    delta_d = np.full_like(t, 0.009)
    return write_table(
        tmp_path / "simulate.csv",
        "simulate",
        ("t_tau", "D_true", "D_noisy_mean", "deltaD"),
        (t, d_true, d_noisy, delta_d),
    )


@pytest.fixture
def measure_csv(tmp_path):
    """Accumulated-measure staircase over nine window lengths (with flats)."""
    t_max = np.arange(1.0, 10.0)
    n_true = np.array([0.4, 0.7, 0.7, 1.15, 1.35, 1.35, 1.7, 1.85, 1.85])
    rng = np.random.default_rng(12)
    n_noisy = n_true + np.abs(rng.normal(scale=0.06, size=t_max.size))
    delta_n = np.full_like(t_max, 0.05)
    bias = (n_noisy - n_true) / n_true
    return write_table(
        tmp_path / "measure.csv",
        "measure",
        ("t_max_tau", "N_noisy_mean", "deltaN", "N_true", "B"),
        (t_max, n_noisy, delta_n, n_true, bias),
    )


BIAS_GAMMAS = np.array([5.0, 6.5, 8.0, 10.0, 12.0])
BIAS_RS = np.array([500.0, np.inf])
# One column per r, one row per gamma; the finite-r column changes sign.
BIAS_B = np.array(
    [
        [-0.18, 0.0],
        [-0.07, 0.0],
        [0.04, 0.0],
        [0.12, 0.0],
        [0.19, 0.0],
    ]
)


@pytest.fixture
def bias_csv(tmp_path):
    """Long-format bias grid over (gamma, r) with a sign change along gamma."""
    n_true = 1.737
    rows = {name: [] for name in ("gamma_tau", "r", "N_mean", "N_std", "N_true", "B")}
    for i, gamma in enumerate(BIAS_GAMMAS):
        for j, r in enumerate(BIAS_RS):
            b = BIAS_B[i, j]
            rows["gamma_tau"].append(gamma)
            rows["r"].append(r)
            rows["N_mean"].append(n_true * (1.0 + b))
            rows["N_std"].append(0.0 if np.isinf(r) else 0.05)
            rows["N_true"].append(n_true)
            rows["B"].append(b)
    return write_table(
        tmp_path / "bias.csv",
        "bias",
        tuple(rows),
        tuple(rows.values()),
    )


@pytest.fixture
def sweep_csv(tmp_path):
    """Occupation sweep at two window lengths, rows written value-major."""
    values = np.array([0.09, 0.2, 0.4, 0.6, 0.8, 1.0])
    windows = (2.0, 9.0)
    rows = {
        name: []
        for name in (
            "axis", "value", "t_max_tau", "N_mean", "N_std", "deltaN", "N_true", "B",
        )
    }
    for value in values:
        for t_max in windows:
            n_true = 0.5 * value * t_max
            rows["axis"].append("nbar")
            rows["value"].append(value)
            rows["t_max_tau"].append(t_max)
            rows["N_mean"].append(n_true * 1.08)
            rows["N_std"].append(0.04)
            rows["deltaN"].append(0.03)
            rows["N_true"].append(n_true)
            rows["B"].append(0.08)
    return write_table(
        tmp_path / "sweep.csv",
        "sweep",
        tuple(rows),
        tuple(rows.values()),
    )
