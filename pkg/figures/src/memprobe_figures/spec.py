"""Figure specifications.

A figure spec is a small YAML mapping saying what to draw from which
tables::

    kind: bias_curves            # distance | measure | bias_curves |
                                 #   bias_surface | sweep
    inputs: [out/bias/bias.csv]  # one path, or a list of paths to overlay
    output: figs/bias.png
    title: optional figure title

Relative ``inputs``/``output`` paths are resolved against the directory
containing the spec file, so a spec checked in next to its data keeps
working from any working directory.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import SpecError

KINDS = ("distance", "measure", "bias_curves", "bias_surface", "sweep")

_REQUIRED = ("kind", "inputs", "output")
_OPTIONAL = ("title",)


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    output: str
    title: str | None = None


def _validate(spec: FigureSpec) -> FigureSpec:
    if spec.kind not in KINDS:
        raise SpecError(
            f"unknown figure kind {spec.kind!r} (choose from: {', '.join(KINDS)})"
        )
    if not spec.inputs:
        raise SpecError("inputs must name at least one CSV file")
    if not all(isinstance(p, str) and p for p in spec.inputs):
        raise SpecError("inputs must be non-empty strings")
    if not isinstance(spec.output, str) or not spec.output:
        raise SpecError("output must be a non-empty string")
    # PNG is the only format whose bytes we can promise are reproducible.
    if not spec.output.endswith(".png"):
        raise SpecError(f"output must be a .png path, got {spec.output!r}")
    if spec.kind == "bias_surface" and len(spec.inputs) != 1:
        raise SpecError("bias_surface takes exactly one input table")
    if spec.title is not None and not isinstance(spec.title, str):
        raise SpecError(f"title must be a string, got {type(spec.title).__name__}")
    return spec


def from_dict(data: dict, base_dir: Path | None = None) -> FigureSpec:
    """Build a validated :class:`FigureSpec` from a parsed mapping."""
    if not isinstance(data, dict):
        raise SpecError(f"figure spec must be a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - set(_REQUIRED) - set(_OPTIONAL))
    if unknown:
        raise SpecError(f"unknown spec key(s): {', '.join(unknown)}")
    missing = [key for key in _REQUIRED if key not in data]
    if missing:
        raise SpecError(f"missing spec key(s): {', '.join(missing)}")

    inputs = data["inputs"]
    if isinstance(inputs, str):
        inputs = [inputs]
    if not isinstance(inputs, list):
        raise SpecError(f"inputs must be a path or list of paths, got {inputs!r}")
    if base_dir is not None:
        inputs = [_resolve(base_dir, p) for p in inputs]
        output = _resolve(base_dir, data["output"])
    else:
        output = data["output"]
    return _validate(
        FigureSpec(
            kind=data["kind"],
            inputs=tuple(inputs),
            output=output,
            title=data.get("title"),
        )
    )


def _resolve(base_dir: Path, path) -> str:
    if not isinstance(path, str) or not path:
        return path  # let _validate report the type error with context
    if Path(path).is_absolute():
        return path
    return str(base_dir / path)


def load_spec(path) -> FigureSpec:
    """Load and validate a figure spec from a YAML file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc.strerror or exc}") from exc
    except yaml.YAMLError as exc:
        raise SpecError(f"invalid YAML in {path}: {exc}") from exc
    return from_dict(data, base_dir=Path(path).parent)
