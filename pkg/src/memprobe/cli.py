"""Command-line interface.

Subcommands map one-to-one onto the harness runners:

    memprobe simulate --config cfg.yaml          # D(t) evolution CSV
    memprobe measure  --config cfg.yaml          # N staircase CSV
    memprobe bias     --config cfg.yaml          # B(gamma, r) surface CSV
    memprobe sweep    --config cfg.yaml -j 4     # axis scan CSV

Exit codes: 0 success, 2 configuration/parameter errors, 3 numerical errors,
4 convergence failures.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import MemprobeError
from .harness import RunConfig, load_config, run_bias, run_measure, run_simulate, run_sweep
from .qpn import NOISE_MODELS


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memprobe",
        description="Spin-boson trace-distance simulation and projection-noise "
                    "bias analysis of the non-Markovianity measure.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("simulate", "noiseless and noise-averaged distance evolution D(t)"),
            ("measure", "non-Markovianity staircase N(t_max) with bias"),
            ("bias", "Monte Carlo bias surface B(gamma, r)"),
            ("sweep", "axis scan (detuning, occupation, gamma, r, t_max)")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--threads", "-j", type=int, default=1,
                       help="worker processes for sweep cells (default 1)")
        p.add_argument("--noise", choices=NOISE_MODELS, default=None,
                       help="override the noise model")
    return parser


def _effective_config(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    if args.noise is not None:
        cfg = replace(cfg, noise_model=args.noise)
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _effective_config(args)
        if args.command == "simulate":
            path = run_simulate(cfg)
        elif args.command == "measure":
            path = run_measure(cfg)
        elif args.command == "bias":
            path = run_bias(cfg)
        else:
            path = run_sweep(cfg, threads=args.threads)
    except MemprobeError as exc:
        print(f"memprobe {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
