"""Command line entry point: ``mxrob generate|phase|slice|threshold|preset NAME``."""

from __future__ import annotations

import argparse
import logging
import sys

from .attack import ATTACK_KINDS
from .experiments import PRESETS, ExperimentConfig, preset_config, read_config_file, run_command

COMMANDS = ("generate", "phase", "slice", "threshold")


def _options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("experiment options (each has a config-file twin)")
    g.add_argument("--config", metavar="FILE", help="key=value config file; flags override it")
    g.add_argument("--n", type=int, help="number of multiplex nodes")
    g.add_argument("--z1", type=float, help="mean degree of layer 1")
    g.add_argument("--z2", type=float, help="mean degree of layer 2")
    g.add_argument("--topology", choices=("er", "ba"))
    g.add_argument("--attack", choices=ATTACK_KINDS)
    g.add_argument("--phi1", help="comma-separated layer-1 removal fractions (slice: fixed values)")
    g.add_argument("--phi2", help="comma-separated layer-2 fractions (default: the grid)")
    g.add_argument("--grid-step", type=float)
    g.add_argument("--fine", action="store_true", help="grid step 0.01")
    g.add_argument("--phi-min", type=float)
    g.add_argument("--phi-max", type=float)
    g.add_argument("--runs", type=int, help="realizations per point")
    g.add_argument("--seed", type=int, help="master seed")
    g.add_argument("--theory", choices=("analytic", "empirical"))
    g.add_argument("--theory-instances", type=int)
    g.add_argument("--z-min", type=float)
    g.add_argument("--z-max", type=float)
    g.add_argument("--z-step", type=float)
    g.add_argument("--workers", type=int)
    g.add_argument("--out", metavar="DIR")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    opts = _options()
    parser = argparse.ArgumentParser(prog="mxrob", description="Multiplex network robustness experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[opts], help="write a random multiplex as edge-list files")
    sub.add_parser("phase", parents=[opts], help="R over the (phi1, phi2) grid plus threshold curve")
    sub.add_parser("slice", parents=[opts], help="R against phi2 for fixed phi1 values")
    sub.add_parser("threshold", parents=[opts], help="critical thresholds against mean degree")
    pre = sub.add_parser("preset", parents=[opts], help="run a figure preset")
    pre.add_argument("name", choices=sorted(PRESETS))
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    logging.basicConfig(level=logging.INFO if args.pop("verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        values = read_config_file(args.pop("config")) if "config" in args else {}
        if args.pop("fine", False):
            args["grid_step"] = 0.01
        values.update(args)
        if command == "preset":
            name = values.pop("name")
            values.setdefault("out", f"out/{name}")
            command, cfg = preset_config(name, **values)
        else:
            cfg = ExperimentConfig(**values)
        record = run_command(command, cfg)
    except (ValueError, OSError) as exc:
        print(f"mxrob: error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {', '.join(record.outputs)} to {cfg.out} ({record.wall_time_s:.1f} s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
