"""Command-line entry point.

    jrcsar --config scenario.cfg --mode point --seed 7 --out results/ \
           --snr-list 5 10 20

Exit status is nonzero when any pipeline stage reports an error; the failing
stage is recorded in the manifest and printed to stderr.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from .config import ConfigError, load_config, with_overrides
from .scenario import MODES, ScenarioError, run_scenario


def default_config_path() -> str:
    """Path of the shipped reference scenario config."""
    return str(resources.files("jrcsar").joinpath("configs/table123.cfg"))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="jrcsar",
        description="Joint radar-communications bistatic SAR scenario runner.",
    )
    p.add_argument("--config", required=True, help="scenario config file")
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=None, help="override the output directory")
    p.add_argument(
        "--snr-list",
        type=float,
        nargs="+",
        default=None,
        help="SNR values in dB (Eb/N0 for comm mode); default from the config",
    )
    p.add_argument("--no-figures", action="store_true", help="skip matplotlib figure output")
    p.add_argument("--parallel", action="store_true", help="process SNR points concurrently")
    p.add_argument(
        "--comm-bits", type=int, default=200000, help="bits per BER point in comm mode"
    )
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = with_overrides(cfg, seed=args.seed, output=args.out)
        manifest = run_scenario(
            cfg,
            args.mode,
            snr_list=args.snr_list,
            parallel=args.parallel,
            make_figures=not args.no_figures,
            comm_bits=args.comm_bits,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    n = len(manifest["artifacts"])
    print(f"wrote {n} artifacts to {cfg.output} (manifest.json, timings.json)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
