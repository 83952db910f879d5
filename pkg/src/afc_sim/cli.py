"""Command-line entry point.

    afc-sim run --preset wgc --scenario storage --out results/
    afc-sim run --config scenario.json
    afc-sim validate --config scenario.json
    afc-sim report --in results/
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import SCENARIO_KINDS, ScenarioConfig, validate
from .presets import PRESET_NAMES
from .report import summarize_results
from .scenarios import run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afc-sim",
        description="Cavity-enhanced AFC memory simulator and design toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one scenario")
    run.add_argument("--config", help="JSON scenario config; overrides all other flags")
    run.add_argument("--preset", choices=PRESET_NAMES, default="wgc")
    run.add_argument("--scenario", choices=SCENARIO_KINDS, default="storage")
    run.add_argument("--out", default="out", help="output directory")
    run.add_argument("--modes", type=int, default=1, help="number of temporal modes")
    run.add_argument(
        "--afc-lifetime", type=float, default=None, metavar="SECONDS",
        help="apply the empirical exp(-4t/T) echo-decay factor",
    )
    run.add_argument("--stark-order", type=int, default=2, help="echo order to restore")
    run.add_argument(
        "--delta-l", type=float, default=None, metavar="METERS",
        help="cavity length detuning (0 = resonant at the comb center)",
    )
    run.add_argument(
        "--r-measured", type=float, default=None,
        help="measured on-resonance reflectivity for the fit scenario",
    )

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True)

    rep = sub.add_parser("report", help="summarize result directories")
    rep.add_argument("--in", dest="in_dirs", nargs="+", required=True)
    return parser


def _config_from_args(args) -> ScenarioConfig:
    if args.config:
        return ScenarioConfig.from_json(args.config)
    cfg = ScenarioConfig(
        scenario=args.scenario,
        preset=args.preset,
        out_dir=args.out,
        modes=args.modes,
        afc_lifetime_s=args.afc_lifetime,
        stark_order=args.stark_order,
        fit_r_measured=args.r_measured,
    )
    if args.delta_l is not None:
        cfg = dataclasses.replace(
            cfg, overrides={**cfg.overrides, "length_detuning_m": args.delta_l}
        )
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        cfg = ScenarioConfig.from_json(args.config)
        errors = validate(cfg)
        if errors:
            for e in errors:
                print(f"error: {e}", file=sys.stderr)
            return 1
        print("config is valid")
        return 0
    if args.command == "report":
        sys.stdout.write(summarize_results(args.in_dirs))
        return 0

    try:
        cfg = _config_from_args(args)
        payload = run_scenario(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    effs = payload.get("efficiencies") or []
    if effs:
        mean = sum(effs) / len(effs)
        print(f"{cfg.scenario} [{cfg.preset}]: mean efficiency {mean:.4f} over {len(effs)} window(s)")
    else:
        print(f"{cfg.scenario} [{cfg.preset}]: done")
    print(f"artifacts in {cfg.out_dir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
