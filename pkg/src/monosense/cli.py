"""``monosense`` command line: run, sweep and validate scenario configs."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from .scenario import ConfigError, load_config, run_config, sweep, validate_config

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _resolve(config: str) -> Path:
    """Accept a path or the name of a bundled scenario."""
    p = Path(config)
    if p.exists():
        return p
    from .scenario import SCENARIO_DIR
    bundled = SCENARIO_DIR / f"{config}.yaml"
    return bundled if bundled.exists() else p


def _summary_line(s: dict) -> str:
    sic = "n/a" if s.get("mean_sic_db") is None else f"{s['mean_sic_db']:.2f} dB"
    bpm = "none" if s.get("detected_bpm") is None else f"{s['detected_bpm']:.2f}"
    return f"{s['name']}: frames={s['frames']} mean_sic={sic} detected_bpm={bpm}"


def _load(args):
    cfg = load_config(_resolve(args.config))
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(args.out_dir) / cfg["name"] if args.out_dir else Path("out") / cfg["name"]
    res = run_config(cfg, out)
    print(_summary_line(res.summary))
    return EXIT_OK


def cmd_sweep(args) -> int:
    values = [v for v in (args.values or "").split(",") if v.strip()]
    cfg_path = _resolve(args.config)
    name = load_config(cfg_path)["name"]
    out = Path(args.out_dir or "out") / f"{name}_sweep_{args.param}"
    path = sweep(cfg_path, args.param, values, out, seed=args.seed)
    print(f"{name}: {len(values)} runs -> {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = _load(args)
    except (yaml.YAMLError, OSError) as exc:
        print(f"error: {exc}")
        return EXIT_INVALID
    bad = validate_config(cfg)
    if bad:
        for v in bad:
            print(f"invalid: {v}")
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="monosense", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="scenario YAML path or bundled scenario name")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--out-dir", default=None, help="artifact directory (default ./out)")

    p = sub.add_parser("run", help="run one scenario and write its artifacts")
    common(p)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", help="run a scenario once per parameter value")
    common(p)
    p.add_argument("--param", required=True, help="dotted numeric field, e.g. lms.mu")
    p.add_argument("--values", default="", help="comma-separated values")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("validate", help="check a config without running it")
    common(p)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"invalid: {v}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - the CLI maps every other failure to one exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
