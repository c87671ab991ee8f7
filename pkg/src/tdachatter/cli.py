"""Command-line entry point: ``tdachatter run|bench|synth``.

Exit codes: 0 ok, 2 configuration/usage, 3 data, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ChatterError, ConfigError
from .learn import METHODS
from .pipeline import PipelineConfig, StageError, bench, run, format_bench
from .learn import format_reports
from .synth import generate_dataset, write_dataset

# flag -> PipelineConfig field
_FLAGS = {
    "dataset": str, "method": str, "chunk_len": int, "tau": int, "dim": int, "split": float,
    "iterations": int, "seed": int, "sigma": float, "pixel_size": float, "out": str,
    "jobs": int, "point_cap": int, "target_rate": float, "cutoff": float, "C": float,
    "image_sigma": float,
}


def _k_set(text: str) -> tuple:
    try:
        return tuple(int(k) for k in text.split(",") if k.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --k-set {text!r}; expected e.g. 1,2,3")


def _add_pipeline_flags(p: argparse.ArgumentParser, with_method: bool):
    p.add_argument("--config", help="JSON file of config values; flags override it")
    for name, typ in _FLAGS.items():
        if name == "method" and not with_method:
            continue
        flag = "--" + name.replace("_", "-")
        kw = {"choices": METHODS} if name == "method" else {}
        p.add_argument(flag, dest=name, type=typ, default=None, **kw)
    p.add_argument("--k-set", dest="k_set", type=_k_set, default=None)
    p.add_argument("--no-cache", dest="cache", action="store_false", default=None)
    p.add_argument("--separate-mild", dest="merge_mild", action="store_false", default=None,
                   help="drop mild-chatter records instead of merging them with chatter")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tdachatter",
                                 description="Chatter detection from persistent homology")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    _add_pipeline_flags(sub.add_parser("run", help="one method end to end"), True)
    b = sub.add_parser("bench", help="every method on shared diagrams")
    _add_pipeline_flags(b, False)
    b.add_argument("--methods", default=",".join(METHODS),
                   help="comma-separated subset of " + ",".join(METHODS))
    s = sub.add_parser("synth", help="write a synthetic stable/chatter dataset")
    s.add_argument("out")
    s.add_argument("--n-stable", type=int, default=40)
    s.add_argument("--n-chatter", type=int, default=40)
    s.add_argument("--noise", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--duration", type=float, default=0.1)
    return ap


def config_from_args(args) -> PipelineConfig:
    values = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {args.config}: {err}")
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
    for name in list(_FLAGS) + ["k_set", "cache", "merge_mild"]:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    if not values.get("dataset"):
        raise ConfigError("--dataset is required")
    return PipelineConfig.from_dict(values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            recs = generate_dataset(args.n_stable, args.n_chatter, args.noise, args.seed,
                                    duration=args.duration)
            write_dataset(recs, args.out)
            print(f"wrote {len(recs)} records to {args.out}")
            return 0
        cfg = config_from_args(args)
        if args.command == "run":
            print(format_reports(run(cfg)))
        else:
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
            if not methods:
                raise ConfigError("empty method set")
            print(format_bench(bench(cfg, methods)))
        return 0
    except StageError as err:
        print(f"error in stage {err.stage}: {err.cause}", file=sys.stderr)
        return err.exit_code
    except ChatterError as err:
        print(f"error in stage config: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
