"""Command-line entry point: ``infoflux run | preset | selftest``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .errors import ConfigError
from .experiment import PRESETS, ExperimentConfig, dataset_name, preset, run


def _add_run_options(p: argparse.ArgumentParser, defaults: bool) -> None:
    # with defaults=False every option defaults to None so presets keep their own values
    d = ExperimentConfig() if defaults else None

    def dflt(name):
        return getattr(d, name) if d is not None else None

    p.add_argument("--engine", choices=("circuit", "analog", "adiabatic"), default=dflt("engine"))
    p.add_argument("--n", type=int, default=dflt("n"), help="register size in qubits")
    p.add_argument("--target", type=int, default=dflt("target"), help="marked basis index w")
    p.add_argument("--ns", dest="n_s", type=int, default=dflt("n_s"), help="subsystem qubits")
    p.add_argument("--samples", type=int, default=dflt("samples"))
    p.add_argument("--seed", type=int, default=dflt("seed"))
    p.add_argument("--grid", dest="grid_points", type=int, default=dflt("grid_points"))
    p.add_argument("--epsilon", type=float, default=dflt("epsilon"))
    p.add_argument("--energy", type=float, default=dflt("energy"))
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t1", type=float, default=None)
    p.add_argument("--t2", type=float, default=None)
    p.add_argument("--outputs", default=None,
                   help="comma list from flow,leakage,entanglement,trajectory")
    p.add_argument("--format", choices=("csv", "json"), default=dflt("format"))
    p.add_argument("--workers", type=int, default=dflt("workers"))


def _overrides(args) -> dict:
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    out = {k: v for k, v in vars(args).items() if k in fields and v is not None}
    if out.get("outputs") is not None:
        out["outputs"] = tuple(s.strip() for s in out["outputs"].split(",") if s.strip())
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infoflux", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured experiment")
    _add_run_options(p_run, defaults=True)
    p_run.add_argument("--out", dest="out_path", required=True, help="dataset file to write")

    p_pre = sub.add_parser("preset", help="run a figure preset")
    p_pre.add_argument("name", choices=sorted(PRESETS))
    _add_run_options(p_pre, defaults=False)
    p_pre.add_argument("--out", dest="out_dir", default=".", help="directory for the datasets")

    p_self = sub.add_parser("selftest", help="run the built-in invariant checks")
    p_self.add_argument("--quick", action="store_true", help="smaller registers only")
    return parser


def _report(result) -> None:
    print(json.dumps({"path": str(result.path), **result.summary}, sort_keys=True))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = ExperimentConfig(**_overrides(args))
            _report(run(config))
        elif args.command == "preset":
            overrides = _overrides(args)
            for config in preset(args.name, **overrides):
                path = os.path.join(args.out_dir, dataset_name(args.name, config))
                _report(run(dataclasses.replace(config, out_path=path)))
        else:
            from .selftest import run_selftest

            return 0 if run_selftest(quick=args.quick) else 1
    except ConfigError as exc:
        print(f"infoflux: invalid {exc.field}: {exc.message}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
