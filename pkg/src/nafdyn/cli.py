"""Command-line entry points: run, verify, sweep, dvr."""

import argparse
import json
import os
import sys

import numpy as np
import yaml

from . import runner
from .modelfile import build_model
from .reference import default_grid, dvr_reference
from .dvr import DVRGrid


def _load_yaml(path):
    with open(path) as fh:
        return yaml.safe_load(fh)


def _parse_values(spec):
    """Sweep values: comma list '2,4,6' or range 'start:stop:step' (inclusive)."""
    if ":" in spec:
        start, stop, step = (float(x) for x in spec.split(":"))
        return list(np.arange(start, stop + 0.5 * step, step))
    return [float(x) for x in spec.split(",")]


def cmd_run(args):
    doc = _load_yaml(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.workers is not None:
        doc["workers"] = args.workers
    if args.out is not None:
        doc["out"] = args.out
    if args.bitwise:
        doc["reduction"] = "bitwise"
    report = runner.run(doc)
    frac = report.n_failed / max(report.n_traj, 1)
    print(f"run complete: {report.n_traj} trajectories, {report.n_failed} failed "
          f"({100 * frac:.3f}%), {len(report.series)} series -> {report.out_dir}")
    return 0 if report.ok else 1


def cmd_verify(args):
    ok = True
    for suite in args.suites:
        print(f"== verify {suite} ==")
        ok &= runner.verify(suite, samples=args.samples, seed=args.seed)
    print("all identities passed" if ok else "FAILURES detected")
    return 0 if ok else 1


def cmd_sweep(args):
    doc = _load_yaml(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.workers is not None:
        doc["workers"] = args.workers
    if args.out is not None:
        doc["out"] = args.out
    if args.bitwise:
        doc["reduction"] = "bitwise"
    values = _parse_values(args.values)
    reports, _rows = runner.sweep(doc, args.parameter, values)
    bad = sum(0 if r.ok else 1 for r in reports)
    print(f"sweep complete: {len(reports)} runs over {args.parameter}, {bad} failed runs")
    return 0 if bad == 0 else 1


def cmd_dvr(args):
    doc = _load_yaml(args.config)
    allowed = {"model", "grid", "t_max", "snapshots", "bins", "out"}
    unknown = set(doc) - allowed
    if unknown:
        raise SystemExit(f"unknown keys in dvr config: {sorted(unknown)}")
    model = build_model(doc["model"]["name"], doc["model"].get("params"))
    grid = None
    if "grid" in doc:
        g = doc["grid"]
        grid = DVRGrid(g["r_min"], g["r_max"], int(g["npts"]), model.masses[0])
    else:
        grid = default_grid(model)
    bins = None
    if "bins" in doc:
        b = doc["bins"]
        bins = np.arange(b["start"], b["stop"] + 0.5 * b["step"], b["step"])
    series = dvr_reference(model, t_max=doc.get("t_max"),
                           n_snapshots=int(doc.get("snapshots", 5)),
                           grid=grid, bins=bins)
    out = args.out or doc.get("out", "runs/dvr")
    os.makedirs(out, exist_ok=True)
    for fname, es in series.items():
        es.to_csv(os.path.join(out, fname))
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump({"schema_version": runner.MANIFEST_SCHEMA_VERSION,
                   "method": "dvr", "config": doc, "outputs": sorted(series)},
                  fh, indent=1, sort_keys=True)
    print(f"dvr reference: {len(series)} series -> {out}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nafdyn",
        description="Trajectory-based nonadiabatic dynamics with built-in exact references")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a run configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--bitwise", action="store_true",
                   help="force the bitwise-reproducible reduction")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run oracle suites")
    p.add_argument("suites", nargs="+",
                   choices=["windows", "frozen", "sqz", "dvr-sanity"])
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=2024)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run a config over a parameter list")
    p.add_argument("--config", required=True)
    p.add_argument("--parameter", required=True,
                   help="dotted config path, e.g. model.params.p0")
    p.add_argument("--values", required=True,
                   help="comma list '2,4,6' or inclusive range 'start:stop:step'")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--bitwise", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dvr", help="exact grid reference for a 1-d model")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dvr)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
