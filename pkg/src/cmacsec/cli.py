"""Command-line entry point: ``cmacsec <command> [flags]``.

Exit status is 0 on success, 1 on runtime, I/O or validation failures and
2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, files
from .coding import SimConfig, simulate
from .dm_bounds import DEFAULT_BUDGET, SweepConfig, less_noisy_test, sweep_inner, sweep_less_noisy, sweep_outer
from .errors import BudgetError, CmacError
from .gaussian import COMPOUND, CMACCM, GaussianParams, GaussianSweepConfig, sweep_gaussian
from .region import compare, contains, convex_closure

OUTPUT_DIR_ENV = "CMACSEC_OUTPUT_DIR"
GAIN_KEYS = ("h1", "h2", "g1", "g2", "p1", "p2")

FIGURES = {
    "fig3": {"h1": 0.6, "h2": 0.6, "g1": 0.4, "g2": 0.5, "p1": 1.0, "p2": 1.0},
    "fig4": {"h1": 0.6, "h2": 0.6, "g1": 0.1, "g2": 0.5, "p1": 1.0, "p2": 1.0},
}
FIG4_PROBE = (0.0, 0.27, 0.0)
LOG_FIELDS = ("config_hash", "pe", "ci", "equivocation", "leakage", "method")


class _Usage(Exception):
    """Raised for flag combinations argparse cannot express."""


def _default_path(name):
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / name


def _out_path(args, default_name):
    return Path(args.output) if args.output else _default_path(default_name)


def closure_path(path):
    """``region.csv`` -> ``region.closure.csv``."""
    path = Path(path)
    return path.with_name(f"{path.stem}.closure{path.suffix or '.csv'}")


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _write_regions(path, raw, args):
    closed = convex_closure(raw)
    stamp = not args.no_timestamp
    files.write_region_csv(path, raw, stamp)
    files.write_region_csv(closure_path(path), closed, stamp)
    if args.json:
        files.write_region_json(path.with_suffix(".json"), raw, stamp)
        files.write_region_json(closure_path(path).with_suffix(".json"), closed, stamp)
    print(f"wrote {path} ({len(raw)} points) and {closure_path(path)} ({len(closed)} vertices)")
    return closed


def _gaussian_params(args):
    if args.params:
        d = files.load_json(args.params)
        d.update({k: getattr(args, k) for k in GAIN_KEYS if getattr(args, k) is not None})
        return GaussianParams.from_dict(d)
    missing = [f"--{k}" for k in GAIN_KEYS if getattr(args, k) is None]
    if missing:
        raise _Usage(f"missing required flags: {' '.join(missing)} (or give --params)")
    return GaussianParams(**{k: getattr(args, k) for k in GAIN_KEYS})


def cmd_gaussian_region(args):
    gp = _gaussian_params(args)
    cfg = GaussianSweepConfig(steps=args.steps, mode=args.mode)
    raw = sweep_gaussian(gp, cfg)
    closed = _write_regions(_out_path(args, f"gaussian_{args.mode}.csv"), raw, args)
    print("max rates: " + ", ".join(f"{a}={v:.6f}" for a, v in zip(("R0", "R1", "R2"), closed.axis_maxima())))
    return 0


def _sweep_config(args, **over):
    kw = dict(u_size=args.u_size, v1_size=args.v1_size, v2_size=args.v2_size, k=args.k,
              random_samples=args.samples, seed=args.seed, budget=args.budget)
    kw.update(over)
    return SweepConfig(**kw)


def cmd_dm_region(args):
    ch = files.load_channel(args.channel)
    cfg = _sweep_config(args)
    if args.bound == "inner":
        raw = sweep_inner(ch, cfg)
    elif args.bound == "outer":
        raw = sweep_outer(ch, cfg)
    else:
        raw = sweep_less_noisy(ch, cfg, mode=args.bound.rsplit("-", 1)[1])
    if "label" in raw.meta:
        print(raw.meta["label"])
    _write_regions(_out_path(args, f"dm_{args.bound}.csv"), raw, args)
    return 0


def _parse_pmf(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated probabilities, got {text!r}") from None


def cmd_less_noisy(args):
    ch = files.load_channel(args.channel)
    cfg = SweepConfig(k=args.k, random_samples=args.samples, seed=args.seed, budget=args.budget)
    verdict = less_noisy_test(ch, p_x1=args.p_x1, v2_size=args.v2_size, cfg=cfg)
    path = _out_path(args, "less_noisy.json")
    _write_json(path, verdict.to_dict())
    print(f"{verdict.status} (witness written to {path})")
    return 0


def _closed_region(path):
    cloud = files.read_region(path)
    return cloud if cloud.closed else convex_closure(cloud)


def cmd_compare(args):
    a, b = _closed_region(args.a), _closed_region(args.b)
    report = compare(a, b, tol=args.tol)
    doc = report.to_dict()
    doc["a"], doc["b"] = str(args.a), str(args.b)
    path = Path(args.report) if args.report else _default_path("comparison.json")
    _write_json(path, doc)
    print(f"verdict: {report.verdict} (report written to {path})")
    return 0


def _config_hash(*docs):
    blob = json.dumps(docs, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _append_log(path, row):
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=LOG_FIELDS)
        if new:
            writer.writeheader()
        writer.writerow(row)


def cmd_simulate(args):
    ch = files.load_channel(args.channel)
    law = files.load_law(args.law)
    cfg_doc = files.load_json(args.config)
    if args.seed is not None:
        cfg_doc["seed"] = args.seed
    cfg = SimConfig.from_dict(cfg_doc)
    try:
        report = simulate(law, ch, cfg, monte_carlo=args.monte_carlo, mc_samples=args.mc_samples)
    except BudgetError as exc:
        raise BudgetError(f"{exc}; rerun with --monte-carlo", exc.count, exc.cap) from None
    doc = report.to_dict()
    doc["config_hash"] = _config_hash(files.channel_to_dict(ch), files.law_to_dict(law), report.config,
                                      report.method, args.mc_samples if args.monte_carlo else None)
    path = _out_path(args, "simulation.json")
    _write_json(path, doc)
    log = Path(args.log) if args.log else path.with_name("experiments.csv")
    _append_log(log, {"config_hash": doc["config_hash"], "pe": repr(report.pe_estimate),
                      "ci": repr(report.pe_ci), "equivocation": repr(report.equivocation_per_symbol),
                      "leakage": repr(report.leakage), "method": report.method})
    print(f"pe={report.pe_estimate:.4f} +/- {report.pe_ci:.4f}, "
          f"equivocation={report.equivocation_per_symbol:.6f} bits/symbol, leakage={report.leakage:.6f}")
    return 0


def cmd_reproduce_figures(args):
    out = Path(args.output_dir) if args.output_dir else Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    if not out.is_dir():
        raise OSError(f"output directory {out} does not exist")
    stamp = not args.no_timestamp
    artifacts = []
    for fig, params in FIGURES.items():
        gp = GaussianParams(**params)
        regions = {}
        for mode, short in ((CMACCM, "cmaccm"), (COMPOUND, "compound")):
            closed = convex_closure(sweep_gaussian(gp, GaussianSweepConfig(args.steps, mode)))
            name = f"{fig}_{short}.closure.csv"
            files.write_region_csv(out / name, closed, stamp)
            artifacts.append({"file": name, "role": "region", "figure": fig, "mode": mode})
            regions[short] = closed
        report = compare(regions["cmaccm"], regions["compound"])
        doc = report.to_dict()
        doc["a"], doc["b"] = f"{fig}_cmaccm.closure.csv", f"{fig}_compound.closure.csv"
        doc["params"] = params
        if fig == "fig3":
            doc["r2_max_gap"] = abs(float(report.max_a[2] - report.max_b[2]))
        else:
            doc["probe"] = {"point": list(FIG4_PROBE),
                            "in_a": contains(regions["cmaccm"], FIG4_PROBE),
                            "in_b": contains(regions["compound"], FIG4_PROBE)}
        name = f"{fig}_comparison.json"
        _write_json(out / name, doc)
        artifacts.append({"file": name, "role": "comparison", "figure": fig})
        print(f"{fig}: {report.verdict}")
    for art in artifacts:
        art["sha256"] = hashlib.sha256((out / art["file"]).read_bytes()).hexdigest()
    artifacts.append({"file": "manifest.json", "role": "manifest"})
    _write_json(out / "manifest.json", {"tool": f"cmacsec {__version__}", "steps": args.steps,
                                        "artifacts": artifacts})
    print(f"wrote {len(artifacts)} artifacts to {out}")
    return 0


def _add_output(p, help_text):
    p.add_argument("-o", "--output", help=f"{help_text} (default: ${OUTPUT_DIR_ENV} or the working directory)")


def _add_sweep_flags(p):
    p.add_argument("--u-size", type=int, default=2)
    p.add_argument("--v1-size", type=int, default=2)
    p.add_argument("--v2-size", type=int, default=2)
    p.add_argument("--k", type=int, default=2, help="lattice resolution: probabilities in multiples of 1/k")
    p.add_argument("--samples", type=int, default=0, help="extra random laws (needs --seed)")
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="maximum number of laws")


def build_parser():
    parser = argparse.ArgumentParser(prog="cmacsec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cmacsec {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header line")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gaussian-region", parents=[common], help="Gaussian region sweep over power splits")
    for key in GAIN_KEYS:
        p.add_argument(f"--{key}", type=float)
    p.add_argument("--params", help="JSON file with h1, h2, g1, g2, p1, p2")
    p.add_argument("--mode", choices=("cmaccm", "compound"), required=True)
    p.add_argument("--steps", type=int, default=21)
    p.add_argument("--json", action="store_true", help="also write JSON region files")
    _add_output(p, "raw region CSV; the closure goes next to it with a .closure suffix")
    p.set_defaults(func=cmd_gaussian_region, parser=p)

    p = sub.add_parser("dm-region", parents=[common], help="discrete-memoryless bound sweep")
    p.add_argument("--channel", required=True)
    p.add_argument("--bound", required=True, choices=("inner", "outer", "less-noisy-inner", "less-noisy-outer"))
    _add_sweep_flags(p)
    p.add_argument("--json", action="store_true", help="also write JSON region files")
    _add_output(p, "raw region CSV; the closure goes next to it with a .closure suffix")
    p.set_defaults(func=cmd_dm_region)

    p = sub.add_parser("less-noisy", parents=[common], help="search for a less-noisy counterexample")
    p.add_argument("--channel", required=True)
    p.add_argument("--p-x1", type=_parse_pmf, help="comma-separated p(x1); uniform by default")
    p.add_argument("--v2-size", type=int, default=2)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _add_output(p, "verdict JSON")
    p.set_defaults(func=cmd_less_noisy)

    p = sub.add_parser("compare", parents=[common], help="containment report for two region files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--report", help="report JSON path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", parents=[common], help="desk-scale random-binning simulation")
    p.add_argument("--channel", required=True)
    p.add_argument("--law", required=True)
    p.add_argument("--config", required=True, help="sim-config JSON")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--monte-carlo", action="store_true", help="estimate equivocation by sampling")
    p.add_argument("--mc-samples", type=int, default=2000)
    p.add_argument("--log", help="CSV experiment log to append to (default: experiments.csv next to the report)")
    _add_output(p, "report JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce-figures", parents=[common], help="regenerate the Gaussian figure data")
    p.add_argument("--output-dir")
    p.add_argument("--steps", type=int, default=21)
    p.set_defaults(func=cmd_reproduce_figures)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Usage as exc:
        getattr(args, "parser", parser).error(str(exc))
    except (CmacError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
