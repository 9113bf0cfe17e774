"""Command-line workflow: generate -> collect -> fit -> predict -> simulate -> report.

All data goes to files (or stdout when no output path is given); diagnostics
go to stderr.  Every random choice comes from an explicit ``--seed``.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cnf import generate_uniform_ksat, read_dimacs, write_dimacs
from .fit import DEFAULT_FAMILIES, FitReport, best_report, canonical_family, fit_all
from .multiwalk import results_to_csv, results_to_json, run_parallel_wallclock, simulate_logical
from .orderstats import SpeedupCurve, min_cdf, speedup_curve
from .rtd import ecdf_table, load_rtd, read_runtime_log, rtd_from_runs, summary, write_runtime_log
from .sls import DEFAULT_MAX_FLIPS, DEFAULT_NOISE, SolverConfig, collect_runs

log = logging.getLogger("rtdspeedup")


class CliError(Exception):
    pass


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("core counts must be integers >= 1")
    return vals


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def _emit(text: str, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _sibling_json(path):
    return None if path is None or str(path) == "-" else Path(path).with_suffix(".json")


def _solver_config(args):
    return SolverConfig(noise=args.noise, max_flips=args.max_flips,
                        max_seconds=getattr(args, "max_seconds", None), seed=args.seed)


# --- commands ----------------------------------------------------------------

def cmd_generate(args):
    formula = generate_uniform_ksat(args.vars, args.k, args.ratio, args.seed)
    name = f"unif-k{args.k}-r{args.ratio:g}-v{args.vars}-c{formula.num_clauses}-S{args.seed}"
    _emit(write_dimacs(formula, [name]), args.output)
    log.info("wrote %s (%d clauses)", name, formula.num_clauses)


def cmd_collect(args):
    if args.runs < 2:
        raise CliError("--runs must be at least 2 (an RTD needs two samples)")
    formula = read_dimacs(args.cnf)
    runs = collect_runs(formula, _solver_config(args), args.runs, args.seed, args.workers)
    if not any(r.solved for r in runs):
        raise CliError(f"all {args.runs} runs hit the cutoff; raise --max-flips")
    buf = io.StringIO()
    write_runtime_log(runs, buf, with_seconds=args.unit == "seconds")
    _emit(buf.getvalue(), args.output)
    n_cut = sum(not r.solved for r in runs)
    log.info("collected %d runs (%d censored)", len(runs), n_cut)


def cmd_fit(args):
    rtd = load_rtd(args.rtd, args.unit)
    families = [canonical_family(f) for f in args.families.split(",") if f.strip()]
    reports = fit_all(rtd, families)
    best = best_report(reports)
    doc = {
        "tool": "rtdspeedup",
        "version": __version__,
        "rtd": str(args.rtd),
        "unit": rtd.unit,
        "selected": best.to_dict(),
        "candidates": [r.to_dict() for r in reports],
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.output)
    if not best.accepted:
        log.warning("best fit (%s, p=%.3g) fails the KS test at 0.05", best.family,
                    best.p_value)


def _load_fit(path):
    doc = json.loads(Path(path).read_text())
    rep = FitReport.from_dict(doc["selected"] if "selected" in doc else doc)
    return doc, rep


def cmd_predict(args):
    doc, rep = _load_fit(args.fit)
    curve = speedup_curve(rep.model, args.cores)
    header = curve.to_dict()
    header["unit"] = doc.get("unit", "flips")
    _emit(curve.to_csv(), args.output)
    js = _sibling_json(args.output)
    if js is not None:
        js.write_text(json.dumps(header, indent=2) + "\n")
    else:
        sys.stderr.write(json.dumps(header, indent=2) + "\n")


def cmd_simulate(args):
    formula = read_dimacs(args.cnf)
    config = _solver_config(args)
    seq_mean = None
    if args.rtd is not None:
        seq_mean = summary(load_rtd(args.rtd, "flips" if args.mode == "logical" else "seconds")).mean
    results = []
    for n in args.cores:
        if args.mode == "logical":
            res = simulate_logical(formula, config, n, args.trials, args.seed, seq_mean)
        else:
            res = run_parallel_wallclock(formula, config, n, args.trials, args.seed,
                                         seq_mean=seq_mean)
        results.append(res)
    _emit(results_to_csv(results), args.output)
    js = _sibling_json(args.output)
    if js is not None:
        js.write_text(results_to_json(results) + "\n")


def _grid(rtd, model, n_points=200):
    lo = float(rtd.samples[0])
    hi = float(rtd.samples[-1])
    lo = min(lo, float(model.support_min) if model.support_min > 0 else lo)
    return np.unique(np.concatenate([np.geomspace(max(lo, 1e-12) / 10, hi, n_points),
                                     rtd.samples]))


def _xy_csv(name, xs, ys):
    lines = [f"x,{name}"]
    lines.extend(f"{float(x)!r},{float(y)!r}" for x, y in zip(xs, ys))
    return "\n".join(lines) + "\n"


def cmd_report(args):
    with open(args.rtd, newline="") as fh:
        log_rows = read_runtime_log(fh)
    rtd = rtd_from_runs(log_rows, args.unit)
    fit_doc, selected = _load_fit(args.fit)
    if fit_doc.get("unit", rtd.unit) != rtd.unit:
        raise CliError(f"fit unit {fit_doc['unit']!r} does not match RTD unit {rtd.unit!r}")
    if args.curve is not None:
        curve_doc = json.loads(Path(args.curve).read_text())
        if curve_doc.get("unit", rtd.unit) != rtd.unit:
            raise CliError(f"curve unit {curve_doc['unit']!r} does not match RTD unit {rtd.unit!r}")
        curve = SpeedupCurve.from_dict(curve_doc)
    else:
        curve = speedup_curve(selected.model, args.cores)
    sims = []
    for path in args.sim or []:
        doc = json.loads(Path(path).read_text())
        for r in doc["results"]:
            if r["unit"] != rtd.unit:
                raise CliError(f"simulation {path} has unit {r['unit']!r}, "
                               f"RTD has {rtd.unit!r}")
            sims.append(r)
    summ = summary(rtd)
    actual = {r["n_cores"]: r for r in sims}
    rows = []
    for p in curve.points:
        row = {"n": p.n, "predicted_runtime": p.expected_runtime,
               "predicted_speedup": p.speedup}
        if p.n in actual:
            row["actual_runtime"] = actual[p.n]["mean_runtime"]
            row["actual_speedup"] = summ.mean / actual[p.n]["mean_runtime"]
        rows.append(row)
    candidates = [FitReport.from_dict(c) for c in fit_doc.get("candidates", [])] or [selected]
    report = {
        "tool": "rtdspeedup",
        "version": __version__,
        "instance": args.instance or Path(args.rtd).stem,
        "unit": rtd.unit,
        "seeds": {"rtd_seed_range": [min(r.seed for r in log_rows),
                                     max(r.seed for r in log_rows)],
                  "simulation_base_seeds": sorted({r.get("base_seed") for r in sims
                                                  if r.get("base_seed") is not None})},
        "rtd_summary": summ.to_dict(),
        "fits": [c.to_dict() for c in candidates],
        "selected": selected.to_dict(),
        "speedup_curve": curve.to_dict(),
        "comparison": rows,
    }
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    (out / "ecdf.csv").write_text(ecdf_table(rtd))
    xs = _grid(rtd, selected.model)
    (out / "fitted_cdf.csv").write_text(_xy_csv("F", xs, selected.model.cdf(xs)))
    for k in args.cdf_cores or [p.n for p in curve.points]:
        (out / f"min_cdf_n{k}.csv").write_text(_xy_csv("F", xs, min_cdf(selected.model, k, xs)))
    (out / "speedup.csv").write_text(curve.to_csv())


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rtdspeedup", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a uniform random k-SAT instance")
    g.add_argument("--vars", type=_positive_int, required=True)
    g.add_argument("--k", type=_positive_int, default=3)
    g.add_argument("--ratio", type=float, required=True)
    g.add_argument("--seed", type=_nonneg_int, required=True)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    def solver_flags(sp):
        sp.add_argument("--cnf", required=True)
        sp.add_argument("--noise", type=float, default=DEFAULT_NOISE)
        sp.add_argument("--max-flips", type=_positive_int, default=DEFAULT_MAX_FLIPS)
        sp.add_argument("--max-seconds", type=float)
        sp.add_argument("--seed", type=_nonneg_int, required=True)

    c = sub.add_parser("collect", help="run the sequential solver repeatedly")
    solver_flags(c)
    c.add_argument("--runs", type=int, default=500)
    c.add_argument("--unit", choices=("flips", "seconds"), default="flips",
                   help="seconds also records wall-clock time per run")
    c.add_argument("--workers", type=_positive_int, default=1)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_collect)

    f = sub.add_parser("fit", help="fit runtime models and run KS tests")
    f.add_argument("--rtd", required=True)
    f.add_argument("--families", default=",".join(DEFAULT_FAMILIES))
    f.add_argument("--unit", choices=("flips", "seconds"), default="flips")
    f.add_argument("-o", "--output")
    f.set_defaults(func=cmd_fit)

    pr = sub.add_parser("predict", help="predict multi-walk runtime and speedup")
    pr.add_argument("--fit", required=True)
    pr.add_argument("--cores", type=_int_list, required=True)
    pr.add_argument("-o", "--output", help="CSV path; the JSON header goes next to it")
    pr.set_defaults(func=cmd_predict)

    s = sub.add_parser("simulate", help="run or simulate the multi-walk solver")
    solver_flags(s)
    s.add_argument("--cores", type=_int_list, required=True)
    s.add_argument("--trials", type=_positive_int, default=50)
    s.add_argument("--mode", choices=("logical", "wallclock"), default="logical")
    s.add_argument("--rtd", help="runtime log giving the sequential mean for speedups")
    s.add_argument("-o", "--output", help="CSV path; the JSON summary goes next to it")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="assemble tables and plot data")
    r.add_argument("--rtd", required=True)
    r.add_argument("--fit", required=True)
    r.add_argument("--curve", help="JSON written by 'predict'")
    r.add_argument("--cores", type=_int_list, default=[48, 96, 192, 384],
                   help="core counts when no --curve is given")
    r.add_argument("--sim", action="append", help="JSON written by 'simulate'")
    r.add_argument("--cdf-cores", type=_int_list)
    r.add_argument("--unit", choices=("flips", "seconds"), default="flips")
    r.add_argument("--instance")
    r.add_argument("--out-dir", required=True)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr)
    logging.captureWarnings(True)
    try:
        args.func(args)
    except (CliError, ValueError, OSError, KeyError, RuntimeError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
