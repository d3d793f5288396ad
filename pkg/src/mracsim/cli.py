"""Command-line front end.

    mracsim simulate <scenario> [flags]   run one scenario, emit CSV/JSON
    mracsim match <plantfile>             print ideal matched gains
    mracsim suite <name> [--seeds N]      run a verification batch

simulate writes three files to --out-dir: <name>_timeseries.csv,
<name>_summary.json, <name>_config.ini (the canonicalized scenario, which
re-runs to a byte-identical CSV). Numbers are printed with 17 significant
digits so a CSV parse-back reproduces the float64 values exactly.

Exit codes: 0 success, 1 configuration error, 2 run aborted / check
failed.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, backend
from .harness import BUILTIN_SCENARIOS, run_scenario
from .matching import MatchingError, solve_matching
from .poly import Polynomial
from .scenario import ScenarioError, dump_scenario, load_scenario

PROPOSED_CSV = ("t", "y", "y_star", "e", "u", "sigma", "rho", "lambda",
                "eps_bar", "m_norm", "margin_u", "margin_lambda")
PROPOSED_CSV_DIAG = ("V", "min_eig_upsilon")
BASELINE_CSV = ("t", "y", "y_star", "e", "u", "eps", "mu")

_COLMAP = {"lambda": "lam"}  # CSV header name -> series key


def _series_column(rec, name):
    if name == "t":
        return rec.t
    return rec.series[_COLMAP.get(name, name)]


def write_csv(rec, path):
    if rec.controller == "proposed":
        cols = PROPOSED_CSV + (PROPOSED_CSV_DIAG
                               if "V" in rec.series else ())
    else:
        cols = BASELINE_CSV
    data = np.column_stack([_series_column(rec, c) for c in cols])
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in data:
            fh.write(",".join("%.17g" % v for v in row) + "\n")
    return cols


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def cmd_simulate(args):
    try:
        cfg = load_scenario(args.scenario)
        overrides = {}
        if args.dt is not None:
            overrides["dt"] = args.dt
        if args.t_final is not None:
            overrides["t_final"] = args.t_final
        if args.stride is not None:
            overrides["record_stride"] = args.stride
        if args.controller is not None:
            overrides["controller"] = args.controller
        if args.theta0_mode is not None:
            overrides["theta0_mode"] = args.theta0_mode
        if overrides:
            cfg = cfg.replace(**overrides).validate()
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        rec = run_scenario(cfg, use_python_kernel=args.python_kernel)
    except (ValueError, MatchingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    os.makedirs(args.out_dir, exist_ok=True)
    base = os.path.join(args.out_dir, cfg.name)
    csv_path = base + "_timeseries.csv"
    write_csv(rec, csv_path)
    summary = {
        "tool": "mracsim",
        "version": __version__,
        "backend": ("python" if args.python_kernel else backend.BACKEND),
        "config": cfg.as_dict(),
        "metrics": rec.metrics,
    }
    with open(base + "_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, default=_json_default)
        fh.write("\n")
    with open(base + "_config.ini", "w") as fh:
        fh.write(dump_scenario(cfg))

    print(f"{cfg.name}: {rec.metrics['status']}, "
          f"tracking_ratio={rec.metrics.get('tracking_ratio', float('nan')):.3e}, "
          f"wrote {csv_path}")
    if not rec.completed:
        print(f"run aborted: {rec.abort_reason} after "
              f"{rec.steps_done} steps", file=sys.stderr)
        return 2
    return 0


def cmd_match(args):
    try:
        cfg = load_scenario(args.plantfile)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        P = Polynomial(cfg.plant_p)
        Z = Polynomial(cfg.plant_z)
        Omega = Polynomial(cfg.omega) if cfg.omega else None
        Rm = Polynomial(cfg.rm) if cfg.rm else None
        gains = solve_matching(P, Z, cfg.kp, Omega=Omega, Rm=Rm)
    except MatchingError as exc:
        msg = str(exc)
        if "singular" in msg:
            print(f"error: {msg}", file=sys.stderr)
            return 2
        print(f"error: {msg}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(gains.as_dict(cfg.kp), indent=2))
    return 0


def _check(table, name, ok, detail=""):
    table.append((name, bool(ok), detail))


def _suite_paper_repro(args):
    """Boeing 737 reproduction and theorem-level behavior checks."""
    from .harness import boeing_baseline_scenario, boeing_model, boeing_scenario

    table = []
    plant = boeing_model()
    gains = solve_matching(plant.P, plant.Z, plant.kp,
                           Omega=Polynomial([11.25, 18.25, 8.0, 1.0]),
                           Rm=Polynomial([108.0, 21.0, 1.0]))
    published = {
        "theta1": [9.856, -2.987, -20.388],
        "theta2": [-71588.696, -105840.673, -36294.042],
        "theta3": 11059.088,
        "theta4": -43.478,
    }
    got = np.concatenate([gains.theta1, gains.theta2,
                          [gains.theta3, gains.theta4]])
    want = np.concatenate([published["theta1"], published["theta2"],
                           [published["theta3"], published["theta4"]]])
    rel = np.max(np.abs(got - want) / np.abs(want))
    _check(table, "AC1 gain-table", rel <= 1e-3, f"max rel dev {rel:.2e}")

    from .matching import matching_residual
    res = matching_residual(gains, plant.P, plant.Z, plant.kp,
                            Polynomial([11.25, 18.25, 8.0, 1.0]),
                            Polynomial([108.0, 21.0, 1.0]))
    scale = max(np.max(np.abs(plant.P.coeffs)), np.max(np.abs(plant.Z.coeffs)))
    rmax = np.max(np.abs(res.coeffs))
    _check(table, "AC2 matching-residual", rmax <= 1e-8 * scale,
           f"max |coeff| {rmax:.2e}")

    recs = {}
    for case in ("i", "ii"):
        cfg = boeing_scenario(case).replace(t_final=args.t_final)
        recs[case] = run_scenario(cfg)
        m = recs[case].metrics
        _check(table, f"AC4 tracking case ({case})",
               m["completed"] and m["tracking_ratio"] <= 0.05,
               f"ratio {m['tracking_ratio']:.2e}")

    mi = recs["i"].metrics
    _check(table, "AC5 sigma case (i)",
           mi["sigma_switch_count"] == 0 and mi["sigma_final"] == -1.0,
           f"switches {mi['sigma_switch_count']}, final {mi['sigma_final']}")
    sig2 = recs["ii"].series["sigma"]
    half = len(sig2) // 2
    mii = recs["ii"].metrics
    _check(table, "AC5 sigma case (ii)",
           np.all(sig2[half:] == sig2[-1]),
           f"switches {mii['sigma_switch_count']}")
    _check(table, "AC5 margins",
           min(mi["min_margin_u"], mii["min_margin_u"]) >= 1.0
           and min(mi["min_abs_margin_lambda"],
                   mii["min_abs_margin_lambda"]) > 0.0,
           f"min(1+sr) {min(mi['min_margin_u'], mii['min_margin_u']):.4f}")

    for case in ("i", "ii"):
        m = recs[case].metrics
        ok = (m["min_eig_upsilon"] > 0
              and m["V_monotonicity_violations"] == 0
              and m["max_solution_residual_normalized"] <= 1e-5
              and m["theta_settling_ratio"] <= 0.05)
        _check(table, f"AC6 diagnostics case ({case})", ok,
               f"sol-resid {m['max_solution_residual_normalized']:.2e}, "
               f"settle {m['theta_settling_ratio']:.2e}")

    bcfg = boeing_baseline_scenario().replace(t_final=args.t_final)
    brec = run_scenario(bcfg)
    _check(table, "AC8 baseline tracking",
           brec.metrics["completed"]
           and brec.metrics["tracking_ratio"] <= 0.05,
           f"ratio {brec.metrics['tracking_ratio']:.2e}")
    return table


def _suite_properties(args):
    """Structural invariants: matched exactness, determinism, symmetry."""
    from .harness import boeing_scenario

    table = []
    cfg = boeing_scenario("i").replace(
        t_final=10.0,
        theta0_multipliers=[1.0] * 7,
        name="boeing-matched",
    )
    rec = run_scenario(cfg)
    emax = np.max(np.abs(rec.series["e"]))
    _check(table, "matched-gains exactness", emax <= 1e-8,
           f"max |e| {emax:.2e}")

    cfg2 = boeing_scenario("ii").replace(t_final=5.0)
    r1 = run_scenario(cfg2)
    r2 = run_scenario(cfg2)
    same = (np.array_equal(r1.states, r2.states)
            and np.array_equal(r1.t, r2.t))
    _check(table, "determinism", same, "bit-identical states")

    S = len(r1.t)
    asym = max(np.max(np.abs(r1.upsilon[k] - r1.upsilon[k].T))
               for k in range(S))
    _check(table, "covariance symmetry", asym <= 1e-10,
           f"max asym {asym:.2e}")

    mm = r1.metrics
    _check(table, "singularity margins", mm["min_margin_u"] >= 1.0
           and mm["min_abs_margin_lambda"] > 0.0,
           f"min(1+sr) {mm['min_margin_u']:.4f}")
    return table


def _suite_sweep(args):
    from .sweep import run_sweep

    results = run_sweep(seeds=range(args.seeds), t_final=args.t_final)
    table = []
    for nstar, rows in results.items():
        passed = [r for r in rows if r["ok"]]
        frac = len(passed) / len(rows)
        fails = [str(r["seed"]) for r in rows if not r["ok"]]
        _check(table, f"sweep n*={nstar}", frac >= 0.9,
               f"{len(passed)}/{len(rows)} pass"
               + (f", failed seeds: {','.join(fails)}" if fails else ""))
    return table


SUITES = {
    "paper-repro": (_suite_paper_repro, 200.0),
    "properties": (_suite_properties, 10.0),
    "relative-degree-sweep": (_suite_sweep, 300.0),
}


def cmd_suite(args):
    fn, default_tf = SUITES[args.name]
    if args.t_final is None:
        args.t_final = default_tf
    table = fn(args)
    width = max(len(name) for name, _, _ in table)
    all_ok = True
    for name, ok, detail in table:
        mark = "PASS" if ok else "FAIL"
        all_ok = all_ok and ok
        print(f"{name:<{width}}  {mark}  {detail}")
    print(f"{'overall':<{width}}  {'PASS' if all_ok else 'FAIL'}")
    return 0 if all_ok else 2


def build_parser():
    p = argparse.ArgumentParser(
        prog="mracsim",
        description="Output-feedback MRAC simulation with a piecewise "
                    "constant tuning gain (no gain-sign assumption).",
    )
    p.add_argument("--version", action="version",
                   version=f"mracsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="run one scenario")
    ps.add_argument("scenario",
                    help="scenario file path or built-in name: "
                         + ", ".join(sorted(BUILTIN_SCENARIOS)))
    ps.add_argument("--dt", type=float, default=None)
    ps.add_argument("--t-final", type=float, default=None)
    ps.add_argument("--stride", type=int, default=None)
    ps.add_argument("--out-dir", default=".")
    ps.add_argument("--controller", choices=["proposed", "baseline"],
                    default=None)
    ps.add_argument("--theta0-mode",
                    choices=["multipliers", "explicit", "zero"],
                    default=None)
    ps.add_argument("--python-kernel", action="store_true",
                    help="force the pure-python integration kernel")
    ps.set_defaults(func=cmd_simulate)

    pm = sub.add_parser("match", help="solve for the ideal matched gains")
    pm.add_argument("plantfile",
                    help="scenario file (or built-in name) naming the plant")
    pm.set_defaults(func=cmd_match)

    pu = sub.add_parser("suite", help="run a verification batch")
    pu.add_argument("name", choices=sorted(SUITES))
    pu.add_argument("--seeds", type=int, default=20)
    pu.add_argument("--t-final", type=float, default=None)
    pu.set_defaults(func=cmd_suite)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
