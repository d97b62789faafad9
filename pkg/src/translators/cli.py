"""Command line front end.

Every subcommand prints one JSON report
``{tool_version, subcommand, params, results, verdict}``.  Exit status is 0
when all checks pass, 1 when a check finds a violation (the report is still
written) and 2 for usage or input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from typing import List, Optional

import numpy as np

from . import __version__
from .asymptotics import constant_estimate, end_graphs, estimate_constant
from .bounds import BoundId, check_all, check_on_wing
from .errors import ConstructionError, DomainError, FitError, HypothesisError, IntegrationError, RangeError
from .funnel import excess_region_bound, funnel_avoiding_half_cylinder, verify_wing_containment
from .profile_ode import SolverConfig, graph_view, solve_bowl, solve_wing, translator_residual
from .subsolution import derive_polynomial, discrepancy_report, table_coefficients, sign_on_ray, taylor_shift
from .sweep import ObstacleProfile, sweep_aperture, sweep_translate


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _dimension(text):
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("n must be an integer >= 2")
    return v


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text}") from exc


def _window(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("window must be A,B")
    a, b = float(parts[0]), float(parts[1])
    if not 0 < a < b:
        raise argparse.ArgumentTypeError("window needs 0 < A < B")
    return a, b


def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", help="write the JSON report here instead of standard output")

    p = _Parser(prog="translators", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common], help="integrate a wing or the bowl")
    s.add_argument("--n", type=_dimension, required=True)
    s.add_argument("--R", type=float)
    s.add_argument("--bowl", action="store_true")
    s.add_argument("--rmax", type=float, default=100.0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--out", help="profile CSV (s,r,V,alpha)")

    b = sub.add_parser("bounds", parents=[common], help="check the a-priori estimates along a wing")
    b.add_argument("--n", type=_dimension, required=True)
    b.add_argument("--R", type=float, required=True)
    b.add_argument("--rmax", type=float, default=100.0)
    b.add_argument("--tol", type=float, default=1e-10)
    b.add_argument("--quad-tol", type=float, default=1e-8)
    b.add_argument("--csv", help="write one (bound, worst_r, min_margin, verdict) row per check here")
    g = b.add_mutually_exclusive_group(required=True)
    g.add_argument("--bound", choices=[x.value for x in BoundId])
    g.add_argument("--all", action="store_true")

    f = sub.add_parser("funnel", parents=[common], help="funnel containment and placement")
    f.add_argument("--n", type=_dimension, required=True)
    f.add_argument("--R0", type=float, required=True)
    f.add_argument("--lambda", dest="lam", type=float, default=1.0)
    f.add_argument("--rmax", type=float, default=100.0)
    f.add_argument("--tol", type=float, default=1e-10)
    g = f.add_mutually_exclusive_group(required=True)
    g.add_argument("--check-wing", action="store_true")
    g.add_argument("--excess", action="store_true")
    g.add_argument("--avoid-cylinder", nargs=2, type=float, metavar=("RHO", "H0"))

    q = sub.add_parser("subsol", parents=[common], help="exact sign checks for the subsolution polynomial")
    q.add_argument("--n", type=_dimension, required=True)
    q.add_argument("--Rstar", type=_fraction, required=True)
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--verify", action="store_true")
    g.add_argument("--tables", action="store_true")
    g.add_argument("--diff", action="store_true")

    a = sub.add_parser("asymfit", parents=[common], help="fit the additive constants of the ends")
    a.add_argument("--n", type=_dimension, required=True)
    a.add_argument("--R", type=float)
    a.add_argument("--bowl", action="store_true")
    a.add_argument("--window", type=_window, required=True)
    a.add_argument("--tol", type=float, default=1e-10)
    a.add_argument("--min-decades", type=float, default=1.0)
    a.add_argument("--csv", help="write (branch, r, C_est) rows here")

    w = sub.add_parser("sweep", parents=[common], help="aperture or translate sweep against an obstacle")
    w.add_argument("--n", type=_dimension, required=True)
    g = w.add_mutually_exclusive_group(required=True)
    g.add_argument("--aperture", type=float, metavar="R0")
    g.add_argument("--translate", type=int, choices=[-1, 1], metavar="SIGN")
    w.add_argument("--obstacle", required=True)
    w.add_argument("--tol", type=float, default=1e-7)
    return p


def _cfg(args) -> SolverConfig:
    rmax = getattr(args, "rmax", 100.0)
    return SolverConfig.with_tol(args.tol, r_max=rmax)


def _cmd_solve(args):
    if args.bowl == (args.R is not None):
        raise UsageError("give exactly one of --R and --bowl")
    cfg = _cfg(args)
    if args.bowl:
        curve = solve_bowl(args.n, cfg)
        res = {"kind": "bowl", "samples": len(curve), "r_end": float(curve.r[-1])}
    else:
        w = solve_wing(args.n, args.R, cfg)
        curve = w.meridian_curve()
        res = {
            "kind": "wing",
            "R_star": w.R_star,
            "d": w.d,
            "samples": len(curve),
            "r_end_lower": float(w.lower.r[-1]),
            "r_end_upper": float(w.upper.r[-1]),
        }
    res["residual"] = translator_residual(curve)
    if args.out:
        curve.to_csv(args.out)
        res["csv"] = args.out
    return [res], True


def _cmd_bounds(args):
    w = solve_wing(args.n, args.R, _cfg(args))
    if args.all:
        reports = check_all(w, args.rmax, quad_tol=args.quad_tol)
    else:
        bound = BoundId(args.bound)
        reports = [check_on_wing(w, bound, args.rmax, quad_tol=args.quad_tol)]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["bound", "worst_r", "min_margin", "verdict"])
            for r in reports:
                d = r.to_dict()
                wr.writerow([d["bound"], repr(d["worst_r"]), repr(d["min_margin"]), d["verdict"]])
    return [r.to_dict() for r in reports], all(r.passed for r in reports)


def _cmd_funnel(args):
    if args.check_wing:
        w = solve_wing(args.n, args.R0, _cfg(args))
        rep = verify_wing_containment(w, args.lam, args.rmax)
        return [rep.to_dict()], rep.passed
    if args.excess:
        box = excess_region_bound(args.n, args.lam, args.R0)
        return [box.to_dict()], True
    rho, h0 = args.avoid_cylinder
    f = funnel_avoiding_half_cylinder(args.n, rho, h0, args.lam)
    return [f.to_dict()], True


def _cmd_subsol(args):
    n, R = args.n, args.Rstar
    if args.verify:
        v = sign_on_ray(derive_polynomial(n, R), R)
        return [{"n": n, "R_star": R, **v.to_dict()}], v.kind == "nonpositive_on_ray"
    if args.tables:
        P = derive_polynomial(n, R)
        return [{
            "n": n,
            "R_star": R,
            "origin_table": table_coefficients(n, R, "origin"),
            "centered_table": table_coefficients(n, R, "centered"),
            "derived_origin": P.to_strings(),
            "derived_centered": taylor_shift(P, R).to_strings(),
        }], True
    rep = discrepancy_report(n, R)
    ok = (
        rep["shifted_origin_vs_centered"]["match"]
        and rep["origin_vs_derived"]["proportional"]
        and rep["centered_vs_derived"]["proportional"]
    )
    return [rep], ok


def _cmd_asymfit(args):
    if args.bowl == (args.R is not None):
        raise UsageError("give exactly one of --R and --bowl")
    a, b = args.window
    cfg = SolverConfig.with_tol(args.tol, r_max=b * 1.01 + 1.0)
    if args.bowl:
        branches = [("bowl", graph_view(solve_bowl(args.n, cfg), 0.0), 0.0)]
    else:
        w = solve_wing(args.n, args.R, cfg)
        up, lo = end_graphs(w)
        branches = [("upper", up, w.R_star), ("lower", lo, w.R_star)]
    results, ok = [], True
    rows = []
    for name, g, Rs in branches:
        fit = estimate_constant(g, (a, b), R_star=Rs, min_decades=args.min_decades)
        results.append({"branch": name, **fit.to_dict()})
        ok = ok and not fit.model_mismatch
        r = g.r_grid[(g.r_grid >= a) & (g.r_grid <= b)]
        rows.extend((name, float(x), float(c)) for x, c in zip(r, constant_estimate(g, r)))
    if len(results) == 2:
        results.append({"delta": results[0]["C"] - results[1]["C"]})
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["branch", "r", "C_est"])
            for name, x, c in rows:
                wr.writerow([name, repr(x), repr(c)])
    return results, ok


def _cmd_sweep(args):
    obstacle = ObstacleProfile.from_csv(args.obstacle)
    try:
        if args.aperture is not None:
            res = sweep_aperture(obstacle, args.n, args.aperture, args.tol)
        else:
            res = sweep_translate(obstacle, args.n, args.translate, args.tol)
    except HypothesisError as exc:
        return [{"hypothesis_violation": str(exc)}], False
    return [res.to_dict()], True


_COMMANDS = {
    "solve": _cmd_solve,
    "bounds": _cmd_bounds,
    "funnel": _cmd_funnel,
    "subsol": _cmd_subsol,
    "asymfit": _cmd_asymfit,
    "sweep": _cmd_sweep,
}


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
        params = {k: v for k, v in vars(args).items() if k not in ("subcommand", "output")}
        results, ok = _COMMANDS[args.subcommand](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        ValueError, DomainError, RangeError, FitError, ConstructionError, IntegrationError, OSError,
    ) as exc:
        print(f"error: {type(exc).__name__}: {exc}".splitlines()[0], file=sys.stderr)
        return 2
    report = {
        "tool_version": __version__,
        "subcommand": args.subcommand,
        "params": params,
        "results": results,
        "verdict": "pass" if ok else "fail",
    }
    text = json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
