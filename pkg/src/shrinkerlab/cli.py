"""Command-line front end: ``shrinkerlab <command> [options]``.

Exit codes: 0 success, 2 domain or usage error, 3 numerical failure,
4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

from .bounds import DEFAULT_L, bound_report, lower_bound
from .closed import enumerate_closed, find_closed, theta_profile
from .errors import BracketError, DomainError, NumericalError, ShrinkerError
from .flow import circle_curve, reconstruct_curve, write_curve_csv
from .potential import Params
from .svg import render_svg
from .turning_angle import delta_theta, energy_level
from .verify import SUITES, run_suites

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERIFY = 0, 2, 3, 4

#: (lambda, [(n, m), ...]) panels of the reference figure families
FIGURE_PANELS = (
    (0.19, [(5, 7), (2, 3), (5, 8), (7, 12)]),
    (0.726, [(4, 5), (3, 4), (5, 7), (2, 3)]),
    *((-k / 10, [(1, 2)]) for k in range(2, 10)),
    (-3.0, [(3, 10), (1, 3), (5, 14), (2, 5)]),
    (-5.0, [(1, 5), (1, 4), (2, 7), (1, 3)]),
)


def _g(x: float) -> str:
    return f"{x:.17g}"


def _rational(text: str) -> Fraction:
    try:
        n, m = (int(t) for t in text.split("/"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n/m with integers, got {text!r}")
    if n < 1 or m < 1:
        raise argparse.ArgumentTypeError("n and m must be positive")
    return Fraction(n, m)


def _params(args, lam: float | None = None) -> Params:
    lam = args.lam if lam is None else lam
    kw = {k: v for k, v in (("tol_quad", args.tol_quad), ("tol_ode", args.tol_ode),
                            ("tol_root", args.tol_root)) if v is not None}
    return Params(lam, **kw)


def _level(args, p):
    if args.eta is None and args.eta_rel is None:
        raise DomainError("one of --eta / --eta-rel is required")
    return energy_level(p, args.eta, eta_rel=args.eta_rel)


def _stem(lam: float, n: int, m: int) -> str:
    return f"lam{lam:g}_n{n}_m{m}"


def cmd_theta(args) -> int:
    p = _params(args)
    level = _level(args, p)
    res = delta_theta(p, level)
    if level.degenerate:
        print("degenerate level: equilibrium circle, limit value reported", file=sys.stderr)
        lb = math.nan
    else:
        lb = lower_bound(p, level)
    row = (p.lam, level.eta, level.eta_rel, level.u_minus, level.u_plus,
           res.delta_theta, res.arc_length, lb)
    print(",".join(map(_g, row)))
    return EXIT_OK


def cmd_scan(args) -> int:
    p = _params(args)
    prof = theta_profile(p, args.eta_rel_min, args.eta_rel_max, args.points)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["lambda", "eta_rel", "eta", "delta_theta"])
        for er, e, d in zip(prof.eta_rel, prof.eta, prof.delta_theta):
            w.writerow([_g(p.lam), _g(er), _g(e), _g(d)])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def _write_solutions(sols, outdir: Path | None, svg: bool = False) -> list[dict]:
    records = []
    seen: dict[str, int] = {}
    for s in sols:
        stem = _stem(s.lam, s.n, s.m)
        k = seen.get(stem, 0)
        seen[stem] = k + 1
        if k:
            stem += f"_{k}"
        fname = None
        if outdir is not None:
            fname = f"{stem}.csv"
            with open(outdir / fname, "w", newline="") as fh:
                write_curve_csv(s.curve, fh)
            if svg:
                (outdir / f"{stem}.svg").write_text(
                    render_svg(s.curve, title=f"lambda={s.lam:g}, dtheta=2pi*{s.n}/{s.m}"))
        records.append(s.as_record(fname))
    return records


def cmd_find(args) -> int:
    p = _params(args)
    outdir = Path(args.out) if args.out else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
    failures = []
    if args.target is not None:
        sols = find_closed(p, args.target.numerator, args.target.denominator)
        if not sols:
            raise BracketError(f"no energy with delta_theta = 2pi*{args.target} on the profile")
    else:
        sols = enumerate_closed(p, args.m_max, args.n_max, failures=failures)
    report = _write_solutions(sols, outdir, svg=args.svg)
    text = json.dumps(report, indent=2)
    if outdir:
        (outdir / "report.json").write_text(text + "\n")
    print(text)
    for n, m, exc in failures:
        print(f"failed n/m={n}/{m}: {exc}", file=sys.stderr)
    return EXIT_NUMERICAL if failures else EXIT_OK


def cmd_curve(args) -> int:
    p = _params(args)
    level = _level(args, p)
    if level.degenerate:
        curve = circle_curve(p)
    else:
        curve = reconstruct_curve(p, level, args.periods, normal=args.normal)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_curve_csv(curve, fh)
    else:
        write_curve_csv(curve, sys.stdout)
    if args.svg:
        Path(args.svg).write_text(render_svg(curve))
    print(f"closed={curve.closed} rotation_index={curve.rotation_index} "
          f"symmetry_order={curve.symmetry_order} embedded={curve.embedded} "
          f"closure_error={curve.closure_error:.3e}", file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args) -> int:
    p = _params(args)
    etas = args.eta or [10.0 ** j for j in range(2, 9)]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["lambda", "eta", "L", "lower", "upper_leading", "measured"])
    for eta in etas:
        r = bound_report(p, eta, args.L)
        w.writerow([_g(v) for v in (r.lam, r.eta, r.L, r.lower, r.upper_leading,
                                    r.delta_theta_measured)])
    return EXIT_OK


def cmd_verify(args) -> int:
    p = _params(args, 0.0)
    summary = run_suites(args.suite or None, p)
    text = json.dumps(summary, indent=2, default=str)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    for s in summary["suites"]:
        print(f"{s['suite']}: {'pass' if s['pass'] else 'FAIL'} "
              f"({s['checks']} checks, {len(s['failures'])} failures)", file=sys.stderr)
    return EXIT_OK if summary["pass"] else EXIT_VERIFY


def cmd_figures(args) -> int:
    outdir = Path(args.out or "figures")
    outdir.mkdir(parents=True, exist_ok=True)
    index, problems = [], []
    for lam, panels in FIGURE_PANELS:
        p = _params(args, lam)
        prof = theta_profile(p)
        for n, m in panels:
            try:
                sols = find_closed(p, n, m, prof)
                if not sols:
                    raise BracketError("target outside the observed range")
            except ShrinkerError as exc:
                problems.append(f"lambda={lam:g} n/m={n}/{m}: {exc}")
                continue
            # first crossing only; further ones are listed in the index
            index.extend(_write_solutions(sols[:1], outdir, svg=True))
            index.extend(s.as_record(None) for s in sols[1:])
    (outdir / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    for msg in problems:
        print(f"unsolved panel {msg}", file=sys.stderr)
    return EXIT_NUMERICAL if problems else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--tol-quad", type=float)
    tol.add_argument("--tol-ode", type=float)
    tol.add_argument("--tol-root", type=float)

    lam = argparse.ArgumentParser(add_help=False)
    lam.add_argument("--lambda", dest="lam", type=float, required=True)

    energy = argparse.ArgumentParser(add_help=False)
    g = energy.add_mutually_exclusive_group(required=True)
    g.add_argument("--eta", type=float, help="absolute energy")
    g.add_argument("--eta-rel", type=float, help="energy above min V")

    ap = argparse.ArgumentParser(prog="shrinkerlab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("theta", parents=[lam, energy, tol], help="turning angle of one level")
    s.set_defaults(func=cmd_theta)

    s = sub.add_parser("scan", parents=[lam, tol], help="turning angle over a geometric grid")
    s.add_argument("--eta-rel-min", type=float, default=1e-8)
    s.add_argument("--eta-rel-max", type=float, default=1e8)
    s.add_argument("--points", type=int, default=200)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("find", parents=[lam, tol], help="closed solutions (JSON report)")
    s.add_argument("--target", type=_rational, help="turning angle as n/m of a full turn")
    s.add_argument("--m-max", type=int, default=12)
    s.add_argument("--n-max", type=int, default=7)
    s.add_argument("--svg", action="store_true", help="also write SVG files to --out")
    s.add_argument("--out", help="directory for report.json and curve CSVs")
    s.set_defaults(func=cmd_find)

    s = sub.add_parser("curve", parents=[lam, energy, tol], help="reconstruct a curve as CSV")
    s.add_argument("--periods", type=int, default=1)
    s.add_argument("--normal", type=int, choices=(1, -1), default=1)
    s.add_argument("--out")
    s.add_argument("--svg")
    s.set_defaults(func=cmd_curve)

    s = sub.add_parser("bounds", parents=[lam, tol], help="bounds against measured angle (CSV)")
    s.add_argument("--eta", type=float, nargs="+")
    s.add_argument("--L", type=float, default=DEFAULT_L)
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("verify", parents=[tol], help="run invariant suites")
    s.add_argument("--suite", action="append", choices=sorted(SUITES))
    s.add_argument("--out", help="JSON summary path (stdout if omitted)")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("figures", parents=[tol], help="reproduce the reference figure panels")
    s.add_argument("--out", help="output directory (default: figures)")
    s.set_defaults(func=cmd_figures)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DomainError, BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
