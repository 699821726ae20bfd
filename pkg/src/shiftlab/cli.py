"""Command-line interface.

Exit codes: 0 success, 2 a reported verdict is false, 1 usage or input error.
Reports are JSON objects ``{command, inputs, verdicts, diagnostics}``.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

from . import io
from .errors import ShiftlabError
from .families import (
    build_diagonal_core,
    build_drury_arveson,
    build_example46,
    build_fig2_family,
    build_fig2_general,
    build_quasinormal_from_row,
    build_tensor,
    example46,
)
from .lattice import LatticeWindow, check_commutativity
from .measures import AtomicMeasure1D
from .positivity import PSD_TOL, k_hyponormal
from .sequences import WeightSequence
from .spectra import (
    continuity_probe,
    da_aluthge_gap,
    da_commutators,
    da_spherical_gap_exact,
    spectral_invariance_check,
)
from .transforms import is_spherical_fixed_point, spherical, toral

EXIT_OK, EXIT_ERROR, EXIT_FALSE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; remap it to 1 so that 2
    always means a false verdict."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _window(text):
    try:
        return LatticeWindow.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _measure(text):
    try:
        return AtomicMeasure1D.parse(text)
    except (ValueError, ShiftlabError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _sequence(text):
    try:
        return WeightSequence.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _grid(text):
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("grid must be start:stop:step") from exc
    if step <= 0 or stop <= start:
        raise argparse.ArgumentTypeError("grid needs stop > start and step > 0")
    n = int(round((stop - start) / step))
    return [start + i * step for i in range(n)]


def _report(command, inputs, verdicts, diagnostics=()):
    return {"command": command, "inputs": inputs, "verdicts": list(verdicts), "diagnostics": list(diagnostics)}


def _emit(report, path):
    text = json.dumps(report, indent=1)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _exit_for(report):
    return EXIT_OK if all(v.get("value", True) for v in report["verdicts"]) else EXIT_FALSE


# ---------------------------------------------------------------- commands

def cmd_build(args):
    fam = args.family
    if fam == "fig2":
        if args.x0 is None or args.a is None:
            raise UsageError("fig2 needs --x0 and --a")
        if args.x1 is not None:
            if None in (args.y0, args.y1, args.omega, args.tau):
                raise UsageError("the general fig2 form needs --x1 --y0 --y1 --omega --tau")
            d = build_fig2_general(args.x0, args.x1, args.y0, args.y1, args.a, args.omega, args.tau)
        elif args.xi is not None:
            d = build_fig2_family(args.x0, args.a, args.xi)
        elif args.omega is not None:
            d = build_fig2_family(args.x0, args.a, omega=args.omega)
        else:
            raise UsageError("fig2 needs --xi or --omega")
    elif fam == "example46":
        if args.x is None or args.y is None:
            raise UsageError("example46 needs --x and --y")
        d = build_example46(args.x, args.y)
    elif fam == "tensor":
        if args.sigma is None or args.tau is None:
            raise UsageError("tensor needs --sigma and --tau")
        d = build_tensor(args.sigma, args.tau)
    elif fam == "diagonal_core":
        if args.omega is None:
            raise UsageError("diagonal_core needs --omega")
        d = build_diagonal_core(args.omega)
    elif fam == "drury_arveson":
        d = build_drury_arveson()
    else:  # quasinormal
        row = args.row if args.row is not None else args.xi
        if row is None:
            raise UsageError("quasinormal needs --row or --xi")
        d = build_quasinormal_from_row(row, args.C)
    doc = io.diagram_to_json(d)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    else:
        print(json.dumps(doc, indent=1))
    return EXIT_OK


def cmd_transform(args):
    d = io.load(args.inp)
    out = toral(d) if args.kind == "toral" else spherical(d)
    doc = io.diagram_to_json(out, args.window)
    text = json.dumps(doc, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_check(args):
    d = io.load(args.inp)
    rep = k_hyponormal(d, args.k, args.window, tol=args.tol)
    comm = check_commutativity(d, args.window, tol=args.identity_tol)
    diagnostics = [f"certificate: {rep.certificate}"]
    if not comm.ok:
        diagnostics.append(f"input does not commute on the window (max relative violation {comm.max_relative:.3g})")
    report = _report("check", {"in": args.inp, "k": args.k, "window": str(args.window), "tol": args.tol},
                     [{"name": f"{args.k}-hyponormal", "value": rep.verdict, "certificate": rep.certificate,
                       "certifying": rep.certifying}],
                     diagnostics)
    report["result"] = rep.to_json()
    report["commutativity"] = comm.to_json()
    _emit(report, args.report)
    return _exit_for(report)


def cmd_region(args):
    if args.curve != "example46":
        raise UsageError(f"unknown curve {args.curve!r}")
    rows = [example46(y) for y in args.ygrid]
    fh = open(args.csv, "w", newline="", encoding="utf-8") if args.csv else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(["y", "s", "h", "CA", "PA"])
        for c in rows:
            writer.writerow([repr(c.y), repr(c.s), repr(c.h), repr(c.ca), repr(c.pa)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_da_verify(args):
    verdicts = []
    diagnostics = []
    comm_ok = bound_ok = toral_ok = sph_ok = sph_bound_ok = sph_exact_ok = True
    worst_dev = 0.0
    per_n = []
    for n in range(1, args.nmax + 1):
        c = da_commutators(n)
        worst_dev = max(worst_dev, c.max_deviation)
        comm_ok &= bool(c.max_deviation < 1e-12)
        bound_ok &= bool(c.bounds_hold)
        entry = c.to_json()
        tg = [da_aluthge_gap(n, k1, "toral") for k1 in range(n + 1)]
        sg = [da_aluthge_gap(n, k1, "spherical") for k1 in range(n + 1)]
        toral_ok &= all(bool(g.agrees and g.bound_holds) for g in tg)
        sph_ok &= all(bool(g.agrees) for g in sg)
        sph_bound_ok &= all(bool(g.bound_holds) for g in sg)
        sph_exact_ok &= all(abs(g.direct - da_spherical_gap_exact(n, g.k1)) < 1e-10 for g in sg)
        entry["toral_gap_max"] = max(g.direct for g in tg)
        entry["spherical_gap_max"] = max(g.direct for g in sg)
        entry["spherical_formula_max"] = max(g.closed_form for g in sg)
        per_n.append(entry)
    verdicts = [
        {"name": "commutator coefficients match dense commutators (1e-12)", "value": comm_ok,
         "max_deviation": worst_dev},
        {"name": "commutator norm bounds 1/(n+1), 1/(2n)", "value": bound_ok},
        {"name": "toral gap closed form matches and obeys 1/(4(n+2))", "value": toral_ok},
        {"name": "spherical gap obeys (2n+1)/(4n^2)", "value": sph_bound_ok},
        {"name": "spherical gap reference closed form matches direct values (1e-10)", "value": sph_ok},
        {"name": "spherical gap equals (k1+1)^2/((n+1)^2 (n+2)^2)", "value": sph_exact_ok},
    ]
    if not sph_ok:
        diagnostics.append("the reference spherical-gap closed form disagrees with direct transform weights; "
                           "(k1+1)^2/((n+1)^2 (n+2)^2) matches them")
    report = _report("da-verify", {"nmax": args.nmax}, verdicts, diagnostics)
    report["per_n"] = per_n
    _emit(report, args.report)
    return _exit_for(report)


def cmd_spectra(args):
    d = io.load(args.inp)
    rep = spectral_invariance_check(d, tol=args.tol)
    report = _report("spectra", {"in": args.inp, "tol": args.tol},
                     [{"name": "radii agree", "value": rep.agree},
                      {"name": "row-0 / column-0 sup identities", "value": rep.edge_identities_hold}],
                     rep.diagnostics)
    report["result"] = rep.to_json()
    _emit(report, args.report)
    return _exit_for(report)


def cmd_quasinormal(args):
    row = args.row if args.row is not None else args.xi
    if row is None:
        raise UsageError("quasinormal needs --row or --xi")
    d = build_quasinormal_from_row(row, args.C)
    fp = is_spherical_fixed_point(d, args.window)
    comm = check_commutativity(d, args.window, tol=args.identity_tol)
    hyp = [k_hyponormal(d, k, args.window, tol=args.tol) for k in (1, 2, 3)]
    verdicts = [{"name": "spherical fixed point", "value": fp.is_fixed, "gap": fp.gap},
                {"name": "alpha^2 + beta^2 constant", "value": fp.c_squared_deviation < 1e-12,
                 "C_squared": fp.c_squared, "deviation": fp.c_squared_deviation},
                {"name": "commutes", "value": comm.ok, "max_relative": comm.max_relative}]
    for k, h in zip((1, 2, 3), hyp):
        verdicts.append({"name": f"{k}-hyponormal", "value": h.verdict, "certificate": h.certificate})
    report = _report("quasinormal", {"C": args.C, "window": str(args.window),
                                     "row": getattr(row, "to_json", lambda: None)()}, verdicts)
    if args.out:
        io.dump(d, args.out)
    _emit(report, args.report)
    return _exit_for(report)


def cmd_probe(args):
    d = io.load(args.inp)
    reports = [continuity_probe(d, eps, args.window, args.seed) for eps in args.eps]
    gaps_t = [r.toral_gap for r in reports]
    gaps_s = [r.spherical_gap for r in reports]
    decreasing = all(a > b for a, b in zip(gaps_t, gaps_t[1:])) and all(a > b for a, b in zip(gaps_s, gaps_s[1:]))
    report = _report("probe", {"in": args.inp, "eps": args.eps, "window": str(args.window), "seed": args.seed},
                     [{"name": "gaps decrease along the eps schedule", "value": decreasing}],
                     ["probes are empirical; no Lipschitz constant is claimed"])
    report["probes"] = [r.to_json() for r in reports]
    _emit(report, args.report)
    return _exit_for(report)


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shiftlab", description="Weight-diagram toolkit for 2-variable weighted shifts.")
    p.add_argument("--tol", type=float, default=PSD_TOL, help="relative PSD tolerance (default 1e-10)")
    p.add_argument("--identity-tol", type=float, default=1e-12, help="relative tolerance for identities (default 1e-12)")
    # the same flags are accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--identity-tol", type=float, default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    b = sub.add_parser("build", help="build a named family and write its JSON")
    b.add_argument("--family", required=True,
                   choices=["fig2", "example46", "tensor", "diagonal_core", "drury_arveson", "quasinormal"])
    for name in ("x0", "a", "x1", "y0", "y1", "x", "y"):
        b.add_argument(f"--{name}", type=float)
    b.add_argument("--xi", type=_measure, help='Berger measure, "mass@pos,mass@pos"')
    b.add_argument("--omega", type=_sequence, help='weights "head;period" or "w0,w1,..." (last repeats)')
    b.add_argument("--tau", type=_sequence)
    b.add_argument("--sigma", type=_sequence)
    b.add_argument("--row", type=_sequence)
    b.add_argument("--C", type=float, default=1.0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    t = sub.add_parser("transform", help="apply the toral or spherical transform")
    t.add_argument("--kind", required=True, choices=["toral", "spherical"])
    t.add_argument("--in", dest="inp", required=True)
    t.add_argument("--out")
    t.add_argument("--window", type=_window, default=LatticeWindow(8, 8))
    t.set_defaults(func=cmd_transform)

    c = sub.add_parser("check", help="windowed k-hyponormality")
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--window", type=_window, default=LatticeWindow(6, 6))
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--report")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("region", help="closed-form region curves as CSV")
    r.add_argument("--curve", default="example46", choices=["example46"])
    r.add_argument("--ygrid", type=_grid, default=_grid("0:1:0.01"))
    r.add_argument("--csv")
    r.set_defaults(func=cmd_region)

    da = sub.add_parser("da-verify", help="Drury-Arveson commutators and Aluthge gaps")
    da.add_argument("--nmax", type=int, default=50)
    da.add_argument("--report")
    da.set_defaults(func=cmd_da_verify)

    s = sub.add_parser("spectra", help="predicted spectra of d and both transforms")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_spectra)

    q = sub.add_parser("quasinormal", help="build and verify a spherically quasinormal diagram")
    q.add_argument("--row", type=_sequence)
    q.add_argument("--xi", type=_measure)
    q.add_argument("--C", type=float, default=1.0)
    q.add_argument("--window", type=_window, default=LatticeWindow(6, 6))
    q.add_argument("--out")
    q.add_argument("--report")
    q.set_defaults(func=cmd_quasinormal)

    pr = sub.add_parser("probe", help="continuity probes under random perturbation")
    pr.add_argument("--in", dest="inp", required=True)
    pr.add_argument("--eps", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3])
    pr.add_argument("--window", type=_window, default=LatticeWindow(6, 6))
    pr.add_argument("--seed", type=int, default=0, help="perturbation seed (default 0, echoed in the report)")
    pr.add_argument("--report")
    pr.set_defaults(func=cmd_probe)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"shiftlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ShiftlabError, ValueError, OSError) as exc:
        print(f"shiftlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
