"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 mathematical-domain error,
3 unsupported feature.  All randomized commands are reproducible: identical
flags give bit-identical CSV files.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

import numpy as np

from . import acf, plots
from .counterexample import (
    certificate_to_text,
    construct,
    det_closed_form,
    build_ansatz,
    assemble_system,
    select_pair,
    intrinsic_odd_check,
    synthetic_alpha_group,
)
from .errors import (
    InputSyntaxError,
    MathDomainError,
    ToolkitError,
    UnsupportedFeatureError,
)
from .group import CarnotGroup, parse_group_ref, polarized_to_canonical, make_euclidean
from .hcalc import horizontal_gradient, horizontal_inner, sublaplacian
from .linsolve import det_exact
from .ratpoly import Polynomial, format_poly, parse_poly, parse_rational


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are exit code 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise InputSyntaxError(message)


def _rational(text: str) -> Fraction:
    return parse_rational(text)


def _default_workers() -> int:
    env = os.environ.get("CARNOT_ACF_WORKERS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _add_common(p: _Parser):
    p.add_argument("--group", required=True, help="preset name or group file path")


def _add_mc(p: _Parser):
    p.add_argument("--samples", type=int, default=200_000,
                   help="Monte-Carlo draws (per shell for curve commands)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("--shells", type=int, default=20, metavar="K",
                   help="dyadic shell count for the direct curves")
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("--precision", type=int, default=9,
                   help="significant digits in CSV output")
    p.add_argument("--no-plot", action="store_true",
                   help="skip the figure next to the CSV")


def _add_bpq(p: _Parser, required: bool):
    p.add_argument("--b", type=_rational, default=None, required=required)
    p.add_argument("--p", type=_rational, default=None, required=required)
    p.add_argument("--q", type=_rational, default=None, required=required)


def build_parser() -> _Parser:
    parser = _Parser(prog="carnot-acf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[], help="solve for a certified counterexample")
    _add_common(p)
    _add_bpq(p, required=True)
    p.add_argument("--out", default="certificate.txt", help="certificate file path")

    p = sub.add_parser("check", help="sub-Laplacian, harmonicity and degree report")
    _add_common(p)
    p.add_argument("poly", help="polynomial in the group's variables")

    for name, description in (
        ("phi", "energy-factor curve (direct and quartic) as CSV"),
        ("coeffs", "unit-ball coefficients a0, a2, a4 as CSV"),
        ("jay", "two-phase product curve as CSV"),
    ):
        p = sub.add_parser(name, help=description)
        _add_common(p)
        _add_bpq(p, required=False)
        p.add_argument("--u", default=None, help="polynomial string or @file (default: construct from b,p,q)")
        p.add_argument("--rmin", type=float, default=None)
        p.add_argument("--rmax", type=float, default=None)
        p.add_argument("--steps", type=int, default=20)
        _add_mc(p)

    p = sub.add_parser("euclid-ortho", help="orthogonality probe for Euclidean harmonic pairs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("ph", help="first harmonic polynomial")
    p.add_argument("pk", help="second harmonic polynomial")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=_default_workers())

    p = sub.add_parser("det-check", help="assembled determinant vs closed form")
    p.add_argument("--a11", type=_rational, default=Fraction(0))
    p.add_argument("--a21", type=_rational, default=Fraction(0))
    p.add_argument("--a12", type=_rational, default=Fraction(0))
    p.add_argument("--a22", type=_rational, default=Fraction(0))
    p.add_argument("--b", type=_rational, required=True)

    return parser


# -- helpers -----------------------------------------------------------------


def _resolve_group_for_numerics(ref: str):
    """(input group, gauge group, transport) for the numeric commands.

    Polynomials are parsed/constructed on the input group; the transport maps
    them into the gauge group's coordinates.  The polarized Heisenberg preset
    goes through the shipped coordinate change; everything else is identity.
    """
    g = parse_group_ref(ref)
    if g.name.endswith(":polarized"):
        return g, parse_group_ref("heisenberg:1"), polarized_to_canonical
    return g, g, lambda p: p


def _load_u(args, g: CarnotGroup) -> Polynomial:
    if args.u is not None:
        text = args.u
        if text.startswith("@"):
            with open(text[1:], "r", encoding="utf-8") as fh:
                text = fh.read()
        return parse_poly(text, g.weights)
    if args.b is None or args.p is None or args.q is None:
        raise InputSyntaxError("need either --u or all of --b/--p/--q")
    return construct(g, args.b, args.p, args.q).u


def _grid(args, coeffs: acf.QuarticCoeffs):
    if args.rmax is not None:
        rmax = args.rmax
    else:
        r_star = coeffs.r_star.value
        rmax = 0.9 * r_star if np.isfinite(r_star) and r_star > 0 else 1.0
    rmin = args.rmin if args.rmin is not None else rmax / args.steps
    if not (0 < rmin <= rmax):
        raise MathDomainError(f"bad radius range [{rmin}, {rmax}]")
    return tuple(np.linspace(rmin, rmax, args.steps))


def _print_verdict(coeffs: acf.QuarticCoeffs):
    a2 = coeffs.a2
    r_star = coeffs.r_star
    print(f"a0 = {coeffs.a0.value:.6g} (stderr {coeffs.a0.stderr:.2g})")
    print(f"a2 = {a2.value:.6g} (stderr {a2.stderr:.2g})")
    print(f"a4 = {coeffs.a4.value:.6g} (stderr {coeffs.a4.stderr:.2g})")
    print(f"r* = sqrt(a2/a4) = {r_star.value:.6g}")
    if a2.stderr > 0 and a2.value > 5 * a2.stderr:
        print(f"verdict: a2 > 0 at {a2.value / a2.stderr:.1f} stderr; "
              f"Phi decreasing on (0, {r_star.value:.6g})")
    else:
        print("verdict: a2 not positive at 5 stderr; no decreasing-interval claim")


def _out_path(args, default_name: str) -> str:
    return args.out if args.out else default_name


# -- commands ----------------------------------------------------------------


def cmd_construct(args) -> int:
    g = parse_group_ref(args.group)
    result = construct(g, args.b, args.p, args.q)
    text = certificate_to_text(result, g.weights)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    w = g.weights
    print(f"group: {g.name}")
    print(f"pair: (i, s, j) = ({result.pair.i}, {result.pair.s}, {result.pair.j}),"
          f" alpha gap = {result.pair.alpha_gap}")
    print(f"c = ({', '.join(str(c) for c in result.coefficients)})")
    print(f"u = {format_poly(result.u, w)}")
    print(f"harmonic: {result.certificate.harmonic}")
    print(f"<grad P1, grad P3> = {format_poly(result.certificate.inner_product, w)}")
    print(f"certificate written to {args.out}")
    return 0


def cmd_check(args) -> int:
    g = parse_group_ref(args.group)
    p = parse_poly(args.poly, g.weights)
    w = g.weights
    lap = sublaplacian(g, p)
    print(f"Delta_G p = {format_poly(lap, w)}")
    print(f"harmonic: {'yes' if lap.is_zero() else 'no'}")
    if not p.is_zero():
        comps = p.g_components(w)
        degrees = ", ".join(
            f"{d}: {format_poly(comp, w)}" for d, comp in comps.items()
        )
        print(f"weighted-degree decomposition: {{{degrees}}}")
    if g.law is not None:
        print(f"intrinsic odd: {'yes' if intrinsic_odd_check(g, p) else 'no'}")
    return 0


def _curve_command(args, kind: str) -> int:
    source, g, transport = _resolve_group_for_numerics(args.group)
    spec = acf.gauge_for(g)
    u = transport(_load_u(args, source))
    p1, p3 = acf.decompose_u(u, g.weights)
    coeffs = acf.quartic_coeffs(spec, p1, p3, args.samples, args.seed, args.workers)

    if kind == "coeffs":
        out = _out_path(args, "coeffs.csv")
        acf.write_coeffs_csv(out, coeffs, args.precision)
        _print_verdict(coeffs)
        print(f"CSV written to {out}")
        if not args.no_plot:
            fig = os.path.splitext(out)[0] + ".png"
            plots.save_coeffs_figure(fig, coeffs, spec.name)
            print(f"figure written to {fig}")
        return 0

    grid = _grid(args, coeffs)
    if kind == "phi":
        ev = acf.phi_curve(spec, u, grid, args.samples, args.seed,
                           method="direct", shells=args.shells, workers=args.workers)
        quartic = tuple(coeffs.phi_at(r) for r in grid)
        out = _out_path(args, "phi.csv")
        acf.write_phi_csv(out, ev, quartic, args.precision)
        _print_verdict(coeffs)
        print(f"CSV written to {out}")
        if not args.no_plot:
            fig = os.path.splitext(out)[0] + ".png"
            plots.save_phi_figure(fig, ev, quartic, coeffs)
            print(f"figure written to {fig}")
        return 0

    ev = acf.j_curve(spec, u, grid, args.samples, args.seed,
                     shells=args.shells, workers=args.workers)
    out = _out_path(args, "jay.csv")
    acf.write_jay_csv(out, ev, args.precision)
    _print_verdict(coeffs)
    print(f"CSV written to {out}")
    if not args.no_plot:
        fig = os.path.splitext(out)[0] + ".png"
        plots.save_jay_figure(fig, ev)
        print(f"figure written to {fig}")
    return 0


def cmd_euclid_ortho(args) -> int:
    g = make_euclidean(args.n)
    w = g.weights
    ph = parse_poly(args.ph, w)
    pk = parse_poly(args.pk, w)
    for label, poly in (("first", ph), ("second", pk)):
        lap = sublaplacian(g, poly)
        if not lap.is_zero():
            raise MathDomainError(f"{label} polynomial is not harmonic "
                                  f"(residual {format_poly(lap, w)})")
    dh, dk = ph.g_degree(w), pk.g_degree(w)
    if dh == dk:
        raise MathDomainError(f"degrees must differ (both are {dh})")
    inner = horizontal_inner(horizontal_gradient(g, ph), horizontal_gradient(g, pk))
    spec = acf.gauge_for(g)
    degree = dh + dk - 2
    est, err = acf.shell_integrate(spec, inner, degree, args.samples, args.seed,
                                   args.workers)
    status = "PASS" if abs(est) < 3 * err else "FAIL"
    print(f"int <grad Ph, grad Pk> Gamma over unit ball = {est:.6g} (stderr {err:.2g})")
    print(f"{status}: |estimate| {'<' if status == 'PASS' else '>='} 3 stderr")
    return 0


def cmd_det_check(args) -> int:
    g = synthetic_alpha_group(args.a11, args.a21, args.a12, args.a22)
    gap = args.a12 - args.a21
    closed = det_closed_form(args.b, gap)
    if gap == 0:
        print("alpha gap = 0: system is SINGULAR (closed form 0)")
        return 0
    pair = select_pair(g)
    template = build_ansatz(g, pair, args.b)
    matrix, _ = assemble_system(g, template, 1, 1)
    det = det_exact([list(r) for r in matrix])
    print(f"assembled det = {det}")
    print(f"closed form -72*b^3*(a12 - a21) = {closed}")
    print("PASS" if det == closed else "FAIL")
    return 0 if det == closed else 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "construct":
            return cmd_construct(args)
        if args.command == "check":
            return cmd_check(args)
        if args.command in ("phi", "coeffs", "jay"):
            return _curve_command(args, args.command)
        if args.command == "euclid-ortho":
            return cmd_euclid_ortho(args)
        if args.command == "det-check":
            return cmd_det_check(args)
        raise InputSyntaxError(f"unknown command {args.command!r}")
    except InputSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UnsupportedFeatureError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return 3
    except MathDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
