"""Command-line front end.

Subcommands: trop, initial, hypersurface, lift, verify.  All exact data is
emitted as JSON (SVG for two-dimensional complexes on request).  Exit codes:
0 all checks pass, 1 a verification mismatch was found, 2 bad input,
3 internal-consistency failure.
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction

from . import rho as rho_mod
from .diffpoly import FIELD_K, DiffPolynomial, SigmaExponent
from .errors import DifftropError, InputError, InternalConsistencyError
from .hahn import HahnSeries
from .newton import lift_multivariate, lift_univariate_branches
from .parse import parse_gamma_vector, parse_poly, parse_rho, parse_scalar
from .polyhedral import hypersurface
from .residue import find_roots_nonmonomial
from .rho import RhoRational
from .serialize import (
    certificate_to_json, complex_to_json, complex_to_svg, dumps,
    poly_to_json, rho_to_json, trop_to_json,
)
from .verify import parse_grid_spec, verify_kapranov

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="difftrop",
        description="tropical geometry of Laurent difference polynomials "
                    "over a multiplicative valued Hahn field")
    top.add_argument("--rho", choices=("pi", "e"), default="pi",
                     help="the transcendental scaling exponent (default pi)")
    top.add_argument("--seed", type=int, default=0,
                     help="seed for randomized suites")
    top.add_argument("--format", choices=("json", "svg"), default="json",
                     help="output format (svg only for n = 2 complexes)")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trop", help="tropicalization as a symbolic object")
    p.add_argument("poly")
    p.add_argument("--at", default=None,
                   help="evaluate at comma-separated Q(rho) coordinates")

    p = sub.add_parser("initial", help="initial form at a point")
    p.add_argument("poly")
    p.add_argument("--w", required=True,
                   help="comma-separated Q(rho) coordinates")

    p = sub.add_parser("hypersurface",
                       help="the dual-complex skeleton (tropical locus)")
    p.add_argument("poly")

    p = sub.add_parser("lift", help="lift a residue root to a series root")
    p.add_argument("poly")
    p.add_argument("--w", required=True,
                   help="comma-separated Q(rho) coordinates")
    p.add_argument("--alpha", default=None,
                   help="comma-separated rational residue coordinates "
                        "(found automatically when omitted)")
    p.add_argument("--target", default=None,
                   help="requested residual valuation (Q(rho) expression)")
    p.add_argument("--branch-all", action="store_true",
                   help="explore all residue roots breadth-first")

    p = sub.add_parser("verify",
                       help="cross-check the three-set equivalence")
    p.add_argument("poly", nargs="?", default=None)
    p.add_argument("--grid", default="-10:10:9",
                   help="grid spec lo:hi:count (per-axis with ';')")
    p.add_argument("--target", default=None,
                   help="lift target override (Q(rho) expression)")
    p.add_argument("--branch-all", action="store_true")
    p.add_argument("--random", type=int, default=0, metavar="N",
                   help="also verify N random bivariate polynomials")
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rho_mod.set_constant(args.rho)
    try:
        payload = _dispatch(args)
    except InternalConsistencyError as exc:
        sys.stderr.write(f"internal consistency failure: {exc}\n")
        return EXIT_INTERNAL
    except (DifftropError, ValueError, ZeroDivisionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    data, exit_code = payload
    out = sys.stdout.buffer
    out.write(data)
    if not data.endswith(b"\n"):
        out.write(b"\n")
    out.flush()
    return exit_code


def _dispatch(args):
    if args.command == "trop":
        return _cmd_trop(args)
    if args.command == "initial":
        return _cmd_initial(args)
    if args.command == "hypersurface":
        return _cmd_hypersurface(args)
    if args.command == "lift":
        return _cmd_lift(args)
    if args.command == "verify":
        return _cmd_verify(args)
    raise InputError(f"unknown command {args.command}")


def _cmd_trop(args):
    f = parse_poly(args.poly)
    obj = trop_to_json(f)
    if args.at is not None:
        w = parse_gamma_vector(args.at)
        value, attain = f.tropicalize(w)
        keys = f.exponents()
        obj["at"] = [rho_to_json(c) for c in w]
        obj["value"] = rho_to_json(value)
        obj["attaining"] = sorted(keys.index(k) for k in attain)
    return dumps(obj), EXIT_OK


def _cmd_initial(args):
    f = parse_poly(args.poly)
    w = parse_gamma_vector(args.w)
    inw = f.initial_form(w)
    return dumps(poly_to_json(inw)), EXIT_OK


def _cmd_hypersurface(args):
    f = parse_poly(args.poly)
    hs = hypersurface(f)
    if args.format == "svg":
        return complex_to_svg(hs), EXIT_OK
    return dumps(complex_to_json(hs)), EXIT_OK


def _cmd_lift(args):
    f = parse_poly(args.poly)
    w = parse_gamma_vector(args.w)
    if len(w) != f.n:
        raise InputError(f"--w needs {f.n} coordinates")
    inw = f.initial_form(w)
    if args.alpha is not None:
        alpha = tuple(parse_scalar(s) for s in args.alpha.split(","))
    else:
        alpha = find_roots_nonmonomial(inw)[0]
    if args.target is not None:
        target = parse_rho(args.target)
    else:
        target = _default_target(f, w)
    if args.branch_all and f.n == 1:
        certs = lift_univariate_branches(f, w[0], alpha[0], target)
        obj = {"branches": [certificate_to_json(c) for c in certs]}
    else:
        certs = lift_multivariate(f, w, alpha, target)
        obj = {"certificates": [certificate_to_json(c) for c in certs]}
    return dumps(obj), EXIT_OK


def _default_target(f, w):
    value, _attain = f.tropicalize(w)
    base = value if value > w[-1] else w[-1]
    return base + RhoRational.from_fraction(Fraction(1, 2))


def _cmd_verify(args):
    reports = []
    ok = True
    if args.poly is not None:
        f = parse_poly(args.poly)
        target = parse_rho(args.target) if args.target else None
        grid = parse_grid_spec(args.grid, f.n)
        rep = verify_kapranov(f, grid, target=target,
                              branch_all=args.branch_all)
        reports.append(("input", rep))
        ok = ok and rep.ok
    if args.random:
        rng = random.Random(args.seed)
        for k in range(args.random):
            f = random_bivariate(rng)
            grid = parse_grid_spec(args.grid, f.n)
            rep = verify_kapranov(f, grid)
            reports.append((f"random-{k}", rep))
            ok = ok and rep.ok
    if not reports:
        raise InputError("verify needs a polynomial or --random N")
    obj = {"reports": [{"name": name, **rep.to_json()}
                       for name, rep in reports],
           "ok": ok}
    return dumps(obj), EXIT_OK if ok else EXIT_MISMATCH


def random_bivariate(rng, max_monomials=4, order=1) -> DiffPolynomial:
    """Small random bivariate polynomials for the randomized suites.

    Monomial pairs whose exponents collapse to the same per-variable totals
    are rejected: their ties would hand the identity residue field an
    equation without nonzero roots, which only a genuinely generic
    automorphism could serve.
    """
    items = []
    for _ in range(rng.randint(2, max_monomials)):
        key = []
        for _v in range(2):
            entries = []
            for lvl in range(order + 1):
                a = rng.randint(-1, 2) if rng.random() < 0.7 else 0
                if a:
                    entries.append((lvl, a))
            key.append(SigmaExponent.make(entries))
        coeff = HahnSeries.monomial(rng.randint(1, 4),
                                    Fraction(rng.randint(-3, 6),
                                             rng.randint(1, 2)))
        items.append((tuple(key), coeff))
    f = DiffPolynomial(2, FIELD_K, items)
    if f.is_zero() or f.is_monomial():
        return random_bivariate(rng, max_monomials, order)
    totals = [tuple(e.total() for e in key) for key in f.exponents()]
    if len(set(totals)) != len(totals):
        return random_bivariate(rng, max_monomials, order)
    return f


if __name__ == "__main__":
    sys.exit(main())
