"""JSON and SVG emission for every public object, plus JSON readers.

Serialization is bit-stable: construction order is deterministic, rationals
are rendered canonically ('p/q', or 'p' for integers), and dumps uses fixed
separators.  SVG output renders exact data at display precision only and is
available for two-dimensional complexes.
"""

from __future__ import annotations

import json
from fractions import Fraction

import sympy as sp

from .diffpoly import FIELD_k, DiffPolynomial, SigmaExponent
from .errors import InputError
from .hahn import HahnSeries
from .newton import LiftCertificate
from .polyhedral import PolyComplex, Polyhedron
from .residue import AlgebraicScalar
from .rho import INF, Infinity, RhoRational


def dumps(obj) -> bytes:
    return json.dumps(obj, separators=(",", ":")).encode()


# -- rationals ---------------------------------------------------------------

def rational_str(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rational_from(s) -> Fraction:
    return Fraction(s)


# -- Q(rho) ------------------------------------------------------------------

def rho_to_json(x: RhoRational):
    return {"num": list(x.num), "den": list(x.den)}


def rho_from_json(obj) -> RhoRational:
    return RhoRational(tuple(obj["num"]), tuple(obj["den"]))


def gamma_to_json(x):
    if isinstance(x, Infinity):
        return "inf"
    return rho_to_json(x)


def gamma_from_json(obj):
    if obj == "inf":
        return INF
    return rho_from_json(obj)


# -- residue-field scalars -----------------------------------------------------

def scalar_to_json(a: AlgebraicScalar):
    mp = a.minpoly()
    re_lo, re_hi, im_lo, im_hi = a.isolation()
    coeffs = [sp.Rational(c) for c in reversed(mp.all_coeffs())]
    return {
        "minpoly": [rational_str(Fraction(int(c.p), int(c.q)))
                    for c in coeffs],
        "re": [rational_str(re_lo), rational_str(re_hi)],
        "im": [rational_str(im_lo), rational_str(im_hi)],
    }


def scalar_from_json(obj) -> AlgebraicScalar:
    coeffs = [Fraction(s) for s in obj["minpoly"]]
    re_lo, re_hi = (Fraction(s) for s in obj["re"])
    im_lo, im_hi = (Fraction(s) for s in obj["im"])
    if len(coeffs) == 2:
        # monic linear: the value is rational
        return AlgebraicScalar(-coeffs[0] / coeffs[1])
    x = sp.Symbol("x")
    expr = sp.Add(*[sp.Rational(c.numerator, c.denominator) * x ** i
                    for i, c in enumerate(coeffs)])
    roots = sp.Poly(expr, x, domain="QQ").all_roots()
    from .residue import _approx
    box_re = (float(re_lo) + float(re_hi)) / 2
    box_im = (float(im_lo) + float(im_hi)) / 2
    best, best_d = None, None
    for r in roots:
        v = _approx(r, 30)
        d = abs(complex(v) - complex(box_re, box_im))
        if best is None or d < best_d:
            best, best_d = r, d
    if best is None:
        raise InputError("no root of the given minimal polynomial")
    return AlgebraicScalar(best)


# -- Hahn series ----------------------------------------------------------------

def hahn_to_json(x: HahnSeries):
    return {
        "terms": [{"exp": rho_to_json(e), "coeff": scalar_to_json(c)}
                  for e, c in x.terms],
        "trunc": gamma_to_json(x.trunc),
    }


def hahn_from_json(obj) -> HahnSeries:
    terms = [(rho_from_json(t["exp"]), scalar_from_json(t["coeff"]))
             for t in obj["terms"]]
    return HahnSeries(terms, gamma_from_json(obj["trunc"]))


# -- difference polynomials -------------------------------------------------------

def sigma_exponent_to_json(e: SigmaExponent):
    return [[j, a] for j, a in e.powers]


def sigma_exponent_from_json(obj) -> SigmaExponent:
    return SigmaExponent.make([(int(j), int(a)) for j, a in obj])


def poly_to_json(f: DiffPolynomial):
    monos = []
    for key, coeff in f.terms():
        cj = scalar_to_json(coeff) if f.field == FIELD_k \
            else hahn_to_json(coeff)
        monos.append({"exponent": [sigma_exponent_to_json(e) for e in key],
                      "coeff": cj})
    return {"n": f.n, "field": f.field, "monomials": monos,
            "text": str(f)}


def poly_from_json(obj) -> DiffPolynomial:
    items = []
    for m in obj["monomials"]:
        key = tuple(sigma_exponent_from_json(e) for e in m["exponent"])
        coeff = scalar_from_json(m["coeff"]) if obj["field"] == FIELD_k \
            else hahn_from_json(m["coeff"])
        items.append((key, coeff))
    return DiffPolynomial(obj["n"], obj["field"], items)


def trop_to_json(f: DiffPolynomial):
    """The tropicalization as a symbolic min-plus object."""
    terms = []
    for val, u in f.tropical_terms():
        terms.append({"coeff_valuation": rho_to_json(val),
                      "exponent_rho": [rho_to_json(x) for x in u]})
    return {"n": f.n, "terms": terms}


# -- polyhedral complexes -------------------------------------------------------------

def cell_to_json(cell: Polyhedron):
    h = []
    for normal, value in cell.eqs:
        h.append({"normal": [rho_to_json(c) for c in normal],
                  "bound": rho_to_json(value)})
        h.append({"normal": [rho_to_json(-c) for c in normal],
                  "bound": rho_to_json(-value)})
    for normal, bound in cell.ineqs:
        h.append({"normal": [rho_to_json(c) for c in normal],
                  "bound": rho_to_json(bound)})
    vertices = None
    if cell.is_bounded():
        vertices = [[rho_to_json(c) for c in v] for v in cell.vertices()]
    return {"dim": cell.dim(), "H": h, "vertices": vertices}


def complex_to_json(cx: PolyComplex):
    cells = []
    for i, cell in enumerate(cx.cells):
        obj = cell_to_json(cell)
        obj["faces"] = sorted(j for j, k in cx.face_pairs if k == i)
        cells.append(obj)
    return {"ambient": cx.ambient, "cells": cells}


def complex_from_json(obj) -> PolyComplex:
    cells = []
    pairs = []
    for i, cobj in enumerate(obj["cells"]):
        ineqs = [(tuple(rho_from_json(c) for c in row["normal"]),
                  rho_from_json(row["bound"])) for row in cobj["H"]]
        cell = Polyhedron(obj["ambient"], ineqs, dim=cobj["dim"])
        if cobj.get("vertices") is not None:
            cell._vertices = [tuple(rho_from_json(c) for c in v)
                              for v in cobj["vertices"]]
        cells.append(cell)
        for j in cobj.get("faces", []):
            pairs.append((j, i))
    return PolyComplex(obj["ambient"], cells, sorted(set(pairs)))


# -- lift certificates -----------------------------------------------------------------

def certificate_to_json(c: LiftCertificate):
    return {
        "root": hahn_to_json(c.root),
        "root_text": str(c.root),
        "w": rho_to_json(c.w),
        "alpha": scalar_to_json(c.alpha),
        "target": rho_to_json(c.target),
        "residual_valuation": gamma_to_json(c.residual_valuation),
        "steps": c.steps,
        "branch_choices": [scalar_to_json(u) for u in c.branch_choices],
    }


# -- SVG ------------------------------------------------------------------------------

def complex_to_svg(cx: PolyComplex, size: int = 400, box: float = 10.0) -> bytes:
    """Render a 2-dimensional complex: vertices as dots, one-dimensional
    cells clipped to the viewing box.  Exact data, display precision."""
    if cx.ambient != 2:
        raise InputError("SVG rendering is only available for n = 2")

    def to_px(x, y):
        sx = (x + box) / (2 * box) * size
        sy = size - (y + box) / (2 * box) * size
        return sx, sy

    lines = []
    dots = []
    for cell in cx.cells:
        d = cell.dim()
        if d == 0:
            pt = cell.relative_interior_point()
            dots.append(to_px(float(pt[0]), float(pt[1])))
        elif d == 1:
            seg = _clip_segment(cell, box)
            if seg is not None:
                (x1, y1), (x2, y2) = seg
                lines.append((to_px(x1, y1), to_px(x2, y2)))
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
             f'height="{size}" viewBox="0 0 {size} {size}">']
    parts.append(f'<rect width="{size}" height="{size}" fill="white"/>')
    for (x1, y1), (x2, y2) in lines:
        parts.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" '
                     f'y2="{y2:.2f}" stroke="black" stroke-width="1.5"/>')
    for x, y in dots:
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="red"/>')
    parts.append("</svg>")
    return "\n".join(parts).encode()


def _clip_segment(cell: Polyhedron, box: float):
    """Endpoints of a 1-cell clipped to [-box, box]^2, as floats."""
    from .linalg import fm_feasible, fm_minimum

    cons = cell._constraints()
    b = RhoRational.from_fraction(Fraction(box).limit_denominator(1000))
    for i in range(2):
        normal = tuple(RhoRational.from_int(1 if j == i else 0)
                       for j in range(2))
        cons = cons + [(normal, b, False),
                       (tuple(-c for c in normal), b, False)]
    if not fm_feasible(cons, 2):
        return None
    # direction of the affine line from a nonzero kernel vector
    from .linalg import nullspace
    eqs = [n for n, _v in cell.eqs]
    for idx in _implicit_rows(cell):
        eqs.append(cell.ineqs[idx][0])
    if not eqs:
        return None
    kern = nullspace(eqs)
    if len(kern) != 1:
        return None
    d = kern[0]
    lo, _a = fm_minimum(cons, 2, d)
    hi, _b2 = fm_minimum(cons, 2, tuple(-c for c in d))
    if lo is None or hi is None:
        return None
    ends = []
    for val in (lo, -hi):
        cons2 = cons + [(d, val, False), (tuple(-c for c in d), -val, False)]
        from .linalg import fm_sample
        pt = fm_sample(cons2, 2)
        if pt is None:
            return None
        ends.append((float(pt[0]), float(pt[1])))
    if len(ends) != 2:
        return None
    return ends[0], ends[1]


def _implicit_rows(cell: Polyhedron):
    from .linalg import fm_minimum
    cons = cell._constraints()
    out = []
    for i, (normal, bound) in enumerate(cell.ineqs):
        mn, _att = fm_minimum(cons, cell.n, normal)
        if mn is not None and mn == bound:
            out.append(i)
    return out
