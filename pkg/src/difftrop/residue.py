"""The exact algebraically closed residue field of characteristic zero.

Scalars are algebraic numbers represented exactly (sympy expressions built
from rationals and polynomial roots); every scalar exposes a monic rational
minimal polynomial and an isolating rectangle on demand.  The distinguished
automorphism sigma-bar defaults to the identity, in which case sigma-powers
of a variable collapse to ordinary powers and every difference equation in
one variable reduces to root finding for an ordinary polynomial.  A pluggable
oracle seam records where a nontrivial automorphism would have to supply its
own solver; no such solver is bundled.

Root selection is deterministic: among candidates, the least by (real part,
imaginary part) of refined numeric enclosures wins, with exact tie handling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from itertools import product
from typing import Callable, Optional

import sympy as sp
from mpmath import mp, mpf, workdps
from sympy.polys.polyerrors import (
    CoercionFailed, GeneratorsError, PolynomialError,
)

from .errors import (
    InputError, NonrootSearchExhaustedError, OracleUnavailableError,
    ResidueSolveError,
)

_MINPOLY_GEN = sp.Symbol("x")
_LADDER = (30, 80, 200, 500)

# sympy's own CRootOf refinement is far too slow for complex roots, so all
# numeric enclosures come from simultaneous root finding on the (irreducible,
# hence squarefree) defining polynomials, matched to the right root through
# the exact isolating rectangles.
_POLYROOT_CACHE = {}


def _defining_roots(coeffs: tuple, dps: int):
    cached = _POLYROOT_CACHE.get(coeffs)
    if cached is not None and cached[0] >= dps:
        return cached[1]
    with workdps(dps + 25):
        roots, _err = mp.polyroots([mpf(c) for c in coeffs], error=True,
                                   maxsteps=300, extraprec=120)
    _POLYROOT_CACHE[coeffs] = (dps, roots)
    return roots


def _interval_bounds(rootof):
    iv = rootof._get_interval()
    if rootof.is_real:
        return (Fraction(str(iv.a)), Fraction(str(iv.b)), None, None)
    return (Fraction(str(iv.ax)), Fraction(str(iv.bx)),
            Fraction(str(iv.ay)), Fraction(str(iv.by)))


def _rootof_approx(rootof, dps: int):
    coeffs = tuple(int(c) for c in rootof.poly.all_coeffs())
    roots = _defining_roots(coeffs, dps)
    iv = rootof._get_interval()
    for _ in range(64):
        if rootof.is_real:
            lo, hi = Fraction(str(iv.a)), Fraction(str(iv.b))
            hits = [z for z in roots
                    if abs(z.imag) < mpf(10) ** (-dps // 2)
                    and mpf(lo.numerator) / lo.denominator <= z.real
                    and z.real <= mpf(hi.numerator) / hi.denominator]
        else:
            ax, bx = Fraction(str(iv.ax)), Fraction(str(iv.bx))
            ay, by = Fraction(str(iv.ay)), Fraction(str(iv.by))
            hits = [z for z in roots
                    if mpf(ax.numerator) / ax.denominator <= z.real
                    and z.real <= mpf(bx.numerator) / bx.denominator
                    and mpf(ay.numerator) / ay.denominator <= z.imag
                    and z.imag <= mpf(by.numerator) / by.denominator]
        if len(hits) == 1:
            return hits[0]
        iv = iv.refine()
    raise InputError("failed to match an isolating rectangle to a root")


def _approx(expr, dps: int):
    """Numeric value of an algebraic-number expression as an mpmath complex,
    accurate to roughly dps digits for the expression sizes in this package."""
    with workdps(dps + 25):
        return _approx_rec(expr, dps)


def _approx_rec(expr, dps):
    if expr.is_Integer:
        return mp.mpc(int(expr))
    if expr.is_Rational:
        return mp.mpc(mpf(int(expr.p)) / int(expr.q))
    if expr is sp.I:
        return mp.mpc(0, 1)
    if isinstance(expr, sp.CRootOf):
        return mp.mpc(_rootof_approx(expr, dps))
    if isinstance(expr, sp.Add):
        return mp.fsum((_approx_rec(a, dps) for a in expr.args), absolute=False)
    if isinstance(expr, sp.Mul):
        out = mp.mpc(1)
        for a in expr.args:
            out *= _approx_rec(a, dps)
        return out
    if isinstance(expr, sp.Pow):
        base = _approx_rec(expr.base, dps)
        e = expr.exp
        if e.is_Integer:
            return base ** int(e)
        if e.is_Rational:
            return mp.power(base, mpf(int(e.p)) / int(e.q))
    if expr.is_number:
        # atoms outside the recursive grammar (e.g. conjugates)
        v = complex(sp.N(expr, min(dps, 50)))
        return mp.mpc(v)
    raise InputError(f"cannot approximate {expr}")


def _to_expr(value):
    if isinstance(value, AlgebraicScalar):
        return value.expr
    if isinstance(value, bool):
        raise InputError("boolean is not a scalar")
    if isinstance(value, int):
        return sp.Integer(value)
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    if isinstance(value, sp.Expr):
        if value.free_symbols:
            raise InputError(f"not a number: {value}")
        return value
    raise InputError(f"cannot interpret {value!r} as an algebraic scalar")


class AlgebraicScalar:
    """An exact element of the algebraic closure of the rationals."""

    __slots__ = ("expr", "_minpoly", "_iso")

    def __init__(self, value):
        self.expr = _normalize_expr(_to_expr(value))
        self._minpoly = None
        self._iso = None

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        e = self.expr
        if e.is_Rational:
            return e == 0
        # numeric certificate can only prove nonzero; zero needs exactness.
        # (never consult e.is_zero: sympy backs it by its own slow evalf)
        try:
            if abs(_approx(e, 30)) > 1e-10:
                return False
        except (InputError, TypeError, ValueError):
            pass
        return _exact_is_zero(e)

    def is_rational(self) -> bool:
        return bool(self.expr.is_Rational)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise InputError(f"{self} is not rational")
        return Fraction(int(self.expr.p), int(self.expr.q))

    # -- field operations ---------------------------------------------------

    def __add__(self, other):
        return AlgebraicScalar(self.expr + _to_expr(other))

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicScalar(-self.expr)

    def __sub__(self, other):
        return AlgebraicScalar(self.expr - _to_expr(other))

    def __rsub__(self, other):
        return AlgebraicScalar(_to_expr(other) - self.expr)

    def __mul__(self, other):
        return AlgebraicScalar(self.expr * _to_expr(other))

    __rmul__ = __mul__

    def inv(self) -> "AlgebraicScalar":
        if self.is_zero():
            raise ZeroDivisionError("inversion of zero in the residue field")
        return AlgebraicScalar(1 / self.expr)

    def __truediv__(self, other):
        o = other if isinstance(other, AlgebraicScalar) else AlgebraicScalar(other)
        return self * o.inv()

    def __rtruediv__(self, other):
        return AlgebraicScalar(other) * self.inv()

    def __pow__(self, k: int):
        if k == 0:
            return AlgebraicScalar(1)
        if k < 0:
            return self.inv() ** (-k)
        return AlgebraicScalar(self.expr ** k)

    def __eq__(self, other):
        if isinstance(other, (AlgebraicScalar, int, Fraction, sp.Expr)):
            o = _to_expr(other)
            if self.expr == o:
                return True
            return (self - AlgebraicScalar(o)).is_zero()
        return NotImplemented

    __hash__ = None  # exact equality is semantic; scalars are not dict keys

    # -- exact invariants ---------------------------------------------------

    def minpoly(self) -> sp.Poly:
        """Monic minimal polynomial over the rationals (irreducible)."""
        if self._minpoly is None:
            e = self.expr
            if e.is_Rational:
                p = sp.Poly(_MINPOLY_GEN - e, _MINPOLY_GEN, domain="QQ")
            else:
                p = sp.minimal_polynomial(e, _MINPOLY_GEN, polys=True).monic()
            self._minpoly = p
        return self._minpoly

    def isolation(self):
        """Rational rectangle (re_lo, re_hi, im_lo, im_hi) isolating the value
        among the roots of its minimal polynomial."""
        if self._iso is not None:
            return self._iso
        if self.expr.is_Rational:
            q = self.as_fraction()
            self._iso = (q, q, Fraction(0), Fraction(0))
            return self._iso
        cands = list(self.minpoly().all_roots())
        me = _approx(self.expr, 30)
        cands.sort(key=lambda r: abs(_approx(r, 30) - me))
        for r in cands:
            if (self - AlgebraicScalar(r)).is_zero():
                self._iso = _rootof_rectangle(r)
                return self._iso
        raise InputError("scalar does not match any root of its minimal polynomial")

    # -- display ------------------------------------------------------------

    def __repr__(self):
        return f"AlgebraicScalar({self.expr})"

    def __str__(self):
        return str(self.expr)


def _normalize_expr(e):
    """Canonical bounded-size form for the common coefficient fields.

    A rational function of a single polynomial root reduces modulo the
    defining polynomial (after inverting the denominator in the number
    field), so towers of field operations cannot grow the representation.
    Expressions outside that shape are lightly expanded and left alone.
    """
    if e.is_Rational or e.is_Atom:
        return e
    crs = list(e.atoms(sp.CRootOf))
    if len(crs) != 1:
        return sp.expand(e)
    th = crs[0]
    y = sp.Dummy("y")
    try:
        num, den = sp.together(e).as_numer_denom()
        pn = sp.Poly(num.xreplace({th: y}), y)
        pd = sp.Poly(den.xreplace({th: y}), y)
        m = sp.Poly(th.poly.as_expr().subs(th.poly.gen, y), y)
        pn = pn.to_field()
        pd = pd.to_field()
        m = m.to_field()
        pd = pd.rem(m)
        if pd.is_zero:
            raise ZeroDivisionError("denominator vanishes at the root")
        s, _t, h = pd.gcdex(m)
        # h is a nonzero constant since the defining polynomial is irreducible
        inv = s.mul_ground(1 / h.LC()) if h.degree() == 0 else None
        if inv is None:
            return sp.expand(e)
        res = (pn.rem(m) * inv).rem(m)
        return res.as_expr().xreplace({y: th})
    except (PolynomialError, CoercionFailed, GeneratorsError,
            NotImplementedError, sp.polys.polyerrors.DomainError):
        return sp.expand(e)


def _exact_is_zero(e) -> bool:
    """Decide e == 0 exactly for an algebraic-number expression.

    Expressions that are rational-coefficient polynomials in a single
    polynomial root reduce modulo its defining polynomial, which is cheap;
    everything else falls back to a minimal-polynomial computation.
    """
    num, _den = sp.together(e).as_numer_denom()
    num = sp.expand(num)
    if num.is_Rational:
        return num == 0
    crs = list(num.atoms(sp.CRootOf))
    if len(crs) == 1:
        r = crs[0]
        y = sp.Dummy("y")
        try:
            p = sp.Poly(num.xreplace({r: y}), y)
            if p.domain.is_QQ or p.domain.is_ZZ:
                mp = sp.Poly(r.poly.as_expr().subs(r.poly.gen, y), y)
                return sp.rem(p, mp, domain="QQ") == 0
        except (PolynomialError, CoercionFailed, GeneratorsError):
            pass
    mp = sp.minimal_polynomial(num, _MINPOLY_GEN, polys=True)
    return mp.degree() == 1 and mp.TC() == 0


def _rootof_rectangle(root):
    """Isolating rectangle of a root value as Fractions."""
    if root.is_Rational:
        q = Fraction(int(root.p), int(root.q))
        return (q, q, Fraction(0), Fraction(0))
    if isinstance(root, sp.CRootOf):
        iv = root._get_interval()
        for _ in range(8):  # a few bisections tighten the reported box
            iv = iv.refine()
        if root.is_real:
            a, b = Fraction(str(iv.a)), Fraction(str(iv.b))
            return (a, b, Fraction(0), Fraction(0))
        return (Fraction(str(iv.ax)), Fraction(str(iv.bx)),
                Fraction(str(iv.ay)), Fraction(str(iv.by)))
    # radical or other closed form: certified-enough box from evalf accuracy
    v = sp.N(root, 40)
    re, im = v.as_real_imag()
    re, im = Fraction(str(re)), Fraction(str(im))
    eps = Fraction(1, 10 ** 30)
    return (re - eps, re + eps, im - eps, im + eps)


# -- deterministic ordering ------------------------------------------------

def compare_scalars(a: AlgebraicScalar, b: AlgebraicScalar) -> int:
    """Order by (real part, imaginary part) of refined enclosures.

    Exactly equal values compare as 0; conjugate pairs fall through the real
    ladder and resolve on the imaginary part.
    """
    if a.expr == b.expr:
        return 0
    for part in (0, 1):
        for prec in _LADDER:
            va = _approx(a.expr, prec)
            vb = _approx(b.expr, prec)
            da = va.real if part == 0 else va.imag
            db = vb.real if part == 0 else vb.imag
            tol = mpf(10) ** (8 - prec)
            if da - db > tol:
                return 1
            if db - da > tol:
                return -1
        # this part is (numerically) tied at the ladder cap; try the next
    if a == b:
        return 0
    # astronomically close but distinct: stable syntactic fallback
    sa, sb = sp.srepr(a.expr), sp.srepr(b.expr)
    return -1 if sa < sb else (1 if sa > sb else 0)


def sort_scalars(scalars):
    return sorted(scalars, key=cmp_to_key(compare_scalars))


def pick_least(scalars) -> AlgebraicScalar:
    """Deterministic representative: least by (re, im)."""
    if not scalars:
        raise InputError("no scalars to choose from")
    return sort_scalars(scalars)[0]


# -- root finding -----------------------------------------------------------

def roots_univariate(coeffs) -> list:
    """All complex roots, with multiplicity, of sum(coeffs[i] * x^i).

    Coefficients are AlgebraicScalar (or raw rationals); the result is an
    exactly represented multiset sorted by the deterministic order.  Linear
    and quadratic equations are solved by formula regardless of the
    coefficient field; higher degrees over genuine extensions go through
    number-field factorization, which is markedly slower.
    """
    cs = [c if isinstance(c, AlgebraicScalar) else AlgebraicScalar(c)
          for c in coeffs]
    while cs and cs[-1].is_zero():
        cs.pop()
    if not cs:
        raise InputError("zero polynomial has no well-defined root multiset")
    if len(cs) == 1:
        return []
    if len(cs) == 2:
        return [-(cs[0] / cs[1])]
    if all(c.expr.is_Rational for c in cs):
        z = sp.Dummy("z")
        expr = sp.Add(*[c.expr * z ** i for i, c in enumerate(cs)])
        poly = sp.Poly(expr, z, domain="QQ")
        roots = poly.all_roots(multiple=True)
        return sort_scalars(AlgebraicScalar(r) for r in roots)
    if len(cs) == 3:
        c0, c1, c2 = (c.expr for c in cs)
        disc = AlgebraicScalar(c1 * c1 - 4 * c2 * c0)
        if disc.is_zero():
            r = AlgebraicScalar(-c1 / (2 * c2))
            return [r, r]
        sq = sp.sqrt(disc.expr)
        roots = [AlgebraicScalar((-c1 - sq) / (2 * c2)),
                 AlgebraicScalar((-c1 + sq) / (2 * c2))]
        return sort_scalars(roots)
    z = sp.Dummy("z")
    expr = sp.Add(*[c.expr * z ** i for i, c in enumerate(cs)])
    try:
        poly = sp.Poly(expr, z, extension=True)
    except (PolynomialError, CoercionFailed, GeneratorsError,
            NotImplementedError):
        expr = sp.Add(*[_canonical_root_form(c).expr * z ** i
                        for i, c in enumerate(cs)])
        poly = sp.Poly(expr, z, extension=True)
    roots = poly.all_roots(multiple=True)
    return sort_scalars(AlgebraicScalar(r) for r in roots)


def _canonical_root_form(c: AlgebraicScalar) -> AlgebraicScalar:
    """Rewrite a compound scalar as a single CRootOf of its minimal polynomial."""
    if c.expr.is_Rational or isinstance(c.expr, sp.CRootOf):
        return c
    mp = c.minpoly()
    for r in mp.all_roots():
        if (c - AlgebraicScalar(r)).is_zero():
            return AlgebraicScalar(r)
    raise InputError("failed to canonicalize algebraic scalar")


# -- the difference structure ------------------------------------------------

@dataclass(frozen=True)
class ResidueFieldOracle:
    """Seam for a residue field with nontrivial automorphism.

    The bundled field only implements the identity automorphism, under which
    every generated equation collapses to ordinary root finding.  A genuine
    generic automorphism admits no known root-finding algorithm; plugging one
    in requires supplying both callables below.
    """

    name: str = "identity"
    sigma: Optional[Callable] = None            # scalar -> scalar
    difference_root: Optional[Callable] = None  # one-var DiffPolynomial -> scalar

    @property
    def is_identity(self) -> bool:
        return self.sigma is None


IDENTITY_ORACLE = ResidueFieldOracle()


def sigma_bar(a: AlgebraicScalar, oracle: ResidueFieldOracle = IDENTITY_ORACLE,
              iterations: int = 1) -> AlgebraicScalar:
    """The induced residue automorphism; identity by default."""
    if oracle.is_identity or iterations == 0:
        return a
    out = a
    for _ in range(iterations):
        out = oracle.sigma(out)
    return out


def _collapse_identity(phi) -> dict:
    """Under sigma-bar = id, map a one-variable difference polynomial to its
    ordinary Laurent form {integer exponent: scalar}; zero coefficients drop."""
    if phi.n != 1:
        raise InputError("collapse requires a one-variable polynomial")
    acc = {}
    for key, coeff in phi.terms():
        e = key[0].total()
        acc[e] = acc.get(e, AlgebraicScalar(0)) + coeff
    return {e: c for e, c in acc.items() if not c.is_zero()}


def difference_roots_univariate(phi, oracle: ResidueFieldOracle = IDENTITY_ORACLE):
    """All distinct nonzero roots of a one-variable difference polynomial.

    Only available for the identity automorphism (or through an oracle that
    enumerates); raises ResidueSolveError when the collapsed form is a
    monomial, which has no nonzero root.
    """
    if phi.is_monomial():
        raise InputError("monomial input: no root is guaranteed")
    if not oracle.is_identity:
        raise OracleUnavailableError(
            "root enumeration for a nontrivial automorphism needs an oracle")
    lau = _collapse_identity(phi)
    if not lau:
        # collapsed to zero: every nonzero scalar is a root; offer a few
        # representatives so retry-driven callers have alternatives
        return [AlgebraicScalar(v) for v in (1, -1, 2, -2)]
    if len(lau) == 1:
        raise ResidueSolveError(
            "collapsed to a monomial: no nonzero root in the identity field")
    shift = min(lau)
    deg = max(lau) - shift
    coeffs = [lau.get(shift + i, AlgebraicScalar(0)) for i in range(deg + 1)]
    roots = roots_univariate(coeffs)
    out = []
    for r in roots:
        if not r.is_zero() and all(not (r - s).is_zero() for s in out):
            out.append(r)
    if not out:
        raise ResidueSolveError("no nonzero root after collapse")
    return out


def solve_difference_univariate(phi,
                                oracle: ResidueFieldOracle = IDENTITY_ORACLE
                                ) -> AlgebraicScalar:
    """A nonzero root of a non-monomial one-variable difference polynomial.

    With the identity automorphism the sigma-powers collapse and the root is
    chosen deterministically (least by (re, im)); a nontrivial automorphism
    delegates to the oracle's solver.
    """
    if phi.is_monomial():
        raise InputError("monomial input: no root is guaranteed")
    if not oracle.is_identity:
        if oracle.difference_root is None:
            raise OracleUnavailableError(
                "no difference-equation solver plugged for nontrivial sigma")
        return oracle.difference_root(phi)
    return difference_roots_univariate(phi, oracle)[0]


def _integer_points(m: int, budget: int):
    """Deterministic enumeration of (k*)^m integer points: 1, -1, 2, -2, ..."""
    if m == 0:
        yield ()
        return
    count = 0
    k = 1
    seen = set()
    while count < budget:
        vals = [(-1) ** (i % 2) * (i // 2 + 1) for i in range(2 * k)]
        for tup in product(vals, repeat=m):
            if tup in seen:
                continue
            seen.add(tup)
            yield tuple(AlgebraicScalar(x) for x in tup)
            count += 1
            if count >= budget:
                return
        k += 1


def find_root_nonmonomial(f, oracle: ResidueFieldOracle = IDENTITY_ORACLE,
                          budget: int = 2000):
    """A root of a non-monomial difference polynomial in (k*)^n.

    Follows the classical recursion: fix a variable whose sigma-powers vary,
    find a point where no coefficient polynomial vanishes (integer-point
    enumeration; nonroots are Zariski-dense), then solve the remaining
    one-variable equation.
    """
    if f.is_monomial():
        raise InputError("monomial input: no root is guaranteed")
    n = f.n
    if n == 1:
        return (solve_difference_univariate(f, oracle),)

    keys = list(f.exponents())
    pivot = None
    for i in reversed(range(n)):
        if len({k[i] for k in keys}) > 1:
            pivot = i
            break
    if pivot is None:
        # keys identical in every variable yet f non-monomial is impossible
        raise InputError("degenerate polynomial: identical exponents")

    gen = _roots_nonmonomial_gen(f, oracle, budget)
    try:
        return next(gen)
    except StopIteration:
        raise ResidueSolveError(
            "no candidate point admitted a nonzero root") from None


def find_roots_nonmonomial(f, oracle: ResidueFieldOracle = IDENTITY_ORACLE,
                           limit: int = 4, budget: int = 2000):
    """Up to ``limit`` distinct torus roots, deterministic order.

    Lifting can stall on an unlucky representative; callers retry with the
    next root from this list.
    """
    out = []
    if f.is_monomial():
        raise InputError("monomial input: no root is guaranteed")
    if f.n == 1:
        for r in difference_roots_univariate(f, oracle)[:limit]:
            out.append((r,))
        return out
    for root in _roots_nonmonomial_gen(f, oracle, budget):
        if all(any(not (a - b).is_zero() for a, b in zip(root, seen))
               for seen in out):
            out.append(root)
        if len(out) >= limit:
            break
    if not out:
        raise ResidueSolveError("no candidate point admitted a nonzero root")
    return out


def _roots_nonmonomial_gen(f, oracle, budget):
    n = f.n
    if n == 1:
        yield (solve_difference_univariate(f, oracle),)
        return
    keys = list(f.exponents())
    pivot = None
    for i in reversed(range(n)):
        if len({k[i] for k in keys}) > 1:
            pivot = i
            break
    if pivot is None:
        # keys identical in every variable yet f non-monomial is impossible
        raise InputError("degenerate polynomial: identical exponents")

    rest = [i for i in range(n) if i != pivot]
    groups = f.group_by_variable(pivot)
    one = AlgebraicScalar(1)
    tried_nonroot = False
    degenerate = None
    yielded = False
    for point in _integer_points(n - 1, budget):
        full = list(point)
        full.insert(pivot, one)
        if not all(not g.evaluate_scalars(tuple(full), oracle).is_zero()
                   for _e, g in groups):
            continue
        tried_nonroot = True
        found = dict(zip(rest, point))
        g1 = f.substitute_scalars(found, oracle)
        try:
            pivot_roots = difference_roots_univariate(g1, oracle)
        except ResidueSolveError as exc:
            # with the identity automorphism the substituted equation can
            # collapse to a monomial; another candidate point usually works
            degenerate = exc
            continue
        for root in pivot_roots:
            out = [None] * n
            for i, v in found.items():
                out[i] = v
            out[pivot] = root
            value = f.evaluate_scalars(tuple(out), oracle)
            if not value.is_zero():
                raise ResidueSolveError(
                    "resubstitution of the found root is nonzero")
            yielded = True
            yield tuple(out)
    if yielded:
        return
    if degenerate is not None:
        raise degenerate
    if not tried_nonroot:
        raise NonrootSearchExhaustedError(
            f"no nonroot of the coefficient product within budget {budget}")
