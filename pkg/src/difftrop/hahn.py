"""Truncated arithmetic in the Hahn field k((t^Gamma)) with Gamma = Q(rho).

An element is a finite list of (exponent, coefficient) terms with strictly
increasing exponents in Q(rho) and nonzero algebraic coefficients, plus a
truncation exponent: terms below the truncation are exact, everything at or
above it is unknown.  A truncation of +infinity marks an exact, finitely
supported element.  The distinguished automorphism acts as t^g -> t^(rho*g)
on exponents (coefficients through sigma-bar), so valuations scale by rho.

Truncation propagation follows the standard non-archimedean rules: addition
keeps the smaller truncation, multiplication keeps min(trunc_x + v(y),
trunc_y + v(x)) with known-valuation lower bounds standing in when a factor
has no visible terms.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cmp_to_key

from .errors import InputError, PrecisionError, ValuationUnknownError
from .residue import IDENTITY_ORACLE, AlgebraicScalar, sigma_bar
from .rho import INF, Infinity, RhoRational, min_gamma, sigma_gamma


def _gamma(x):
    if isinstance(x, RhoRational):
        return x
    if isinstance(x, (int, Fraction)):
        return RhoRational.from_fraction(Fraction(x))
    raise InputError(f"not a value-group element: {x!r}")


def _scalar(c):
    return c if isinstance(c, AlgebraicScalar) else AlgebraicScalar(c)


def _cmp_gamma(a: RhoRational, b: RhoRational) -> int:
    return (a - b).sign()


class HahnSeries:
    """A truncated element of k((t^Gamma))."""

    __slots__ = ("terms", "trunc")

    def __init__(self, terms=(), trunc=INF):
        """terms: iterable of (exponent, coefficient); exponents in Q(rho),
        coefficients algebraic.  Terms are merged, sorted, stripped of zero
        coefficients, and cut at the truncation."""
        if not isinstance(trunc, Infinity):
            trunc = _gamma(trunc)
        merged = {}
        for e, c in terms:
            e, c = _gamma(e), _scalar(c)
            if e in merged:
                merged[e] = merged[e] + c
            else:
                merged[e] = c
        keep = []
        for e, c in merged.items():
            if c.is_zero():
                continue
            if not isinstance(trunc, Infinity) and not e < trunc:
                continue
            keep.append((e, c))
        keep.sort(key=cmp_to_key(lambda a, b: _cmp_gamma(a[0], b[0])))
        self.terms = tuple(keep)
        self.trunc = trunc

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero() -> "HahnSeries":
        return HahnSeries()

    @staticmethod
    def one() -> "HahnSeries":
        return HahnSeries([(RhoRational(()), AlgebraicScalar(1))])

    @staticmethod
    def from_scalar(c) -> "HahnSeries":
        return HahnSeries([(RhoRational(()), _scalar(c))])

    @staticmethod
    def monomial(coeff, exp) -> "HahnSeries":
        return HahnSeries([(_gamma(exp), _scalar(coeff))])

    # -- structure -----------------------------------------------------------

    def is_zero(self) -> bool:
        """Exactly zero; a truncated series with no terms is merely unknown."""
        return not self.terms and isinstance(self.trunc, Infinity)

    def is_exact(self) -> bool:
        return isinstance(self.trunc, Infinity)

    def is_term_free(self) -> bool:
        return not self.terms

    def valuation(self):
        """Least exponent; +infinity for exact zero.

        Raises when no term is visible below a finite truncation: the
        valuation is then genuinely unknown.
        """
        if self.terms:
            return self.terms[0][0]
        if self.is_exact():
            return INF
        raise ValuationUnknownError(
            f"valuation unknown below truncation {self.trunc}")

    def valuation_lower_bound(self):
        """v(x) when known, else the truncation as a certified lower bound."""
        if self.terms:
            return self.terms[0][0]
        return self.trunc

    def leading_coeff(self) -> AlgebraicScalar:
        if not self.terms:
            raise ValuationUnknownError("no leading term")
        return self.terms[0][1]

    def coeff_at(self, exp) -> AlgebraicScalar:
        exp = _gamma(exp)
        if not self.is_exact() and not exp < self.trunc:
            raise PrecisionError(f"coefficient at {exp} is beyond truncation")
        for e, c in self.terms:
            if e == exp:
                return c
        return AlgebraicScalar(0)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        other = _promote(other)
        if other is NotImplemented:
            return NotImplemented
        trunc = _trunc_min(self.trunc, other.trunc)
        return HahnSeries(self.terms + other.terms, trunc)

    __radd__ = __add__

    def __neg__(self):
        out = HahnSeries.__new__(HahnSeries)
        out.terms = tuple((e, -c) for e, c in self.terms)
        out.trunc = self.trunc
        return out

    def __sub__(self, other):
        other = _promote(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _promote(other) - self

    def __mul__(self, other):
        other = _promote(other)
        if other is NotImplemented:
            return NotImplemented
        trunc = _trunc_min(
            _trunc_add(self.trunc, other.valuation_lower_bound()),
            _trunc_add(other.trunc, self.valuation_lower_bound()))
        acc = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                acc.append((e1 + e2, c1 * c2))
        return HahnSeries(acc, trunc)

    __rmul__ = __mul__

    def scale(self, c) -> "HahnSeries":
        c = _scalar(c)
        if c.is_zero():
            return HahnSeries.zero()
        return HahnSeries([(e, co * c) for e, co in self.terms], self.trunc)

    def shift(self, gamma) -> "HahnSeries":
        """Multiplication by the monomial t^gamma."""
        gamma = _gamma(gamma)
        out = HahnSeries.__new__(HahnSeries)
        out.terms = tuple((e + gamma, c) for e, c in self.terms)
        out.trunc = self.trunc if isinstance(self.trunc, Infinity) \
            else self.trunc + gamma
        return out

    def __pow__(self, k: int):
        if k < 0:
            raise InputError("negative powers go through invert()")
        out = HahnSeries.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def truncate(self, trunc) -> "HahnSeries":
        """Forget everything at or above the given exponent."""
        return HahnSeries(self.terms, _trunc_min(self.trunc, _gamma(trunc)))

    def invert(self, target) -> "HahnSeries":
        """y with x*y = 1 up to the target: v(x*y - 1) > target - v(x).

        Geometric-series expansion of the unit part; requires the valuation
        of x to be known, and enough of x to support the contract.
        """
        if self.is_zero():
            raise ZeroDivisionError("inversion of the zero series")
        v = self.valuation()  # raises if unknown
        lead = self.terms[0][1]
        if len(self.terms) == 1 and self.is_exact():
            # monomial: exact inverse, no truncation loss
            return HahnSeries.monomial(lead.inv(), -v)
        target = _gamma(target)
        needed = target - v  # v(x*y - 1) must exceed this
        if not self.is_exact() and not target < self.trunc:
            raise PrecisionError(
                f"invert to target {target} needs truncation above it "
                f"(have {self.trunc})")
        # u = x / (lead * t^v) - 1 has positive valuation delta
        unit = self.shift(-v).scale(lead.inv())
        u = unit - HahnSeries.one()
        if u.is_zero():
            return HahnSeries.monomial(lead.inv(), -v)
        geo = HahnSeries.one()
        power = HahnSeries.one()
        delta = u.valuation_lower_bound()
        acc = delta
        while not acc > needed:
            power = power * (-u)
            geo = geo + power
            acc = acc + delta
        # the computed prefix agrees with the true inverse below acc - v
        return geo.scale(lead.inv()).shift(-v).truncate(acc - v)

    # -- the difference structure ---------------------------------------------

    def apply_sigma(self, oracle=IDENTITY_ORACLE, iterations: int = 1
                    ) -> "HahnSeries":
        """The Hahn automorphism: exponents scale by rho per iteration,
        coefficients go through sigma-bar.  Exponent order is preserved."""
        if iterations == 0:
            return self
        terms = []
        for e, c in self.terms:
            for _ in range(iterations):
                e = sigma_gamma(e)
            terms.append((e, sigma_bar(c, oracle, iterations)))
        trunc = self.trunc
        if not isinstance(trunc, Infinity):
            for _ in range(iterations):
                trunc = sigma_gamma(trunc)
        out = HahnSeries.__new__(HahnSeries)
        out.terms = tuple(terms)
        out.trunc = trunc
        return out

    def residue(self) -> AlgebraicScalar:
        """Image in the residue field: the coefficient at exponent 0."""
        zero = RhoRational(())
        if self.terms and self.terms[0][0] < zero:
            raise InputError("residue of an element with negative valuation")
        if not self.is_exact() and not zero < self.trunc:
            raise PrecisionError("truncation too small to read the residue")
        return self.coeff_at(zero)

    # -- comparisons and display ----------------------------------------------

    def __eq__(self, other):
        other = _promote(other)
        if other is NotImplemented:
            return NotImplemented
        if self.trunc != other.trunc or len(self.terms) != len(other.terms):
            return False
        return all(e1 == e2 and c1 == c2 for (e1, c1), (e2, c2)
                   in zip(self.terms, other.terms))

    __hash__ = None

    def __repr__(self):
        return f"HahnSeries({self})"

    def __str__(self):
        parts = []
        for e, c in self.terms:
            parts.append(_term_str(e, c))
        if not self.is_exact():
            parts.append(f"O({_t_power_str(self.trunc)})")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


def _t_power_str(e: RhoRational) -> str:
    if e.is_zero():
        return "1"
    if e == RhoRational((1,)):
        return "t"
    s = str(e)
    if any(ch in s for ch in "+-*/ ("):
        return f"t^({s})"
    return f"t^{s}"


def _term_str(e, c) -> str:
    cs = str(c.expr)
    if e.is_zero():
        return cs
    tp = _t_power_str(e)
    if cs == "1":
        return tp
    if cs == "-1":
        return f"-{tp}"
    if c.expr.is_Rational or c.expr.is_Atom:
        return f"{cs}*{tp}"
    return f"({cs})*{tp}"


def _promote(x):
    if isinstance(x, HahnSeries):
        return x
    if isinstance(x, (int, Fraction, AlgebraicScalar)):
        return HahnSeries.from_scalar(x)
    return NotImplemented


def _trunc_min(a, b):
    return min_gamma(a, b)


def _trunc_add(trunc, val):
    if isinstance(trunc, Infinity) or isinstance(val, Infinity):
        return INF
    return trunc + val


def splitting(gamma) -> HahnSeries:
    """The valuation splitting: gamma -> t^gamma, a group homomorphism into
    K* compatible with the automorphism."""
    return HahnSeries.monomial(1, gamma)
