"""Exact arithmetic and total ordering on Q(rho).

Elements are reduced fractions of integer-coefficient polynomials in a formal
symbol ``rho`` that stands for a fixed positive transcendental real number
(pi by default, e as the alternate).  The field hosts both the value group
of the Hahn field and every exponent evaluation u(rho), so all comparisons
must be exact: zero tests are symbolic, and nonzero sign decisions are made
by refining a certified rational enclosure of the constant until the
polynomial's interval value excludes zero.  Transcendence guarantees the
refinement terminates.

Polynomials are dense integer tuples, constant term first, with no trailing
zeros; the zero polynomial is the empty tuple.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from math import gcd, inf, nextafter

from .errors import InputError

Coeffs = tuple  # tuple[int, ...], constant term first


# ---------------------------------------------------------------------------
# integer polynomial helpers
# ---------------------------------------------------------------------------

def _trim(c) -> Coeffs:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _padd(a: Coeffs, b: Coeffs) -> Coeffs:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] += x
    return _trim(out)


def _pneg(a: Coeffs) -> Coeffs:
    return tuple(-x for x in a)


def _pmul(a: Coeffs, b: Coeffs) -> Coeffs:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _content(a: Coeffs) -> int:
    g = 0
    for x in a:
        g = gcd(g, abs(x))
    return g


def _primitive(a: Coeffs) -> Coeffs:
    if not a:
        return a
    g = _content(a)
    if a[-1] < 0:
        g = -g
    if g == 1:
        return a
    return tuple(x // g for x in a)


def _pdiv_exact(a: Coeffs, d: Coeffs) -> Coeffs:
    """Exact division a / d; raises if the division is not exact."""
    q = _pdiv_or_none(a, d)
    if q is None:
        raise ArithmeticError("inexact polynomial division")
    return q


def _pdiv_or_none(a: Coeffs, d: Coeffs):
    """Integer-exact division a / d, or None; aborts at the first obstacle.

    Sound for primitive d by Gauss's lemma: divisibility over the rationals
    already forces an integer quotient.
    """
    if not a:
        return ()
    dd = len(d) - 1
    if len(a) - 1 < dd:
        return None
    lead = d[-1]
    r = list(a)
    q = [0] * (len(a) - dd)
    for k in range(len(a) - 1 - dd, -1, -1):
        c, rem = divmod(r[dd + k], lead)
        if rem:
            return None
        q[k] = c
        if c:
            for i, y in enumerate(d):
                r[i + k] -= c * y
    if any(r[:dd]):
        return None
    return _trim(q)


_DEN_FACTOR_CACHE = {}


def _irreducible_factors(den: Coeffs):
    """Irreducible integer factors of a denominator polynomial, cached.

    Denominators repeat heavily across a computation, so one factorization
    per distinct polynomial turns gcd reduction into division probes.
    """
    got = _DEN_FACTOR_CACHE.get(den)
    if got is not None:
        return got
    prim = _primitive(den)
    got = _DEN_FACTOR_CACHE.get(prim)
    if got is not None:
        _DEN_FACTOR_CACHE[den] = got
        return got
    import sympy as _sp
    x = _sp.Symbol("x")
    expr = _sp.Add(*[int(c) * x ** i for i, c in enumerate(prim)])
    _content_part, factors = _sp.factor_list(_sp.Poly(expr, x, domain="ZZ"))
    out = []
    for poly, _mult in factors:
        coeffs = [int(c) for c in reversed(poly.all_coeffs())]
        if len(coeffs) > 1:
            out.append(_primitive(tuple(coeffs)))
    out = tuple(out)
    _DEN_FACTOR_CACHE[prim] = out
    _DEN_FACTOR_CACHE[den] = out
    return out


def _peval_fraction(a: Coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _peval_interval(a: Coeffs, lo: Fraction, hi: Fraction):
    """Interval Horner evaluation of an integer polynomial on [lo, hi]."""
    alo, ahi = Fraction(0), Fraction(0)
    for c in reversed(a):
        cands = (alo * lo, alo * hi, ahi * lo, ahi * hi)
        alo, ahi = min(cands) + c, max(cands) + c
    return alo, ahi


def _fdown(x: float) -> float:
    return nextafter(x, -inf)


def _fup(x: float) -> float:
    return nextafter(x, inf)


def _fhorner(a: Coeffs, lo: float, hi: float):
    """Certified float-interval Horner: every operation is padded outward by
    one ulp, so the returned bounds safely contain the true value range."""
    alo, ahi = 0.0, 0.0
    try:
        for c in reversed(a):
            cands = (alo * lo, alo * hi, ahi * lo, ahi * hi)
            alo = _fdown(_fdown(min(cands)) + c)
            ahi = _fup(_fup(max(cands)) + c)
        return alo, ahi
    except OverflowError:
        return -inf, inf


# ---------------------------------------------------------------------------
# certified enclosures of the transcendental constant
# ---------------------------------------------------------------------------

def _arctan_inv_bracket(x: int, n_terms: int):
    """Bracket of arctan(1/x) from the alternating Leibniz series."""
    s = Fraction(0)
    prev = s
    xsq = x * x
    power = x  # x^(2k+1)
    for k in range(n_terms):
        term = Fraction(1, (2 * k + 1) * power)
        prev = s
        s += term if k % 2 == 0 else -term
        power *= xsq
    return (s, prev) if s < prev else (prev, s)


def _pi_bracket(n_terms: int):
    # Machin: pi = 16*arctan(1/5) - 4*arctan(1/239)
    lo1, hi1 = _arctan_inv_bracket(5, n_terms)
    lo2, hi2 = _arctan_inv_bracket(239, max(2, n_terms // 2))
    return 16 * lo1 - 4 * hi2, 16 * hi1 - 4 * lo2


def _e_bracket(n_terms: int):
    s = Fraction(0)
    fact = 1
    for k in range(n_terms + 1):
        if k > 0:
            fact *= k
        s += Fraction(1, fact)
    return s, s + Fraction(2, fact * (n_terms + 1))


class RhoContext:
    """Nested, strictly shrinking rational enclosures of pi or e.

    The enclosure state is shared and guarded by a lock so that concurrent
    sign queries are safe; results depend only on the constant, never on the
    interleaving, because every query refines until its own test resolves.
    """

    def __init__(self, constant: str = "pi"):
        if constant not in ("pi", "e"):
            raise InputError(f"unsupported constant {constant!r}")
        self.constant = constant
        self._lock = threading.RLock()
        self._level = 0
        self._bracket = self._compute(0)
        lo, hi = self._bracket
        self._float_bracket = (_fdown(lo.numerator / lo.denominator),
                               _fup(hi.numerator / hi.denominator))

    def float_bracket(self):
        """A frozen coarse float enclosure of the constant (outward-rounded),
        used by the comparison fast path."""
        return self._float_bracket

    def _compute(self, level: int):
        n = 8 + 6 * level
        lo, hi = _pi_bracket(n) if self.constant == "pi" else _e_bracket(n)
        return lo, hi

    def refine(self) -> None:
        """One refinement step; the new interval is strictly inside the old."""
        with self._lock:
            lo, hi = self._bracket
            level = self._level
            while True:
                level += 1
                nlo, nhi = self._compute(level)
                if lo < nlo and nhi < hi:
                    self._level, self._bracket = level, (nlo, nhi)
                    return

    def enclosure(self, max_width: Fraction | None = None):
        """Current enclosure, refined until narrower than ``max_width``."""
        with self._lock:
            if max_width is not None:
                while self._bracket[1] - self._bracket[0] >= max_width:
                    self.refine()
            return self._bracket

    def value(self, digits: int = 30) -> Fraction:
        """Rational approximation good to roughly ``digits`` decimals."""
        lo, hi = self.enclosure(Fraction(1, 10 ** digits))
        return (lo + hi) / 2


_CONTEXT = RhoContext("pi")
_CONTEXT_LOCK = threading.Lock()


def set_constant(name: str) -> None:
    """Select the real constant behind rho ('pi' or 'e')."""
    global _CONTEXT
    with _CONTEXT_LOCK:
        if _CONTEXT.constant != name:
            _CONTEXT = RhoContext(name)


def get_context() -> RhoContext:
    return _CONTEXT


# ---------------------------------------------------------------------------
# the field Q(rho)
# ---------------------------------------------------------------------------

def _quick_sign(a: Coeffs):
    """Sign of a(rho0) decidable without refinement, else None (rho0 > 0)."""
    if not a:
        return 0
    if all(x >= 0 for x in a):
        return 1
    if all(x <= 0 for x in a):
        return -1
    return None


class RhoRational:
    """An element of Q(rho), canonical and immutable.

    Canonical form: num and den are integer polynomials with no common
    polynomial factor over the rationals, the pair has joint content 1,
    and den has positive leading coefficient.  Equality is syntactic.

    Each value lazily caches one certified enclosure so that order
    comparisons usually reduce to two interval lookups; only overlapping
    enclosures fall back to an exact sign computation.
    """

    __slots__ = ("num", "den", "_encl")

    def __init__(self, num, den=(1,), _canonical=False):
        self._encl = None
        if isinstance(num, RhoRational):
            num, den = num.num, num.den
        if _canonical:
            self.num, self.den = num, den
            return
        num = _trim(num)
        den = _trim(den)
        if not den:
            raise ZeroDivisionError("zero denominator in Q(rho)")
        if not num:
            self.num, self.den = (), (1,)
            return
        if den != (1,):
            if len(den) > 1 and len(num) > 1:
                for p in _irreducible_factors(den):
                    while len(den) > 1:
                        qn = _pdiv_or_none(num, p)
                        if qn is None:
                            break
                        qd = _pdiv_or_none(den, p)
                        if qd is None:
                            break
                        num, den = qn, qd
            c = gcd(_content(num), _content(den))
            if den[-1] < 0:
                c = -c
            if c != 1:
                num = tuple(x // c for x in num)
                den = tuple(x // c for x in den)
        self.num, self.den = num, den

    # -- constructors

    @staticmethod
    def from_int(k: int) -> "RhoRational":
        return RhoRational((k,) if k else ())

    @staticmethod
    def from_fraction(q) -> "RhoRational":
        q = Fraction(q)
        return RhoRational((q.numerator,) if q.numerator else (), (q.denominator,))

    @staticmethod
    def rho_power(k: int = 1) -> "RhoRational":
        """rho^k for k >= 0."""
        return RhoRational((0,) * k + (1,))

    # -- predicates

    def is_zero(self) -> bool:
        return not self.num

    def is_rational(self) -> bool:
        return len(self.num) <= 1 and len(self.den) == 1

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise InputError(f"{self} is not rational")
        return Fraction(self.num[0] if self.num else 0, self.den[0])

    # -- arithmetic

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RhoRational(_padd(self.num, other.num), self.den)
        return RhoRational(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return RhoRational(_pneg(self.num), self.den, _canonical=True)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RhoRational(_pmul(self.num, other.num),
                           _pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero in Q(rho)")
        return RhoRational(_pmul(self.num, other.den),
                           _pmul(self.den, other.num))

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return RhoRational((1,)) / self ** (-k)
        out = RhoRational((1,))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- ordering

    def sign(self) -> int:
        """Exact sign of the real value at the chosen constant."""
        if not self.num:
            return 0
        sn = _quick_sign(self.num)
        sd = _quick_sign(self.den)
        if sn is not None and sd is not None:
            return sn * sd
        lo, hi = self._float_enclosure()
        if lo > 0.0:
            return 1
        if hi < 0.0:
            return -1
        ctx = get_context()
        lo, hi = ctx.enclosure()
        while True:
            known = True
            prod = 1
            for p, s in ((self.num, sn), (self.den, sd)):
                if s is not None:
                    prod *= s
                    continue
                plo, phi = _peval_interval(p, lo, hi)
                if plo > 0:
                    prod *= 1
                elif phi < 0:
                    prod *= -1
                else:
                    known = False
                    break
            if known:
                return prod
            ctx.refine()
            lo, hi = ctx.enclosure()

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def _float_enclosure(self):
        """Cached certified float bounds on the real value; (-inf, inf) when
        the denominator interval straddles zero at coarse precision.  The
        cache is keyed on the active context, so switching constants is safe.
        """
        ctx = get_context()
        if self._encl is None or self._encl[0] is not ctx:
            flo, fhi = ctx.float_bracket()
            nlo, nhi = _fhorner(self.num, flo, fhi)
            dlo, dhi = _fhorner(self.den, flo, fhi)
            if dlo > 0.0 or dhi < 0.0:
                cands = (nlo / dlo, nlo / dhi, nhi / dlo, nhi / dhi)
                self._encl = (ctx, _fdown(min(cands)), _fup(max(cands)))
            else:
                self._encl = (ctx, -inf, inf)
        return self._encl[1], self._encl[2]

    def _cmp_sign(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return None
        if self.num == other.num and self.den == other.den:
            return 0
        slo, shi = self._float_enclosure()
        olo, ohi = other._float_enclosure()
        if slo > ohi:
            return 1
        if shi < olo:
            return -1
        return (self - other).sign()

    def __lt__(self, other):
        s = self._cmp_sign(other)
        return NotImplemented if s is None else s < 0

    def __le__(self, other):
        s = self._cmp_sign(other)
        return NotImplemented if s is None else s <= 0

    def __gt__(self, other):
        s = self._cmp_sign(other)
        return NotImplemented if s is None else s > 0

    def __ge__(self, other):
        s = self._cmp_sign(other)
        return NotImplemented if s is None else s >= 0

    # -- numeric export

    def enclosure(self, max_width: Fraction = Fraction(1, 10 ** 12)):
        """A rational interval containing the real value, width < max_width."""
        if not self.num:
            return Fraction(0), Fraction(0)
        ctx = get_context()
        while True:
            lo, hi = ctx.enclosure()
            nlo, nhi = _peval_interval(self.num, lo, hi)
            dlo, dhi = _peval_interval(self.den, lo, hi)
            if dlo > 0 or dhi < 0:
                cands = (nlo / dlo, nlo / dhi, nhi / dlo, nhi / dhi)
                vlo, vhi = min(cands), max(cands)
                if vhi - vlo < max_width:
                    return vlo, vhi
            ctx.refine()

    def __float__(self):
        lo, hi = self.enclosure()
        return float((lo + hi) / 2)

    def floor(self) -> int:
        """Exact floor of the real value."""
        if self.is_rational():
            q = self.as_fraction()
            return q.numerator // q.denominator
        width = Fraction(1, 2)
        while True:
            lo, hi = self.enclosure(width)
            flo = lo.numerator // lo.denominator
            fhi = hi.numerator // hi.denominator
            if flo == fhi:
                return flo
            width /= 16

    # -- display

    def sort_key(self):
        """Deterministic syntactic key, usable where only stability matters."""
        return (self.num, self.den)

    def __repr__(self):
        return f"RhoRational({self})"

    def __str__(self):
        num = _poly_str(self.num)
        if self.den == (1,):
            return num
        return f"({num})/({_poly_str(self.den)})"


def _poly_str(a: Coeffs) -> str:
    if not a:
        return "0"
    parts = []
    for i, c in enumerate(a):
        if c == 0:
            continue
        if i == 0:
            parts.append(str(c))
        else:
            var = "r" if i == 1 else f"r^{i}"
            if c == 1:
                parts.append(var)
            elif c == -1:
                parts.append(f"-{var}")
            else:
                parts.append(f"{c}*{var}")
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


def _coerce(x):
    if isinstance(x, RhoRational):
        return x
    if isinstance(x, int):
        return RhoRational.from_int(x)
    if isinstance(x, Fraction):
        return RhoRational.from_fraction(x)
    return NotImplemented


ZERO = RhoRational(())
ONE = RhoRational((1,))
RHO = RhoRational.rho_power(1)


def sigma_gamma(gamma: RhoRational) -> RhoRational:
    """The value-group automorphism: multiplication by rho."""
    return RHO * gamma


class Infinity:
    """The +infinity adjoined to the value group (valuation of zero)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return isinstance(other, Infinity)

    def __hash__(self):
        return hash("rho-infinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return isinstance(other, Infinity)

    def __gt__(self, other):
        return not isinstance(other, Infinity)

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __neg__(self):
        raise ArithmeticError("-infinity is not in the extended value group")

    def __repr__(self):
        return "+inf"


INF = Infinity()


def min_gamma(*values):
    """Minimum in the extended value group Gamma plus infinity."""
    out = INF
    for v in values:
        if isinstance(out, Infinity):
            out = v
        elif not isinstance(v, Infinity) and v < out:
            out = v
    return out
