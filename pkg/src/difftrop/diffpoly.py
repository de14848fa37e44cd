"""Laurent difference polynomials and their tropical shadow.

A monomial exponent records, per variable, a finite integer combination of
automorphism iterates (a sigma-power).  Tropically a sigma-power evaluates
to the real number obtained by substituting rho for sigma, so exponent keys
land in Q(rho)^n and the min-plus machinery runs in exact arithmetic.

The module owns construction, evaluation over the Hahn field and over the
residue field, Laurent-to-polynomial normalization, scaled Taylor
coefficients of the associated commutative polynomial, tropicalization,
initial forms, and the variable-mixing substitution used to force distinct
sigma-powers of the last variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from math import comb

from .errors import InputError, InternalConsistencyError, PrecisionError
from .hahn import HahnSeries, splitting
from .residue import IDENTITY_ORACLE, AlgebraicScalar, sigma_bar
from .rho import INF, Infinity, RhoRational, min_gamma

FIELD_K = "K"  # Hahn-series coefficients
FIELD_k = "k"  # residue-field coefficients


@dataclass(frozen=True)
class SigmaExponent:
    """A sigma-power: the formal exponent sum(a_j * sigma^j), a_j integers.

    Stored sparsely as sorted (iterate, coefficient) pairs with nonzero
    coefficients and nonnegative iterates.
    """

    powers: tuple = ()

    @staticmethod
    def make(items) -> "SigmaExponent":
        if isinstance(items, dict):
            items = items.items()
        acc = {}
        for j, a in items:
            if j < 0:
                raise InputError("sigma iterates must be nonnegative")
            acc[j] = acc.get(j, 0) + a
        return SigmaExponent(tuple(sorted((j, a) for j, a in acc.items() if a)))

    @staticmethod
    def constant() -> "SigmaExponent":
        return SigmaExponent(())

    @staticmethod
    def single(j: int = 0, a: int = 1) -> "SigmaExponent":
        return SigmaExponent.make([(j, a)])

    def is_trivial(self) -> bool:
        return not self.powers

    def is_polynomial(self) -> bool:
        return all(a >= 0 for _j, a in self.powers)

    def coeff(self, j: int) -> int:
        for jj, a in self.powers:
            if jj == j:
                return a
        return 0

    def total(self) -> int:
        """sum of the a_j: the ordinary exponent after collapsing sigma to 1."""
        return sum(a for _j, a in self.powers)

    def abs_total(self) -> int:
        return sum(abs(a) for _j, a in self.powers)

    def max_level(self) -> int:
        return self.powers[-1][0] if self.powers else 0

    def rho_value(self) -> RhoRational:
        """The tropical evaluation sum(a_j * rho^j) in Q(rho)."""
        out = RhoRational(())
        for j, a in self.powers:
            out = out + RhoRational((0,) * j + (a,))
        return out

    def negative_part(self) -> "SigmaExponent":
        """Levelwise max(0, -a_j): the minimal shift clearing denominators."""
        return SigmaExponent(tuple((j, -a) for j, a in self.powers if a < 0))

    def __add__(self, other: "SigmaExponent") -> "SigmaExponent":
        return SigmaExponent.make(list(self.powers) + list(other.powers))

    def __neg__(self) -> "SigmaExponent":
        return SigmaExponent(tuple((j, -a) for j, a in self.powers))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, m: int) -> "SigmaExponent":
        if m == 0:
            return SigmaExponent(())
        return SigmaExponent(tuple((j, m * a) for j, a in self.powers))

    def sort_key(self):
        return self.powers

    def __str__(self):
        if not self.powers:
            return "1"
        parts = []
        for j, a in self.powers:
            base = "x" if j == 0 else f"s^{j}(x)" if j > 1 else "s(x)"
            parts.append(base if a == 1 else f"{base}^{a}")
        return "*".join(parts)


@dataclass(frozen=True)
class MultiIndex:
    """Dense nonnegative multi-index (j_0, ..., j_m) over sigma-levels."""

    entries: tuple

    @staticmethod
    def make(entries) -> "MultiIndex":
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise InputError("multi-index entries must be nonnegative")
        return MultiIndex(entries)

    def length(self) -> int:
        return sum(self.entries)

    def rho_length(self) -> RhoRational:
        """sum(rho^i * j_i); strictly positive once the length is."""
        out = RhoRational(())
        for i, j in enumerate(self.entries):
            if j:
                out = out + RhoRational((0,) * i + (j,))
        return out

    def to_sigma(self) -> SigmaExponent:
        return SigmaExponent.make(list(enumerate(self.entries)))

    def __le__(self, other: "MultiIndex") -> bool:
        a, b = self.entries, other.entries
        if len(a) < len(b):
            a = a + (0,) * (len(b) - len(a))
        elif len(b) < len(a):
            b = b + (0,) * (len(a) - len(b))
        return all(x <= y for x, y in zip(a, b))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        a, b = self.entries, other.entries
        b = b + (0,) * (len(a) - len(b))
        return MultiIndex.make(tuple(x - y for x, y in zip(a, b)))

    def binom(self, other: "MultiIndex") -> int:
        """Product of the entrywise binomial coefficients C(self, other)."""
        a, b = self.entries, other.entries
        b = b + (0,) * (len(a) - len(b))
        out = 1
        for x, y in zip(a, b):
            out *= comb(x, y)
        return out

    def __str__(self):
        return str(self.entries)


def _key_sort_tuple(key):
    total = sum(e.total() for e in key)
    return (total, tuple(e.sort_key() for e in key))


def _cmp_keys(k1, k2):
    a, b = _key_sort_tuple(k1), _key_sort_tuple(k2)
    return -1 if a < b else (1 if a > b else 0)


class DiffPolynomial:
    """A Laurent difference polynomial: finite map from sigma-power exponent
    vectors to nonzero coefficients, over K (Hahn series) or k (scalars)."""

    __slots__ = ("n", "field", "_mon")

    def __init__(self, n: int, field: str, monomials):
        if field not in (FIELD_K, FIELD_k):
            raise InputError(f"unknown coefficient field {field!r}")
        self.n = n
        self.field = field
        mon = {}
        items = monomials.items() if isinstance(monomials, dict) else monomials
        for key, coeff in items:
            key = tuple(key)
            if len(key) != n:
                raise InputError("exponent arity does not match variable count")
            coeff = self._coerce_coeff(coeff)
            if key in mon:
                mon[key] = mon[key] + coeff
            else:
                mon[key] = coeff
        self._mon = {k: c for k, c in mon.items() if not self._coeff_is_zero(c)}

    def _coerce_coeff(self, c):
        if self.field == FIELD_K:
            if isinstance(c, HahnSeries):
                return c
            if isinstance(c, (int, Fraction, AlgebraicScalar)):
                return HahnSeries.from_scalar(c)
            raise InputError(f"not a Hahn-series coefficient: {c!r}")
        if isinstance(c, AlgebraicScalar):
            return c
        if isinstance(c, (int, Fraction)):
            return AlgebraicScalar(c)
        raise InputError(f"not a residue-field coefficient: {c!r}")

    @staticmethod
    def _coeff_is_zero(c) -> bool:
        return c.is_zero()

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def zero(n: int, field: str = FIELD_K) -> "DiffPolynomial":
        return DiffPolynomial(n, field, {})

    @staticmethod
    def constant(n: int, c, field: str = FIELD_K) -> "DiffPolynomial":
        key = tuple(SigmaExponent.constant() for _ in range(n))
        return DiffPolynomial(n, field, {key: c})

    @staticmethod
    def variable(n: int, i: int, j: int = 0, a: int = 1,
                 field: str = FIELD_K) -> "DiffPolynomial":
        """The monomial sigma^j(x_i)^a."""
        key = tuple(SigmaExponent.single(j, a) if v == i
                    else SigmaExponent.constant() for v in range(n))
        return DiffPolynomial(n, field, {key: 1})

    # -- structure ------------------------------------------------------------

    def terms(self):
        """Monomials in the canonical display order (graded, then lex)."""
        for key in sorted(self._mon, key=_key_sort_tuple):
            yield key, self._mon[key]

    def exponents(self):
        return sorted(self._mon, key=_key_sort_tuple)

    def coeff(self, key):
        return self._mon.get(tuple(key))

    def __len__(self):
        return len(self._mon)

    def is_zero(self) -> bool:
        return not self._mon

    def is_monomial(self) -> bool:
        return len(self._mon) == 1

    def is_polynomial_form(self) -> bool:
        return all(e.is_polynomial() for key in self._mon for e in key)

    def max_level(self) -> int:
        out = 0
        for key in self._mon:
            for e in key:
                if e.powers:
                    out = max(out, e.max_level())
        return out

    def __eq__(self, other):
        if not isinstance(other, DiffPolynomial):
            return NotImplemented
        if self.n != other.n or self.field != other.field or \
                set(self._mon) != set(other._mon):
            return False
        return all(self._mon[k] == other._mon[k] for k in self._mon)

    __hash__ = None

    # -- ring operations ------------------------------------------------------

    def _check_compat(self, other):
        if self.n != other.n or self.field != other.field:
            raise InputError("operands live in different polynomial rings")

    def __add__(self, other):
        self._check_compat(other)
        items = list(self._mon.items()) + list(other._mon.items())
        return DiffPolynomial(self.n, self.field, items)

    def __neg__(self):
        return DiffPolynomial(self.n, self.field,
                              {k: -c for k, c in self._mon.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        """Convolution on exponent keys; zero coefficients are dropped."""
        self._check_compat(other)
        items = []
        for k1, c1 in self._mon.items():
            for k2, c2 in other._mon.items():
                key = tuple(e1 + e2 for e1, e2 in zip(k1, k2))
                items.append((key, c1 * c2))
        return DiffPolynomial(self.n, self.field, items)

    def __pow__(self, k: int):
        if k < 0:
            raise InputError("negative powers need an invertible monomial")
        out = DiffPolynomial.constant(self.n, 1, self.field)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale_monomial(self, key, coeff=1) -> "DiffPolynomial":
        """Multiply by coeff * x^key."""
        key = tuple(key)
        return DiffPolynomial(
            self.n, self.field,
            [(tuple(e1 + e2 for e1, e2 in zip(k, key)),
              c * self._coerce_coeff(coeff)) for k, c in self._mon.items()])

    # -- evaluation over K ----------------------------------------------------

    def evaluate(self, point, target=None) -> HahnSeries:
        """Substitute Hahn series for the variables.

        Negative sigma-powers require coordinates of known valuation and go
        through truncated inversion; the inversion targets are derived from
        ``target`` so the result is correct below it.  Exact inputs with
        nonnegative powers (or exactly invertible monomial coordinates) give
        exact output regardless of target.
        """
        if self.field != FIELD_K:
            raise InputError("evaluate() needs coefficients in K")
        point = [p if isinstance(p, HahnSeries) else HahnSeries.from_scalar(p)
                 for p in point]
        if len(point) != self.n:
            raise InputError("point arity mismatch")
        sig_cache = {}

        def sig(i, j):
            if (i, j) not in sig_cache:
                if j == 0:
                    sig_cache[(i, j)] = point[i]
                else:
                    sig_cache[(i, j)] = sig(i, j - 1).apply_sigma()
            return sig_cache[(i, j)]

        total = HahnSeries.zero()
        for key, coeff in self._mon.items():
            factors = [(coeff, None)]
            for i, e in enumerate(key):
                for j, a in e.powers:
                    factors.append((sig(i, j), a))
            total = total + _product_with_target(factors, target)
        return total

    # -- evaluation over k ----------------------------------------------------

    def evaluate_scalars(self, point, oracle=IDENTITY_ORACLE) -> AlgebraicScalar:
        """Substitute residue-field scalars; negative powers need nonzero
        coordinates."""
        if self.field != FIELD_k:
            raise InputError("evaluate_scalars() needs coefficients in k")
        point = [p if isinstance(p, AlgebraicScalar) else AlgebraicScalar(p)
                 for p in point]
        if len(point) != self.n:
            raise InputError("point arity mismatch")
        total = AlgebraicScalar(0)
        for key, coeff in self._mon.items():
            val = coeff
            for i, e in enumerate(key):
                for j, a in e.powers:
                    val = val * sigma_bar(point[i], oracle, j) ** a
            total = total + val
        return total

    def substitute_scalars(self, values: dict, oracle=IDENTITY_ORACLE
                           ) -> "DiffPolynomial":
        """Fix some variables at scalars; the rest survive, reindexed in
        order.  Only for coefficients in k."""
        if self.field != FIELD_k:
            raise InputError("substitute_scalars() needs coefficients in k")
        remaining = [i for i in range(self.n) if i not in values]
        items = []
        for key, coeff in self._mon.items():
            c = coeff
            for i, v in values.items():
                for j, a in key[i].powers:
                    c = c * sigma_bar(v, oracle, j) ** a
            items.append((tuple(key[i] for i in remaining), c))
        return DiffPolynomial(len(remaining), FIELD_k, items)

    def group_by_variable(self, i: int):
        """Regard the polynomial as univariate in x_i: a list of
        (sigma-power of x_i, coefficient polynomial with x_i cleared),
        in canonical order."""
        groups = {}
        for key, coeff in self._mon.items():
            e = key[i]
            rest = key[:i] + (SigmaExponent.constant(),) + key[i + 1:]
            groups.setdefault(e, []).append((rest, coeff))
        out = []
        for e in sorted(groups, key=lambda s: s.sort_key()):
            out.append((e, DiffPolynomial(self.n, self.field, groups[e])))
        return out

    # -- tropicalization ------------------------------------------------------

    def eval_exponent(self, key):
        """The vector (u_1(rho), ..., u_n(rho)) of a monomial key."""
        return tuple(e.rho_value() for e in key)

    def coeff_valuation(self, key):
        if self.field == FIELD_K:
            return self._mon[key].valuation()
        return RhoRational(())

    def tropical_terms(self):
        """The tropicalization as a symbolic object: ordered list of
        (coefficient valuation, exponent evaluation vector) pairs."""
        if self.is_zero():
            raise InputError("empty polynomial has no tropicalization")
        return [(self.coeff_valuation(key), self.eval_exponent(key))
                for key in self.exponents()]

    def tropicalize(self, w):
        """min over monomials of v(c) + u(rho).w, with the attaining set.

        Returns (value, attaining) where attaining is the tuple of exponent
        keys achieving the minimum, in canonical order.
        """
        if self.is_zero():
            raise InputError("empty polynomial has no tropicalization")
        w = tuple(_to_gamma(x) for x in w)
        if len(w) != self.n:
            raise InputError("point arity mismatch")
        best = None
        attain = []
        for key in self.exponents():
            val = self.coeff_valuation(key)
            for e, wi in zip(key, w):
                val = val + e.rho_value() * wi
            if best is None or val < best:
                best = val
                attain = [key]
            elif val == best:
                attain.append(key)
        return best, tuple(attain)

    def initial_form(self, w, oracle=IDENTITY_ORACLE) -> "DiffPolynomial":
        """The residue-field difference polynomial collecting the monomials
        that attain the tropical minimum at w; coefficients are residues of
        the unit-normalized coefficients."""
        if self.field != FIELD_K:
            raise InputError("initial_form() needs coefficients in K")
        _value, attain = self.tropicalize(w)
        items = []
        for key in attain:
            c = self._mon[key]
            items.append((key, c.leading_coeff()))
        return DiffPolynomial(self.n, FIELD_k, items)

    # -- Laurent normalization --------------------------------------------------

    def laurent_normalize(self):
        """Clear negative sigma-powers: returns (g, shift) with
        g = self * x^shift, all exponents of g nonnegative, and the shift
        levelwise minimal."""
        shift = []
        for i in range(self.n):
            acc = {}
            for key in self._mon:
                for j, a in key[i].powers:
                    if a < 0:
                        acc[j] = max(acc.get(j, 0), -a)
            shift.append(SigmaExponent.make(list(acc.items())))
        shift = tuple(shift)
        g = self.scale_monomial(shift)
        return g, shift

    # -- Taylor data (one variable) ----------------------------------------------

    def to_multiindex_terms(self):
        """One-variable polynomial form as {MultiIndex: coefficient}."""
        if self.n != 1:
            raise InputError("multi-index form is for one variable")
        if not self.is_polynomial_form():
            raise InputError("Laurent exponents: normalize first")
        m = self.max_level()
        out = {}
        for (e,), coeff in self._mon.items():
            entries = [0] * (m + 1)
            for j, a in e.powers:
                entries[j] = a
            out[MultiIndex.make(entries)] = coeff
        return out

    def taylor_coeff(self, J: MultiIndex, b: HahnSeries,
                     _sig=None, _pows=None, work_trunc=None) -> HahnSeries:
        """The J-th scaled partial derivative of the associated commutative
        polynomial, evaluated at (b, sigma(b), ..., sigma^m(b)).

        At b = 0 this is the coefficient c_J itself.  A truncated b yields a
        correspondingly truncated result; callers needing exact valuations
        must pass finitely supported b.  ``_pows`` shares power tables across
        the multi-indices of one expansion point; ``work_trunc`` caps the
        carried precision (the result is then exact only below it).
        """
        terms = self.to_multiindex_terms()
        m = self.max_level()
        if _sig is None:
            _sig = sigma_tower(b, m)
        if _pows is None:
            _pows = {}
        total = HahnSeries.zero()
        for Jp, coeff in terms.items():
            if not J <= Jp:
                continue
            val = coeff.scale(Jp.binom(J))
            diff = Jp - J
            for lvl, a in enumerate(diff.entries):
                if a:
                    val = val * _power_cached(_sig, _pows, lvl, a, work_trunc)
                    if work_trunc is not None:
                        val = val.truncate(work_trunc)
            total = total + val
        return total

    # -- the variable-mixing substitution ----------------------------------------

    def apply_phi_l(self, l: int) -> "DiffPolynomial":
        """Substitute x_i -> x_i * x_n^(l^i) for i < n, keeping x_n.

        Evaluation is preserved: the image at (y_1, ..., y_n) equals the
        original at (y_1*y_n^l, ..., y_{n-1}*y_n^(l^(n-1)), y_n).
        """
        if self.n < 2:
            return self
        nn = self.n
        items = []
        for key, coeff in self._mon.items():
            extra = SigmaExponent.constant()
            for i in range(nn - 1):
                extra = extra + key[i].scale(l ** (i + 1))
            new_key = key[:nn - 1] + (key[nn - 1] + extra,)
            items.append((new_key, coeff))
        out = DiffPolynomial(nn, self.field, items)
        if len(out) != len(self):
            raise InternalConsistencyError(
                "variable-mixing substitution collapsed monomials")
        return out

    def choose_l(self) -> int:
        """Smallest l for which the substituted polynomial has pairwise
        distinct sigma-powers of x_n; an integer root bound caps the search."""
        if self.n < 2:
            return 1
        nn = self.n
        keys = self.exponents()
        pair_polys = []
        bound = 1
        for a in range(len(keys)):
            for b in range(a + 1, len(keys)):
                # per sigma-level polynomial in l measuring the x_n power gap
                levels = {}
                k1, k2 = keys[a], keys[b]
                for j, c in (k1[nn - 1] - k2[nn - 1]).powers:
                    levels.setdefault(j, {})[0] = c
                for i in range(nn - 1):
                    for j, c in (k1[i] - k2[i]).powers:
                        levels.setdefault(j, {})[i + 1] = c
                polys = [lv for lv in levels.values() if lv]
                pair_polys.append(polys)
                best = None
                for lv in polys:
                    deg = max(lv)
                    lead = lv[deg]
                    cauchy = 1 + max(abs(c) for c in lv.values()) // abs(lead) + 1
                    if best is None or cauchy < best:
                        best = cauchy
                bound = max(bound, best)

        def distinct_at(l):
            for polys in pair_polys:
                if all(sum(c * l ** i for i, c in lv.items()) == 0
                       for lv in polys):
                    return False
            return True

        for l in range(1, bound + 2):
            if distinct_at(l):
                return l
        raise InternalConsistencyError("no l under the root bound separates")

    # -- substitution into K-polynomials -----------------------------------------

    def substitute_hahn(self, values: dict, target=None) -> "DiffPolynomial":
        """Fix some variables at Hahn series (coefficients in K); negative
        powers require exactly invertible or valuation-known coordinates."""
        if self.field != FIELD_K:
            raise InputError("substitute_hahn() needs coefficients in K")
        remaining = [i for i in range(self.n) if i not in values]
        items = []
        for key, coeff in self._mon.items():
            factors = [(coeff, None)]
            for i, v in values.items():
                sig = sigma_tower(v, key[i].max_level())
                for j, a in key[i].powers:
                    factors.append((sig[j], a))
            c = _product_with_target(factors, target)
            items.append((tuple(key[i] for i in remaining), c))
        return DiffPolynomial(len(remaining), FIELD_K, items)

    # -- display -----------------------------------------------------------------

    def __repr__(self):
        return f"DiffPolynomial({self})"

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = [self._term_str(key, coeff) for key, coeff in self.terms()]
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def _term_str(self, key, coeff) -> str:
        vars_part = []
        for i, e in enumerate(key):
            for j, a in e.powers:
                base = f"x{i + 1}" if j == 0 else f"s^{j}(x{i + 1})" \
                    if j > 1 else f"s(x{i + 1})"
                vars_part.append(base if a == 1 else f"{base}^{a}")
        cs = str(coeff)
        if not vars_part:
            return cs if _is_simple_coeff(cs) else f"({cs})"
        v = "*".join(vars_part)
        if cs == "1":
            return v
        if cs == "-1":
            return f"-{v}"
        if _is_simple_coeff(cs):
            return f"{cs}*{v}"
        return f"({cs})*{v}"


def _is_simple_coeff(cs: str) -> bool:
    return not any(ch in cs for ch in "+- ") or \
        (cs.startswith("-") and not any(ch in cs[1:] for ch in "+- "))


def sigma_tower(b, m: int, oracle=IDENTITY_ORACLE):
    """[b, sigma(b), ..., sigma^m(b)] for a Hahn series b."""
    out = [b]
    for _ in range(m):
        out.append(out[-1].apply_sigma(oracle))
    return out


def _power_cached(sig, pows, lvl: int, a: int, work_trunc=None):
    """sig[lvl]**a with incremental construction shared via ``pows``."""
    key = (lvl, a)
    if key in pows:
        return pows[key]
    if a == 1:
        val = sig[lvl]
    else:
        val = _power_cached(sig, pows, lvl, a - 1, work_trunc) * sig[lvl]
        if work_trunc is not None:
            val = val.truncate(work_trunc)
    pows[key] = val
    return val


def _to_gamma(x):
    if isinstance(x, RhoRational):
        return x
    if isinstance(x, (int, Fraction)):
        return RhoRational.from_fraction(Fraction(x))
    raise InputError(f"not a value-group element: {x!r}")


def _product_with_target(factors, target):
    """Product of a coefficient and integer powers of Hahn series, precise
    enough below ``target``.

    ``factors`` is a list of (series, power) with power None meaning the
    plain coefficient.  A negative power of a non-monomial series needs a
    target to size its truncated inversion; exact monomials invert exactly.
    """
    vals = []
    for s, a in factors:
        if a is not None and a < 0:
            if s.is_zero():
                raise ZeroDivisionError("negative power of the zero series")
            vals.append(s.valuation() * RhoRational.from_int(a))
            continue
        vl = s.valuation_lower_bound()
        if isinstance(vl, Infinity):
            # an exactly zero factor annihilates the product
            return HahnSeries.zero()
        vals.append(vl if a is None else vl * RhoRational.from_int(a))

    total_v = RhoRational(())
    for v in vals:
        total_v = total_v + v

    one = RhoRational((1,))
    out = HahnSeries.one()
    consumed = RhoRational(())
    for (s, a), v in zip(factors, vals):
        if a is None:
            f = s
        elif a >= 0:
            f = s ** a
        else:
            m = -a
            if s.is_exact() and len(s.terms) == 1:
                f = s.invert(RhoRational(())) ** m
            elif target is None:
                raise PrecisionError(
                    "negative power of a non-monomial series needs a target")
            else:
                rest = total_v - v
                v_s = s.valuation()
                needed_f = _to_gamma(target) - rest
                # f = z^m, z = s^(-1): trunc(f) = trunc(z) - (m-1) v(s), and
                # invert(s, T) yields trunc(z) > T - 2 v(s)
                needed_z = needed_f + RhoRational.from_int(m - 1) * v_s
                f = s.invert(needed_z + v_s + v_s) ** m
        out = out * f
        consumed = consumed + v
        if target is not None:
            # terms beyond target minus the remaining factors' valuation
            # cannot influence the result below the target
            out = out.truncate(_to_gamma(target) - (total_v - consumed) + one)
    return out
