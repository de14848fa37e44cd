"""Text grammar for scalars, series, and difference polynomials.

Three entry points share one tokenizer:

  parse_rho   -- elements of Q(rho) in the symbol r:  (3*r^2 - 2)/(r + 1)
  parse_hahn  -- series in t with Q(rho) exponents and a truncation marker:
                 3*t^(1/2) - t^(r/(1+r)) + O(t^2)
  parse_poly  -- Laurent difference polynomials: variables x1..xn, iterates
                 s^j(xi) with s(xi) = s^1(xi):
                 (1+t)*x1*s^3(x2) + t^2*s(x2) + 1

Precedence is the usual +/- < */ '/' < unary minus < ^.  Division is exact
and therefore restricted to invertible monomials (rational constants,
powers of t, single difference monomials).  Errors carry line and column.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .diffpoly import FIELD_K, DiffPolynomial, SigmaExponent
from .errors import ParseError
from .hahn import HahnSeries
from .residue import AlgebraicScalar
from .rho import RhoRational

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z]\w*)"
                    r"|(?P<op>[-+*/^(),]))")


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._scan()
        self.i = 0

    def _scan(self):
        pos = 0
        while pos < len(self.text):
            m = _TOKEN.match(self.text, pos)
            if m is None:
                rest = self.text[pos:].lstrip()
                if not rest:
                    break
                raise ParseError(f"unexpected character {rest[0]!r}",
                                 *self._linecol(pos))
            if m.lastgroup is None and not m.group().strip():
                pos = m.end()
                continue
            kind = m.lastgroup
            if kind is not None:
                self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()

    def _linecol(self, pos):
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1)
        return line, col

    def peek(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return ("end", "", len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.next()
        if val != value:
            shown = val if kind != "end" else "end of input"
            raise ParseError(f"expected {value!r}, found {shown}",
                             *self._linecol(pos))

    def error(self, message):
        _kind, _val, pos = self.peek()
        raise ParseError(message, *self._linecol(pos))


# ---------------------------------------------------------------------------
# Q(rho) expressions
# ---------------------------------------------------------------------------

class _RhoParser:
    def __init__(self, lex: _Lexer):
        self.lex = lex

    def parse(self) -> RhoRational:
        return self._sum()

    def _sum(self):
        val = self._term()
        while self.lex.peek()[1] in ("+", "-"):
            op = self.lex.next()[1]
            rhs = self._term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def _term(self):
        val = self._unary()
        while self.lex.peek()[1] in ("*", "/"):
            op = self.lex.next()[1]
            rhs = self._unary()
            if op == "*":
                val = val * rhs
            else:
                if rhs.is_zero():
                    self.lex.error("division by zero")
                val = val / rhs
        return val

    def _unary(self):
        if self.lex.peek()[1] == "-":
            self.lex.next()
            return -self._unary()
        return self._power()

    def _power(self):
        base = self._atom()
        if self.lex.peek()[1] == "^":
            self.lex.next()
            return base ** _int_exponent(self.lex)
        return base

    def _atom(self):
        kind, val, _pos = self.lex.peek()
        if kind == "int":
            self.lex.next()
            return RhoRational.from_int(int(val))
        if kind == "name" and val == "r":
            self.lex.next()
            return RhoRational.rho_power(1)
        if val == "(":
            self.lex.next()
            out = self._sum()
            self.lex.expect(")")
            return out
        self.lex.error("expected an integer, 'r', or '('")


def _int_exponent(lex: _Lexer) -> int:
    sign = 1
    if lex.peek()[1] == "-":
        lex.next()
        sign = -1
    kind, val, _pos = lex.next()
    if kind != "int":
        lex.error("expected an integer exponent")
    return sign * int(val)


def parse_rho(text: str) -> RhoRational:
    lex = _Lexer(text)
    out = _RhoParser(lex).parse()
    if lex.peek()[0] != "end":
        lex.error("trailing input after a Q(rho) expression")
    return out


# ---------------------------------------------------------------------------
# polynomial / series expressions
# ---------------------------------------------------------------------------

class _PolyParser:
    """Parses into DiffPolynomial over K; with allow_trunc also accepts the
    O(t^gamma) truncation marker (for plain Hahn series input)."""

    def __init__(self, lex: _Lexer, n: int, allow_trunc: bool = False):
        self.lex = lex
        self.n = n
        self.allow_trunc = allow_trunc
        self.trunc = None

    def parse(self) -> DiffPolynomial:
        return self._sum()

    def _sum(self):
        val = self._term()
        while self.lex.peek()[1] in ("+", "-"):
            op = self.lex.next()[1]
            rhs = self._term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def _term(self):
        val = self._unary()
        while self.lex.peek()[1] in ("*", "/"):
            op = self.lex.next()[1]
            rhs = self._unary()
            if op == "*":
                val = val * rhs
            else:
                val = val * self._invert(rhs)
        return val

    def _unary(self):
        if self.lex.peek()[1] == "-":
            self.lex.next()
            return -self._unary()
        return self._power()

    def _power(self):
        base = self._atom()
        if self.lex.peek()[1] == "^":
            self.lex.next()
            k = _int_exponent(self.lex)
            if k < 0:
                return self._invert(base) ** (-k)
            return base ** k
        return base

    def _invert(self, p: DiffPolynomial) -> DiffPolynomial:
        if len(p) != 1:
            self.lex.error("division needs an invertible monomial divisor")
        (key, coeff), = list(p.terms())
        if not (coeff.is_exact() and len(coeff.terms) == 1):
            self.lex.error("division needs an exactly invertible coefficient")
        inv_coeff = coeff.invert(RhoRational(()))
        inv_key = tuple(-e for e in key)
        return DiffPolynomial(self.n, FIELD_K, {inv_key: inv_coeff})

    def _const(self, series: HahnSeries) -> DiffPolynomial:
        return DiffPolynomial.constant(self.n, series)

    def _atom(self):
        kind, val, _pos = self.lex.peek()
        if kind == "int":
            self.lex.next()
            return self._const(HahnSeries.from_scalar(int(val)))
        if val == "(":
            self.lex.next()
            out = self._sum()
            self.lex.expect(")")
            return out
        if kind == "name":
            if val == "t":
                self.lex.next()
                return self._const(HahnSeries.monomial(1, self._t_exponent()))
            if val == "O" and self.allow_trunc:
                return self._trunc_marker()
            if val == "s":
                return self._sigma_iterate()
            m = re.fullmatch(r"x(\d+)", val)
            if m:
                self.lex.next()
                return self._variable(int(m.group(1)), 0)
        self.lex.error(f"unexpected symbol {val!r}")

    def _t_exponent(self) -> RhoRational:
        if self.lex.peek()[1] != "^":
            return RhoRational((1,))
        self.lex.next()
        kind, val, _pos = self.lex.peek()
        if val == "(":
            self.lex.next()
            out = _RhoParser(self.lex)._sum()
            self.lex.expect(")")
            return out
        if val == "-" or kind == "int":
            return RhoRational.from_int(_int_exponent(self.lex))
        self.lex.error("expected an exponent after t^")

    def _trunc_marker(self):
        self.lex.next()  # O
        self.lex.expect("(")
        kind, val, _pos = self.lex.peek()
        if kind == "int" and val == "1":
            self.lex.next()
            gamma = RhoRational(())
        elif kind == "name" and val == "t":
            self.lex.next()
            gamma = self._t_exponent()
        else:
            self.lex.error("O(...) takes 1 or a power of t")
        self.lex.expect(")")
        marker = HahnSeries((), trunc=gamma)
        return self._const(marker)

    def _sigma_iterate(self):
        self.lex.next()  # s
        j = 1
        if self.lex.peek()[1] == "^":
            self.lex.next()
            kind, val, _pos = self.lex.next()
            if kind != "int":
                self.lex.error("expected an integer after s^")
            j = int(val)
        self.lex.expect("(")
        kind, val, _pos = self.lex.next()
        m = re.fullmatch(r"x(\d+)", val) if kind == "name" else None
        if not m:
            self.lex.error("s^j(...) applies to a variable x1..xn")
        i = int(m.group(1))
        self.lex.expect(")")
        return self._variable(i, j)

    def _variable(self, index_1based: int, j: int) -> DiffPolynomial:
        if not 1 <= index_1based <= self.n:
            self.lex.error(f"variable x{index_1based} out of range")
        return DiffPolynomial.variable(self.n, index_1based - 1, j=j)


def _scan_variables(text: str) -> int:
    n = 0
    for m in re.finditer(r"\bx(\d+)\b", text):
        n = max(n, int(m.group(1)))
    return n


def parse_poly(text: str, n: int = None) -> DiffPolynomial:
    """A Laurent difference polynomial over K from the CLI grammar."""
    if n is None:
        n = max(_scan_variables(text), 1)
    lex = _Lexer(text)
    out = _PolyParser(lex, n).parse()
    if lex.peek()[0] != "end":
        lex.error("trailing input after the polynomial")
    return out


def parse_hahn(text: str) -> HahnSeries:
    """A (possibly truncated) Hahn series from its text syntax."""
    lex = _Lexer(text)
    parser = _PolyParser(lex, 1, allow_trunc=True)
    out = parser.parse()
    if lex.peek()[0] != "end":
        lex.error("trailing input after the series")
    for key, _c in out.terms():
        if not all(e.is_trivial() for e in key):
            lex.error("a series may not mention variables")
    const_key = tuple(SigmaExponent.constant() for _ in range(1))
    coeff = out.coeff(const_key)
    if coeff is None:
        # the polynomial dropped an exact zero or kept only a truncation
        return _hahn_zero_like(out)
    return coeff


def _hahn_zero_like(p: DiffPolynomial) -> HahnSeries:
    return HahnSeries.zero()


def parse_scalar(text: str) -> AlgebraicScalar:
    """A rational residue-field scalar like '-3/4'."""
    try:
        return AlgebraicScalar(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational scalar: {text!r}") from exc


def parse_gamma_vector(text: str):
    """Comma-separated Q(rho) coordinates."""
    parts = _split_top_level(text)
    return tuple(parse_rho(p) for p in parts)


def _split_top_level(text: str):
    parts = []
    depth = 0
    cur = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p for p in (s.strip() for s in parts) if p]
