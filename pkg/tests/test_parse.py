"""The text grammar: Q(rho) expressions, Hahn series, difference polynomials."""

from fractions import Fraction

import pytest

from difftrop.diffpoly import FIELD_K, DiffPolynomial, SigmaExponent
from difftrop.errors import ParseError
from difftrop.hahn import HahnSeries
from difftrop.parse import (
    parse_gamma_vector, parse_hahn, parse_poly, parse_rho, parse_scalar,
)
from difftrop.rho import RHO, RhoRational

E = SigmaExponent
T = HahnSeries.monomial(1, 1)
ONE_H = HahnSeries.one()


def G(q):
    return RhoRational.from_fraction(Fraction(q))


class TestRho:
    def test_polynomial_fraction(self):
        assert parse_rho("(3*r^2 - 2)/(r + 1)") == \
            RhoRational((-2, 0, 3), (1, 1))

    def test_integers_and_rationals(self):
        assert parse_rho("7") == G(7)
        assert parse_rho("1/2") == G(Fraction(1, 2))
        assert parse_rho("-3/4") == G(Fraction(-3, 4))

    def test_arithmetic(self):
        assert parse_rho("r*r - r^2") == RhoRational(())
        assert parse_rho("2 + 3*r") == RhoRational((2, 3))
        assert parse_rho("r^-1") == RhoRational((1,), (0, 1))

    def test_nested(self):
        assert parse_rho("1/(1+r) + r/(1+r)") == RhoRational((1,))

    def test_errors_carry_position(self):
        with pytest.raises(ParseError):
            parse_rho("r +")
        with pytest.raises(ParseError):
            parse_rho("q")
        with pytest.raises(ParseError):
            parse_rho("(1")
        with pytest.raises(ParseError):
            parse_rho("1/(r - r)")


class TestHahn:
    def test_spec_syntax(self):
        x = parse_hahn("3*t^(1/2) - t^(r/(1+r)) + O(t^2)")
        assert x.trunc == G(2)
        assert x.coeff_at(G(Fraction(1, 2))) == 3
        e = RhoRational((0, 1), (1, 1))
        assert x.coeff_at(e) == -1

    def test_plain(self):
        assert parse_hahn("1 + t") == ONE_H + T
        assert parse_hahn("t^-1") == HahnSeries.monomial(1, -1)
        assert parse_hahn("0").is_zero()
        assert parse_hahn("2 - 2").is_zero()

    def test_division(self):
        assert parse_hahn("1/2") == HahnSeries.from_scalar(Fraction(1, 2))
        assert parse_hahn("t/2 + 1/t") == \
            HahnSeries.monomial(Fraction(1, 2), 1) + HahnSeries.monomial(1, -1)

    def test_truncation_only(self):
        x = parse_hahn("O(t)")
        assert x.is_term_free() and x.trunc == G(1)

    def test_round_trip_text(self):
        x = parse_hahn("3*t^(1/2) - t^(r/(1+r)) + O(t^2)")
        assert parse_hahn(str(x)) == x

    def test_variables_rejected(self):
        with pytest.raises(ParseError):
            parse_hahn("t + x1")


class TestPoly:
    def test_worked_example(self):
        f = parse_poly("(1+t)*x1*s^3(x2) + t^2*s(x2) + 1")
        expect = DiffPolynomial(2, FIELD_K, {
            (E.single(0, 1), E.single(3, 1)): ONE_H + T,
            (E.constant(), E.single(1, 1)): T * T,
            (E.constant(), E.constant()): ONE_H,
        })
        assert f == expect

    def test_two_monomials(self):
        f = parse_poly("x1 + 1")
        assert len(f) == 2 and f.n == 1

    def test_rho_exponent_coefficient(self):
        f = parse_poly("t^(r/(1+r)) * x1")
        (key, coeff), = list(f.terms())
        assert coeff.valuation() == RhoRational((0, 1), (1, 1))

    def test_laurent_powers(self):
        f = parse_poly("x1^-1 + 1")
        g, shift = f.laurent_normalize()
        assert shift == (E.single(0, 1),)
        f2 = parse_poly("s(x1)^-2 * x1")
        key = f2.exponents()[0]
        assert key[0].coeff(1) == -2 and key[0].coeff(0) == 1

    def test_sigma_defaults_to_one(self):
        assert parse_poly("s(x1)") == parse_poly("s^1(x1)")

    def test_round_trip_text(self):
        f = parse_poly("(1+t)*x1*s^3(x2) + t^2*s(x2) + 1")
        assert parse_poly(str(f)) == f

    def test_variable_count_inferred(self):
        assert parse_poly("x3 + 1").n == 3

    def test_errors(self):
        with pytest.raises(ParseError):
            parse_poly("x1 + + 1")
        with pytest.raises(ParseError):
            parse_poly("s^(x1)")
        with pytest.raises(ParseError):
            parse_poly("y1 + 1")
        with pytest.raises(ParseError):
            parse_poly("(x1+1)/(x1-1)")


class TestHelpers:
    def test_scalar(self):
        assert parse_scalar("-3/4") == Fraction(-3, 4)
        with pytest.raises(ParseError):
            parse_scalar("sqrt(2)")

    def test_gamma_vector(self):
        v = parse_gamma_vector("3*r^2, (-2)/r")
        assert v == (RhoRational((0, 0, 3)), RhoRational((-2,), (0, 1)))
