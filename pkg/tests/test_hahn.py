"""Truncated Hahn-series arithmetic, valuation, and the automorphism."""

import random
from fractions import Fraction

import pytest

from difftrop.errors import InputError, PrecisionError, ValuationUnknownError
from difftrop.hahn import HahnSeries, splitting
from difftrop.residue import AlgebraicScalar
from difftrop.rho import INF, RHO, RhoRational, sigma_gamma

T = HahnSeries.monomial(1, 1)
ONE = HahnSeries.one()


def G(q):
    return RhoRational.from_fraction(Fraction(q))


def rand_series(rng, exact=True):
    terms = []
    for _ in range(rng.randint(0, 3)):
        exp = Fraction(rng.randint(-4, 8), rng.randint(1, 3))
        coeff = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        terms.append((G(exp), AlgebraicScalar(coeff)))
    trunc = INF if exact else G(rng.randint(6, 12))
    return HahnSeries(terms, trunc)


class TestValuation:
    def test_least_exponent(self):
        x = HahnSeries([(G(2), 1), (G(3), 1)])
        assert x.valuation() == G(2)

    def test_exact_zero(self):
        assert HahnSeries.zero().valuation() == INF

    def test_product_valuation(self):
        # (1+t) * t^(1/(1+rho)) has valuation 1/(1+rho)
        e = RhoRational((1,), (1, 1))
        x = (ONE + T) * splitting(e)
        assert x.valuation() == e

    def test_unknown_below_truncation(self):
        x = HahnSeries((), trunc=G(2))
        with pytest.raises(ValuationUnknownError):
            x.valuation()


class TestRingOps:
    def test_cancellation(self):
        assert (ONE + T) + HahnSeries.from_scalar(-1) == T

    def test_monomial_product(self):
        a, b = G(Fraction(1, 2)), G(3)
        assert HahnSeries.monomial(1, a) * HahnSeries.monomial(1, b) == \
            HahnSeries.monomial(1, a + b)

    def test_schoolbook_convolution(self):
        # oracle: (1+t)(1-t) expanded by hand
        assert (ONE + T) * (ONE - T) == ONE - HahnSeries.monomial(1, 2)

    def test_ring_axioms_randomized(self):
        rng = random.Random(42)
        for _ in range(40):
            x, y, z = (rand_series(rng) for _ in range(3))
            assert (x + y) + z == x + (y + z)
            assert x * (y + z) == x * y + x * z
            assert (x * y) * z == x * (y * z)
            assert x + y == y + x
            assert x * y == y * x

    def test_valuation_laws_randomized(self):
        rng = random.Random(43)
        for _ in range(60):
            x, y = rand_series(rng), rand_series(rng)
            if x.is_zero() or y.is_zero():
                continue
            assert (x * y).valuation() == x.valuation() + y.valuation()
            s = x + y
            vmin = min(x.valuation(), y.valuation())
            if not s.is_zero():
                assert s.valuation() >= vmin
                if x.valuation() != y.valuation():
                    assert s.valuation() == vmin

    def test_truncation_add(self):
        x = HahnSeries([(G(0), 1)], trunc=G(2))
        y = HahnSeries([(G(1), 1), (G(3), 1)])
        s = x + y
        assert s.trunc == G(2)
        assert [e for e, _c in s.terms] == [G(0), G(1)]

    def test_truncation_mul(self):
        x = HahnSeries([(G(1), 1)], trunc=G(3))   # t + O(t^3)
        y = HahnSeries([(G(2), 1)], trunc=G(4))   # t^2 + O(t^4)
        p = x * y
        # min(3 + 2, 4 + 1) = 5
        assert p.trunc == G(5)
        assert p.terms == ((G(3), AlgebraicScalar(1)),)

    def test_mul_by_exact_zero_is_exact(self):
        x = HahnSeries([(G(1), 1)], trunc=G(3))
        assert (x * HahnSeries.zero()).is_zero()


class TestInvert:
    def test_monomial(self):
        y = T.invert(G(5))
        assert y == HahnSeries.monomial(1, -1)
        assert y.is_exact()

    def test_constant(self):
        assert HahnSeries.from_scalar(2).invert(G(1)) == \
            HahnSeries.from_scalar(Fraction(1, 2))

    def test_geometric_series(self):
        # oracle: 1/(1+t) = 1 - t + t^2 - ... ; target 3 needs terms through t^3
        y = (ONE + T).invert(G(3))
        for k in range(4):
            assert y.coeff_at(G(k)) == (-1) ** k

    def test_contract_randomized(self):
        rng = random.Random(44)
        checked = 0
        while checked < 30:
            x = rand_series(rng)
            if x.is_zero():
                continue
            target = G(rng.randint(2, 6))
            y = x.invert(target)
            checked += 1
            assert y.valuation() == -x.valuation()
            r = x * y - ONE
            if not r.is_zero():
                # visible terms pin v(r); otherwise the truncation bounds it
                assert r.valuation_lower_bound() > target - x.valuation()

    def test_zero_and_unknown(self):
        with pytest.raises(ZeroDivisionError):
            HahnSeries.zero().invert(G(1))
        with pytest.raises(ValuationUnknownError):
            HahnSeries((), trunc=G(1)).invert(G(0))

    def test_insufficient_truncation(self):
        x = HahnSeries([(G(0), 1)], trunc=G(2))
        with pytest.raises(PrecisionError):
            x.invert(G(5))


class TestSigma:
    def test_splitting_compatibility(self):
        # sigma(t^g) = t^(rho*g)
        assert T.apply_sigma() == HahnSeries.monomial(1, RHO)
        g = RhoRational((1,), (1, 1))
        assert splitting(g).apply_sigma() == splitting(sigma_gamma(g))

    def test_termwise(self):
        x = ONE + HahnSeries.monomial(1, 2)
        assert x.apply_sigma() == ONE + HahnSeries.monomial(1, RHO * 2)

    def test_valuation_scaling_randomized(self):
        rng = random.Random(45)
        for _ in range(40):
            x = rand_series(rng)
            if x.is_zero():
                continue
            assert x.apply_sigma().valuation() == sigma_gamma(x.valuation())

    def test_multiplicative_additive_randomized(self):
        rng = random.Random(46)
        for _ in range(25):
            x, y = rand_series(rng), rand_series(rng)
            assert (x * y).apply_sigma() == x.apply_sigma() * y.apply_sigma()
            assert (x + y).apply_sigma() == x.apply_sigma() + y.apply_sigma()

    def test_iterations(self):
        assert T.apply_sigma(iterations=2) == HahnSeries.monomial(1, RHO * RHO)


class TestSplittingResidue:
    def test_splitting_identity(self):
        assert splitting(G(0)) == ONE

    def test_splitting_homomorphism_randomized(self):
        rng = random.Random(47)
        for _ in range(25):
            a = G(Fraction(rng.randint(-9, 9), rng.randint(1, 5)))
            b = G(Fraction(rng.randint(-9, 9), rng.randint(1, 5)))
            assert splitting(a + b) == splitting(a) * splitting(b)

    def test_residue_constant_term(self):
        assert (HahnSeries.from_scalar(3) + T).residue() == 3

    def test_residue_positive_valuation(self):
        assert T.residue() == 0
        assert HahnSeries.zero().residue() == 0

    def test_residue_negative_valuation_rejected(self):
        with pytest.raises(InputError):
            HahnSeries.monomial(1, -1).residue()

    def test_residue_needs_truncation_above_zero(self):
        x = HahnSeries((), trunc=G(0))
        with pytest.raises(PrecisionError):
            x.residue()


class TestDisplay:
    def test_text_round_shape(self):
        x = HahnSeries([(G(Fraction(1, 2)), 3),
                        (RhoRational((1,), (1, 1)), -1)], trunc=G(2))
        s = str(x)
        assert "O(" in s and "t^" in s

    def test_zero(self):
        assert str(HahnSeries.zero()) == "0"
