"""Difference polynomials: evaluation, tropicalization, initial forms,
normalization, Taylor data, and the variable-mixing substitution."""

import random
from fractions import Fraction

import pytest

from difftrop.diffpoly import (
    FIELD_K, FIELD_k, DiffPolynomial, MultiIndex, SigmaExponent,
)
from difftrop.errors import InputError
from difftrop.hahn import HahnSeries, splitting
from difftrop.residue import AlgebraicScalar
from difftrop.rho import RHO, RhoRational

E = SigmaExponent
T = HahnSeries.monomial(1, 1)
ONE = HahnSeries.one()


def G(q):
    return RhoRational.from_fraction(Fraction(q))


def example_f():
    """(1+t)*x1*s^3(x2) + t^2*s(x2) + 1, the running worked example."""
    return DiffPolynomial(2, FIELD_K, {
        (E.single(0, 1), E.single(3, 1)): ONE + T,
        (E.constant(), E.single(1, 1)): T * T,
        (E.constant(), E.constant()): ONE,
    })


def rand_gamma(rng):
    return G(Fraction(rng.randint(-8, 8), rng.randint(1, 3)))


def rand_hahn(rng):
    terms = []
    for _ in range(rng.randint(1, 2)):
        exp = Fraction(rng.randint(-3, 6), rng.randint(1, 2))
        coeff = rng.randint(-4, 4)
        terms.append((G(exp), AlgebraicScalar(coeff)))
    s = HahnSeries(terms)
    return s if not s.is_zero() else ONE


def rand_sigma_exp(rng, order=2, laurent=False):
    items = []
    for _ in range(rng.randint(0, 2)):
        lo = -2 if laurent else 0
        a = rng.randint(lo, 2)
        if a:
            items.append((rng.randint(0, order), a))
    return E.make(items)


def rand_poly(rng, n=2, max_monomials=4, order=2, laurent=False):
    items = []
    for _ in range(rng.randint(1, max_monomials)):
        key = tuple(rand_sigma_exp(rng, order, laurent) for _ in range(n))
        items.append((key, rand_hahn(rng)))
    f = DiffPolynomial(n, FIELD_K, items)
    return f if not f.is_zero() else DiffPolynomial.constant(n, 1)


class TestSigmaExponent:
    def test_canonicalization(self):
        assert E.make([(0, 1), (0, -1)]) == E.constant()
        assert E.make([(2, 1), (0, 3)]).powers == ((0, 3), (2, 1))

    def test_rho_value(self):
        assert E.single(3, 1).rho_value() == RHO ** 3
        assert E.make([(0, 2), (1, 4)]).rho_value() == 2 + RHO * 4

    def test_negative_iterate_rejected(self):
        with pytest.raises(InputError):
            E.make([(-1, 2)])


class TestMultiIndex:
    def test_lengths(self):
        j = MultiIndex.make((1, 0, 2))
        assert j.length() == 3
        assert j.rho_length() == 1 + RHO ** 2 * 2

    def test_rho_length_positive(self):
        rng = random.Random(1)
        for _ in range(30):
            j = MultiIndex.make([rng.randint(0, 3) for _ in range(3)])
            if j.length() >= 1:
                assert j.rho_length().sign() == 1

    def test_partial_order_and_binom(self):
        a, b = MultiIndex.make((2, 1)), MultiIndex.make((1, 1))
        assert b <= a
        assert not a <= b
        assert a.binom(b) == 2
        assert (a - b).entries == (1, 0)


class TestEvaluate:
    def test_identity(self):
        f = DiffPolynomial.variable(1, 0)
        assert f.evaluate((T,)) == T

    def test_exponent_arithmetic_root(self):
        # x^(1+s) - t vanishes at t^(1/(1+rho)) since (1+rho)/(1+rho) = 1
        f = DiffPolynomial(1, FIELD_K, {
            (E.make([(0, 1), (1, 1)]),): ONE,
            (E.constant(),): -T,
        })
        pt = splitting(RhoRational((1,), (1, 1)))
        assert f.evaluate((pt,)).is_zero()

    def test_worked_example_at_ones(self):
        # direct substitution oracle: (1+t) + t^2 + 1 = 2 + t + t^2
        got = example_f().evaluate((ONE, ONE))
        assert got == HahnSeries([(G(0), 2), (G(1), 1), (G(2), 1)])

    def test_negative_power_monomial_exact(self):
        f = DiffPolynomial(1, FIELD_K, {(E.single(0, -1),): ONE})
        assert f.evaluate((T,)) == HahnSeries.monomial(1, -1)

    def test_negative_power_needs_target(self):
        f = DiffPolynomial(1, FIELD_K, {(E.single(0, -1),): ONE})
        x = ONE + T
        with pytest.raises(Exception):
            f.evaluate((x,))
        y = f.evaluate((x,), target=G(3))
        r = y * x - ONE
        assert r.is_zero() or r.valuation_lower_bound() > G(3) - G(0)

    def test_valuation_bounded_by_trop(self):
        rng = random.Random(7)
        for _ in range(25):
            f = rand_poly(rng)
            pts = tuple(rand_hahn(rng) for _ in range(2))
            w = tuple(p.valuation() for p in pts)
            val, attain = f.tropicalize(w)
            fy = f.evaluate(pts, target=val + G(6))
            got = fy.valuation_lower_bound()
            assert got >= val
            if len(attain) == 1 and fy.terms:
                assert fy.valuation() == val


class TestEvalExponent:
    def test_single_power(self):
        f = DiffPolynomial.variable(1, 0, j=3)
        key = f.exponents()[0]
        assert f.eval_exponent(key) == (RHO ** 3,)

    def test_linear_combination(self):
        key = (E.make([(0, 2), (1, 4)]),)
        f = DiffPolynomial(1, FIELD_K, {key: ONE})
        assert f.eval_exponent(key) == (2 + 4 * RHO,)

    def test_matches_evaluate_valuation(self):
        key = (E.make([(0, 1), (1, 1)]),)
        f = DiffPolynomial(1, FIELD_K, {key: ONE})
        assert f.eval_exponent(key)[0] == 1 + RHO
        assert f.evaluate((T,)).valuation() == 1 + RHO


class TestTropicalize:
    def test_worked_example_symbolic(self):
        # min{ w1 + pi^3 w2, 2 + pi w2, 0 } as an exact symbolic object
        terms = example_f().tropical_terms()
        expect = [
            (G(0), (G(0), G(0))),
            (G(2), (G(0), RHO)),
            (G(0), (G(1), RHO ** 3)),
        ]
        assert terms == expect

    def test_monomial(self):
        f = DiffPolynomial(2, FIELD_K, {(E.single(0, 1), E.single(1, 2)): T})
        w = (G(2), G(3))
        val, attain = f.tropicalize(w)
        assert val == G(1) + G(2) + RHO * 2 * 3
        assert len(attain) == 1

    def test_worked_example_attaining(self):
        w = (RhoRational((0, 0, 3)), RhoRational((-2,), (0, 1)))
        val, attain = example_f().tropicalize(w)
        assert val == G(0)
        assert len(attain) == 2
        got = {k for k in attain}
        assert (E.constant(), E.single(1, 1)) in got
        assert (E.constant(), E.constant()) in got

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            DiffPolynomial.zero(1).tropicalize((G(0),))


class TestInitialForm:
    def test_worked_example(self):
        w = (RhoRational((0, 0, 3)), RhoRational((-2,), (0, 1)))
        inw = example_f().initial_form(w)
        expect = DiffPolynomial(2, FIELD_k, {
            (E.constant(), E.single(1, 1)): 1,
            (E.constant(), E.constant()): 1,
        })
        assert inw == expect

    def test_monomial_input(self):
        f = DiffPolynomial(1, FIELD_K, {(E.single(0, 2),): T * 3})
        inw = f.initial_form((G(1),))
        assert inw.is_monomial()
        assert inw.coeff((E.single(0, 2),)) == 3

    def test_tie_on_the_line(self):
        # f = x - t at w = 1: both monomials attain
        f = DiffPolynomial(1, FIELD_K, {
            (E.single(0, 1),): ONE, (E.constant(),): -T})
        inw = f.initial_form((G(1),))
        assert len(inw) == 2
        assert inw.coeff((E.constant(),)) == -1

    def test_tropical_root_iff_nonmonomial(self):
        rng = random.Random(9)
        for _ in range(40):
            f = rand_poly(rng)
            w = (rand_gamma(rng), rand_gamma(rng))
            _v, attain = f.tropicalize(w)
            assert (len(attain) >= 2) == (not f.initial_form(w).is_monomial())


class TestProductLaws:
    def test_trop_fg_additive(self):
        rng = random.Random(13)
        for _ in range(30):
            f, g = rand_poly(rng), rand_poly(rng)
            fg = f * g
            w = (rand_gamma(rng), rand_gamma(rng))
            assert fg.tropicalize(w)[0] == \
                f.tropicalize(w)[0] + g.tropicalize(w)[0]

    def test_in_fg_multiplicative(self):
        rng = random.Random(14)
        for _ in range(30):
            f, g = rand_poly(rng), rand_poly(rng)
            fg = f * g
            w = (rand_gamma(rng), rand_gamma(rng))
            assert fg.initial_form(w) == f.initial_form(w) * g.initial_form(w)

    def test_multiply_by_one(self):
        f = example_f()
        assert f * DiffPolynomial.constant(2, 1) == f

    def test_exponent_addition(self):
        x = DiffPolynomial.variable(1, 0)
        xs = DiffPolynomial.variable(1, 0, j=1)
        prod = x * xs
        assert prod.exponents() == [(E.make([(0, 1), (1, 1)]),)]

    def test_schoolbook(self):
        x = DiffPolynomial.variable(1, 0)
        one = DiffPolynomial.constant(1, 1)
        assert (x + one) * (x - one) == \
            DiffPolynomial(1, FIELD_K, {(E.single(0, 2),): ONE,
                                        (E.constant(),): -ONE})


class TestLaurentNormalize:
    def test_univariate_jmax(self):
        f = DiffPolynomial(1, FIELD_K, {(E.single(0, -1),): ONE,
                                        (E.constant(),): ONE})
        g, shift = f.laurent_normalize()
        assert shift == (E.single(0, 1),)
        assert g == DiffPolynomial(1, FIELD_K, {(E.constant(),): ONE,
                                                (E.single(0, 1),): ONE})

    def test_already_polynomial(self):
        f = example_f()
        g, shift = f.laurent_normalize()
        assert g == f
        assert all(s.is_trivial() for s in shift)

    def test_componentwise_levels(self):
        f = DiffPolynomial(1, FIELD_K, {(E.single(1, -1),): ONE,
                                        (E.single(0, 1),): ONE})
        g, shift = f.laurent_normalize()
        assert shift == (E.single(1, 1),)
        assert g == DiffPolynomial(1, FIELD_K, {
            (E.constant(),): ONE,
            (E.make([(0, 1), (1, 1)]),): ONE,
        })

    def test_product_identity_randomized(self):
        rng = random.Random(15)
        for _ in range(20):
            f = rand_poly(rng, laurent=True)
            g, shift = f.laurent_normalize()
            assert g.is_polynomial_form()
            assert g == f.scale_monomial(shift)


class TestTaylor:
    def test_coefficients_at_zero(self):
        f = DiffPolynomial(1, FIELD_K, {
            (E.make([(0, 1), (1, 1)]),): ONE + T,
            (E.single(1, 2),): T,
            (E.constant(),): ONE * 5,
        })
        for J, coeff in f.to_multiindex_terms().items():
            assert f.taylor_coeff(J, HahnSeries.zero()) == coeff

    def test_top_coefficient_normalized(self):
        # f = x^2: the (2)-th scaled derivative is 1 at any point
        f = DiffPolynomial(1, FIELD_K, {(E.single(0, 2),): ONE})
        assert f.taylor_coeff(MultiIndex.make((2,)), ONE + T) == ONE

    def test_taylor_identity_randomized(self):
        # f(a) = sum_J f_(J)(b) * sigma^J(a - b)
        rng = random.Random(16)
        for _ in range(15):
            f = rand_poly(rng, n=1, max_monomials=3, order=1)
            f, _s = f.laurent_normalize()
            a, b = rand_hahn(rng), rand_hahn(rng)
            m = f.max_level()
            diff = a - b
            sig_d = [diff]
            for _ in range(m):
                sig_d.append(sig_d[-1].apply_sigma())
            total = HahnSeries.zero()
            seen = set()
            for J in f.to_multiindex_terms():
                seen.update(_downset(J))
            for J in seen:
                term = f.taylor_coeff(J, b)
                for lvl, e in enumerate(J.entries):
                    if e:
                        term = term * sig_d[lvl] ** e
                total = total + term
            assert total == f.evaluate((a,))


def _downset(J):
    from itertools import product as iproduct
    ranges = [range(e + 1) for e in J.entries]
    return [MultiIndex.make(t) for t in iproduct(*ranges)]


class TestPhiL:
    def test_direct_substitution(self):
        # n=2: x1*x2 -> x1*x2^(1+l)
        f = DiffPolynomial(2, FIELD_K, {(E.single(0, 1), E.single(0, 1)): ONE})
        g = f.apply_phi_l(3)
        assert g.exponents() == [(E.single(0, 1), E.single(0, 4))]

    def test_choose_l_certified(self):
        f = DiffPolynomial(2, FIELD_K, {
            (E.single(0, 1), E.constant()): ONE,
            (E.constant(), E.single(0, 1)): ONE,
        })
        l = f.choose_l()
        g = f.apply_phi_l(l)
        powers = [key[1] for key in g.exponents()]
        assert len(set(powers)) == len(powers)

    def test_choose_l_random_distinctness(self):
        rng = random.Random(21)
        for _ in range(20):
            f = rand_poly(rng, laurent=True)
            l = f.choose_l()
            g = f.apply_phi_l(l)
            powers = [key[1] for key in g.exponents()]
            assert len(set(powers)) == len(powers)

    def test_preserves_evaluation(self):
        # phi_l(f)(y1, ..., yn) = f(y1*yn^l, ..., yn) on random points
        rng = random.Random(22)
        for _ in range(12):
            f = rand_poly(rng, max_monomials=3, order=1)
            l = f.choose_l()
            g = f.apply_phi_l(l)
            y1, y2 = rand_hahn(rng), rand_hahn(rng)
            lhs = g.evaluate((y1, y2), target=G(20))
            rhs = f.evaluate((y1 * y2 ** l, y2), target=G(20))
            d = lhs - rhs
            assert d.is_zero() or not d.terms


class TestSubstitution:
    def test_partial_hahn(self):
        f = example_f()
        g = f.substitute_hahn({0: T})
        assert g.n == 1
        val, _ = g.tropicalize((G(0),))
        assert g.coeff((E.single(3, 1),)) == T + T * T

    def test_scalar_partial(self):
        f = DiffPolynomial(2, FIELD_k, {
            (E.single(0, 1), E.single(1, 1)): 1,
            (E.constant(), E.constant()): 1,
        })
        g = f.substitute_scalars({0: AlgebraicScalar(2)})
        assert g.n == 1
        assert g.coeff((E.single(1, 1),)) == 2
