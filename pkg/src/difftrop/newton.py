"""Root refinement and lifting in the Hahn field.

Around a non-root b of a one-variable difference polynomial, the quantity

    eps = max over multi-indices J, |J| >= 1, of
          (v(f(b)) - v(f_(J)(b))) / |J|_rho

locates the valuation of the correction: a root a with v(a - b) = eps
exists, and one refinement step finds the new term's residue coefficient by
solving a residue-field difference equation whose constant term is 1.  Each
accepted step strictly increases v(f(b)) and eps, so iterating drives the
residual valuation past any target; iterates stay finitely supported because
every step adds exactly one term, at exponent eps.

The multivariate pipeline substitutes exact monomial representatives for all
but the last variable after a variable-mixing substitution has forced the
last variable's sigma-powers apart, lifts the remaining one-variable
polynomial, and transforms the root back.

The iteration is capped: the underlying convergence argument is transfinite
and gives no computable step bound, so exceeding the cap raises a diagnostic
instead of looping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .diffpoly import FIELD_k, DiffPolynomial, MultiIndex, sigma_tower
from .errors import (
    InputError, InternalConsistencyError, LiftBudgetExceededError,
)
from .hahn import HahnSeries, splitting
from .residue import (
    IDENTITY_ORACLE, AlgebraicScalar, difference_roots_univariate,
    solve_difference_univariate,
)
from .rho import INF, Infinity, RhoRational

BASE_STEP_BUDGET = 64


@dataclass
class EpsilonReport:
    """The refinement data at a point: all defined eps_J, their maximum,
    and the multi-indices attaining it."""

    epsilon: RhoRational
    argmax: tuple
    per_j: dict
    value_valuation: RhoRational  # v(f(b))


@dataclass
class LiftCertificate:
    """A truncated root with checkable guarantees.

    The root agrees with an exact root below its truncation; the residual
    valuation (infinite for an exact root) exceeds the requested target; the
    root has the requested valuation and leading residue.
    """

    root: HahnSeries
    target: RhoRational
    residual_valuation: object  # RhoRational or the infinity sentinel
    steps: int
    branch_choices: list = field(default_factory=list)
    w: RhoRational = None
    alpha: AlgebraicScalar = None


def epsilon(f: DiffPolynomial, b: HahnSeries, _fb: HahnSeries = None,
            work_trunc=None) -> EpsilonReport:
    """The exact refinement exponent of f at the non-root b.

    Requires f in polynomial form (normalize Laurent input first) and a
    finitely supported b, so every valuation is exact.  A working truncation
    caps the precision carried by the scaled derivatives; a derivative whose
    valuation escapes above it can only have a negative exponent candidate
    (rho exceeds one, so every rho-length is at least one), hence the capped
    run is sound whenever the maximum comes out nonnegative, and the
    computation falls back to full precision otherwise.
    """
    if f.n != 1:
        raise InputError("epsilon() works on one-variable polynomials")
    if not f.is_polynomial_form():
        raise InputError("Laurent exponents: laurent_normalize first")
    if not b.is_exact():
        raise InputError("the expansion point must be finitely supported")
    fb = f.evaluate((b,)) if _fb is None else _fb
    if fb.is_zero():
        raise InputError("epsilon() at a root: nothing to refine")
    v_fb = fb.valuation()
    m = f.max_level()
    sig = sigma_tower(b, m)
    pows = {}
    terms = f.to_multiindex_terms()
    maxdeg = [0] * (m + 1)
    for J in terms:
        for i, e in enumerate(J.entries):
            maxdeg[i] = max(maxdeg[i], e)
    per_j = {}
    best = None
    argmax = []
    skipped_hidden = False
    for entries in product(*(range(d + 1) for d in maxdeg)):
        J = MultiIndex.make(entries)
        if J.length() < 1 or not any(J <= Jp for Jp in terms):
            continue
        fj = f.taylor_coeff(J, b, _sig=sig, _pows=pows,
                            work_trunc=work_trunc)
        if fj.is_zero():
            continue
        if fj.is_term_free():
            skipped_hidden = True  # valuation >= work_trunc: candidate < 0
            continue
        eps_j = (v_fb - fj.valuation()) / J.rho_length()
        per_j[J] = eps_j
        if best is None or eps_j > best:
            best = eps_j
            argmax = [J]
        elif eps_j == best:
            argmax.append(J)
    if work_trunc is not None and skipped_hidden and \
            (best is None or best.sign() < 0 or not v_fb < work_trunc):
        return epsilon(f, b, _fb=fb)
    if work_trunc is not None and best is None:
        return epsilon(f, b, _fb=fb)
    if best is None:
        raise InternalConsistencyError(
            "no nonzero scaled derivative: f was constant")
    return EpsilonReport(best, tuple(argmax), per_j, v_fb)


def refine(f: DiffPolynomial, b: HahnSeries, oracle=IDENTITY_ORACLE,
           report: EpsilonReport = None, _choice=None, _fb=None,
           check_next: bool = True):
    """One refinement step: a = b + u * t^eps with the residue u solving the
    induced residue-field equation.

    Checked postconditions: v(a - b) = eps and v(f(a)) > v(f(b)); with
    ``check_next`` the strict growth of the refinement exponent is verified
    here too (callers that iterate verify it on their own next report).
    Returns (a, report-at-b, chosen residue).
    """
    return _refine_core(f, b, oracle, report, _choice, _fb, check_next)[:3]


def _refine_core(f, b, oracle=IDENTITY_ORACLE, report=None, _choice=None,
                 _fb=None, check_next=True, work_trunc=None):
    if report is None:
        report = epsilon(f, b, _fb=_fb, work_trunc=work_trunc)
    eps = report.epsilon
    fb = f.evaluate((b,)) if _fb is None else _fb
    lead_fb = fb.leading_coeff()
    items = {}
    items[(_const_key(),)] = AlgebraicScalar(1)
    sig = sigma_tower(b, f.max_level())
    pows = {}
    for J in report.argmax:
        fj = f.taylor_coeff(J, b, _sig=sig, _pows=pows,
                            work_trunc=work_trunc)
        # residue of f_(J)(b) t^(|J|_rho eps) / f(b): valuations match on the
        # argmax, so it is the ratio of leading coefficients
        r = fj.leading_coeff() / lead_fb
        key = (J.to_sigma(),)
        items[key] = items.get(key, AlgebraicScalar(0)) + r
    phi = DiffPolynomial(1, FIELD_k, items)
    if phi.is_monomial() or phi.is_zero():
        raise InternalConsistencyError(
            "refinement equation degenerated to a monomial")
    if _choice is None:
        u = solve_difference_univariate(phi, oracle)
    else:
        u = _choice
    a = b + splitting(eps).scale(u)
    if (a - b).valuation() != eps:
        raise InternalConsistencyError("correction changed the exponent")
    fa = f.evaluate((a,), target=work_trunc)
    if not fa.is_zero() and fa.terms:
        if not fa.valuation() > report.value_valuation:
            raise InternalConsistencyError(
                "refinement did not increase the residual valuation")
        if check_next:
            nxt = epsilon(f, a, _fb=fa, work_trunc=work_trunc)
            if not nxt.epsilon > eps:
                raise InternalConsistencyError(
                    "refinement exponent failed to increase")
    elif not fa.is_zero():
        # no visible terms below the working precision: the residual jumped
        # past it, which certainly exceeds v(f(b))
        if not fa.valuation_lower_bound() > report.value_valuation:
            raise InternalConsistencyError(
                "refinement did not increase the residual valuation")
    return a, report, u, fa


def _const_key():
    from .diffpoly import SigmaExponent
    return SigmaExponent.constant()


def _ceil_ratio(gap, step) -> int:
    q = gap / step
    fl = q.floor()
    return fl if q == RhoRational.from_int(fl) else fl + 1


HARD_STEP_BOUND = BASE_STEP_BUDGET + 192
STAGNATION_WINDOW = 12


def _step_cap(target_g, v0, increments) -> int:
    """Iteration cap: the base budget plus the number of steps needed to
    cross the remaining gap at the worst exponent increment observed, under
    an absolute bound that keeps shrinking increments from stalling forever."""
    if not increments:
        return BASE_STEP_BUDGET
    worst = increments[0]
    for inc in increments[1:]:
        if inc < worst:
            worst = inc
    gap = target_g - v0
    if not gap.sign() > 0:
        return BASE_STEP_BUDGET
    return min(BASE_STEP_BUDGET + max(0, _ceil_ratio(gap, worst)),
               HARD_STEP_BOUND)


def _stagnating(increments) -> bool:
    """Strictly decreasing exponent increments over a whole window signal a
    pseudolimit below the target: the limit construction is transfinite and
    out of reach for a finitely supported iteration, so bail out early."""
    if len(increments) < STAGNATION_WINDOW:
        return False
    tail = increments[-STAGNATION_WINDOW:]
    return all(b < a for a, b in zip(tail, tail[1:]))


def lift_univariate(f: DiffPolynomial, w, alpha, target,
                    oracle=IDENTITY_ORACLE,
                    step_limit: int = None) -> LiftCertificate:
    """Lift a residue root of the initial form at w to a truncated root.

    Preconditions: the initial form at w is not a monomial, alpha is one of
    its nonzero roots, and target > w.  The first refinement exponent is
    checked to exceed w, which pins v(root) = w and the leading residue.
    ``step_limit`` tightens the iteration cap below its default.
    """
    certs = _lift_univariate_impl(f, w, alpha, target, oracle,
                                  branch_all=False, step_limit=step_limit)
    return certs[0]


def lift_univariate_branches(f, w, alpha, target, oracle=IDENTITY_ORACLE,
                             branch_budget: int = 16):
    """Breadth-first exploration over all residue roots at every step."""
    return _lift_univariate_impl(f, w, alpha, target, oracle,
                                 branch_all=True, branch_budget=branch_budget)


def _lift_univariate_impl(f, w, alpha, target, oracle, branch_all,
                          branch_budget=16, step_limit=None):
    if f.n != 1:
        raise InputError("univariate lift needs one variable")
    w = _as_gamma(w)
    target = _as_gamma(target)
    alpha = alpha if isinstance(alpha, AlgebraicScalar) \
        else AlgebraicScalar(alpha)
    if alpha.is_zero():
        raise InputError("the residue root must be nonzero")
    inw = f.initial_form((w,), oracle)
    if inw.is_monomial():
        raise InputError("initial form is a monomial: w is not tropical root")
    if not inw.evaluate_scalars((alpha,), oracle).is_zero():
        raise InputError("alpha is not a root of the initial form")
    if not target > w:
        raise InputError("target must exceed w")

    g, shift = f.laurent_normalize()
    shift_rho = shift[0].rho_value()
    target_g = target + shift_rho * w

    b0 = splitting(w).scale(alpha)
    gb0 = g.evaluate((b0,))
    if gb0.is_zero():
        return [_certificate(b0, None, INF, w, alpha, target, [], 0)]
    v0 = gb0.valuation()
    # working precision: decisions only ever compare against target_g, so
    # everything beyond it (plus headroom) is ballast; exactness of every
    # decision is preserved by the truncation-propagation rules
    t_work = target_g + RhoRational.from_int(2)

    done = []
    # state: (current point, g at it or None, choices, last eps)
    states = [(b0, gb0, [], None)]
    steps = 0
    increments = []
    while states:
        steps += 1
        cap = _step_cap(target_g, v0, increments)
        if step_limit is not None:
            cap = min(cap, step_limit)
        if steps > cap:
            raise LiftBudgetExceededError(
                f"no residual above target after {steps - 1} refinement "
                f"steps (cap {cap}); the convergence theory gives no bound")
        if _stagnating(increments):
            raise LiftBudgetExceededError(
                f"exponent increments strictly decreasing for "
                f"{STAGNATION_WINDOW} steps: pseudolimit below the target "
                f"suspected; a different residue root may converge")
        new_states = []
        for b, gb, choices, last_eps in states:
            if gb is None:
                gb = g.evaluate((b,), target=t_work)
            if gb.is_term_free() and not gb.is_zero():
                # the residual escaped the working precision; decide exactly
                # whether the point is already a root (once, at termination)
                gb = g.evaluate((b,))
            if gb.is_zero():
                done.append(_certificate(b, None, INF, w, alpha,
                                         target, choices, steps - 1))
                continue
            if gb.valuation() > target_g:
                rep = epsilon(g, b, _fb=gb, work_trunc=t_work)
                residual = gb.valuation() - shift_rho * w
                done.append(_certificate(b, rep.epsilon, residual,
                                         w, alpha, target, choices,
                                         steps - 1))
                continue
            rep = epsilon(g, b, _fb=gb, work_trunc=t_work)
            if last_eps is None:
                if not rep.epsilon > w:
                    raise InternalConsistencyError(
                        "first refinement exponent must exceed w")
            else:
                if not rep.epsilon > last_eps:
                    raise InternalConsistencyError(
                        "refinement exponent failed to increase")
                increments.append(rep.epsilon - last_eps)
            if branch_all:
                phi_roots = _refine_choices(g, b, rep, oracle, t_work)
                for u in phi_roots:
                    if len(new_states) + len(states) > branch_budget:
                        break
                    a, _rep, _u, ga = _refine_core(g, b, oracle, rep,
                                                   _choice=u, _fb=gb,
                                                   check_next=False,
                                                   work_trunc=t_work)
                    new_states.append((a, ga, choices + [u], rep.epsilon))
            else:
                a, _rep, u, ga = _refine_core(g, b, oracle, rep, _fb=gb,
                                              check_next=False,
                                              work_trunc=t_work)
                new_states.append((a, ga, choices + [u], rep.epsilon))
        states = new_states
        if done and not branch_all:
            break
    if not done:
        raise InternalConsistencyError("lift terminated without certificates")
    return done


def _refine_choices(g, b, rep, oracle, work_trunc=None):
    lead = g.evaluate((b,), target=work_trunc).leading_coeff()
    sig = sigma_tower(b, g.max_level())
    pows = {}
    items = {(_const_key(),): AlgebraicScalar(1)}
    for J in rep.argmax:
        fj = g.taylor_coeff(J, b, _sig=sig, _pows=pows, work_trunc=work_trunc)
        key = (J.to_sigma(),)
        items[key] = items.get(key, AlgebraicScalar(0)) + \
            (fj.leading_coeff() / lead)
    phi = DiffPolynomial(1, FIELD_k, items)
    return difference_roots_univariate(phi, oracle)


def _certificate(b, trunc_eps, residual, w, alpha, target, choices, steps):
    root = b if trunc_eps is None else b.truncate(trunc_eps)
    if root.valuation() != w:
        raise InternalConsistencyError("lifted root has the wrong valuation")
    if not (root.shift(-w).residue() == alpha):
        raise InternalConsistencyError("lifted root has the wrong residue")
    if not (isinstance(residual, Infinity) or residual > target):
        raise InternalConsistencyError("residual below the requested target")
    return LiftCertificate(root=root, target=target,
                           residual_valuation=residual, steps=steps,
                           branch_choices=list(choices), w=w, alpha=alpha)


def _as_gamma(x):
    if isinstance(x, RhoRational):
        return x
    from fractions import Fraction
    return RhoRational.from_fraction(Fraction(x))


def lift_multivariate(f: DiffPolynomial, w, alpha, target,
                      oracle=IDENTITY_ORACLE, step_limit: int = None):
    """Lift a residue root of the initial form at w in n variables.

    Returns one certificate per coordinate; they share the residual data of
    the final one-variable lift, which bounds v(f(y)) by the substitution
    identity.
    """
    n = f.n
    w = tuple(_as_gamma(x) for x in w)
    alpha = tuple(a if isinstance(a, AlgebraicScalar) else AlgebraicScalar(a)
                  for a in alpha)
    if len(w) != n or len(alpha) != n:
        raise InputError("w and alpha must have one entry per variable")
    if any(a.is_zero() for a in alpha):
        raise InputError("alpha must lie in the torus (all entries nonzero)")
    if n == 1:
        return [lift_univariate(f, w[0], alpha[0], target, oracle,
                                step_limit=step_limit)]
    target = _as_gamma(target)

    inw = f.initial_form(w, oracle)
    if inw.is_monomial():
        raise InputError("initial form is a monomial: w is not tropical root")
    if not inw.evaluate_scalars(alpha, oracle).is_zero():
        raise InputError("alpha is not a root of the initial form")

    l = f.choose_l()
    g = f.apply_phi_l(l)
    w_prime = tuple(w[i] - w[n - 1] * RhoRational.from_int(l ** (i + 1))
                    for i in range(n - 1)) + (w[n - 1],)
    alpha_prime = tuple(alpha[i] * alpha[n - 1] ** (-(l ** (i + 1)))
                        for i in range(n - 1)) + (alpha[n - 1],)

    in_g = g.initial_form(w_prime, oracle)
    if in_g.is_monomial() or \
            not in_g.evaluate_scalars(alpha_prime, oracle).is_zero():
        raise InternalConsistencyError(
            "the mixing substitution must preserve the initial-form root")

    y_prime = [splitting(w_prime[i]).scale(alpha_prime[i])
               for i in range(n - 1)]
    g1 = g.substitute_hahn({i: y_prime[i] for i in range(n - 1)})
    cert_n = lift_univariate(g1, w_prime[n - 1], alpha_prime[n - 1], target,
                             oracle, step_limit=step_limit)

    y = [None] * n
    y[n - 1] = cert_n.root
    for i in range(n - 1):
        y[i] = y_prime[i] * cert_n.root ** (l ** (i + 1))

    certs = []
    for i in range(n):
        root = y[i]
        if root.valuation() != w[i]:
            raise InternalConsistencyError("coordinate valuation mismatch")
        if not (root.shift(-w[i]).residue() == alpha[i]):
            raise InternalConsistencyError("coordinate residue mismatch")
        certs.append(LiftCertificate(
            root=root, target=target,
            residual_valuation=cert_n.residual_valuation,
            steps=cert_n.steps, branch_choices=list(cert_n.branch_choices),
            w=w[i], alpha=alpha[i]))
    return certs
