"""Exact linear algebra and Fourier-Motzkin elimination over Q(rho).

Everything here works on tuples of RhoRational and decides every pivot and
every inequality by exact sign computation, so the polyhedral layer on top
inherits exactness.  Dimensions stay tiny (ambient dimension at most four),
which keeps plain Gaussian elimination and Fourier-Motzkin affordable.
"""

from __future__ import annotations

from .errors import InputError
from .rho import RhoRational

ZERO = RhoRational(())
ONE = RhoRational((1,))


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(a, c):
    return tuple(x * c for x in a)


def vec_dot(a, b):
    out = ZERO
    for x, y in zip(a, b):
        out = out + x * y
    return out


def vec_is_zero(a):
    return all(x.is_zero() for x in a)


def _echelon(rows):
    """Row echelon form; returns (rows, pivot column list)."""
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    cols = len(rows[0])
    pivots = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, len(rows)):
            if not rows[i][c].is_zero():
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = ONE / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                factor = rows[i][c]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(rows) -> int:
    return len(_echelon(rows)[0])


def nullspace(rows):
    """Basis of {x : rows . x = 0}."""
    if not rows:
        raise InputError("nullspace needs the ambient dimension from a row")
    cols = len(rows[0])
    ech, pivots = _echelon(rows)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * cols
        v[fc] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -ech[r][fc]
        basis.append(tuple(v))
    return basis


def solve(rows, rhs):
    """One exact solution of rows . x = rhs, or None when inconsistent."""
    if not rows:
        return None
    cols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    ech, pivots = _echelon(aug)
    x = [ZERO] * cols
    for r, pc in enumerate(pivots):
        if pc == cols:
            return None  # pivot in the constant column: inconsistent
        x[pc] = ech[r][cols]
    return tuple(x)


def affine_rank(points) -> int:
    """Dimension of the affine span of a point set."""
    pts = list(points)
    if len(pts) <= 1:
        return 0
    base = pts[0]
    return rank([vec_sub(p, base) for p in pts[1:]])


def affine_basis(points):
    """(base point, independent direction list) spanning the affine hull."""
    pts = list(points)
    base = pts[0]
    dirs = []
    for p in pts[1:]:
        d = vec_sub(p, base)
        if rank(dirs + [d]) > len(dirs):
            dirs.append(d)
    return base, dirs


def in_span(vector, dirs) -> bool:
    if vec_is_zero(vector):
        return True
    if not dirs:
        return False
    return rank(list(dirs) + [vector]) == rank(list(dirs))


def coordinates_in_basis(point, base, dirs):
    """Coefficients of (point - base) in the direction basis; the point must
    lie in the affine hull."""
    if not dirs:
        return ()
    rows = [tuple(d[i] for d in dirs) for i in range(len(base))]
    rhs = vec_sub(point, base)
    sol = solve(rows, rhs)
    if sol is None:
        raise InputError("point lies outside of the affine hull")
    return sol


# ---------------------------------------------------------------------------
# Fourier-Motzkin machinery on systems of linear constraints
# ---------------------------------------------------------------------------
# A constraint is (coeffs, bound, strict): coeffs . x <= bound, or < when
# strict.  Equalities are handled by substitution before elimination.

def _canon_row(coeffs, bound, strict):
    for c in coeffs:
        s = c.sign()
        if s != 0:
            scale = ONE / (c if s > 0 else -c)
            return (tuple(x * scale for x in coeffs), bound * scale, strict)
    return (tuple(coeffs), bound, strict)


def _dedupe(cons):
    seen = {}
    for coeffs, bound, strict in cons:
        key = (tuple(c.sort_key() for c in coeffs), bound.sort_key())
        old = seen.get(key)
        if old is None or (strict and not old[2]):
            seen[key] = (coeffs, bound, strict)
    return list(seen.values())


def fm_eliminate(cons, var):
    """Project the constraint system onto the coordinates other than var."""
    pos, neg, zero = [], [], []
    for coeffs, bound, strict in cons:
        s = coeffs[var].sign()
        if s == 0:
            zero.append((coeffs, bound, strict))
        elif s > 0:
            pos.append((coeffs, bound, strict))
        else:
            neg.append((coeffs, bound, strict))
    out = list(zero)
    for pc, pb, ps in pos:
        for nc, nb, ns in neg:
            a, b = pc[var], -nc[var]
            coeffs = vec_add(vec_scale(pc, b), vec_scale(nc, a))
            bound = pb * b + nb * a
            out.append(_canon_row(coeffs, bound, ps or ns))
    return _dedupe(out)


def fm_feasible(cons, dim) -> bool:
    """Exact feasibility of the system over Q(rho)^dim."""
    cur = _dedupe([_canon_row(*c) for c in cons])
    for var in range(dim):
        cur = fm_eliminate(cur, var)
    for coeffs, bound, strict in cur:
        s = bound.sign()
        if s < 0 or (strict and s == 0):
            return False
    return True


def _bounds_for_var(cons, var):
    """(lower, upper) bounds on x_var from rows whose other entries vanished;
    each side is (value, strict) or None for unbounded."""
    lo, hi = None, None
    for coeffs, bound, strict in cons:
        s = coeffs[var].sign()
        if s == 0:
            continue
        val = bound / coeffs[var]
        if s > 0:
            if hi is None or val < hi[0] or (val == hi[0] and strict):
                hi = (val, strict)
        else:
            if lo is None or val > lo[0] or (val == lo[0] and strict):
                lo = (val, strict)
    return lo, hi


def fm_sample(cons, dim):
    """A point satisfying the system (strict rows strictly), or None.

    Eliminates variables back to front, then assigns them front to back,
    choosing the midpoint of each feasible interval (or one past the bound
    on unbounded sides); strictness survives elimination, so the sample
    lands strictly inside every strict row.
    """
    if dim == 0:
        for _coeffs, bound, strict in cons:
            s = bound.sign()
            if s < 0 or (strict and s == 0):
                return None
        return ()
    stages = [_dedupe([_canon_row(*c) for c in cons])]
    for var in range(dim - 1, 0, -1):
        stages.append(fm_eliminate(stages[-1], var))
    final = fm_eliminate(stages[-1], 0)
    for _coeffs, bound, strict in final:
        s = bound.sign()
        if s < 0 or (strict and s == 0):
            return None
    point = [ZERO] * dim
    for var in range(dim):
        # stage where variables 0..var are still present
        stage = stages[dim - 1 - var]
        lo, hi = None, None
        for coeffs, bound, strict in stage:
            s = coeffs[var].sign()
            if s == 0:
                continue
            b = bound
            for j in range(var):
                if not coeffs[j].is_zero():
                    b = b - coeffs[j] * point[j]
            val = b / coeffs[var]
            if s > 0:
                if hi is None or val < hi[0] or (val == hi[0] and strict):
                    hi = (val, strict)
            else:
                if lo is None or val > lo[0] or (val == lo[0] and strict):
                    lo = (val, strict)
        point[var] = _pick_in_interval(lo, hi)
    return tuple(point)


def _pick_in_interval(lo, hi):
    if lo is None and hi is None:
        return ZERO
    if lo is None:
        return hi[0] - ONE
    if hi is None:
        return lo[0] + ONE
    if lo[0] == hi[0]:
        return lo[0]
    half = RhoRational((1,), (2,))
    return (lo[0] + hi[0]) * half


def fm_minimum(cons, dim, objective):
    """Exact infimum of objective . x over the (nonstrict) system.

    Returns (value, attained) with value None meaning unbounded below.
    """
    # introduce s = objective . x as variable 0 and eliminate the rest
    ext = []
    for coeffs, bound, strict in cons:
        ext.append(((ZERO,) + tuple(coeffs), bound, strict))
    # s - objective . x <= 0 and >= 0
    ext.append(((ONE,) + tuple(-c for c in objective), ZERO, False))
    ext.append(((-ONE,) + tuple(objective), ZERO, False))
    cur = _dedupe([_canon_row(*c) for c in ext])
    for var in range(dim, 0, -1):
        cur = fm_eliminate(cur, var)
    lo, hi = _bounds_for_var(cur, 0)
    del hi
    if lo is None:
        return None, False
    return lo[0], not lo[1]


def implicit_equalities(cons, dim):
    """Indices of inequality rows that hold with equality on the whole set."""
    out = []
    for i, (coeffs, bound, strict) in enumerate(cons):
        if strict:
            continue
        value, attained = fm_minimum(cons, dim, coeffs)
        if value is not None and attained and value == bound:
            out.append(i)
    return out


def polyhedron_dim(cons, dim):
    """Affine dimension of {x : cons}, or -1 when empty (nonstrict rows)."""
    if not fm_feasible(cons, dim):
        return -1
    normals = [cons[i][0] for i in implicit_equalities(cons, dim)]
    if not normals:
        return dim
    return dim - rank(normals)