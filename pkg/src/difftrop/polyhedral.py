"""Exact polyhedral geometry over the ordered field Q(rho).

Newton polytopes live in Q(rho)^n, their lifts by coefficient valuations in
Q(rho)^(n+1).  The chain here is: exact convex hull with full face lattice,
lower faces of the lifted polytope, the induced regular subdivision, the
dual complex of closed regions {w : (w,1) selects the face}, and finally
the (n-1)-skeleton of that dual complex, whose support is the set of points
where the tropical minimum is attained at least twice.

Every inequality has Q(rho) coefficients and a value-group bound, and every
predicate is decided by exact sign computation.  Cells are stored in
H-representation (explicit equalities plus inequalities); V-representations
are computed only for bounded cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError, InternalConsistencyError
from .linalg import (
    ONE, ZERO, affine_rank, coordinates_in_basis, fm_feasible, fm_minimum,
    fm_sample, implicit_equalities, in_span, nullspace, rank, solve, vec_dot,
    vec_is_zero, vec_scale, vec_sub,
)
from .rho import RhoRational


def _canon_hyperplane(normal, offset):
    for c in normal:
        s = c.sign()
        if s != 0:
            scale = ONE / (c if s > 0 else -c)
            return (tuple(x * scale for x in normal), offset * scale)
    raise InputError("zero normal does not define a hyperplane")


def _point_key(p):
    return tuple(x.sort_key() for x in p)


# ---------------------------------------------------------------------------
# polyhedra in H-representation
# ---------------------------------------------------------------------------

class Polyhedron:
    """{x : eq . x = value for equalities, normal . x <= bound for rows}."""

    __slots__ = ("n", "ineqs", "eqs", "_dim", "_vertices", "label")

    def __init__(self, n, ineqs=(), eqs=(), dim=None, label=None):
        self.n = n
        self.ineqs = _dedupe_rows(ineqs)
        self.eqs = _dedupe_rows(eqs)
        self._dim = dim
        self._vertices = None
        self.label = label

    # -- membership and dimension

    def contains(self, point) -> bool:
        if len(point) != self.n:
            raise InputError("point arity mismatch")
        for normal, value in self.eqs:
            if vec_dot(normal, point) != value:
                return False
        for normal, bound in self.ineqs:
            if (vec_dot(normal, point) - bound).sign() > 0:
                return False
        return True

    def _constraints(self, strict_ineqs=False):
        cons = []
        for normal, value in self.eqs:
            cons.append((normal, value, False))
            cons.append((tuple(-c for c in normal), -value, False))
        for normal, bound in self.ineqs:
            cons.append((normal, bound, strict_ineqs))
        return cons

    def is_empty(self) -> bool:
        return not fm_feasible(self._constraints(), self.n)

    def dim(self) -> int:
        """Affine dimension; computed by implicit-equality detection when not
        supplied at construction."""
        if self._dim is None:
            cons = self._constraints()
            if not fm_feasible(cons, self.n):
                self._dim = -1
            else:
                normals = [n for n, _v in self.eqs]
                normals += [cons[i][0]
                            for i in implicit_equalities(cons, self.n)]
                self._dim = self.n - rank(normals) if normals else self.n
        return self._dim

    def relative_interior_point(self):
        """A point in the relative interior, assuming no inequality row is an
        implicit equality (true for all cells built in this module)."""
        pt = fm_sample(self._constraints(strict_ineqs=True), self.n)
        if pt is None:
            raise InputError("empty or degenerate cell: no interior sample")
        return pt

    def is_bounded(self) -> bool:
        cons = self._constraints()
        for i in range(self.n):
            obj = tuple(ONE if j == i else ZERO for j in range(self.n))
            if fm_minimum(cons, self.n, obj)[0] is None:
                return False
            if fm_minimum(cons, self.n, tuple(-c for c in obj))[0] is None:
                return False
        return True

    def vertices(self):
        """V-representation, for bounded cells only."""
        if self._vertices is not None:
            return self._vertices
        if not self.is_bounded():
            raise InputError("V-representation only for bounded cells")
        rows = list(self.eqs) + list(self.ineqs)
        verts = {}
        for combo in _subsets(len(rows), self.n):
            sub = [rows[i] for i in combo] + list(self.eqs)
            mat = [r[0] for r in sub]
            rhs = [r[1] for r in sub]
            if rank(mat) < self.n:
                continue
            pt = solve(mat, rhs)
            if pt is not None and self.contains(pt):
                verts[_point_key(pt)] = pt
        self._vertices = [verts[k] for k in sorted(verts)]
        return self._vertices

    def __repr__(self):
        return (f"Polyhedron(n={self.n}, dim={self._dim}, "
                f"|eqs|={len(self.eqs)}, |ineqs|={len(self.ineqs)})")


def _subsets(n, k):
    from itertools import combinations
    if k > n:
        return
    yield from combinations(range(n), k)


def _dedupe_rows(rows):
    """Drop rows that are positive multiples of earlier rows.

    Positive scaling fixes the halfspace, so scaling the first nonzero
    coefficient to absolute value one yields a faithful key.
    """
    seen = {}
    for normal, bound in rows:
        normal = tuple(normal)
        mag = None
        for c in normal:
            s = c.sign()
            if s != 0:
                mag = c if s > 0 else -c
                break
        if mag is None:
            if bound.sign() < 0:
                raise InputError("contradictory row with zero normal")
            continue  # 0 <= nonnegative bound: redundant
        scale = ONE / mag
        key = (tuple((x * scale).sort_key() for x in normal),
               (bound * scale).sort_key())
        if key not in seen:
            seen[key] = (normal, bound)
    return tuple(seen.values())


# ---------------------------------------------------------------------------
# convex hulls with face lattice
# ---------------------------------------------------------------------------

@dataclass
class Face:
    """A face of a polytope, identified by its vertex set."""

    vertices: frozenset   # indices into the defining point list
    dim: int
    points_on: frozenset  # all input points lying on the face


@dataclass
class Polytope:
    """Exact convex hull of finitely many Q(rho)-points with face data."""

    points: list
    ambient: int
    dim: int
    vertex_indices: list
    facets: list          # (vertex frozenset, ambient normal, offset)
    faces: list           # Face records, including the top face
    eqs: list             # affine-hull equalities (normal, value)
    base: tuple = ()
    dirs: list = field(default_factory=list)

    def as_polyhedron(self) -> Polyhedron:
        ineqs = [(normal, offset) for _v, normal, offset in self.facets]
        return Polyhedron(self.ambient, ineqs, self.eqs, dim=self.dim)

    def contains(self, point) -> bool:
        return self.as_polyhedron().contains(point)

    def proper_faces(self):
        return [f for f in self.faces if f.dim < self.dim]


def convex_hull(points) -> Polytope:
    """Exact hull with vertices, facets, and the full face lattice.

    Incremental beneath-beyond on simplicial facets with a final merge of
    coplanar pieces; the input points must be pairwise distinct.
    """
    pts = [tuple(p) for p in points]
    if not pts:
        raise InputError("hull of an empty point set")
    seen = set()
    for p in pts:
        k = _point_key(p)
        if k in seen:
            raise InputError("duplicate points in hull input")
        seen.add(k)
    ambient = len(pts[0])
    k = affine_rank(pts)
    base, dirs = _affine_basis_indexed(pts)
    if dirs:
        eqs = [(z, vec_dot(z, base)) for z in nullspace(dirs)]
    else:
        eqs = [(tuple(ONE if j == i else ZERO for j in range(ambient)),
                base[i]) for i in range(ambient)]
    coords = [coordinates_in_basis(p, base, dirs) for p in pts]

    if k == 0:
        face = Face(frozenset([0]), 0, frozenset(range(len(pts))))
        return Polytope(pts, ambient, 0, [0], [], [face], eqs, base, dirs)

    if k == 1:
        sub_facets = _hull_1d(coords)
    else:
        sub_facets = _hull_incremental(coords, k)

    # merge coplanar simplicial facets and recompute full point sets
    merged = {}
    for normal, offset in sub_facets:
        cn, co = _canon_hyperplane(normal, offset)
        key = (tuple(c.sort_key() for c in cn), co.sort_key())
        merged[key] = (cn, co)
    facet_planes = [merged[key] for key in sorted(merged)]
    facet_pointsets = []
    for normal, offset in facet_planes:
        on = frozenset(i for i, c in enumerate(coords)
                       if vec_dot(normal, c) == offset)
        facet_pointsets.append(on)

    # vertices: points whose tight facet normals span the subspace
    vertex_indices = []
    for i, c in enumerate(coords):
        tight = [facet_planes[j][0] for j in range(len(facet_planes))
                 if i in facet_pointsets[j]]
        if tight and rank(tight) == k:
            vertex_indices.append(i)
    vset = set(vertex_indices)

    # ambient facet data
    facets = []
    for (normal, offset), on in zip(facet_planes, facet_pointsets):
        anormal, aoffset = _lift_functional(normal, offset, base, dirs)
        facets.append((frozenset(on & vset), anormal, aoffset))

    faces = _face_lattice(pts, coords, vset, facets, facet_pointsets, k)
    return Polytope(pts, ambient, k, sorted(vset), facets, faces, eqs,
                    base, dirs)


def _affine_basis_indexed(pts):
    base = pts[0]
    dirs = []
    for p in pts[1:]:
        d = vec_sub(p, base)
        if not vec_is_zero(d) and rank(dirs + [d]) > len(dirs):
            dirs.append(d)
    return base, dirs


def _lift_functional(normal, offset, base, dirs):
    """Transport a subspace functional to ambient coordinates.

    With lam(x) solving sum(lam_i * dirs_i) = x - base, the functional
    normal . lam(x) equals a . x - a . base for a in the row space of the
    direction matrix; a is the canonical ambient representative.
    """
    k = len(dirs)
    gram = [[vec_dot(dirs[i], dirs[j]) for j in range(k)] for i in range(k)]
    w = solve([tuple(r) for r in gram], list(normal))
    a = tuple(sum((w[i] * dirs[i][j] for i in range(k)), ZERO)
              for j in range(len(base)))
    return a, offset + vec_dot(a, base)


def _hull_1d(coords):
    vals = [c[0] for c in coords]
    mx = vals[0]
    mn = vals[0]
    for v in vals[1:]:
        if v > mx:
            mx = v
        if v < mn:
            mn = v
    return [((ONE,), mx), ((-ONE,), -mn)]


def _hull_incremental(coords, k):
    """Simplicial beneath-beyond; returns supporting hyperplanes of facets."""
    simplex = _initial_simplex(coords, k)
    inv_k = ONE / RhoRational((k + 1,))
    center = tuple(sum((coords[i][j] for i in simplex), ZERO) * inv_k
                   for j in range(k))

    facets = {}
    next_id = [0]
    ridge_map = {}

    def add_facet(vert_tuple):
        normal, offset = _hyperplane_through([coords[i] for i in vert_tuple])
        side = (vec_dot(normal, center) - offset).sign()
        if side == 0:
            raise InternalConsistencyError("hull center on a facet plane")
        if side > 0:
            normal, offset = tuple(-c for c in normal), -offset
        fid = next_id[0]
        next_id[0] += 1
        facets[fid] = (tuple(sorted(vert_tuple)), normal, offset)
        for r in _ridges(vert_tuple):
            ridge_map.setdefault(r, set()).add(fid)
        return fid

    def drop_facet(fid):
        vert_tuple, _n, _o = facets.pop(fid)
        for r in _ridges(vert_tuple):
            ridge_map[r].discard(fid)
            if not ridge_map[r]:
                del ridge_map[r]

    for combo in _subsets(k + 1, k):
        add_facet(tuple(simplex[i] for i in combo))

    order = [i for i in range(len(coords)) if i not in set(simplex)]
    for idx in order:
        p = coords[idx]
        visible = [fid for fid, (_v, normal, offset) in facets.items()
                   if (vec_dot(normal, p) - offset).sign() > 0]
        if not visible:
            continue
        visible_set = set(visible)
        horizon = []
        for fid in visible:
            for r in _ridges(facets[fid][0]):
                incident = ridge_map[r]
                if incident - visible_set:
                    horizon.append(r)
                elif len(incident) < 2:
                    raise InternalConsistencyError("open simplicial boundary")
        horizon = sorted(set(horizon))
        for fid in visible:
            drop_facet(fid)
        for r in horizon:
            add_facet(tuple(r) + (idx,))

    return [(normal, offset) for _v, normal, offset in facets.values()]


def _initial_simplex(coords, k):
    simplex = [0]
    for i in range(1, len(coords)):
        cand = simplex + [i]
        if affine_rank([coords[j] for j in cand]) == len(cand) - 1:
            simplex.append(i)
            if len(simplex) == k + 1:
                return simplex
    raise InternalConsistencyError("affine rank dropped during simplex search")


def _ridges(vert_tuple):
    if len(vert_tuple) == 1:
        return []
    return [tuple(sorted(vert_tuple[:i] + vert_tuple[i + 1:]))
            for i in range(len(vert_tuple))]


def _hyperplane_through(pts):
    base = pts[0]
    rows = [vec_sub(p, base) for p in pts[1:]]
    kernel = nullspace(rows)
    if len(kernel) != 1:
        raise InternalConsistencyError("degenerate facet points")
    normal = kernel[0]
    return normal, vec_dot(normal, base)


def _face_lattice(pts, coords, vset, facets, facet_pointsets, k):
    """All faces as vertex sets closed under intersection, plus the top."""
    del coords
    face_sets = {}
    for fv, _n, _o in facets:
        face_sets[fv] = True
    frontier = list(face_sets)
    while frontier:
        new = []
        for i, a in enumerate(face_sets.keys()):
            for b in frontier:
                c = a & b
                if c and c not in face_sets and c != a and c != b:
                    new.append(c)
        if not new:
            break
        for c in new:
            face_sets[c] = True
        frontier = new

    faces = []
    facet_list = [(fv, ps) for (fv, _n, _o), ps in zip(facets, facet_pointsets)]
    for fv in face_sets:
        dim = affine_rank([pts[i] for i in fv])
        on = frozenset(range(len(pts)))
        for fvv, ps in facet_list:
            if fv <= fvv:
                on = on & ps
        faces.append(Face(fv, dim, on))
    top = Face(frozenset(vset), k, frozenset(range(len(pts))))
    faces.append(top)
    faces.sort(key=lambda f: (f.dim, sorted(f.vertices)))
    return faces


# ---------------------------------------------------------------------------
# lower faces and regular subdivisions
# ---------------------------------------------------------------------------

def lower_faces(lifted_points):
    """Faces of conv(lifted_points) admitting a selecting functional (w, 1).

    Returns (hull, faces) where each face is a Face record with vertex
    indices into the input list.  When the vertical direction misses the
    affine hull's direction space every face qualifies, the whole polytope
    included (the trivial subdivision); otherwise a face qualifies exactly
    when it lies on a facet whose outward normal points downward.
    """
    pts = [tuple(p) for p in lifted_points]
    hull = convex_hull(pts)
    last = len(pts[0]) - 1
    vertical = tuple(ONE if i == last else ZERO for i in range(last + 1))

    if not in_span(vertical, hull.dirs):
        return hull, list(hull.faces)

    lower_facets = []
    for fv, anormal, _aoffset in hull.facets:
        # the selecting functionals are the positive multiples of -normal
        if (-anormal[last]).sign() > 0:
            lower_facets.append(fv)
    out = [f for f in hull.faces
           if f.dim < hull.dim and any(f.vertices <= fv for fv in lower_facets)]
    return hull, out


def regular_subdivision(points, weights):
    """The polyhedral complex of projected lower faces of the lift.

    Cells are the projections pi(F); the support is conv(points).
    """
    pts, wts = _check_lifted_input(points, weights)
    lifted = [tuple(p) + (w,) for p, w in zip(pts, wts)]
    _hull, faces = lower_faces(lifted)
    n = len(pts[0])
    cells = []
    for f in faces:
        members = sorted(f.vertices)
        cell_points = [pts[i] for i in members]
        sub = convex_hull(_dedupe_points(cell_points))
        poly = sub.as_polyhedron()
        poly._dim = sub.dim
        poly.label = tuple(members)
        poly._vertices = [sub.points[i] for i in sub.vertex_indices]
        cells.append((frozenset(f.vertices), poly))
    return _assemble_complex(n, cells, reverse=False)


def dual_complex(points, weights):
    """The complex of closed regions {w : (w,1) attains its minimum over the
    lift on the face F}, one cell per lower face F.

    Each cell has the explicit description: for every vertex x of F and
    every vertex y of the lifted polytope, (w,1).x <= (w,1).y.  Pairs inside
    F give equalities.  The support is all of Q(rho)^n.
    """
    pts, wts = _check_lifted_input(points, weights)
    lifted = [tuple(p) + (w,) for p, w in zip(pts, wts)]
    hull, faces = lower_faces(lifted)
    n = len(pts[0])
    hull_vertices = sorted(hull.vertex_indices)
    cells = []
    for f in faces:
        members = sorted(f.vertices)
        x0 = members[0]
        eqs = []
        for x in members[1:]:
            normal = vec_sub(pts[x0], pts[x])
            eqs.append((normal, wts[x] - wts[x0]))
        ineqs = []
        for y in hull_vertices:
            if y in f.vertices:
                continue
            normal = vec_sub(pts[x0], pts[y])
            ineqs.append((normal, wts[y] - wts[x0]))
        # dim(cell) = n - dim(F): the only implicit equalities are the
        # within-face pairs, since any other tight vertex would lie on F
        dim = n - rank([vec_sub(pts[x], pts[x0]) for x in members[1:]]) \
            if len(members) > 1 else n
        poly = Polyhedron(n, ineqs, eqs, dim=dim, label=tuple(members))
        cells.append((frozenset(f.vertices), poly))
    return _assemble_complex(n, cells, reverse=True)


def _check_lifted_input(points, weights):
    pts = [tuple(p) for p in points]
    wts = list(weights)
    if len(pts) != len(wts):
        raise InputError("points and weights differ in length")
    if not pts:
        raise InputError("empty point set")
    seen = set()
    for p in pts:
        key = _point_key(p)
        if key in seen:
            raise InternalConsistencyError(
                "duplicate support points: distinct sigma-powers must give "
                "distinct rho-evaluations (exponent-encoding bug?)")
        seen.add(key)
    return pts, wts


def _dedupe_points(pts):
    seen = {}
    for p in pts:
        seen.setdefault(_point_key(p), p)
    return [seen[k] for k in sorted(seen)]


def _assemble_complex(n, labeled_cells, reverse):
    labeled_cells.sort(key=lambda lc: (lc[1].dim(), sorted(lc[0])))
    labels = [lc[0] for lc in labeled_cells]
    cells = [lc[1] for lc in labeled_cells]
    pairs = []
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            if i == j:
                continue
            rel = (b < a) if reverse else (a < b)
            if rel:
                pairs.append((i, j))
    return PolyComplex(n, cells, pairs)


@dataclass
class PolyComplex:
    """A finite collection of cells with an explicit face-of relation."""

    ambient: int
    cells: list
    face_pairs: list  # (i, j): cell i is a face of cell j

    def dims(self):
        return [c.dim() for c in self.cells]

    def dim(self) -> int:
        return max((c.dim() for c in self.cells), default=-1)

    def facet_indices(self):
        proper = {i for i, _j in self.face_pairs}
        return [i for i in range(len(self.cells)) if i not in proper]

    def skeleton(self, k: int) -> "PolyComplex":
        """Cells of dimension at most k, with the face relation restricted."""
        keep = [i for i, c in enumerate(self.cells) if c.dim() <= k]
        index = {old: new for new, old in enumerate(keep)}
        cells = [self.cells[i] for i in keep]
        pairs = [(index[i], index[j]) for i, j in self.face_pairs
                 if i in index and j in index]
        return PolyComplex(self.ambient, cells, pairs)

    def contains_point(self, point) -> bool:
        return any(c.contains(point) for c in self.cells)

    def is_empty(self) -> bool:
        return not self.cells


# ---------------------------------------------------------------------------
# the combinatorial hypersurface
# ---------------------------------------------------------------------------

def hypersurface(f) -> PolyComplex:
    """The (n-1)-skeleton of the dual complex of the valuation-lifted Newton
    points: exactly the locus where the tropical minimum is attained twice.

    A monomial gives the empty complex.
    """
    if f.is_zero():
        raise InputError("empty polynomial has no hypersurface")
    keys = f.exponents()
    points = [f.eval_exponent(k) for k in keys]
    weights = [f.coeff_valuation(k) for k in keys]
    dual = dual_complex(points, weights)
    return dual.skeleton(f.n - 1)


def contains(cell: Polyhedron, point) -> bool:
    """Exact membership of a point in a cell."""
    return cell.contains(point)


def cell_dim(cell: Polyhedron) -> int:
    return cell.dim()


# ---------------------------------------------------------------------------
# validity checks (exactness makes these decidable; used by the test suite)
# ---------------------------------------------------------------------------

def polyhedron_contains_polyhedron(outer: Polyhedron, inner: Polyhedron) -> bool:
    """inner is a subset of outer, decided by exact optimization."""
    cons = inner._constraints()
    if not fm_feasible(cons, inner.n):
        return True
    for normal, value in outer.eqs:
        mn, _att = fm_minimum(cons, inner.n, normal)
        if mn is None or mn != value:
            return False
        mx, _att = fm_minimum(cons, inner.n, tuple(-c for c in normal))
        if mx is None or -mx != value:
            return False
    for normal, bound in outer.ineqs:
        mn, _att = fm_minimum(cons, inner.n, tuple(-c for c in normal))
        if mn is None or (-mn - bound).sign() > 0:
            return False
    return True


def polyhedra_equal(a: Polyhedron, b: Polyhedron) -> bool:
    return polyhedron_contains_polyhedron(a, b) and \
        polyhedron_contains_polyhedron(b, a)


def intersect(a: Polyhedron, b: Polyhedron) -> Polyhedron:
    if a.n != b.n:
        raise InputError("ambient dimension mismatch")
    return Polyhedron(a.n, tuple(a.ineqs) + tuple(b.ineqs),
                      tuple(a.eqs) + tuple(b.eqs))


def exposed_face(cell: Polyhedron, direction) -> Polyhedron:
    """The face of the cell minimizing direction . x (empty when unbounded
    below in that direction)."""
    cons = cell._constraints()
    mn, attained = fm_minimum(cons, cell.n, tuple(direction))
    if mn is None or not attained:
        return _empty_polyhedron(cell.n)
    return Polyhedron(cell.n, cell.ineqs,
                      tuple(cell.eqs) + ((tuple(direction), mn),))


def _empty_polyhedron(n):
    one = tuple(ONE for _ in range(n)) if n else (ONE,)
    return Polyhedron(max(n, 1), [(one, -ONE), (tuple(-c for c in one), -ONE)])


def is_face_of(face: Polyhedron, cell: Polyhedron) -> bool:
    """face equals the subset of cell where its everywhere-tight rows bind.

    A row is tight when it holds with equality on all of the face, i.e. its
    minimum over the face already equals the bound.
    """
    if face.is_empty():
        return True
    if not polyhedron_contains_polyhedron(cell, face):
        return False
    fcons = face._constraints()
    tight = []
    for normal, bound in cell.ineqs:
        mn, _att = fm_minimum(fcons, face.n, normal)
        if mn is not None and mn == bound:
            tight.append((normal, bound))
    candidate = Polyhedron(cell.n, cell.ineqs,
                           tuple(cell.eqs) + tuple(tight))
    return polyhedra_equal(candidate, face)


def complex_is_valid(cx: PolyComplex, check_pairs: bool = True) -> bool:
    """The two polyhedral-complex conditions, checked exactly.

    Recorded face-of pairs must be genuine faces, and pairwise intersections
    must be faces of both cells.
    """
    for i, j in cx.face_pairs:
        if not is_face_of(cx.cells[i], cx.cells[j]):
            return False
    if check_pairs:
        for i in range(len(cx.cells)):
            for j in range(i + 1, len(cx.cells)):
                meet = intersect(cx.cells[i], cx.cells[j])
                if meet.is_empty():
                    continue
                if not is_face_of(meet, cx.cells[i]):
                    return False
                if not is_face_of(meet, cx.cells[j]):
                    return False
    return True
