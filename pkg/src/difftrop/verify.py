"""The three-set cross-verification harness.

The theorem under test says three descriptions of the tropical locus agree:
the support of the dual-complex skeleton, the points whose initial form is
not a monomial, and (the closure of) coordinatewise valuations of actual
roots.  At desk scale the harness checks, exactly:

  * skeleton membership == min-attained-twice, on every grid point;
  * for a rational sample in each skeleton cell's relative interior, a
    residue root of the initial form lifts to a truncated root whose
    valuation vector is the sample (witnessing containment both ways).

Failures of individual lifts are recorded and the run continues; a grid
mismatch is a defect of the first equivalence and flags the whole report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .diffpoly import DiffPolynomial
from .errors import (
    DifftropError, InputError, LiftBudgetExceededError,
)
from .newton import lift_multivariate
from .polyhedral import hypersurface
from .residue import IDENTITY_ORACLE, find_roots_nonmonomial
from .rho import Infinity, RhoRational
from .serialize import (
    certificate_to_json, dumps, gamma_to_json, rho_to_json,
)

DEFAULT_TARGET_MARGIN = Fraction(1, 2)


def parse_grid_spec(spec: str, n: int):
    """Grid points from 'lo:hi:count', one spec for all axes or
    semicolon-separated per-axis specs; bounds are rationals."""
    parts = spec.split(";")
    if len(parts) == 1:
        parts = parts * n
    if len(parts) != n:
        raise InputError(f"grid spec has {len(parts)} axes, expected {n}")
    axes = []
    for part in parts:
        bits = part.split(":")
        if len(bits) != 3:
            raise InputError(f"bad grid axis {part!r}; use lo:hi:count")
        lo, hi, count = Fraction(bits[0]), Fraction(bits[1]), int(bits[2])
        if count < 1:
            raise InputError("grid count must be positive")
        if count == 1:
            axes.append([RhoRational.from_fraction((lo + hi) / 2)])
            continue
        step = (hi - lo) / (count - 1)
        axes.append([RhoRational.from_fraction(lo + k * step)
                     for k in range(count)])
    points = [()]
    for axis in axes:
        points = [p + (v,) for p in points for v in axis]
    return points


@dataclass
class CellWitness:
    cell_index: int
    sample: tuple
    alpha: tuple = None
    certificates: list = None
    valuation_in_hypersurface: bool = None
    error: str = None

    @property
    def ok(self) -> bool:
        return self.error is None and bool(self.valuation_in_hypersurface)


@dataclass
class VerifyReport:
    """Grid agreement of the two membership tests plus lifting witnesses."""

    n: int
    grid: list
    set1: list  # skeleton membership per grid point
    set2: list  # min-attained-twice per grid point
    witnesses: list = field(default_factory=list)
    mismatches: int = 0

    @property
    def lift_failures(self) -> int:
        return sum(0 if w.ok else 1 for w in self.witnesses)

    @property
    def ok(self) -> bool:
        return self.mismatches == 0 and self.lift_failures == 0

    def to_json(self):
        return {
            "n": self.n,
            "grid": [[rho_to_json(c) for c in p] for p in self.grid],
            "set1": self.set1,
            "set2": self.set2,
            "mismatches": self.mismatches,
            "witnesses": [self._witness_json(w) for w in self.witnesses],
            "lift_failures": self.lift_failures,
            "ok": self.ok,
        }

    @staticmethod
    def _witness_json(w: CellWitness):
        from .serialize import scalar_to_json
        out = {
            "cell": w.cell_index,
            "sample": [rho_to_json(c) for c in w.sample],
        }
        if w.error is not None:
            out["error"] = w.error
        else:
            out["alpha"] = [scalar_to_json(a) for a in w.alpha]
            out["certificates"] = [certificate_to_json(c)
                                   for c in w.certificates]
            out["valuation_in_hypersurface"] = w.valuation_in_hypersurface
        return out

    def to_bytes(self) -> bytes:
        return dumps(self.to_json())


def verify_kapranov(f: DiffPolynomial, grid_points, target=None,
                    branch_all=False, oracle=IDENTITY_ORACLE,
                    alpha_retries: int = 3,
                    step_limit: int = None) -> VerifyReport:
    """Cross-check the three-set equivalence for one polynomial.

    ``target`` overrides the default lift target (just past the tropical
    value of each sample); ``step_limit`` tightens the refinement cap so
    stalls surface quickly as recorded failures.
    """
    if f.is_zero():
        raise InputError("empty polynomial")
    hs = hypersurface(f)

    set1, set2 = [], []
    mismatches = 0
    for w in grid_points:
        in_skeleton = hs.contains_point(w)
        _val, attain = f.tropicalize(w)
        twice = len(attain) >= 2
        set1.append(in_skeleton)
        set2.append(twice)
        if in_skeleton != twice:
            mismatches += 1

    witnesses = []
    margin = RhoRational.from_fraction(DEFAULT_TARGET_MARGIN)
    for idx, cell in enumerate(hs.cells):
        try:
            w = cell.relative_interior_point()
        except DifftropError as exc:
            witnesses.append(CellWitness(idx, (), error=str(exc)))
            continue
        trop_value, _attain = f.tropicalize(w)
        eff_target = _effective_target(w, trop_value, target, margin)
        witness = CellWitness(idx, w)
        try:
            inw = f.initial_form(w, oracle)
            last_error = None
            for alpha in find_roots_nonmonomial(inw, oracle,
                                                limit=alpha_retries):
                try:
                    certs = lift_multivariate(f, w, alpha, eff_target, oracle,
                                              step_limit=step_limit)
                except LiftBudgetExceededError as exc:
                    last_error = exc
                    continue
                witness.alpha = alpha
                witness.certificates = certs
                break
            else:
                raise last_error if last_error is not None else \
                    DifftropError("no residue root lifted")
            vals = tuple(c.root.valuation() for c in witness.certificates)
            if vals != tuple(w):
                witness.error = "lifted valuation differs from the sample"
            else:
                witness.valuation_in_hypersurface = hs.contains_point(vals)
        except DifftropError as exc:
            witness.error = f"{type(exc).__name__}: {exc}"
        witnesses.append(witness)

    return VerifyReport(f.n, list(grid_points), set1, set2, witnesses,
                        mismatches)


def _effective_target(w, trop_value, target, margin):
    """Default lift target: just past the tropical value at the sample (the
    natural residual scale), kept above the last coordinate so the pipeline's
    one-variable precondition target > w_n holds."""
    base = trop_value if trop_value > w[-1] else w[-1]
    eff = base + margin
    if target is not None and target > eff:
        eff = target
    return eff
