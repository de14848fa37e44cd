"""Tropical geometry of Laurent difference polynomials.

Exact computation over a multiplicative valued Hahn field: tropicalization
and initial forms, the dual polyhedral complex whose skeleton carries the
tropical locus, and Newton-style lifting of residue roots to truncated
series roots, with a harness cross-checking the three descriptions of that
locus against each other.
"""

from .diffpoly import FIELD_K, FIELD_k, DiffPolynomial, MultiIndex, SigmaExponent
from .errors import DifftropError, InputError, InternalConsistencyError
from .hahn import HahnSeries, splitting
from .newton import (
    EpsilonReport, LiftCertificate, epsilon, lift_multivariate,
    lift_univariate, lift_univariate_branches, refine,
)
from .parse import parse_gamma_vector, parse_hahn, parse_poly, parse_rho
from .polyhedral import (
    PolyComplex, Polyhedron, Polytope, convex_hull, dual_complex,
    hypersurface, lower_faces, regular_subdivision,
)
from .residue import (
    IDENTITY_ORACLE, AlgebraicScalar, ResidueFieldOracle,
    find_root_nonmonomial, find_roots_nonmonomial, roots_univariate,
    sigma_bar, solve_difference_univariate,
)
from .rho import INF, RhoContext, RhoRational, get_context, set_constant, sigma_gamma
from .verify import VerifyReport, parse_grid_spec, verify_kapranov

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
