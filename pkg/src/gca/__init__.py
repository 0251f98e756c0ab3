"""Exact arithmetic for generalized cluster algebras: (r,z)-seed mutation, C/G/F-patterns,
tropical points, and the F-invariant."""

from .poly import LaurentPoly, NotDivisible, PositiveFraction, Ring, ZSymbol, max_divisor_monomial, trop_eval
from .seed import (
    CompatibilityBroken,
    CompatiblePair,
    MutationData,
    NotSkewSymmetrizable,
    Seed,
    YSeed,
    mutate_compatible_pair,
    mutate_seed,
    mutate_y_seed,
)
from .pattern import PatternState, SignCoherenceViolated, check_dualities, walk
from .tropical import SquareCompletion, TropicalPointX, TropicalPointY, phi, psi
from .invariant import ClusterMonomial, Context, f_invariant, pairing_at
from .explore import ExplorationBudgetExceeded, explore

__version__ = "0.1.0"
