"""Numerical tolerances, overridable at runtime.

Geometric predicates (orthonormality, symmetry of matrices, rank tests)
use GEOM_TOL; functional comparisons (support/gauge identities, volume
ratios) use FUNC_TOL.  Mutate the module-level ``tols`` instance to
override globally, or pass explicit ``tol=`` arguments per call.
"""

from dataclasses import dataclass


@dataclass
class Tolerances:
    geom: float = 1e-10
    func: float = 1e-8


tols = Tolerances()
