"""capshift: capacities of shrinking compact sets and the eigenvalue shifts they drive.

A finite-difference laboratory for Dirichlet Laplacians on planar domains with
small holes, together with the closed-form asymptotics the measurements are
checked against: logarithmic laws for sets concentrating at a point where the
reference eigenfunction does not vanish, power laws with explicit constants for
segments and disks sitting at a zero of order k, and the double covering /
two-pole magnetic operator whose spectrum collides with a slit-domain spectrum
as the poles merge.
"""

from .errors import CapshiftError, HypothesisViolation, NumericalFailure, ValidationError

__version__ = "0.1.0"

__all__ = [
    "CapshiftError",
    "ValidationError",
    "HypothesisViolation",
    "NumericalFailure",
    "__version__",
]
