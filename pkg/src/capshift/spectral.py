"""Spectra of the domain with and without the compact obstacle, and shifts.

The shift Delta-lambda is always formed from two spectra computed on the SAME
grid (identical stencil away from K) so the discretization bias cancels in the
difference; the (h, h/2) pair then extrapolates the residual second-order
error.  Eigenvalue indices N are 1-based and counted with multiplicity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discrete import assemble, lowest_eigenpairs, richardson
from .errors import HypothesisViolation, ValidationError

__all__ = [
    "SpectralResult",
    "ShiftResult",
    "spectrum",
    "perturbed_spectrum",
    "simplicity_gap",
    "eigenvalue_shift",
]

SIMPLE_MESSAGE = "theorem hypotheses require simple eigenvalue"


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray  # ascending, length M
    fields: list  # Field per eigenvalue, L2-normalized
    h: float
    extrapolated: np.ndarray | None = None  # (h, h/2) Richardson values

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.eigenvalues)

    def best(self, N: int) -> float:
        """Best available estimate of lambda_N (extrapolated if present)."""
        vals = self.extrapolated if self.extrapolated is not None else self.eigenvalues
        return float(vals[N - 1])


def _spectrum(domain, K, h, M, extrapolate):
    _, op = assemble(domain, h, K)
    pairs = lowest_eigenpairs(op, M)
    lams = np.array([p[0] for p in pairs])
    fields = [p[1] for p in pairs]
    extrap = None
    if extrapolate:
        _, op2 = assemble(domain, h / 2.0, K)
        pairs2 = lowest_eigenpairs(op2, M)
        lams2 = np.array([p[0] for p in pairs2])
        extrap = np.array([richardson(f, c) for f, c in zip(lams2, lams)])
    return SpectralResult(lams, fields, h, extrap)


def spectrum(domain, h: float, M: int, extrapolate: bool = False) -> SpectralResult:
    """Lowest M Dirichlet eigenvalues/eigenfields of the domain."""
    return _spectrum(domain, None, h, M, extrapolate)


def perturbed_spectrum(domain, K, h: float, M: int, extrapolate: bool = False) -> SpectralResult:
    """Lowest M eigenvalues with the compact set's nodes constrained to zero."""
    if K is None:
        raise ValidationError("perturbed_spectrum needs a compact set; use spectrum otherwise")
    return _spectrum(domain, K, h, M, extrapolate)


def simplicity_gap(result: SpectralResult, N: int, rel_tol: float = 1e-3) -> bool:
    """True iff lambda_N is separated from its neighbors by rel_tol relatively."""
    lams = result.eigenvalues
    if N < 1 or N + 1 > len(lams):
        raise ValidationError("need eigenvalues up to N+1 for the gap check")
    gap_up = lams[N] - lams[N - 1]
    gap_down = lams[N - 1] - lams[N - 2] if N >= 2 else np.inf
    return min(gap_up, gap_down) / lams[N - 1] > rel_tol


@dataclass
class ShiftResult:
    delta: float  # lambda_N(domain minus K) - lambda_N(domain), extrapolated
    lam: float
    lam_perturbed: float
    h: float
    raw: tuple  # ((h, lam, lam_pert, delta), (h/2, ...)) same-grid differences
    extrapolated: bool


def eigenvalue_shift(domain, K, N: int, h: float, extrapolate: bool = True) -> ShiftResult:
    """Same-grid eigenvalue shift for the N-th eigenvalue (1-based).

    Raises HypothesisViolation when lambda_N fails the simplicity gap check.
    """
    if N < 1:
        raise ValidationError("N is 1-based and must be >= 1")
    spacings = (h, h / 2.0) if extrapolate else (h,)
    rows = []
    for s in spacings:
        base = spectrum(domain, s, N + 1)
        if not simplicity_gap(base, N):
            raise HypothesisViolation(SIMPLE_MESSAGE)
        pert = perturbed_spectrum(domain, K, s, N)
        lam = float(base.eigenvalues[N - 1])
        lam_p = float(pert.eigenvalues[N - 1])
        rows.append((s, lam, lam_p, lam_p - lam))
    if extrapolate:
        lam = richardson(rows[1][1], rows[0][1])
        lam_p = richardson(rows[1][2], rows[0][2])
        delta = richardson(rows[1][3], rows[0][3])
    else:
        _, lam, lam_p, delta = rows[0]
    return ShiftResult(delta, lam, lam_p, h, tuple(rows), extrapolate)
