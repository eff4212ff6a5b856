"""Leading local behavior of an eigenfield at the concentration point.

Near an interior zero of order k a Dirichlet eigenfunction looks like
beta * r^k * sin(alpha - k t) plus O(r^{k+2}) in its own angular mode, the
neighboring modes carrying the O(r^{k+1}) Taylor rest.  We therefore read the
k-th Fourier mode of the field on two circles and eliminate the r^2
contamination exactly with the weights (r0^2 g(r1) - r1^2 g(r0))/(r0^2 - r1^2)
applied to g(r) = mode_k(r)/r^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .closed_form import HomogeneousPolynomial, harmonic_polynomial
from .discrete import Field, bilinear
from .errors import HypothesisViolation, ValidationError

__all__ = ["LocalExpansion", "extract", "to_polynomial"]

_DOMINANCE = 10.0  # mode must beat every smaller-index mode by this factor
_NOISE_FACTOR = 100.0  # and the high-frequency noise floor by this one


@dataclass(frozen=True)
class LocalExpansion:
    """Vanishing order k with amplitude beta > 0 and phase alpha in [0, pi).

    The pair (beta, alpha) describes the field up to a global sign; only
    beta^2 and the squared polynomial coefficients enter any downstream law.
    ``fit_residual`` is the relative disagreement of the two single-radius
    amplitude readings around their combined value.
    """

    k: int
    beta: float
    alpha: float
    fit_residual: float
    radii: tuple

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError("vanishing order must be nonnegative")
        if not self.beta > 0:
            raise ValidationError("amplitude must be positive after folding")
        if not (0.0 <= self.alpha < math.pi):
            raise ValidationError("phase must lie in [0, pi)")


def _amplitudes(field: Field, center, r: float, n_angles: int):
    t = np.arange(n_angles) * (2.0 * math.pi / n_angles)
    vals = bilinear(field, center[0] + r * np.cos(t), center[1] + r * np.sin(t))
    co = np.fft.rfft(vals) / n_angles
    amp = np.abs(co)
    amp[1:] *= 2.0
    return co, amp


def _detect_order(amp: np.ndarray, k_max: int) -> int | None:
    tail = amp[k_max + 1 : len(amp) - 1]
    noise = float(tail.max()) if tail.size else 0.0
    noise = max(noise, 1e-13 * max(float(amp.max()), 1.0))
    for k in range(k_max + 1):
        prior = float(amp[:k].max()) if k > 0 else 0.0
        if amp[k] > _NOISE_FACTOR * noise and amp[k] > _DOMINANCE * prior:
            return k
    return None


def extract(
    field: Field,
    radii: tuple | None = None,
    center=(0.0, 0.0),
    n_angles: int = 256,
    k_max: int = 8,
) -> LocalExpansion:
    """Read (k, beta, alpha) off two sampling circles around ``center``.

    Default radii are (16h, 8h): big enough to beat bilinear interpolation
    noise, small enough to stay in the leading-order regime.  The vanishing
    order must come out identical on both circles.
    """
    grid = field.grid
    h = max(grid.hx, grid.hy)
    if radii is None:
        radii = (16.0 * h, 8.0 * h)
    r0, r1 = float(radii[0]), float(radii[1])
    if not (r0 > r1 > 0.0):
        raise ValidationError("radii must satisfy r0 > r1 > 0")
    if r0 >= geometry.boundary_distance(grid.domain, *center):
        raise ValidationError("outer sampling circle leaves the domain")

    readings = []
    orders = []
    for r in (r0, r1):
        co, amp = _amplitudes(field, center, r, n_angles)
        readings.append(co)
        orders.append(_detect_order(amp, k_max))
    if orders[0] is None and orders[1] is None:
        raise HypothesisViolation("zero function locally")
    if orders[0] != orders[1]:
        raise ValidationError(
            f"inconsistent vanishing order between radii: {orders[0]} vs {orders[1]}"
        )
    k = orders[0]

    # per-radius complex mode -> (A, B) with field ~ A cos(kt) + B sin(kt),
    # then g(r) = amplitude/r^k and the exact r^2 cancellation
    AB = []
    for co, r in zip(readings, (r0, r1)):
        if k == 0:
            A, B = float(co[0].real), 0.0
        else:
            A, B = 2.0 * float(co[k].real), -2.0 * float(co[k].imag)
        AB.append((A / r**k, B / r**k))
    w0 = r0**2 / (r0**2 - r1**2)
    A = w0 * AB[1][0] + (1.0 - w0) * AB[0][0]
    B = w0 * AB[1][1] + (1.0 - w0) * AB[0][1]

    beta = math.hypot(A, B)
    if beta == 0.0:
        raise HypothesisViolation("zero function locally")
    amps = [math.hypot(a, b) for a, b in AB]
    residual = max(abs(a - beta) for a in amps) / (2.0 * beta)

    if k == 0:
        # constant leading term: only beta * sin(alpha) = |u(0)| is defined
        return LocalExpansion(0, abs(A), math.pi / 2.0, residual, (r0, r1))
    alpha = math.atan2(A, -B)
    if alpha < 0.0:
        alpha += math.pi  # describes -field; squares are unaffected
    if alpha >= math.pi:
        alpha -= math.pi
    return LocalExpansion(k, beta, alpha, residual, (r0, r1))


def to_polynomial(le: LocalExpansion) -> HomogeneousPolynomial:
    """Homogeneous harmonic polynomial matching beta r^k sin(alpha - kt)."""
    return harmonic_polynomial(le.k, le.beta, le.alpha)
