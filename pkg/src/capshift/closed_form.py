"""Exact mode-energy formulas and asymptotic predictors.

Everything here is a pure function of scalars and polynomial coefficients: the
elliptic-coordinate capacity of a segment with polynomial boundary data (exact
at finite scale, not just to leading order), the analogous disk formula, the
combinatorial constants entering the power laws, the radial condenser value,
and a predictor that turns local data (vanishing order k, amplitude beta,
angle alpha, or the plain value at the point) into the expected leading law.

Circle integrals use periodic trapezoidal quadrature with 4096 nodes, which is
exact to machine precision for the trigonometric polynomials that occur here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolation, ValidationError

__all__ = [
    "HomogeneousPolynomial",
    "LocalExpansionForm",
    "AsymptoticPrediction",
    "fourier_A",
    "C_constant",
    "xi_eps",
    "ellipse_segment_capacity_exact",
    "disk_fourier_coeffs",
    "D_constant",
    "disk_Pk_capacity_exact",
    "radial_condenser_capacity",
    "harmonic_polynomial",
    "predict",
    "THEOREM_IDS",
]

_NQ = 4096
_THETA = np.arange(_NQ) * (2.0 * math.pi / _NQ)

THEOREM_IDS = ("T-one", "T-seg", "T-disk", "T-AB", "T-seg-tangent", "P-nonvanishing", "P-diam")


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class HomogeneousPolynomial:
    """P(x1, x2) = sum_j coeffs[j] * x1^(k-j) * x2^j, homogeneous of degree k."""

    degree: int
    coeffs: tuple

    def __post_init__(self):
        if self.degree < 0:
            raise ValidationError("degree must be nonnegative")
        if len(self.coeffs) != self.degree + 1:
            raise ValidationError("need exactly degree+1 coefficients")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def evaluate(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        k = self.degree
        out = np.zeros(np.broadcast(x1, x2).shape)
        for j, c in enumerate(self.coeffs):
            if c != 0.0 or k == 0:
                out = out + c * x1 ** (k - j) * x2**j
        if out.ndim == 0:
            return float(out)
        return out

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coeffs)


def harmonic_polynomial(k: int, beta: float, alpha: float) -> HomogeneousPolynomial:
    """Coefficients of beta * r^k * sin(alpha - k t) in the x1^(k-j) x2^j basis.

    This is beta*sin(alpha)*Re[(x1+i x2)^k] - beta*cos(alpha)*Im[(x1+i x2)^k];
    the leading coefficient is c_0 = beta*sin(alpha).
    """
    if k < 0:
        raise ValidationError("k must be nonnegative")
    if k == 0:
        return HomogeneousPolynomial(0, (beta * math.sin(alpha),))
    cs = beta * math.sin(alpha)
    cc = beta * math.cos(alpha)
    coeffs = []
    for m in range(k + 1):
        binom = math.comb(k, m)
        if m % 2 == 0:
            coeffs.append(cs * binom * (-1.0) ** (m // 2))
        else:
            coeffs.append(-cc * binom * (-1.0) ** ((m - 1) // 2))
    return HomogeneousPolynomial(k, tuple(coeffs))


@dataclass(frozen=True)
class LocalExpansionForm:
    """Local behavior u ~ beta * r^k * sin(alpha - k t) near the marked point.

    k is the vanishing order, beta > 0 the amplitude, alpha in [0, pi) the
    angle; the induced homogeneous polynomial has leading coefficient
    c0 = beta*sin(alpha).  For k = 0 the convention is alpha = pi/2, so
    c0 = beta = |u(0)|.
    """

    k: int
    beta: float
    alpha: float

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError("k must be nonnegative")
        if not self.beta > 0:
            raise ValidationError("beta must be positive")
        if not (0.0 <= self.alpha < math.pi):
            raise ValidationError("alpha must lie in [0, pi)")

    @property
    def c0(self) -> float:
        return self.beta * math.sin(self.alpha)

    def polynomial(self) -> HomogeneousPolynomial:
        return harmonic_polynomial(self.k, self.beta, self.alpha)


# ---------------------------------------------------------------------------
# quadrature constants


def _cosine_mode(values: np.ndarray, j: int) -> float:
    # (1/pi) * integral over the period; trapezoid = 2 * mean for periodic data
    return float(2.0 * np.mean(values * np.cos(j * _THETA)))


def _sine_mode(values: np.ndarray, j: int) -> float:
    return float(2.0 * np.mean(values * np.sin(j * _THETA)))


def fourier_A(j: int, k: int) -> float:
    """(1/pi) * integral of cos^k(t) cos(jt) over the period, j >= 1.

    Returns exact 0.0 for j > k or mismatched parity (orthogonality); otherwise
    the 4096-node trapezoid value, exact for these trigonometric polynomials.
    """
    if j < 1 or k < 1:
        raise ValidationError("fourier_A needs j >= 1 and k >= 1")
    if j > k or (k - j) % 2 == 1:
        return 0.0
    return _cosine_mode(np.cos(_THETA) ** k, j)


def _fourier_A_with_mean(j: int, k: int) -> float:
    # same integral but j = 0 allowed (value 2*mean of cos^k)
    if j == 0:
        if k % 2 == 1:
            return 0.0
        return float(2.0 * np.mean(np.cos(_THETA) ** k)) if k > 0 else 2.0
    return fourier_A(j, k)


def C_constant(k: int) -> float:
    """sum_{j=1..k} j * A_{j,k}^2; strictly positive for k >= 1."""
    if k < 1:
        raise ValidationError("C is undefined for k = 0; the logarithmic law applies there")
    return sum(j * fourier_A(j, k) ** 2 for j in range(1, k + 1))


def xi_eps(eps: float, L: float) -> float:
    """Elliptic radial coordinate of the confocal ellipse of scale L: asinh(L/eps)."""
    if not (eps > 0 and L > 0):
        raise ValidationError("eps and L must be positive")
    return math.asinh(L / eps)


# ---------------------------------------------------------------------------
# exact condenser energies


def ellipse_segment_capacity_exact(eps: float, L: float, P: HomogeneousPolynomial) -> float:
    """Energy of the condenser potential between the segment [-eps, eps] x {0}
    with boundary data P and the confocal ellipse of scale L, exact at finite eps.

    Only the trace of P on the segment matters, i.e. the leading coefficient
    c0: the data in the elliptic angle is c0 * eps^k * cos^k(eta).  Each
    Fourier mode's radial profile is an explicit combination of e^{+-j xi};
    the mode energies are summed in a cancellation-free form using
    q = e^{-2 j xi}.
    """
    if not (eps > 0 and L > 0):
        raise ValidationError("eps and L must be positive")
    k = P.degree
    c0 = P.coeffs[0]
    if c0 == 0.0:
        return 0.0
    xi = xi_eps(eps, L)
    a0 = c0 * _fourier_A_with_mean(0, k)
    total = (math.pi / 2.0) * a0 * a0 / xi
    for j in range(1, k + 1):
        aj = c0 * _fourier_A_with_mean(j, k)
        if aj == 0.0:
            continue
        q = math.exp(-2.0 * j * xi)
        den = (1.0 - q) ** 2
        radial_sq = 0.5 * j * aj * aj * ((1.0 - q * q) + 4.0 * j * xi * q) / den
        angular_sq = (0.5 / j) * aj * aj * ((1.0 - q * q) - 4.0 * j * xi * q) / den
        total += math.pi * (radial_sq + j * j * angular_sq)
    return eps ** (2 * k) * total


def disk_fourier_coeffs(P: HomogeneousPolynomial):
    """Fourier coefficients of t -> P(cos t, sin t): (a_0..a_k, b_0..b_k), b_0 = 0."""
    k = P.degree
    if k < 1:
        raise ValidationError("disk coefficients need degree >= 1")
    f = P.evaluate(np.cos(_THETA), np.sin(_THETA))
    a = np.array([_cosine_mode(f, j) for j in range(k + 1)])
    a[0] = float(2.0 * np.mean(f))
    b = np.array([0.0] + [_sine_mode(f, j) for j in range(1, k + 1)])
    return a, b


def D_constant(P: HomogeneousPolynomial) -> float:
    """k*a_0^2/4 + sum_j (k+j)^2/(2k) * (a_j^2 + b_j^2); equals 2k*beta^2 for
    the pure harmonic beta*r^k*sin(alpha - kt)."""
    k = P.degree
    if k < 1:
        raise ValidationError("D is undefined for k = 0; the logarithmic law applies there")
    if P.is_zero():
        raise ValidationError("D requires a nonzero polynomial")
    a, b = disk_fourier_coeffs(P)
    out = k * a[0] ** 2 / 4.0
    for j in range(1, k + 1):
        out += (k + j) ** 2 / (2.0 * k) * (a[j] ** 2 + b[j] ** 2)
    return out


def disk_Pk_capacity_exact(eps: float, R: float, P: HomogeneousPolynomial) -> float:
    """Condenser energy in B(0,R) of the closed disk of radius eps carrying the
    data P, exact at finite eps: interior harmonic-extension energy plus the
    annulus energy with the exact (1 + (eps/R)^{2j})/(1 - (eps/R)^{2j}) factors.
    """
    k = P.degree
    if k < 1:
        raise ValidationError("use radial_condenser_capacity for degree-0 data")
    if not (0 < eps < R):
        raise ValidationError("need 0 < eps < R")
    a, b = disk_fourier_coeffs(P)
    e2k = eps ** (2 * k)
    inner = k * k * math.pi * a[0] ** 2 / 2.0
    for j in range(1, k + 1):
        inner += math.pi * (k * k + j * j) * (a[j] ** 2 + b[j] ** 2)
    inner *= e2k / (2.0 * k)
    rho = eps / R
    outer = math.pi * a[0] ** 2 * e2k / (2.0 * math.log(R / eps))
    for j in range(1, k + 1):
        r2j = rho ** (2 * j)
        outer += math.pi * e2k * j * (a[j] ** 2 + b[j] ** 2) * (1.0 + r2j) / (1.0 - r2j)
    return inner + outer


def radial_condenser_capacity(delta: float, R: float) -> float:
    """Condenser energy between the circle of radius delta (data 1) and radius R."""
    if not (0 < delta < R):
        raise ValidationError("need 0 < delta < R")
    return 2.0 * math.pi / math.log(R / delta)


# ---------------------------------------------------------------------------
# predictors


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Leading law for a shrinking-family quantity.

    law_kind "log_law" means constant/|log s|, "power_law" means
    constant * s^exponent, "upper_bound" means O(s^exponent) with no constant.
    ``variable`` names the small parameter (eps, delta, or the pole
    half-distance a) purely for reporting.
    """

    theorem_id: str
    law_kind: str
    constant: float | None
    exponent: float | None
    variable: str = "eps"

    def __post_init__(self):
        if self.law_kind not in ("log_law", "power_law", "upper_bound"):
            raise ValidationError(f"unknown law kind {self.law_kind!r}")
        if self.law_kind == "power_law" and not (self.exponent and self.exponent > 0):
            raise ValidationError("power law needs a positive exponent")
        if self.law_kind == "log_law" and not (self.constant and self.constant > 0):
            raise ValidationError("log law needs a positive constant")

    def leading_term(self, s: float) -> float:
        if s <= 0:
            raise ValidationError("the small parameter must be positive")
        if self.law_kind == "log_law":
            return self.constant / abs(math.log(s))
        if self.law_kind == "power_law":
            return self.constant * s**self.exponent
        return math.nan  # upper bound carries no constant

    @property
    def leading_term_fn(self):
        return self.leading_term


def _get_u0_sq(theorem_id: str, params: dict) -> float:
    if params.get("u0_sq") is not None:
        return float(params["u0_sq"])
    if params.get("u0") is not None:
        return float(params["u0"]) ** 2
    raise ValidationError(f"{theorem_id} requires u0 or u0_sq (value of the eigenfunction at the point)")


_TANGENT_SIN_TOL = 1e-6


def predict(theorem_id: str, params: dict | None = None) -> AsymptoticPrediction:
    """Leading-term prediction for the given statement and local data.

    params may carry: k (vanishing order), beta, alpha (local amplitude and
    angle), u0 or u0_sq (eigenfunction value / squared value at the point).
    Requirements per id:
      T-one, P-nonvanishing  -> u0 or u0_sq            (log law, 2*pi*u0^2)
      P-diam                 -> nothing                (log law, 2*pi)
      T-seg, T-AB            -> k; then u0/u0_sq if k=0, else beta, alpha
      T-disk                 -> k; then u0/u0_sq if k=0, else beta
      T-seg-tangent          -> k                      (upper bound eps^(2k+2))
    """
    params = dict(params or {})
    if theorem_id not in THEOREM_IDS:
        raise ValidationError(f"unknown theorem_id {theorem_id!r}; expected one of {THEOREM_IDS}")

    if theorem_id in ("T-one", "P-nonvanishing"):
        c = 2.0 * math.pi * _get_u0_sq(theorem_id, params)
        return AsymptoticPrediction(theorem_id, "log_law", c, None, variable="delta")

    if theorem_id == "P-diam":
        return AsymptoticPrediction(theorem_id, "log_law", 2.0 * math.pi, None, variable="delta")

    if theorem_id == "T-seg-tangent":
        if params.get("k") is None:
            raise ValidationError("T-seg-tangent requires k (the vanishing order)")
        k = int(params["k"])
        return AsymptoticPrediction(theorem_id, "upper_bound", None, 2.0 * k + 2.0)

    # T-seg, T-disk, T-AB
    if params.get("k") is None:
        raise ValidationError(f"{theorem_id} requires k (the vanishing order)")
    k = int(params["k"])
    variable = "a" if theorem_id == "T-AB" else "eps"
    if k == 0:
        c = 2.0 * math.pi * _get_u0_sq(theorem_id, params)
        return AsymptoticPrediction(theorem_id, "log_law", c, None, variable=variable)
    if params.get("beta") is None:
        raise ValidationError(f"{theorem_id} with k >= 1 requires beta (local amplitude)")
    beta = float(params["beta"])
    if theorem_id == "T-disk":
        return AsymptoticPrediction(theorem_id, "power_law", 2.0 * k * math.pi * beta * beta, 2.0 * k)
    if params.get("alpha") is None:
        raise ValidationError(f"{theorem_id} with k >= 1 requires alpha (local angle)")
    alpha = float(params["alpha"])
    s = math.sin(alpha)
    if abs(s) < _TANGENT_SIN_TOL:
        raise HypothesisViolation(
            f"{theorem_id} requires alpha != 0 (set tangent to the nodal direction); "
            "route this case to T-seg-tangent"
        )
    c = math.pi * beta * beta * s * s * C_constant(k)
    return AsymptoticPrediction(theorem_id, "power_law", c, 2.0 * k, variable=variable)
