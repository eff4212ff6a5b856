"""Condenser capacity, u-capacity, and the flux identity diagnostics.

A capacity here is always the Dirichlet energy of the discrete potential that
carries prescribed data on the compact set's nodes and zero on the outer
boundary.  Values are Richardson-extrapolated over the (h, h/2) grid pair by
default; raw per-grid values ride along for error reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import discrete, geometry
from .discrete import Field, assemble, bilinear, dirichlet_solve, energy, richardson
from .errors import ValidationError

__all__ = [
    "CapacityResult",
    "FluxIdentityReport",
    "condenser_capacity",
    "u_capacity",
    "l2_capacity_ratio",
    "capacity_flux_identity",
    "convergence_to_zero",
    "radial_bump",
]

ZERO_THRESHOLD = 1e-12


@dataclass
class CapacityResult:
    """Energy value plus the potential it came from.

    ``value`` and ``l2_norm_sq`` are (h, h/2)-extrapolated when
    ``extrapolated`` is set; ``raw`` holds (h, value, l2) triples per grid.
    The stored potential lives on the finest grid used.
    """

    value: float
    potential: Field
    l2_norm_sq: float
    h: float
    extrapolated: bool
    raw: tuple = field(default_factory=tuple)


def _l2_sq(gridop, fld: Field) -> float:
    g = fld.grid
    return g.hx * g.hy * float((fld.values**2).sum())


def _solve_one(domain, K, data, h):
    grid, op = assemble(domain, h, K)
    if isinstance(data, Field) and data.grid.interior.shape != grid.interior.shape:
        # data given on a different grid of the same domain: bilinear transfer
        sampler = data

        def data_fn(X, Y, _f=sampler):
            return bilinear(_f, X, Y)

        V = dirichlet_solve(op, data_fn)
    else:
        V = dirichlet_solve(op, data)
    val = energy(op, V)
    l2 = _l2_sq(op, V)
    return val, l2, V


def _capacity(domain, K, data, h, extrapolate):
    if K is None:
        grid, _ = assemble(domain, h)
        zero = Field(grid, np.zeros(grid.interior.shape))
        return CapacityResult(0.0, zero, 0.0, h, False, ((h, 0.0, 0.0),))
    val_h, l2_h, _V_h = _solve_one(domain, K, data, h)
    if not extrapolate:
        val = 0.0 if abs(val_h) < ZERO_THRESHOLD else val_h
        return CapacityResult(val, _V_h, l2_h, h, False, ((h, val_h, l2_h),))
    val_f, l2_f, V_f = _solve_one(domain, K, data, h / 2.0)
    val = richardson(val_f, val_h)
    l2 = richardson(l2_f, l2_h)
    if abs(val) < ZERO_THRESHOLD:
        val = 0.0
    return CapacityResult(val, V_f, l2, h, True, ((h, val_h, l2_h), (h / 2.0, val_f, l2_f)))


def condenser_capacity(domain, K, h: float, extrapolate: bool = True) -> CapacityResult:
    """Energy of the potential with data 1 on K, 0 on the boundary."""
    return _capacity(domain, K, 1.0, h, extrapolate)


def u_capacity(domain, K, u, h: float, extrapolate: bool = True) -> CapacityResult:
    """Energy of the potential with data u on K, 0 on the boundary.

    ``u`` may be a callable (x, y) -> values, a Field (transferred to the h/2
    grid bilinearly when extrapolating), or a scalar.
    """
    return _capacity(domain, K, u, h, extrapolate)


def l2_capacity_ratio(result: CapacityResult) -> float:
    """||V||_L2^2 / Cap, the quantity that must vanish along a ladder."""
    if result.value <= ZERO_THRESHOLD:
        raise ValidationError("capacity is zero (data vanishes on K); ratio undefined")
    return result.l2_norm_sq / result.value


# ---------------------------------------------------------------------------
# flux identity


def radial_bump(eps: float, center=(0.0, 0.0)):
    """C^2 radial cutoff: 1 for r <= 2*eps, 0 for r >= 4*eps (quintic ramp)."""
    cx, cy = center

    def eta(X, Y):
        r = np.hypot(np.asarray(X) - cx, np.asarray(Y) - cy)
        s = np.clip((r - 2.0 * eps) / (2.0 * eps), 0.0, 1.0)
        return 1.0 - (10.0 * s**3 - 15.0 * s**4 + 6.0 * s**5)

    return eta


@dataclass
class FluxIdentityReport:
    lhs: float  # u-capacity, directly
    rhs: float  # flux term minus the two volume corrections
    flux: float  # discrete boundary-layer flux of u^2 against V_K
    bounds: tuple  # (min_K u^2, max_K u^2) * Cap
    capacity: float  # condenser capacity on the same grid
    rel_gap: float

    @property
    def flux_within_bounds(self) -> bool:
        lo, hi = self.bounds
        tol = 1e-9 * max(1.0, abs(hi))
        return lo - tol <= self.flux <= hi + tol


def capacity_flux_identity(domain, K, u, h: float) -> FluxIdentityReport:
    """Check the exact capacity identity on one grid.

    lhs = Cap(K, u).  rhs = L - T1 - 2*T2 where L is the boundary-layer flux
    sum of u^2 against the condenser potential V_K, T1 integrates
    V_K * V_{K,u} * Laplace(eta*u), and T2 integrates V_{K,u} * grad V_K .
    grad(eta*u), with eta a C^2 bump equal to 1 on a 2*eps neighborhood of K.
    L must lie between min_K u^2 * Cap and max_K u^2 * Cap.
    """
    if K.variant != "closed_disk":
        raise ValidationError("the flux identity check supports closed_disk sets only")
    eps = K.epsilon
    pts = geometry.sample_points(K)
    margin = min(geometry.boundary_distance(domain, float(px), float(py)) for px, py in pts)
    if margin + eps < 4.0 * eps:
        raise ValidationError("bump support of radius 4*eps does not fit inside the domain")

    grid, op = assemble(domain, h, K)
    VK = dirichlet_solve(op, 1.0)
    VKu = dirichlet_solve(op, u)
    lhs = energy(op, VKu)
    cap = energy(op, VK)

    X, Y = grid.mesh()
    if callable(u):
        uvals = np.asarray(u(X, Y), dtype=float)
    elif isinstance(u, Field):
        uvals = u.values if u.grid.interior.shape == grid.interior.shape else bilinear(u, X, Y)
    else:
        uvals = np.full(grid.interior.shape, float(u))

    # L: flux of V_K out of the constrained layer, weighted by u^2 on K
    wx = grid.hy / grid.hx
    wy = grid.hx / grid.hy
    con = grid.constrained
    v = VK.values
    u2 = uvals**2
    flux = 0.0
    for dj, di, w in ((0, 1, wx), (0, -1, wx), (1, 0, wy), (-1, 0, wy)):
        jj, ii = np.nonzero(con)
        nj, ni = jj + dj, ii + di
        inside = (nj >= 0) & (nj < con.shape[0]) & (ni >= 0) & (ni < con.shape[1])
        jj, ii, nj, ni = jj[inside], ii[inside], nj[inside], ni[inside]
        crosses = ~con[nj, ni]
        flux += w * float(
            ((v[jj, ii][crosses] - v[nj, ni][crosses]) * u2[jj, ii][crosses]).sum()
        )

    # volume corrections with the C^2 bump
    eta = radial_bump(eps, K.center)
    w_field = eta(X, Y) * uvals
    lap = np.zeros(grid.interior.shape)
    lap[1:-1, 1:-1] = (
        (w_field[1:-1, 2:] - 2 * w_field[1:-1, 1:-1] + w_field[1:-1, :-2]) / grid.hx**2
        + (w_field[2:, 1:-1] - 2 * w_field[1:-1, 1:-1] + w_field[:-2, 1:-1]) / grid.hy**2
    )
    vku = VKu.values
    T1 = grid.hx * grid.hy * float((v * vku * lap)[grid.interior].sum())

    dxV = np.diff(v, axis=1)
    dxW = np.diff(w_field, axis=1)
    axu = 0.5 * (vku[:, 1:] + vku[:, :-1])
    dyV = np.diff(v, axis=0)
    dyW = np.diff(w_field, axis=0)
    ayu = 0.5 * (vku[1:, :] + vku[:-1, :])
    T2 = wx * float((dxV * dxW * axu).sum()) + wy * float((dyV * dyW * ayu).sum())

    rhs = flux - T1 - 2.0 * T2
    on_K = u2[con]
    bounds = (float(on_K.min()) * cap, float(on_K.max()) * cap)
    rel_gap = abs(lhs - rhs) / lhs if lhs > 0 else abs(lhs - rhs)
    return FluxIdentityReport(lhs, rhs, flux, bounds, cap, rel_gap)


# ---------------------------------------------------------------------------
# convergence diagnostics


@dataclass
class TrendReport:
    rows: list  # (eps, h, cap, l2_norm_sq)
    decreasing: bool
    l2_over_cap_decreasing: bool
    final_below: float  # the last capacity value

    def below(self, tol: float) -> bool:
        return self.final_below < tol


def convergence_to_zero(domain, family, u, h_rule: float = 8.0, extrapolate: bool = False) -> TrendReport:
    """Capacity trend along a concentrating family; both Cap and ||V||^2/Cap
    must decrease.  ``family`` is a FamilyResult or an iterable of compact
    sets; ``u`` as in u_capacity (use 1.0 for the condenser trend)."""
    sets = family.sets if isinstance(family, geometry.FamilyResult) else tuple(family)
    rows = []
    for K in sets:
        if K is None:
            rows.append((math.nan, math.nan, 0.0, 0.0))
            continue
        h = K.epsilon / h_rule
        res = u_capacity(domain, K, u, h, extrapolate=extrapolate)
        rows.append((K.epsilon, h, res.value, res.l2_norm_sq))
    caps = [r[2] for r in rows]
    ratios = [r[3] / r[2] for r in rows if r[2] > ZERO_THRESHOLD]
    decreasing = all(b < a for a, b in zip(caps, caps[1:]))
    ratio_dec = all(b < a for a, b in zip(ratios, ratios[1:]))
    return TrendReport(rows, decreasing, ratio_dec, caps[-1] if caps else 0.0)
