"""Capacity layer: condenser/u-capacity values, identities, and trends."""

import functools
import math

import numpy as np
import pytest

from capshift import capacity, discrete, geometry
from capshift.errors import ValidationError

RECT = geometry.rectangle(1.0, 0.8)
UNIT_DISK = geometry.disk(1.0)


def u1_rect(X, Y):
    # first Dirichlet mode of the 1 x 0.8 box, L2-normalized; u1(0,0)^2 = 5
    return (2.0 / math.sqrt(0.8)) * np.cos(np.pi * np.asarray(X)) * np.cos(
        np.pi * np.asarray(Y) / 0.8
    )


@functools.lru_cache(maxsize=None)
def rect_disk_pair(eps=0.05):
    h = eps / 8.0
    K = geometry.closed_disk(eps)
    cap = capacity.condenser_capacity(RECT, K, h)
    ucap = capacity.u_capacity(RECT, K, u1_rect, h)
    return cap, ucap


# --- condenser values ------------------------------------------------------


def test_disk_in_disk_matches_radial_closed_form():
    # Cap(disk(0.1) inside disk(1)) = 2*pi / log(10)
    exact = 2.0 * math.pi / math.log(10.0)
    res = capacity.condenser_capacity(UNIT_DISK, geometry.closed_disk(0.1), h=1.0 / 128.0)
    assert res.extrapolated
    assert abs(res.value - exact) / exact < 0.02


def test_unit_data_equals_condenser_exactly():
    K = geometry.closed_disk(0.05)
    h = 1.0 / 128.0
    a = capacity.condenser_capacity(RECT, K, h, extrapolate=False)
    b = capacity.u_capacity(RECT, K, 1.0, h, extrapolate=False)
    assert a.value == b.value
    assert a.l2_norm_sq == b.l2_norm_sq


def test_u_capacity_tracks_nonvanishing_data_value():
    # for data u1 on a small disk at the center, Cap(K, u1) ~ u1(0)^2 * Cap(K)
    cap, ucap = rect_disk_pair()
    assert abs(ucap.value / cap.value - 5.0) / 5.0 < 0.05


def test_data_vanishing_on_set_gives_exact_zero():
    # vertical segment on the x1 = 0 line, data x1: every constrained node is 0
    K = geometry.segment(0.1, angle=math.pi / 2.0)
    res = capacity.u_capacity(RECT, K, lambda X, Y: np.asarray(X), h=1.0 / 128.0)
    assert res.value == 0.0
    with pytest.raises(ValidationError):
        capacity.l2_capacity_ratio(res)


def test_no_set_means_zero_capacity():
    res = capacity.condenser_capacity(RECT, None, h=1.0 / 64.0)
    assert res.value == 0.0 and res.l2_norm_sq == 0.0


def test_raw_triples_record_both_grids():
    cap, _ = rect_disk_pair()
    assert len(cap.raw) == 2
    (h0, v0, _), (h1, v1, _) = cap.raw
    assert h1 == h0 / 2.0
    # extrapolated value = (4*fine - coarse) / 3
    assert cap.value == pytest.approx((4.0 * v1 - v0) / 3.0, rel=1e-12)


# --- structural invariants -------------------------------------------------


def test_monotone_in_the_set():
    h = 1.0 / 128.0
    small = capacity.condenser_capacity(UNIT_DISK, geometry.closed_disk(0.05), h, extrapolate=False)
    big = capacity.condenser_capacity(UNIT_DISK, geometry.closed_disk(0.1), h, extrapolate=False)
    seg = capacity.condenser_capacity(UNIT_DISK, geometry.segment(0.1), h, extrapolate=False)
    assert small.value < big.value
    assert seg.value < big.value  # the segment sits inside the disk of its half-length


def test_potential_dominated_by_scaled_condenser_potential():
    # |V_{K,u}| <= max_K |u| * V_K at every node
    h = 1.0 / 128.0
    K = geometry.closed_disk(0.08)

    def u(X, Y):
        return 2.0 + np.sin(3.0 * np.asarray(X)) * np.cos(np.asarray(Y))

    vk = capacity.condenser_capacity(RECT, K, h, extrapolate=False).potential
    vku = capacity.u_capacity(RECT, K, u, h, extrapolate=False).potential
    grid = vk.grid
    X, Y = grid.mesh()
    umax = np.abs(u(X, Y))[grid.constrained].max()
    assert (np.abs(vku.values) <= umax * vk.values + 1e-12).all()


def test_solution_minimizes_energy_among_admissible_fields():
    # competitor: bump * u agrees with the data on K and vanishes near the wall
    h = 1.0 / 160.0
    eps = 0.05
    K = geometry.closed_disk(eps)

    def u(X, Y):
        return 1.0 + 0.5 * np.asarray(X)

    grid, op = discrete.assemble(RECT, h, K)
    X, Y = grid.mesh()
    eta = capacity.radial_bump(eps)
    competitor = discrete.Field(grid, eta(X, Y) * u(X, Y))
    solved = capacity.u_capacity(RECT, K, u, h, extrapolate=False)
    assert solved.value <= discrete.energy(op, competitor) + 1e-12


def test_remainder_data_decays_at_higher_order():
    # data vanishing to second order at the concentration point: the energy
    # ladder must fall like eps^4 (slope safely above the first-order laws)
    vals, ladder = [], (0.2, 0.1, 0.05)
    for eps in ladder:
        res = capacity.u_capacity(
            UNIT_DISK,
            geometry.closed_disk(eps),
            lambda X, Y: np.asarray(X) ** 2,
            h=eps / 8.0,
            extrapolate=False,
        )
        vals.append(res.value)
    slope = np.polyfit(np.log(ladder), np.log(vals), 1)[0]
    assert 3.8 <= slope <= 5.0


# --- radial bump -----------------------------------------------------------


def test_radial_bump_profile():
    eta = capacity.radial_bump(0.1)
    r = np.array([0.0, 0.15, 0.2, 0.3, 0.4, 0.55])
    out = eta(r, np.zeros_like(r))
    assert out[0] == 1.0 and out[1] == 1.0 and out[2] == 1.0
    assert out[3] == pytest.approx(0.5, abs=1e-14)
    assert out[4] == 0.0 and out[5] == 0.0
    fine = eta(np.linspace(0.2, 0.4, 200), np.zeros(200))
    assert (np.diff(fine) <= 1e-15).all()


# --- flux identity ---------------------------------------------------------


def test_flux_identity_unit_data_collapses():
    # with u = 1 both correction terms cancel in exact arithmetic and the
    # boundary-layer flux IS the capacity
    K = geometry.closed_disk(0.05)
    rep = capacity.capacity_flux_identity(RECT, K, 1.0, h=1.0 / 128.0)
    assert rep.rel_gap <= 1e-12
    assert rep.flux == pytest.approx(rep.capacity, rel=1e-12)
    lo, hi = rep.bounds
    assert lo == pytest.approx(hi, rel=1e-14)
    assert rep.flux_within_bounds


def test_flux_identity_eigenmode_data():
    K = geometry.closed_disk(0.05)
    rep = capacity.capacity_flux_identity(RECT, K, u1_rect, h=1.0 / 128.0)
    assert rep.rel_gap <= 0.10
    assert rep.flux_within_bounds
    lo, hi = rep.bounds
    assert lo <= rep.lhs <= hi * 1.05  # lhs is squeezed as K shrinks


def test_flux_bounds_tighten_as_the_set_shrinks():
    widths = []
    for eps in (0.1, 0.05, 0.025):
        rep = capacity.capacity_flux_identity(RECT, geometry.closed_disk(eps), u1_rect, h=eps / 8.0)
        lo, hi = rep.bounds
        widths.append((hi - lo) / rep.capacity)
    assert widths[2] < widths[1] < widths[0]


def test_flux_identity_rejects_bad_input():
    with pytest.raises(ValidationError):
        capacity.capacity_flux_identity(RECT, geometry.segment(0.05), 1.0, h=1.0 / 128.0)
    with pytest.raises(ValidationError, match="bump"):
        capacity.capacity_flux_identity(UNIT_DISK, geometry.closed_disk(0.3), 1.0, h=1.0 / 64.0)


# --- data transfer ---------------------------------------------------------


def test_field_data_from_coarser_grid_transfers():
    K = geometry.closed_disk(0.05)
    coarse_grid, _ = discrete.assemble(RECT, 1.0 / 64.0)
    X, Y = coarse_grid.mesh()
    u_field = discrete.Field(coarse_grid, u1_rect(X, Y))
    via_field = capacity.u_capacity(RECT, K, u_field, h=1.0 / 128.0, extrapolate=False)
    via_callable = capacity.u_capacity(RECT, K, u1_rect, h=1.0 / 128.0, extrapolate=False)
    assert via_field.value == pytest.approx(via_callable.value, rel=1e-2)


# --- concentration trends --------------------------------------------------


def test_point_family_trend():
    family = geometry.concentrating_family(
        geometry.point_set(), (0.1, 0.05, 0.025), domain=UNIT_DISK, h_rule=8.0
    )
    rep = capacity.convergence_to_zero(UNIT_DISK, family, 1.0)
    assert rep.decreasing
    assert rep.below(1.5)


def test_trend_tracks_l2_ratio():
    family = geometry.concentrating_family(
        geometry.closed_disk(1.0), (0.1, 0.05, 0.025), domain=RECT, h_rule=8.0
    )
    rep = capacity.convergence_to_zero(RECT, family, u1_rect)
    assert rep.decreasing
    assert rep.l2_over_cap_decreasing
    ratios = [r[3] / r[2] for r in rep.rows]
    assert ratios[-1] < 0.05
