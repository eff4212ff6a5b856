import math

import numpy as np
import pytest

from capshift import NumericalFailure, ValidationError
from capshift.discrete import (
    Field,
    assemble,
    build_grid,
    dirichlet_solve,
    energy,
    lowest_eigenpairs,
    richardson,
)
from capshift.geometry import closed_disk, disk, rectangle, segment

RECT = rectangle(1.0, 0.8)

# separable oracle: lam_mn = pi^2 (m^2 + n^2/0.64)
LAM1 = math.pi**2 * 2.5625
LAM2 = math.pi**2 * 5.5625
LAM3 = math.pi**2 * 7.25


def discrete_rect_eig(hx, hy, m, n):
    # exact eigenvalue of the 5-point operator on the aligned rectangle grid
    return (4 / hx**2) * math.sin(math.pi * m * hx / 2.0) ** 2 + (4 / hy**2) * math.sin(
        math.pi * n * hy / 1.6
    ) ** 2


def test_grid_counts_rectangle():
    grid, op = assemble(RECT, 1 / 128)
    assert grid.interior.sum() == 127 * 101
    assert op.n_free == 127 * 101
    assert grid.hx == pytest.approx(1 / 128)
    assert grid.hy == pytest.approx(0.4 / 51)
    # anchor and boundaries on nodes
    assert np.any(np.abs(grid.xs) < 1e-15)
    assert np.any(np.abs(grid.xs - 0.5) < 1e-12)
    assert np.any(np.abs(grid.ys + 0.4) < 1e-12)


def test_grid_segment_constraint_count():
    # within-h/2 rule picks up 2*eps/h + 1 ~ 27 axis nodes (i = -13..13)
    grid, op = assemble(RECT, 1 / 128, segment(0.1))
    assert grid.constrained.sum() == 27
    assert op.n_free == 127 * 101 - 27
    jj, ii = np.nonzero(grid.constrained)
    assert np.all(np.abs(grid.ys[jj]) < 1e-15)


def test_grid_disk_constraint_mask():
    dom = disk(1.0)
    grid, _ = assemble(dom, 1 / 64, closed_disk(0.1))
    X, Y = grid.mesh()
    want = X**2 + Y**2 <= 0.01 * (1 + 1e-9)
    assert np.array_equal(grid.constrained, want)


def test_grid_rejects_tiny_compact():
    with pytest.raises(ValidationError, match="eps/8"):
        assemble(RECT, 1 / 16, closed_disk(0.01))


def test_grid_rejects_boundary_hugging_compact():
    with pytest.raises(ValidationError, match="margin"):
        assemble(RECT, 1 / 64, segment(0.47))


def test_operator_symmetry_and_positivity():
    _, op = assemble(RECT, 1 / 32, segment(0.1))
    asym = abs(op.S - op.S.T).max()
    assert asym == 0.0
    lam, _ = lowest_eigenpairs(op, 1)[0]
    assert lam > 0


def test_dirichlet_solve_max_principle():
    _, op = assemble(disk(1.0), 1 / 64, closed_disk(0.1))
    V = dirichlet_solve(op, 1.0)
    assert V.values.min() >= 0.0
    assert V.values.max() <= 1.0 + 1e-12
    assert V.values[op.grid.constrained].min() == pytest.approx(1.0)


def test_dirichlet_solve_zero_data():
    _, op = assemble(RECT, 1 / 32, segment(0.1))
    V = dirichlet_solve(op, 0.0)
    assert np.all(V.values == 0.0)


def test_condenser_energy_matches_radial_oracle():
    _, op = assemble(disk(1.0), 1 / 256, closed_disk(0.1))
    V = dirichlet_solve(op, 1.0)
    cap = energy(op, V)
    assert cap == pytest.approx(2 * math.pi / math.log(10), rel=0.02)


def test_energy_zero_field():
    grid, op = assemble(RECT, 1 / 32)
    assert energy(op, Field(grid, np.zeros(grid.interior.shape))) == 0.0


def test_energy_linear_field_exact_area():
    grid, _ = assemble(rectangle(1.0, 1.0), 1 / 32)
    X, _ = grid.mesh()
    val = energy(grid, Field(grid, X.copy()))
    assert val == pytest.approx(1.0, rel=1e-12)


def test_energy_is_minimal_among_admissible():
    rng = np.random.default_rng(5)
    grid, op = assemble(RECT, 1 / 32, segment(0.1))
    V = dirichlet_solve(op, 1.0)
    base = energy(op, V)
    competitor = V.copy()
    bump = 0.01 * rng.standard_normal(grid.interior.shape)
    competitor.values[grid.free] += bump[grid.free]
    assert energy(op, competitor) >= base


def test_eigenvalues_rectangle_oracle():
    _, op = assemble(RECT, 1 / 128)
    pairs = lowest_eigenpairs(op, 3)
    lams = [p[0] for p in pairs]
    assert lams[0] == pytest.approx(LAM1, rel=0.005)
    assert lams[1] == pytest.approx(LAM2, rel=0.005)
    assert lams[2] == pytest.approx(LAM3, rel=0.005)
    # and the discrete separable values to near machine precision
    g = op.grid
    assert lams[0] == pytest.approx(discrete_rect_eig(g.hx, g.hy, 1, 1), rel=1e-10)
    assert lams[1] == pytest.approx(discrete_rect_eig(g.hx, g.hy, 2, 1), rel=1e-10)


def test_eigenvalue_disk_oracle():
    _, op = assemble(disk(1.0), 1 / 128)
    lam, _ = lowest_eigenpairs(op, 1)[0]
    assert lam == pytest.approx(5.78319, rel=0.01)


def test_eigenfield_normalization_and_sign():
    _, op = assemble(RECT, 1 / 64)
    lam, u = lowest_eigenpairs(op, 1)[0]
    assert op.mass * float((u.values**2).sum()) == pytest.approx(1.0, rel=1e-12)
    # ground state is single-signed; convention makes it positive
    assert u.values.max() > 0
    assert u.values.min() >= -1e-12
    # oracle amplitude: u1 = (2/sqrt(0.8)) sin(pi x) sin(pi y / 0.8), max 2.2360
    assert u.values.max() == pytest.approx(2 / math.sqrt(0.8), rel=0.01)


def test_eigen_grid_convergence_second_order():
    errs = []
    for h in (1 / 32, 1 / 64):
        _, op = assemble(RECT, h)
        lam, _ = lowest_eigenpairs(op, 1)[0]
        errs.append(abs(lam - LAM1))
    ratio = errs[0] / errs[1]
    assert 3.5 < ratio < 4.5


def test_domain_monotonicity():
    _, op0 = assemble(RECT, 1 / 64)
    lam0, _ = lowest_eigenpairs(op0, 1)[0]
    _, opK = assemble(RECT, 1 / 64, closed_disk(0.08))
    lamK, _ = lowest_eigenpairs(opK, 1)[0]
    assert lamK >= lam0


def test_richardson():
    # quantity q(h) = q0 + c h^2 is reproduced exactly
    q0, c = 3.7, 2.1
    fine, coarse = q0 + c * 0.01, q0 + c * 0.04
    assert richardson(fine, coarse) == pytest.approx(q0, rel=1e-12)


def test_field_data_grid_mismatch():
    grid32, _ = assemble(RECT, 1 / 32, segment(0.1))
    _, op64 = assemble(RECT, 1 / 64, segment(0.1))
    alien = Field(grid32, np.zeros(grid32.interior.shape))
    with pytest.raises(ValidationError):
        dirichlet_solve(op64, alien)


def test_solver_reports_convergence_failure():
    _, op = assemble(RECT, 1 / 32, segment(0.1))
    # sabotage: make the residual check unreachable by corrupting the matrix
    # after factorization cannot happen through the public API, so instead
    # check that a healthy solve passes the residual gate quietly
    V = dirichlet_solve(op, 1.0)
    assert isinstance(V, Field)


def test_build_grid_incommensurable_anchor():
    dom = rectangle(1.0, 0.8, anchor=(1 / math.pi, 0.4))
    with pytest.raises(ValidationError):
        build_grid(dom, 1 / 64)
