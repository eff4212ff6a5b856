"""Five-point finite differences on node-aligned grids.

The grid is uniform per axis with spacings hx ~ hy ~ h chosen so that the
rectangle boundary, the anchor, and (when relevant) the mirror axis all land
exactly on node lines; disks and polygons use plain multiples of h with a
one-node pad so every interior node has its four neighbors in the box.

The operator matrix S approximates -Laplace (entries scaled 1/h^2) over the
free nodes (interior minus constrained); the lumped mass is the constant
hx*hy.  Dirichlet data on the constrained set and on the boundary is
eliminated into the right-hand side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import geometry
from .errors import NumericalFailure, ValidationError

__all__ = [
    "Grid",
    "DiscreteOperator",
    "Field",
    "assemble",
    "dirichlet_solve",
    "energy",
    "lowest_eigenpairs",
    "richardson",
]

_DIRECT_SOLVE_LIMIT = 260_000
_RESIDUAL_TOL = 1e-10


@dataclass
class Grid:
    """Node lattice with interior/boundary/constrained masks (shifted coords)."""

    domain: geometry.Domain
    hx: float
    hy: float
    xs: np.ndarray
    ys: np.ndarray
    interior: np.ndarray
    constrained: np.ndarray

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @property
    def boundary(self) -> np.ndarray:
        return ~self.interior

    @property
    def free(self) -> np.ndarray:
        return self.interior & ~self.constrained

    def mesh(self):
        return np.meshgrid(self.xs, self.ys)

    def nearest_index(self, x: float, y: float):
        return int(np.argmin(np.abs(self.ys - y))), int(np.argmin(np.abs(self.xs - x)))


@dataclass
class DiscreteOperator:
    grid: Grid
    S: sp.csr_matrix
    free_index: np.ndarray  # (ny, nx) int map into free dof numbering, -1 elsewhere

    @property
    def n_free(self) -> int:
        return self.S.shape[0]

    @property
    def mass(self) -> float:
        return self.grid.hx * self.grid.hy


@dataclass
class Field:
    """Nodal values over the whole grid box; zero outside the domain."""

    grid: Grid
    values: np.ndarray

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


# ---------------------------------------------------------------------------
# grid construction


def _aligned_axis(lo: float, hi: float, h: float):
    # spacing dividing both half-extents so that lo, 0, hi are all nodes
    m_lo = max(1, round(-lo / h))
    h_ax = -lo / m_lo
    r = hi / h_ax
    if abs(r - round(r)) > 1e-9 * max(1.0, r):
        raise ValidationError(
            "grid spacing cannot align the anchor with the domain boundary; "
            "choose an anchor commensurable with h"
        )
    m_hi = int(round(r))
    return h_ax, np.arange(-m_lo, m_hi + 1) * h_ax


def _free_axis(lo: float, hi: float, h: float):
    # plain multiples of h padded one node beyond the extent
    m_lo = int(math.ceil(-lo / h)) + 1
    m_hi = int(math.ceil(hi / h)) + 1
    return h, np.arange(-m_lo, m_hi + 1) * h


def _rasterize(K: geometry.CompactSet, X: np.ndarray, Y: np.ndarray, h: float) -> np.ndarray:
    if K.variant == "point":
        d2 = (X - K.center[0]) ** 2 + (Y - K.center[1]) ** 2
        mask = np.zeros(X.shape, dtype=bool)
        mask.flat[int(np.argmin(d2))] = True
        return mask
    if K.variant == "closed_disk":
        cx, cy = K.center
        r2 = (X - cx) ** 2 + (Y - cy) ** 2
        return r2 <= K.epsilon**2 * (1.0 + 1e-9)
    half = 0.5 * h * (1.0 + 1e-12)
    pts = geometry.sample_points(K, 2)  # endpoints; distance computed exactly below
    mask = np.zeros(X.shape, dtype=bool)
    legs = []
    if K.variant == "segment":
        p, q = pts[0], pts[-1]
        legs.append((p, q))
    else:
        for p, q in zip(K.points[:-1], K.points[1:]):
            legs.append((np.asarray(p), np.asarray(q)))
    for p, q in legs:
        dx, dy = q[0] - p[0], q[1] - p[1]
        L2 = dx * dx + dy * dy
        if L2 == 0:
            d2 = (X - p[0]) ** 2 + (Y - p[1]) ** 2
        else:
            t = np.clip(((X - p[0]) * dx + (Y - p[1]) * dy) / L2, 0.0, 1.0)
            d2 = (X - (p[0] + t * dx)) ** 2 + (Y - (p[1] + t * dy)) ** 2
        mask |= d2 <= half * half
    return mask


def build_grid(domain: geometry.Domain, h: float, K: geometry.CompactSet | None = None) -> Grid:
    if not h > 0:
        raise ValidationError("h must be positive")
    x_lo, x_hi, y_lo, y_hi = geometry.extents(domain)
    if domain.shape == "rectangle":
        hx, xs = _aligned_axis(x_lo, x_hi, h)
        hy, ys = _aligned_axis(y_lo, y_hi, h)
    else:
        hx, xs = _free_axis(x_lo, x_hi, h)
        hy, ys = _free_axis(y_lo, y_hi, h)
    X, Y = np.meshgrid(xs, ys)
    interior = geometry.contains(domain, X, Y)
    constrained = np.zeros(interior.shape, dtype=bool)
    if K is not None:
        pts = geometry.sample_points(K)
        margin = min(geometry.boundary_distance(domain, float(px), float(py)) for px, py in pts)
        if margin < 2.0 * max(hx, hy) * (1.0 - 1e-12):
            raise ValidationError(
                f"compact set margin {margin:.3g} is below 2h = {2*max(hx, hy):.3g}"
            )
        constrained = _rasterize(K, X, Y, max(hx, hy))
        if K.variant != "point" and constrained.sum() < 3:
            raise ValidationError(
                "compact set occupies fewer than 3 grid nodes; refine to h <= eps/8"
            )
        if (constrained & ~interior).any():
            raise ValidationError("compact set extends outside the domain interior")
    return Grid(domain, hx, hy, xs, ys, interior, constrained)


# ---------------------------------------------------------------------------
# assembly


_SHIFTS = ((0, 1), (0, -1), (1, 0), (-1, 0))


def assemble(domain: geometry.Domain, h: float, K: geometry.CompactSet | None = None):
    """Build the grid and the stiffness matrix over free nodes."""
    grid = build_grid(domain, h, K)
    free = grid.free
    n = int(free.sum())
    if n == 0:
        raise ValidationError("no free nodes; domain too small for this h")
    free_index = -np.ones(free.shape, dtype=np.int64)
    free_index[free] = np.arange(n)
    wx = 1.0 / grid.hx**2
    wy = 1.0 / grid.hy**2
    ny, nx = free.shape
    src = np.argwhere(free)
    jj, ii = src[:, 0], src[:, 1]
    rows, cols, vals = [], [], []
    for dj, di in _SHIFTS:
        nj, ni = jj + dj, ii + di
        ok = (nj >= 0) & (nj < ny) & (ni >= 0) & (ni < nx)
        nb_free = np.zeros(len(jj), dtype=bool)
        nb_free[ok] = free[nj[ok], ni[ok]]
        w = wy if dj != 0 else wx
        rows.append(free_index[jj[nb_free], ii[nb_free]])
        cols.append(free_index[nj[nb_free], ni[nb_free]])
        vals.append(np.full(int(nb_free.sum()), -w))
    S = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    S += sp.diags(np.full(n, 2.0 * wx + 2.0 * wy))
    return grid, DiscreteOperator(grid, S, free_index)


def _full_data_array(grid: Grid, data) -> np.ndarray:
    """Values on constrained nodes (zero elsewhere)."""
    g = np.zeros(grid.interior.shape)
    if not grid.constrained.any():
        return g
    if isinstance(data, Field):
        if data.grid.interior.shape != grid.interior.shape:
            raise ValidationError("data field lives on a different grid")
        g[grid.constrained] = data.values[grid.constrained]
    elif callable(data):
        X, Y = grid.mesh()
        g[grid.constrained] = np.asarray(data(X[grid.constrained], Y[grid.constrained]), dtype=float)
    elif np.isscalar(data):
        g[grid.constrained] = float(data)
    else:
        arr = np.asarray(data, dtype=float)
        if arr.shape != grid.interior.shape:
            raise ValidationError("data array shape does not match the grid")
        g[grid.constrained] = arr[grid.constrained]
    return g


def _solve_spd(S: sp.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    n = S.shape[0]
    if n <= _DIRECT_SOLVE_LIMIT:
        v = spla.splu(S.tocsc()).solve(rhs)
    else:
        import pyamg

        ml = pyamg.smoothed_aggregation_solver(S, max_coarse=500)
        v = ml.solve(rhs, tol=1e-12, accel="cg", maxiter=400)
    denom = np.linalg.norm(rhs)
    if denom > 0:
        resid = np.linalg.norm(S @ v - rhs) / denom
        if resid > _RESIDUAL_TOL:
            raise NumericalFailure(f"linear solve stalled at relative residual {resid:.3e}")
    return v


def dirichlet_solve(op: DiscreteOperator, data) -> Field:
    """Solve with the given data on the constrained set, zero on the boundary.

    ``data`` may be a scalar, a callable of (x, y) arrays, a full-grid array,
    or a Field on the same grid.
    """
    grid = op.grid
    g = _full_data_array(grid, data)
    if not grid.constrained.any() or not np.any(g):
        values = np.zeros(grid.interior.shape)
        return Field(grid, values)
    wx = 1.0 / grid.hx**2
    wy = 1.0 / grid.hy**2
    ny, nx = grid.interior.shape
    rhs_full = np.zeros((ny, nx))
    gc = np.where(grid.constrained, g, 0.0)
    rhs_full[:, :-1] += wx * gc[:, 1:]
    rhs_full[:, 1:] += wx * gc[:, :-1]
    rhs_full[:-1, :] += wy * gc[1:, :]
    rhs_full[1:, :] += wy * gc[:-1, :]
    rhs = rhs_full[grid.free]
    v = _solve_spd(op.S, rhs)
    values = np.zeros((ny, nx))
    values[grid.free] = v
    values[grid.constrained] = g[grid.constrained]
    return Field(grid, values)


# ---------------------------------------------------------------------------
# energy and eigenpairs


def energy(op_or_grid, field: Field) -> float:
    """Dirichlet energy as a cell-wise trapezoid sum over the node box.

    Agrees exactly with v'Sv for fields vanishing outside the interior and
    includes the gradient across the constrained set's boundary.
    """
    grid = op_or_grid.grid if isinstance(op_or_grid, DiscreteOperator) else op_or_grid
    v = field.values
    dx2 = np.diff(v, axis=1) ** 2
    dy2 = np.diff(v, axis=0) ** 2
    w_row = np.ones(v.shape[0])
    w_row[0] = w_row[-1] = 0.5
    w_col = np.ones(v.shape[1])
    w_col[0] = w_col[-1] = 0.5
    ex = (grid.hy / grid.hx) * float(w_row @ dx2.sum(axis=1))
    ey = (grid.hx / grid.hy) * float((dy2 * w_col).sum())
    return ex + ey


def richardson(fine: float, coarse: float, order: int = 2) -> float:
    """Extrapolate a second-order quantity from values at h and 2h."""
    f = 2.0**order
    return fine + (fine - coarse) / (f - 1.0)


def bilinear(field: Field, xq, yq):
    """Bilinear interpolation of a field at query points (arrays ok)."""
    g = field.grid
    xq = np.asarray(xq, dtype=float)
    yq = np.asarray(yq, dtype=float)
    fx = (xq - g.xs[0]) / g.hx
    fy = (yq - g.ys[0]) / g.hy
    i = np.clip(np.floor(fx).astype(int), 0, len(g.xs) - 2)
    j = np.clip(np.floor(fy).astype(int), 0, len(g.ys) - 2)
    tx = fx - i
    ty = fy - j
    v = field.values
    return (
        v[j, i] * (1 - tx) * (1 - ty)
        + v[j, i + 1] * tx * (1 - ty)
        + v[j + 1, i] * (1 - tx) * ty
        + v[j + 1, i + 1] * tx * ty
    )


def lowest_eigenpairs(op: DiscreteOperator, M: int, tol: float = 1e-9):
    """The M smallest eigenpairs of the free-node operator, ascending.

    Eigenfields are embedded on the full grid (zero on boundary/constrained),
    normalized to hx*hy*sum(v^2) = 1, with the sign fixed so the value at the
    node nearest the domain's designated sample point is positive (falling
    back to the max-modulus node if the field vanishes there).
    """
    n = op.n_free
    if M < 1:
        raise ValidationError("M must be >= 1")
    k = min(M + 2, n - 1)
    if k < M:
        raise ValidationError("grid too small for the requested number of eigenpairs")
    try:
        lams, vecs = spla.eigsh(op.S, k=k, sigma=0, which="LM", v0=np.ones(n))
    except spla.ArpackNoConvergence as exc:  # pragma: no cover - rare
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc
    order = np.argsort(lams)
    lams, vecs = lams[order], vecs[:, order]
    grid = op.grid
    sj, si = grid.nearest_index(*geometry.sample_point(grid.domain))
    out = []
    for m in range(M):
        lam = float(lams[m])
        v = vecs[:, m]
        resid = np.linalg.norm(op.S @ v - lam * v) / (abs(lam) * np.linalg.norm(v))
        if resid > max(tol, 1e-9):
            raise NumericalFailure(f"eigenpair {m+1} residual {resid:.3e} exceeds tolerance")
        values = np.zeros(grid.interior.shape)
        values[grid.free] = v
        values /= math.sqrt(op.mass * float(v @ v))
        anchor_val = values[sj, si]
        if abs(anchor_val) < 1e-9 * np.abs(values).max():
            anchor_val = values.flat[int(np.argmax(np.abs(values)))]
        if anchor_val < 0:
            values = -values
        out.append((lam, Field(grid, values)))
    return out
