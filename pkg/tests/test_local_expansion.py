"""Extraction of (k, beta, alpha) from fields and the induced polynomials."""

import math

import numpy as np
import pytest

from capshift import discrete, geometry, local_expansion, spectral
from capshift.errors import HypothesisViolation, ValidationError

RECT = geometry.rectangle(1.0, 0.8)
UNIT_DISK = geometry.disk(1.0)


def make_field(fn, domain=UNIT_DISK, h=1.0 / 128.0):
    grid, _ = discrete.assemble(domain, h)
    X, Y = grid.mesh()
    return discrete.Field(grid, fn(X, Y))


def test_ground_mode_reads_its_peak_value():
    field = spectral.spectrum(RECT, 1.0 / 128.0, 1).fields[0]
    le = local_expansion.extract(field)
    assert le.k == 0
    assert le.alpha == math.pi / 2.0
    assert le.beta * math.sin(le.alpha) == pytest.approx(2.0 / math.sqrt(0.8), rel=2e-2)
    assert le.fit_residual <= 0.05


def test_second_mode_at_its_nodal_point():
    field = spectral.spectrum(RECT, 1.0 / 256.0, 2).fields[1]
    le = local_expansion.extract(field)
    assert le.k == 1
    assert le.beta == pytest.approx(4.0 * math.pi / math.sqrt(0.8), rel=2e-2)
    # vertical nodal line: phase pi/2 by symmetry of the grid
    assert abs(le.alpha - math.pi / 2.0) < 1e-6
    assert le.fit_residual <= 0.05


def test_synthetic_cubic_harmonic():
    def fn(X, Y):
        r = np.hypot(X, Y)
        t = np.arctan2(Y, X)
        return r**3 * np.sin(0.7 - 3.0 * t)

    le = local_expansion.extract(make_field(fn, h=1.0 / 256.0), radii=(0.3, 0.15))
    assert le.k == 3
    assert le.beta == pytest.approx(1.0, abs=1e-3)
    assert le.alpha == pytest.approx(0.7, abs=1e-3)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("beta", [0.5, 2.0])
@pytest.mark.parametrize("alpha", [0.3, math.pi / 2.0, 2.8])
def test_roundtrip_recovers_parameters(k, beta, alpha):
    def fn(X, Y):
        r = np.hypot(X, Y)
        t = np.arctan2(Y, X)
        return beta * r**k * np.sin(alpha - k * t)

    le = local_expansion.extract(make_field(fn), radii=(0.25, 0.125))
    assert le.k == k
    assert le.beta == pytest.approx(beta, rel=1e-3)
    assert le.alpha == pytest.approx(alpha, abs=1e-3)


def test_constant_field_convention():
    le = local_expansion.extract(make_field(lambda X, Y: np.full(X.shape, -3.0)))
    assert le.k == 0
    assert le.beta == pytest.approx(3.0, rel=1e-12)
    assert le.alpha == math.pi / 2.0


def test_polynomial_conversion_examples():
    p = local_expansion.to_polynomial(
        local_expansion.LocalExpansion(0, 5.0, math.pi / 2.0, 0.0, (0.2, 0.1))
    )
    assert tuple(p.coeffs) == (5.0,)
    p = local_expansion.to_polynomial(
        local_expansion.LocalExpansion(1, 1.0, math.pi / 2.0, 0.0, (0.2, 0.1))
    )
    assert p.coeffs[0] == pytest.approx(1.0, rel=1e-15) and abs(p.coeffs[1]) < 1e-16
    p = local_expansion.to_polynomial(
        local_expansion.LocalExpansion(1, 1.0, 0.0, 0.0, (0.2, 0.1))
    )
    assert p.coeffs[0] == 0.0  # exact zero: this is what routes the tangent case
    assert p.coeffs[1] == pytest.approx(-1.0, rel=1e-15)


def test_generic_leading_coefficient_identity():
    le = local_expansion.LocalExpansion(3, 1.7, 1.1, 0.0, (0.2, 0.1))
    p = local_expansion.to_polynomial(le)
    assert p.coeffs[0] == pytest.approx(1.7 * math.sin(1.1), rel=1e-14)


def test_zero_field_is_rejected():
    with pytest.raises(HypothesisViolation, match="zero function"):
        local_expansion.extract(make_field(lambda X, Y: np.zeros(X.shape)))


def test_radius_validation():
    field = make_field(lambda X, Y: X)
    with pytest.raises(ValidationError):
        local_expansion.extract(field, radii=(0.1, 0.2))
    with pytest.raises(ValidationError, match="circle"):
        local_expansion.extract(field, radii=(1.5, 0.1))


def test_inconsistent_order_between_radii():
    def fn(X, Y):
        r = np.hypot(X, Y)
        w = np.clip((r - 0.15) / 0.1, 0.0, 1.0)
        w = w * w * (3.0 - 2.0 * w)
        return w * X + (1.0 - w) * 5.0 * (X**2 - Y**2)

    with pytest.raises(ValidationError, match="inconsistent"):
        local_expansion.extract(make_field(fn), radii=(0.4, 0.1))
