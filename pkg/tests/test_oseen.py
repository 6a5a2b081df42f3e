import numpy as np
import pytest

from oseen2d.errors import DomainError
from oseen2d.field import Grid
from oseen2d.oseen import (OseenVortex, gaussian_gradient, gaussian_profile,
                           oseen_fields, oseen_max_speed, oseen_residual,
                           velocity_jacobian, velocity_profile)


def test_gaussian_profile_values():
    assert abs(gaussian_profile(0.0, 0.0) - 1.0 / (4 * np.pi)) < 1e-16
    assert abs(gaussian_profile(2.0, 0.0) - np.exp(-1.0) / (4 * np.pi)) < 1e-16


def test_gaussian_integral(grid256, gauss256):
    assert abs(gauss256.integral() - 1.0) < 1e-10


def test_velocity_profile_values():
    u1, u2 = velocity_profile(0.0, 0.0)
    assert u1 == 0.0 and u2 == 0.0
    u1, u2 = velocity_profile(1.0, 0.0)
    assert abs(u1) < 1e-16
    assert abs(u2 - (1 - np.exp(-0.25)) / (2 * np.pi)) < 1e-15


def test_velocity_profile_far_field():
    u1, u2 = velocity_profile(100.0, 0.0)
    assert abs(np.hypot(u1, u2) - 1.0 / (2 * np.pi * 100.0)) < 1e-15


def test_velocity_profile_series_branch():
    # both branches agree with the two-term series across the cutoff
    for r in (0.9e-4, 1.1e-4):
        u1, u2 = velocity_profile(r, 0.0)
        series = r / (8 * np.pi) * (1 - r * r / 8)
        assert abs(u2 - series) < 1e-16 * series


def test_gradient_identity():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(1000, 2)) * 3
    g1, g2 = gaussian_gradient(pts[:, 0], pts[:, 1])
    g = gaussian_profile(pts[:, 0], pts[:, 1])
    assert np.max(np.abs(g1 + 0.5 * pts[:, 0] * g)) < 1e-17
    assert np.max(np.abs(g2 + 0.5 * pts[:, 1] * g)) < 1e-17


def test_velocity_perpendicular_to_gradient():
    # the radial-symmetry cancellation behind background exactness
    rng = np.random.default_rng(42)
    pts = rng.normal(size=(10**6, 2)) * 4
    u1, u2 = velocity_profile(pts[:, 0], pts[:, 1])
    g1, g2 = gaussian_gradient(pts[:, 0], pts[:, 1])
    assert np.max(np.abs(u1 * g1 + u2 * g2)) < 1e-14


def test_velocity_jacobian_matches_finite_differences():
    rng = np.random.default_rng(5)
    eps = 1e-6
    for x, y in rng.normal(size=(20, 2)) * 2:
        d1v1, d2v1, d1v2, d2v2 = velocity_jacobian(x, y)
        for (dx, dy, got) in ((eps, 0, (d1v1, d1v2)), (0, eps, (d2v1, d2v2))):
            up = velocity_profile(x + dx, y + dy)
            dn = velocity_profile(x - dx, y - dy)
            fd = ((up[0] - dn[0]) / (2 * eps), (up[1] - dn[1]) / (2 * eps))
            assert abs(fd[0] - got[0]) < 1e-8
            assert abs(fd[1] - got[1]) < 1e-8


def test_oseen_fields_basic(grid256):
    w, u = oseen_fields(OseenVortex(1.0), 1.0, grid256)
    assert abs(w.values.max() - 1.0 / (4 * np.pi)) < 1e-14
    assert abs(w.integral() - 1.0) < 1e-10
    w2, u2 = oseen_fields(OseenVortex(2.0), 1.0, grid256)
    assert np.array_equal(w2.values, 2.0 * w.values)
    assert np.array_equal(u2.x.values, 2.0 * u.x.values)


def test_oseen_fields_self_similar_scaling(grid256):
    w4, _ = oseen_fields(OseenVortex(1.0), 4.0, grid256)
    assert abs(w4.values.max() - 1.0 / (16 * np.pi)) < 1e-14
    # omega(x, lam^2 t) sampled at lam x equals lam^-2 omega(x, t)
    w1, _ = oseen_fields(OseenVortex(1.0), 1.0, grid256)
    n = grid256.n
    idx = np.arange(n // 4, 3 * n // 4)
    scaled = 2 * idx - n // 2
    assert np.max(np.abs(w4.values[np.ix_(scaled, scaled)]
                         - 0.25 * w1.values[np.ix_(idx, idx)])) < 1e-16


def test_oseen_fields_rejects_bad_time(grid256):
    with pytest.raises(DomainError):
        oseen_fields(OseenVortex(1.0), 0.0, grid256)


def test_oseen_max_speed():
    v = OseenVortex(2.0)
    grid = Grid(256, 40.0)
    _, u = oseen_fields(v, 1.0, grid)
    assert u.max_norm() <= oseen_max_speed(v, 1.0) + 1e-12
    assert u.max_norm() > 0.95 * oseen_max_speed(v, 1.0)


@pytest.mark.parametrize("alpha,tol", [(1.0, 1e-8), (100.0, 1e-6)])
def test_oseen_residual_small(alpha, tol, grid256):
    assert oseen_residual(OseenVortex(alpha), 1.0, grid256) < tol


def test_oseen_residual_zero_circulation(grid256):
    assert oseen_residual(OseenVortex(0.0), 1.0, grid256) == 0.0
