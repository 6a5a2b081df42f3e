"""Closed-form Lamb-Oseen vortex profiles and the exact self-similar solution.

The unit vortex profile is G(xi) = exp(-|xi|^2/4) / (4 pi) with velocity
v(xi) = (1/(2 pi)) * xi_perp / |xi|^2 * (1 - exp(-|xi|^2/4)), where
xi_perp = (-xi_2, xi_1).  A vortex of circulation alpha centered at z is
the exact solution

    omega(x, t) = (alpha / t) G((x - z)/sqrt(t)),
    u(x, t)     = (alpha / sqrt(t)) v((x - z)/sqrt(t)),

of both the heat equation and the full vorticity equation: the advection
term vanishes pointwise because the velocity is perpendicular to the
vorticity gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .field import Grid, ScalarField, VectorField, laplacian, require_boundary_decay

# |xi| below which the velocity profile switches to its power series.
SERIES_CUTOFF_SQ = 1e-8  # (1e-4)^2 on |xi|^2


@dataclass(frozen=True)
class OseenVortex:
    """One analytic vortex background: circulation alpha at center z."""

    alpha: float
    z: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not np.isfinite(self.alpha) or not all(np.isfinite(self.z)):
            raise DomainError("vortex parameters must be finite")


def gaussian_profile(x1, x2):
    """G at the point(s) (x1, x2)."""
    return np.exp(-(np.asarray(x1) ** 2 + np.asarray(x2) ** 2) / 4.0) / (4.0 * np.pi)


def gaussian_gradient(x1, x2):
    """Analytic gradient of G: grad G = -(xi/2) G."""
    g = gaussian_profile(x1, x2)
    return -0.5 * np.asarray(x1) * g, -0.5 * np.asarray(x2) * g


def _ring_factor(s):
    """(1 - exp(-s/4)) / (2 pi s) with the removable singularity filled in.

    s = |xi|^2.  Below the cutoff the power series
    (1/(8 pi)) (1 - s/8 + s^2/96) is exact to machine precision.
    """
    s = np.asarray(s, dtype=float)
    small = s < SERIES_CUTOFF_SQ
    safe = np.where(small, 1.0, s)
    full = -np.expm1(-safe / 4.0) / (2.0 * np.pi * safe)
    series = (1.0 - s / 8.0 + s * s / 96.0) / (8.0 * np.pi)
    return np.where(small, series, full)


def velocity_profile(x1, x2):
    """Velocity components of the unit vortex at the point(s) (x1, x2)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    f = _ring_factor(x1**2 + x2**2)
    return -x2 * f, x1 * f


def velocity_jacobian(x1, x2):
    """Analytic Jacobian d v_i / d xi_j of the unit vortex velocity.

    Returns (d1v1, d2v1, d1v2, d2v2).
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    s = x1**2 + x2**2
    f = _ring_factor(s)
    # derivative of the ring factor with respect to s
    small = s < SERIES_CUTOFF_SQ
    safe = np.where(small, 1.0, s)
    df_full = (np.exp(-safe / 4.0) * (safe + 4.0) - 4.0) / (8.0 * np.pi * safe**2)
    df_series = (-1.0 / 8.0 + s / 48.0) / (8.0 * np.pi)
    df = np.where(small, df_series, df_full)
    d1v1 = -x2 * df * 2.0 * x1
    d2v1 = -f - x2 * df * 2.0 * x2
    d1v2 = f + x1 * df * 2.0 * x1
    d2v2 = x1 * df * 2.0 * x2
    return d1v1, d2v1, d1v2, d2v2


VELOCITY_PROFILE_MAX = 0.0507841687885389  # max |v| of the unit profile, at |xi| ~ 2.2418


def oseen_vorticity(v: OseenVortex, t: float, x1, x2):
    """Pointwise vorticity alpha/t G((x-z)/sqrt(t))."""
    if t <= 0:
        raise DomainError(f"Oseen fields need t > 0, got {t}")
    rt = np.sqrt(t)
    return (v.alpha / t) * gaussian_profile((np.asarray(x1) - v.z[0]) / rt,
                                            (np.asarray(x2) - v.z[1]) / rt)


def oseen_velocity(v: OseenVortex, t: float, x1, x2):
    """Pointwise velocity alpha/sqrt(t) v((x-z)/sqrt(t))."""
    if t <= 0:
        raise DomainError(f"Oseen fields need t > 0, got {t}")
    rt = np.sqrt(t)
    u1, u2 = velocity_profile((np.asarray(x1) - v.z[0]) / rt,
                              (np.asarray(x2) - v.z[1]) / rt)
    return (v.alpha / rt) * u1, (v.alpha / rt) * u2


def oseen_vorticity_gradient(v: OseenVortex, t: float, x1, x2):
    """Analytic gradient of the vortex vorticity field."""
    rt = np.sqrt(t)
    g1, g2 = gaussian_gradient((np.asarray(x1) - v.z[0]) / rt,
                               (np.asarray(x2) - v.z[1]) / rt)
    c = v.alpha / t**1.5
    return c * g1, c * g2


def oseen_fields(v: OseenVortex, t: float, grid: Grid) -> tuple[ScalarField, VectorField]:
    """Sample the vortex vorticity and velocity on a grid."""
    xx, yy = grid.meshes()
    w = ScalarField(grid, oseen_vorticity(v, t, xx, yy))
    u1, u2 = oseen_velocity(v, t, xx, yy)
    return w, VectorField(ScalarField(grid, u1), ScalarField(grid, u2))


def oseen_max_speed(v: OseenVortex, t: float) -> float:
    """Exact maximum |u| of the vortex at time t."""
    return abs(v.alpha) / np.sqrt(t) * VELOCITY_PROFILE_MAX


def oseen_residual(v: OseenVortex, t: float, grid: Grid) -> float:
    """Max norm of d/dt omega - Lap(omega) + u . grad(omega) on the grid.

    The time derivative and the advection term are analytic; the Laplacian
    is spectral.  A near-zero residual certifies that the sampled
    background solves the vorticity equation on this grid.
    """
    if t <= 0:
        raise DomainError(f"oseen_residual needs t > 0, got {t}")
    xx, yy = grid.meshes()
    w = ScalarField(grid, oseen_vorticity(v, t, xx, yy))
    require_boundary_decay(w, "oseen_residual")
    rt = np.sqrt(t)
    xi1 = (xx - v.z[0]) / rt
    xi2 = (yy - v.z[1]) / rt
    g = gaussian_profile(xi1, xi2)
    # d/dt [alpha/t G(x/sqrt t)] = -(alpha/t^2) G (1 - |xi|^2/4)
    dt_w = -(v.alpha / t**2) * g * (1.0 - (xi1**2 + xi2**2) / 4.0)
    lap = laplacian(w).values
    u1, u2 = oseen_velocity(v, t, xx, yy)
    gw1, gw2 = oseen_vorticity_gradient(v, t, xx, yy)
    advection = u1 * gw1 + u2 * gw2
    return float(np.max(np.abs(dt_w - lap + advection)))
