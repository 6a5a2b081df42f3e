"""Linear evolution operators realized by integrating-factor RK4 stepping.

Covered flows:

* advection-diffusion with a prescribed divergence-free velocity
  (one step at a time, diffusion exact in spectral space),
* the frozen multi-vortex background propagator in physical time,
* the one-vortex self-similar flow  dw/dtau + alpha v . grad w = L w,
* the linearization at the Gaussian steady profile
  dw/dtau + alpha (v . grad w + v_w . grad G) = L w,

plus least-squares decay-rate measurement on the resulting trajectories.

All advection terms are stepped in divergence form, so the zero mode of
the state is bit-exactly conserved.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .biot_savart import velocity_free_space
from .errors import DegenerateError, DomainError, StabilityError
from .field import (Grid, ScalarField, VectorField, _dealias_mask,
                    _deriv_wavenumbers, _ksq, lp_norm, weighted_norm,
                    write_field)
from .oseen import (OseenVortex, gaussian_profile, oseen_max_speed,
                    oseen_velocity, velocity_profile)

CFL_DEFAULT = 0.5


@dataclass(frozen=True)
class StepperConfig:
    """Time-step control: exactly one of a fixed dt or a CFL number."""

    dt: float | None = None
    cfl: float | None = None
    dealias: bool = True

    def __post_init__(self):
        if (self.dt is None) == (self.cfl is None):
            raise DomainError("set exactly one of dt and cfl")
        if self.dt is not None and not (self.dt > 0):
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.cfl is not None and not (self.cfl > 0):
            raise DomainError(f"cfl must be positive, got {self.cfl}")

    @staticmethod
    def fixed(dt: float, dealias: bool = True) -> "StepperConfig":
        return StepperConfig(dt=dt, dealias=dealias)

    @staticmethod
    def courant(cfl: float = CFL_DEFAULT, dealias: bool = True) -> "StepperConfig":
        return StepperConfig(cfl=cfl, dealias=dealias)


SERIES_COLUMNS = ("index", "time", "l1", "l2", "linf", "l2m15", "l2m30",
                  "circulation")


def snapshot_diagnostics(w: ScalarField) -> dict[str, float]:
    return {
        "l1": lp_norm(w, 1),
        "l2": lp_norm(w, 2),
        "linf": lp_norm(w, np.inf),
        "l2m15": weighted_norm(w, 2, 1.5),
        "l2m30": weighted_norm(w, 2, 3.0),
        "circulation": w.integral(),
    }


@dataclass
class Trajectory:
    """Time-stamped snapshots of one propagation run with cached norms."""

    time_label: str                      # "tau" or "t"
    times: list[float] = dc_field(default_factory=list)
    fields: list[ScalarField] = dc_field(default_factory=list)
    diagnostics: list[dict[str, float]] = dc_field(default_factory=list)

    def record(self, time: float, w: ScalarField):
        self.times.append(float(time))
        self.fields.append(w)
        self.diagnostics.append(snapshot_diagnostics(w))

    @property
    def final(self) -> ScalarField:
        return self.fields[-1]

    def norms(self, norm) -> np.ndarray:
        """Evaluate a norm selector on every frame: scalar p or a (q, m) pair."""
        if isinstance(norm, tuple):
            q, m = norm
            return np.array([weighted_norm(w, q, m) for w in self.fields])
        return np.array([lp_norm(w, norm) for w in self.fields])

    def dump(self, directory) -> None:
        os.makedirs(directory, exist_ok=True)
        for i, (time, w) in enumerate(zip(self.times, self.fields)):
            write_field(w, os.path.join(
                directory, f"w_{self.time_label}_{i:04d}.fld"))
        with open(os.path.join(directory, "series.csv"), "w") as fh:
            fh.write(",".join(SERIES_COLUMNS) + "\n")
            for i, (time, diag) in enumerate(zip(self.times, self.diagnostics)):
                row = [str(i), format(time, ".17g")]
                row += [format(diag[c], ".17g") for c in SERIES_COLUMNS[2:]]
                fh.write(",".join(row) + "\n")


@dataclass(frozen=True)
class DecayFit:
    """Least-squares slope of log(norm) against time over a window."""

    taus: tuple[float, ...]
    norms: tuple[float, ...]
    rate: float
    residual: float


# ---------------------------------------------------------------------
# integrating-factor RK4 core
# ---------------------------------------------------------------------

def _lawson_rk4(w_hat: np.ndarray, t: float, dt: float, lin: np.ndarray,
                nonlinear: Callable[[np.ndarray, float], np.ndarray]) -> np.ndarray:
    """One Lawson (integrating-factor) RK4 step of dw/dt = lin*w + N(w, t).

    ``lin`` is the diagonal spectral symbol of the stiff linear part,
    handled exactly; ``nonlinear`` maps (w_hat, stage_time) to the spectrum
    of the remaining terms.
    """
    eh = np.exp(0.5 * dt * lin)
    ef = eh * eh
    n1 = nonlinear(w_hat, t)
    y2 = eh * (w_hat + 0.5 * dt * n1)
    n2 = nonlinear(y2, t + 0.5 * dt)
    y3 = eh * w_hat + 0.5 * dt * n2
    n3 = nonlinear(y3, t + 0.5 * dt)
    y4 = ef * w_hat + dt * eh * n3
    n4 = nonlinear(y4, t + dt)
    return ef * w_hat + (dt / 6.0) * (ef * n1 + 2.0 * eh * (n2 + n3) + n4)


def _require_divergence_free(u: VectorField, tol: float = 1e-2):
    """Interior local-stencil check that the velocity is solenoidal.

    Prescribed velocities need not be box-periodic (backgrounds decay like
    1/r), so a spectral divergence would see the wrap jump; the local
    stencil only wraps on the outermost rings, which are excluded.  The
    stencil cannot certify fine-grained solenoidality for marginally
    resolved fields, so this guards against grossly compressible inputs
    (divergence comparable to the velocity gradient itself); exact
    divergence-freeness is the analytic responsibility of the caller.
    """
    from .field import _fd_derivative, divergence_local
    div = divergence_local(u).values[4:-4, 4:-4]
    h = u.grid.h
    grad_scale = max(
        float(np.max(np.abs(_fd_derivative(c, a, h)[4:-4, 4:-4])))
        for c in (u.x.values, u.y.values) for a in (0, 1))
    if grad_scale == 0.0:
        return
    if float(np.max(np.abs(div))) > tol * grad_scale:
        raise DomainError(
            f"velocity is not divergence-free: max |div| = {np.max(np.abs(div)):.3e} "
            f"vs gradient scale {grad_scale:.3e}")


def _advection_divergence_hat(grid: Grid, u1: np.ndarray, u2: np.ndarray,
                              w: np.ndarray, dealias_products: bool) -> np.ndarray:
    """Spectrum of -div(u w) from physical-space factors."""
    kd = _deriv_wavenumbers(grid)
    f1 = np.fft.fft2(u1 * w)
    f2 = np.fft.fft2(u2 * w)
    out = -(1j * kd[:, None] * f1 + 1j * kd[None, :] * f2)
    if dealias_products:
        out = out * _dealias_mask(grid)
    return out


def advect_diffuse_step(omega: ScalarField, velocity_fn: Callable[[float], VectorField],
                        t: float, dt: float, dealias_products: bool = True) -> ScalarField:
    """One step of d(omega)/dt + div(U omega) = Lap(omega).

    Diffusion is exact in spectral space; the advection term is evaluated
    pseudo-spectrally with the 2/3 rule.  The prescribed velocity must be
    divergence-free and dt must satisfy dt <= h / (2 max|U|).
    """
    grid = omega.grid
    u_now = velocity_fn(t)
    umax = u_now.max_norm()
    if umax > 0 and dt > grid.h / (2.0 * umax):
        raise StabilityError(
            f"dt={dt:.3e} exceeds the advection bound h/(2 max|U|)="
            f"{grid.h / (2 * umax):.3e}")
    _require_divergence_free(u_now)
    cache: dict[float, VectorField] = {t: u_now}

    def nonlinear(w_hat, stage_t):
        u = cache.get(stage_t)
        if u is None:
            u = velocity_fn(stage_t)
            cache[stage_t] = u
        w = np.fft.ifft2(w_hat).real
        return _advection_divergence_hat(grid, u.x.values, u.y.values, w,
                                         dealias_products)

    lin = -_ksq(grid)
    out_hat = _lawson_rk4(omega.spectrum, t, dt, lin, nonlinear)
    return ScalarField(grid, np.fft.ifft2(out_hat).real)


# ---------------------------------------------------------------------
# frozen multi-vortex background propagator (physical time)
# ---------------------------------------------------------------------

def background_velocity(vortices: Sequence[OseenVortex], t: float,
                        grid: Grid) -> VectorField:
    """Sampled sum of the analytic vortex velocities at time t."""
    xx, yy = grid.meshes()
    u1 = np.zeros_like(xx)
    u2 = np.zeros_like(xx)
    for v in vortices:
        a1, a2 = oseen_velocity(v, t, xx, yy)
        u1 += a1
        u2 += a2
    return VectorField(ScalarField(grid, u1), ScalarField(grid, u2))


def background_cfl_bound(vortices: Sequence[OseenVortex], t: float, grid: Grid,
                         cfl: float) -> float:
    """Hard stability bound against the analytic background speed."""
    umax = sum(oseen_max_speed(v, t) for v in vortices)
    return np.inf if umax == 0 else cfl * grid.h / umax


def background_dt(vortices: Sequence[OseenVortex], t: float, grid: Grid,
                  cfl: float) -> float:
    """Automatic step control: the CFL bound plus the 1/sqrt(t) sharpening
    of the backgrounds near t = 0 (resolved by dt <= t/50; an accuracy
    rule, not a stability one)."""
    return min(background_cfl_bound(vortices, t, grid, cfl), t / 50.0)


def propagate_SN(vortices: Sequence[OseenVortex], f: ScalarField, s: float,
                 t: float, cfg: StepperConfig) -> ScalarField:
    """Evolve f from time s to time t under the frozen vortex backgrounds.

    Pure heat flow when the vortex list is empty.  Total mass is conserved
    to round-off by the divergence-form advection.
    """
    if not (0 < s < t):
        raise DomainError(f"need 0 < s < t, got s={s}, t={t}")
    grid = f.grid
    now = s
    state = f
    while now < t - 1e-14 * t:
        if cfg.dt is not None:
            dt = cfg.dt
            limit = background_cfl_bound(vortices, now, grid, CFL_DEFAULT)
            if dt > limit:
                raise StabilityError(
                    f"fixed dt={dt:.3e} exceeds the background bound {limit:.3e}")
        else:
            dt = background_dt(vortices, now, grid, cfg.cfl)
        dt = min(dt, t - now)
        state = advect_diffuse_step(
            state, lambda stage_t: background_velocity(vortices, stage_t, grid),
            now, dt, cfg.dealias)
        now += dt
    return state


# ---------------------------------------------------------------------
# self-similar propagators
# ---------------------------------------------------------------------

def _selfsim_lin(grid: Grid) -> np.ndarray:
    """Spectral symbol of the stiff diagonal part of L (the Laplacian)."""
    return -_ksq(grid)


def _drift_hat(grid: Grid, xx, yy, w: np.ndarray) -> np.ndarray:
    """Spectrum of div(xi w / 2) = (xi/2) . grad w + w, the rest of L.

    The divergence form leaves the zero mode untouched, so the rescaled
    flows conserve the integral of the state bit-exactly.
    """
    kd = _deriv_wavenumbers(grid)
    f1 = np.fft.fft2(0.5 * xx * w)
    f2 = np.fft.fft2(0.5 * yy * w)
    return 1j * kd[:, None] * f1 + 1j * kd[None, :] * f2


def selfsim_dt_bound(grid: Grid, advection_max: float, cfl: float) -> float:
    """Explicit-drift bound 4h/L combined with the advection CFL."""
    drift_bound = 4.0 * grid.h / grid.box_size
    if advection_max <= 0:
        return drift_bound
    return min(drift_bound, cfl * grid.h / advection_max)


def _evolve_selfsim(w0: ScalarField, tau_end: float, cfg: StepperConfig,
                    coupling, advection_max: float,
                    sample_every: float = 0.05) -> Trajectory:
    """Common driver for the rescaled flows d w/d tau = L w + coupling(w)."""
    grid = w0.grid
    xx, yy = grid.meshes()
    lin = _selfsim_lin(grid)
    bound = selfsim_dt_bound(grid, advection_max, cfg.cfl or CFL_DEFAULT)
    if cfg.dt is not None:
        if cfg.dt > bound:
            raise StabilityError(
                f"dt={cfg.dt:.3e} exceeds the rescaled-flow bound {bound:.3e}")
        dt = cfg.dt
    else:
        dt = bound

    def nonlinear(w_hat, stage_tau):
        w = np.fft.ifft2(w_hat).real
        out = _drift_hat(grid, xx, yy, w)
        if coupling is not None:
            out = out + coupling(w, w_hat, stage_tau)
        return out

    traj = Trajectory(time_label="tau")
    traj.record(0.0, w0)
    w_hat = w0.spectrum.copy()
    tau = 0.0
    next_sample = sample_every
    while tau < tau_end - 1e-12:
        step = min(dt, tau_end - tau)
        w_hat = _lawson_rk4(w_hat, tau, step, lin, nonlinear)
        tau += step
        if tau >= next_sample - 1e-12 or tau >= tau_end - 1e-12:
            traj.record(tau, ScalarField(grid, np.fft.ifft2(w_hat).real))
            next_sample = tau + sample_every
    return traj


def evolve_S1(alpha: float, w0: ScalarField, tau_end: float, cfg: StepperConfig,
              sample_every: float = 0.05) -> Trajectory:
    """One-vortex self-similar flow d w/d tau + alpha v . grad w = L w."""
    grid = w0.grid
    xx, yy = grid.meshes()
    v1, v2 = velocity_profile(xx, yy)

    def coupling(w, w_hat, stage_tau):
        return _advection_divergence_hat(grid, alpha * v1, alpha * v2, w,
                                         cfg.dealias)

    advection_max = abs(alpha) * float(np.max(np.hypot(v1, v2)))
    return _evolve_selfsim(w0, tau_end, cfg, coupling if alpha != 0 else None,
                           advection_max, sample_every)


def evolve_T_alpha(alpha: float, w0: ScalarField, tau_end: float,
                   cfg: StepperConfig, sample_every: float = 0.05) -> Trajectory:
    """Linearized-at-Gaussian flow
    d w/d tau + alpha (v . grad w + v_w . grad G) = L w.

    The coupling velocity v_w is the plane Biot-Savart field of the state,
    computed by the free-space method (accurate enough that the derivative
    modes of the Gaussian stay numerically exact eigenfunctions).
    """
    grid = w0.grid
    xx, yy = grid.meshes()
    v1, v2 = velocity_profile(xx, yy)
    g = gaussian_profile(xx, yy)

    def coupling(w, w_hat, stage_tau):
        out = _advection_divergence_hat(grid, alpha * v1, alpha * v2, w,
                                        cfg.dealias)
        vw = velocity_free_space(ScalarField(grid, w))
        out = out + _advection_divergence_hat(
            grid, alpha * vw.x.values, alpha * vw.y.values, g, cfg.dealias)
        return out

    advection_max = abs(alpha) * float(np.max(np.hypot(v1, v2)))
    return _evolve_selfsim(w0, tau_end, cfg, coupling if alpha != 0 else None,
                           advection_max, sample_every)


# ---------------------------------------------------------------------
# decay measurement
# ---------------------------------------------------------------------

NOISE_FLOOR = 1e-13


def fit_decay(trajectory: Trajectory, norm, tau_window: tuple[float, float]) -> DecayFit:
    """Least-squares slope of log(norm) over the time window.

    ``norm`` is either a scalar p (plain L^p) or a pair (q, m) for the
    weighted norm.  Requires at least 5 samples in the window and norms
    above the noise floor.
    """
    lo, hi = tau_window
    times = np.asarray(trajectory.times)
    mask = (times >= lo - 1e-12) & (times <= hi + 1e-12)
    if int(mask.sum()) < 5:
        raise DegenerateError(
            f"need >= 5 samples in window [{lo}, {hi}], got {int(mask.sum())}")
    values = trajectory.norms(norm)[mask]
    if np.any(values <= NOISE_FLOOR):
        raise DegenerateError("norms hit the noise floor inside the window")
    taus = times[mask]
    coeffs = np.polyfit(taus, np.log(values), 1)
    fitted = np.polyval(coeffs, taus)
    residual = float(np.sqrt(np.mean((np.log(values) - fitted) ** 2)))
    return DecayFit(taus=tuple(taus), norms=tuple(values),
                    rate=float(coeffs[0]), residual=residual)
