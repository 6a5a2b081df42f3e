"""Scalar diagnostics of solutions: distance to the self-similar vortex,
contraction-norm series, localized diffuse-part decay, and the spectrum of
the linearization about the Gaussian steady profile.

The per-vortex attribution of the single evolved remainder uses a smooth
partition of unity of bumps around each vortex center (radius set by the
minimum center separation d): the bump equals one inside |x - z_i| <= d/4
and vanishes beyond d/3.  This is a faithful but not identical stand-in
for the exact per-vortex splitting, which a grid solver cannot observe.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .biot_savart import velocity_free_space
from .errors import ConvergenceError, DomainError, MismatchError, ModeError
from .field import Grid, ScalarField, lp_norm, weighted_norm
from .measure import FiniteMeasure, heat_smooth
from .oseen import OseenVortex, gaussian_profile, oseen_vorticity, velocity_profile
from .selfsim import SelfSimilarFrame, to_self_similar
from .solver import SolverRun, restrict


# ---------------------------------------------------------------------
# distance to the self-similar vortex
# ---------------------------------------------------------------------

def oseen_distance(omega: ScalarField, t: float, alpha: float, p: float) -> float:
    """t^(1-1/p) L^p distance of omega to the circulation-alpha vortex at t.

    The prefactor matches the self-similar scaling, so the value is
    invariant along exact vortex solutions and measures only the profile
    mismatch.
    """
    if p != np.inf and p < 1:
        raise DomainError(f"oseen_distance needs p >= 1, got {p}")
    if t <= 0:
        raise DomainError(f"oseen_distance needs t > 0, got {t}")
    grid = omega.grid
    xx, yy = grid.meshes()
    ref = oseen_vorticity(OseenVortex(alpha, (0.0, 0.0)), t, xx, yy)
    diff = ScalarField(grid, omega.values - ref)
    power = 1.0 if p == np.inf else 1.0 - 1.0 / p
    return t**power * lp_norm(diff, p)


# ---------------------------------------------------------------------
# partition of unity
# ---------------------------------------------------------------------

def _bridge(u: np.ndarray) -> np.ndarray:
    """Smooth 0->1 bridge on [0, 1] built from exp(-1/u)."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return a / (a + b)


def bump(r: np.ndarray) -> np.ndarray:
    """Smooth radial bump: 1 for r <= 1/4, 0 for r >= 1/3."""
    return 1.0 - _bridge((np.asarray(r, dtype=float) - 0.25) * 12.0)


def partition_of_unity(grid: Grid, centers, d: float) -> list[np.ndarray]:
    """[chi_0, chi_1, ..., chi_N] with chi_i localized at centers[i-1].

    chi_i(x) = bump(|x - z_i| / d); chi_0 is the complement.  With a single
    center (d infinite) the whole plane is attributed to it.
    """
    xx, yy = grid.meshes()
    chis = []
    for (zx, zy) in centers:
        if np.isfinite(d):
            chis.append(bump(np.hypot(xx - zx, yy - zy) / d))
        else:
            chis.append(np.ones_like(xx))
    total = sum(chis) if chis else np.zeros_like(xx)
    if np.any(total > 1.0 + 1e-12):
        raise DomainError("vortex bumps overlap; separation d is inconsistent")
    chis.insert(0, 1.0 - total)
    return chis


# ---------------------------------------------------------------------
# contraction-norm series
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionSeries:
    """Running suprema of the per-part remainder norms."""

    times: tuple[float, ...]
    parts: tuple[tuple[float, ...], ...]   # rows: (M0, M1, ..., MN) per time
    running_max: tuple[float, ...]         # M(t) = max over parts, running

    @property
    def final(self) -> float:
        return self.running_max[-1]


def _require_decomposed(run: SolverRun):
    if run.mode != "decomposed" or run.decomposition is None:
        raise ModeError("diagnostic needs a decomposed-mode run")


def _instant_part_norms(w: ScalarField, t: float, backgrounds, d: float,
                        m: float) -> list[float]:
    """[s^(1/4)|chi_0 w|_{4/3}, |rescaled chi_i w / alpha_i|_{L2(m)}, ...]."""
    grid = w.grid
    centers = [v.z for v in backgrounds]
    chis = partition_of_unity(grid, centers, d)
    vals = [t**0.25 * lp_norm(ScalarField(grid, chis[0] * w.values), 4.0 / 3.0)]
    for chi, v in zip(chis[1:], backgrounds):
        part = ScalarField(grid, chi * w.values / v.alpha)
        rescaled = to_self_similar(part, SelfSimilarFrame.at_time(t, v.z))
        vals.append(weighted_norm(rescaled, 2, m))
    return vals


def remainder_norms(run: SolverRun, m: float) -> ContractionSeries:
    """Running suprema of the attributed remainder norms along a run."""
    _require_decomposed(run)
    d = run.decomposition.d
    rows = []
    for t, w in zip(run.trajectory.times, run.trajectory.fields):
        rows.append(_instant_part_norms(w, t, run.backgrounds, d, m))
    return _running(run.trajectory.times, rows)


def _running(times, rows) -> ContractionSeries:
    sup_rows = []
    current = [0.0] * len(rows[0])
    overall = []
    for row in rows:
        current = [max(c, v) for c, v in zip(current, row)]
        sup_rows.append(tuple(current))
        overall.append(max(current))
    return ContractionSeries(times=tuple(times), parts=tuple(sup_rows),
                             running_max=tuple(overall))


def solution_distance(runA: SolverRun, runB: SolverRun, m: float,
                      include_l1: bool = False) -> ContractionSeries:
    """Running suprema of the per-part distances between two runs.

    The runs must share snapshot times and background centers.  A run on a
    nested finer grid is restricted to the coarser one.  With
    ``include_l1`` the diffuse part also carries the plain L^1 distance
    (the variant used for continuity in the initial data).
    """
    _require_decomposed(runA)
    _require_decomposed(runB)
    ta, tb = runA.trajectory.times, runB.trajectory.times
    if len(ta) != len(tb) or any(abs(a - b) > 1e-10 * max(a, 1.0)
                                 for a, b in zip(ta, tb)):
        raise MismatchError("runs do not share snapshot times")
    za = [v.z for v in runA.backgrounds]
    zb = [v.z for v in runB.backgrounds]
    if za != zb:
        raise MismatchError("runs do not share background centers")
    coarse = runA.grid if runA.grid.n <= runB.grid.n else runB.grid

    def frames(run):
        for w in run.trajectory.fields:
            yield w if run.grid == coarse else restrict(w, coarse)

    d = min(runA.decomposition.d, runB.decomposition.d)
    rows = []
    for t, wa, wb in zip(ta, frames(runA), frames(runB)):
        chis = partition_of_unity(coarse, za, d)
        diff0 = ScalarField(coarse, chis[0] * (wa.values - wb.values))
        row = [t**0.25 * lp_norm(diff0, 4.0 / 3.0)]
        if include_l1:
            row[0] += lp_norm(ScalarField(coarse, wa.values - wb.values), 1)
        for chi, vA, vB in zip(chis[1:], runA.backgrounds, runB.backgrounds):
            pa = ScalarField(coarse, chi * wa.values / vA.alpha)
            pb = ScalarField(coarse, chi * wb.values / vB.alpha)
            ra = to_self_similar(pa, SelfSimilarFrame.at_time(t, vA.z))
            rb = to_self_similar(pb, SelfSimilarFrame.at_time(t, vB.z))
            row.append(weighted_norm(ra - rb, 2, m))
        rows.append(row)
    return _running(ta, rows)


def total_l1_difference(runA: SolverRun, runB: SolverRun) -> np.ndarray:
    """|omega_A(t) - omega_B(t)|_{L^1} per shared snapshot.

    For runs with identical backgrounds this is just the remainder
    difference; otherwise the analytic backgrounds are included.
    """
    ta = runA.trajectory.times
    coarse = runA.grid if runA.grid.n <= runB.grid.n else runB.grid
    out = []
    for i, t in enumerate(ta):
        wa = runA.total_vorticity(i)
        wb = runB.total_vorticity(i)
        if wa.grid != coarse:
            wa = restrict(wa, coarse)
        if wb.grid != coarse:
            wb = restrict(wb, coarse)
        out.append(lp_norm(wa - wb, 1))
    return np.asarray(out)


# ---------------------------------------------------------------------
# localized diffuse-part decay
# ---------------------------------------------------------------------

def localized_diffuse_point(omega0: ScalarField, u0, t: float, z, p: float,
                            q: float) -> tuple[float, float]:
    """One (t) sample of the localized vorticity and velocity norms.

    Weight exp(-|x-z|^2/(8 t)) localizes at the vortex center z; the
    prefactors t^(1-1/p), t^(1/2-1/q) make both quantities vanish as
    t -> 0 whenever the diffuse part carries no atom at z.
    """
    grid = omega0.grid
    xx, yy = grid.meshes()
    cut = np.exp(-((xx - z[0])**2 + (yy - z[1])**2) / (8.0 * t))
    wn = t**(1.0 - 1.0 / p) * lp_norm(ScalarField(grid, omega0.values * cut), p)
    un = t**(0.5 - 1.0 / q) * lp_norm(
        ScalarField(grid, u0.magnitude().values * cut), q)
    return wn, un


def localized_diffuse_series(mu0: FiniteMeasure, z, t_values, p: float,
                             q: float, grid: Grid):
    """Localized norms of the heat-smoothed diffuse measure at given times."""
    if not (q > 2):
        raise DomainError(f"velocity exponent must be > 2, got {q}")
    rows = []
    for t in t_values:
        w0 = heat_smooth(mu0, t, grid)
        # sampling-level boundary junk is irrelevant to these integral norms
        u0 = velocity_free_space(w0, boundary_tol=1e-6)
        rows.append((t, *localized_diffuse_point(w0, u0, t, z, p, q)))
    return rows


def localized_diffuse_norm(run: SolverRun, i: int, p: float, q: float):
    """Localized norms of the diffuse-attributed remainder along a run."""
    _require_decomposed(run)
    rem = run.decomposition.remainder
    if not rem.atoms and rem.density is None:
        raise ModeError("run has no diffuse part")
    if not (1 <= i <= len(run.backgrounds)):
        raise ModeError(f"vortex index {i} out of range")
    z = run.backgrounds[i - 1].z
    d = run.decomposition.d
    centers = [v.z for v in run.backgrounds]
    rows = []
    for t, w in zip(run.trajectory.times, run.trajectory.fields):
        chis = partition_of_unity(run.grid, centers, d)
        w0 = ScalarField(run.grid, chis[0] * w.values)
        u0 = velocity_free_space(w0, boundary_tol=1e-6)
        rows.append((t, *localized_diffuse_point(w0, u0, t, z, p, q)))
    return rows


# ---------------------------------------------------------------------
# spectrum of the linearization about the Gaussian profile
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of the linearized operator in the Gaussian-weighted metric."""

    alpha: float
    basis_n: int
    mean_zero: bool
    eigenvalues: tuple[complex, ...]       # sorted by descending real part
    labeled_modes: dict

    @property
    def max_real(self) -> float:
        return float(self.eigenvalues[0].real)


def _hermite_tables(grid: Grid, count: int):
    """1D tables of the normalized Gaussian-derivative factors.

    Returns (phi, psi): phi[a] samples the a-th derivative factor of the
    Gaussian profile normalized in the weighted metric; psi[a] the same
    times the inverse square root of the Gaussian weight (orthonormal in
    plain L^2, used for projections).
    """
    x = grid.coords()
    phi = np.empty((count, grid.n))
    psi = np.empty((count, grid.n))
    phi[0] = np.exp(-x**2 / 4.0) / np.sqrt(4.0 * np.pi)
    psi[0] = np.exp(-x**2 / 8.0) / (4.0 * np.pi) ** 0.25
    if count > 1:
        phi[1] = -(x / np.sqrt(2.0)) * phi[0]
        psi[1] = -(x / np.sqrt(2.0)) * psi[0]
    for a in range(1, count - 1):
        c1 = -1.0 / np.sqrt(a + 1.0)
        c2 = np.sqrt(a / (a + 1.0))
        phi[a + 1] = c1 * (x / np.sqrt(2.0)) * phi[a] - c2 * phi[a - 1]
        psi[a + 1] = c1 * (x / np.sqrt(2.0)) * psi[a] - c2 * psi[a - 1]
    return phi, psi


_COUPLING_CACHE: dict = {}


def _assemble_coupling(basis_n: int, mean_zero: bool, grid: Grid):
    """Basis list, diagonal of L, and the alpha-independent coupling matrix."""
    key = (basis_n, mean_zero, grid)
    if key in _COUPLING_CACHE:
        return _COUPLING_CACHE[key]
    modes = [(a, b) for a in range(basis_n) for b in range(basis_n)]
    if mean_zero:
        modes = [mode for mode in modes if mode != (0, 0)]
    index = {mode: i for i, mode in enumerate(modes)}
    nm = len(modes)

    phi, psi = _hermite_tables(grid, basis_n + 1)
    xx, yy = grid.meshes()
    v1, v2 = velocity_profile(xx, yy)
    g = gaussian_profile(xx, yy)
    half_weight = np.exp((xx**2 + yy**2) / 8.0) * np.sqrt(4.0 * np.pi)
    grad_g = (-0.5 * xx * g, -0.5 * yy * g)

    diag = np.array([-(a + b) / 2.0 for a, b in modes])
    coupling = np.zeros((nm, nm))
    area = grid.cell_area
    for (a, b) in modes:
        col = index[(a, b)]
        field_ab = np.outer(phi[a], phi[b])
        # grad of the basis function: next-order factors
        dx = np.sqrt((a + 1) / 2.0) * np.outer(phi[a + 1], phi[b])
        dy = np.sqrt((b + 1) / 2.0) * np.outer(phi[a], phi[b + 1])
        coupled = v1 * dx + v2 * dy
        if (a, b) == (0, 0):
            # its own velocity is the vortex profile; the coupling term
            # v . grad G vanishes pointwise by perpendicularity
            vw1, vw2 = v1, v2
        else:
            vw = velocity_free_space(ScalarField(grid, field_ab))
            vw1, vw2 = vw.x.values, vw.y.values
        coupled = coupled + vw1 * grad_g[0] + vw2 * grad_g[1]
        weighted = coupled * half_weight
        proj = psi @ weighted @ psi.T * area          # (basis_n+1)^2 block
        for (ar, br) in modes:
            coupling[index[(ar, br)], col] = proj[ar, br]
    out = (modes, index, diag, coupling)
    _COUPLING_CACHE[key] = out
    return out


def linearized_spectrum(alpha: float, basis_n: int, mean_zero: bool = True,
                        grid: Grid | None = None) -> SpectrumReport:
    """Dense spectrum of  w -> L w - alpha (v . grad w + v_w . grad G).

    The matrix is assembled in the orthonormal basis of Gaussian
    derivatives (the eigenbasis of L, which is exactly diagonal there);
    only the alpha-coupling needs grid quadrature.  The coupling velocity
    of each basis function is its free-space Biot-Savart field.  The
    coupling matrix does not depend on alpha and is cached.
    """
    if basis_n < 16:
        raise DomainError(f"basis_n must be >= 16, got {basis_n}")
    grid = grid or Grid(256, 40.0)
    modes, index, diag, coupling = _assemble_coupling(basis_n, mean_zero, grid)
    nm = len(modes)
    matrix = np.diag(diag) - alpha * coupling
    try:
        eigvals, eigvecs = scipy.linalg.eig(matrix)
    except Exception as exc:                           # pragma: no cover
        raise ConvergenceError(f"eigenvalue solve failed: {exc}") from exc
    order = np.argsort(-eigvals.real)
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    labeled = {}
    translation_idx = [index[m] for m in ((1, 0), (0, 1)) if m in index]
    best = None
    for j in range(nm):
        vec = eigvecs[:, j]
        corr = np.sqrt(sum(abs(vec[i])**2 for i in translation_idx)) / np.linalg.norm(vec)
        if corr > 0.99:
            cand = (abs(eigvals[j] + 0.5), j)
            if best is None or cand < best:
                best = cand
    if best is not None:
        labeled["translation"] = complex(eigvals[best[1]])
    j_scal = int(np.argmin(np.abs(eigvals + 1.0)))
    labeled["scaling"] = complex(eigvals[j_scal])

    return SpectrumReport(alpha=float(alpha), basis_n=basis_n,
                          mean_zero=mean_zero,
                          eigenvalues=tuple(eigvals.tolist()),
                          labeled_modes=labeled)


def eigenvalue_multiplicity(report: SpectrumReport, value: complex,
                            tol: float) -> int:
    return int(sum(abs(ev - value) <= tol for ev in report.eigenvalues))


# ---------------------------------------------------------------------
# CSV and plot-script output
# ---------------------------------------------------------------------

def write_oseen_distance_csv(rows, path) -> None:
    """Columns t,p,value."""
    with open(path, "w") as fh:
        fh.write("t,p,value\n")
        for t, p, value in rows:
            fh.write(f"{format(t, '.17g')},{p},{format(value, '.17g')}\n")


def write_contraction_csv(series: ContractionSeries, path,
                          label: str = "M") -> None:
    """Columns t,<label>0..<label>N,<label>."""
    n_parts = len(series.parts[0])
    with open(path, "w") as fh:
        header = ["t"] + [f"{label}{i}" for i in range(n_parts)] + [label]
        fh.write(",".join(header) + "\n")
        for t, row, m in zip(series.times, series.parts, series.running_max):
            cells = [format(t, ".17g")] + [format(v, ".17g") for v in row]
            cells.append(format(m, ".17g"))
            fh.write(",".join(cells) + "\n")


def write_spectrum_csv(reports, path) -> None:
    """Columns alpha,re,im,label."""
    with open(path, "w") as fh:
        fh.write("alpha,re,im,label\n")
        for report in reports:
            labels = {}
            for name, ev in report.labeled_modes.items():
                labels.setdefault(complex(ev), name)
            for ev in report.eigenvalues:
                label = labels.get(complex(ev), "")
                fh.write(f"{format(report.alpha, '.17g')},"
                         f"{format(ev.real, '.17g')},{format(ev.imag, '.17g')},"
                         f"{label}\n")


def write_plot_script(csv_path, out_path, columns: str, title: str) -> None:
    """Emit a minimal gnuplot script referencing a CSV produced above."""
    base = os.path.basename(str(csv_path))
    with open(out_path, "w") as fh:
        fh.write("set datafile separator ','\n")
        fh.write("set key autotitle columnhead\n")
        fh.write("set logscale xy\n")
        fh.write(f"set title '{title}'\n")
        fh.write(f"plot '{base}' using {columns} with linespoints\n")
