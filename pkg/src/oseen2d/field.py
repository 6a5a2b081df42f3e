"""Gridded scalar/vector fields on a centered periodic box.

The box is [-L/2, L/2)^2 sampled at n points per side (n even), with
spectral differentiation and rectangle-rule quadrature.  Every field of
interest decays like a Gaussian well inside the box, which makes the
periodic truncation error negligible and the rectangle rule spectrally
accurate.

Fields are immutable values: operations return new fields, the sample
array of a constructed field is marked read-only, and the spectral cache
is computed lazily from the samples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .errors import DomainError, MarginError, MismatchError

FIELD_MAGIC = b"FLD2"

# Boundary values larger than this fraction of the max norm mean the box
# is too small for the operation at hand.
BOUNDARY_DECAY_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Uniform n x n grid on the centered square box of side box_size."""

    n: int
    box_size: float

    def __post_init__(self):
        if self.n < 16 or self.n % 2 != 0:
            raise DomainError(f"grid size must be even and >= 16, got {self.n}")
        if not (self.box_size > 0):
            raise DomainError(f"box size must be positive, got {self.box_size}")

    @property
    def h(self) -> float:
        return self.box_size / self.n

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    def coords(self) -> np.ndarray:
        """1D coordinates x_j = -L/2 + j h, shared by both axes."""
        return -0.5 * self.box_size + self.h * np.arange(self.n)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) coordinate arrays of shape (n, n), 'ij' indexing."""
        x = self.coords()
        return np.meshgrid(x, x, indexing="ij")

    def wavenumbers(self) -> np.ndarray:
        """1D angular wavenumbers in FFT order (Nyquist at index n/2)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    def zeros(self) -> "ScalarField":
        return ScalarField(self, np.zeros((self.n, self.n)))

    def sample(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        xx, yy = self.meshes()
        return ScalarField(self, np.asarray(fn(xx, yy), dtype=float))


class ScalarField:
    """Real scalar samples on a Grid with a lazy spectral companion."""

    __slots__ = ("grid", "values", "_spectrum")

    def __init__(self, grid: Grid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n, grid.n):
            raise MismatchError(
                f"values shape {values.shape} does not match grid n={grid.n}")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_spectrum", None)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField is immutable")

    @property
    def spectrum(self) -> np.ndarray:
        """Full complex DFT of the samples (cached)."""
        if self._spectrum is None:
            object.__setattr__(self, "_spectrum", np.fft.fft2(self.values))
        return self._spectrum

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        self._check_same_grid(other)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check_same_grid(other)
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, ScalarField):
            self._check_same_grid(c)
            return ScalarField(self.grid, self.values * c.values)
        return ScalarField(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def _check_same_grid(self, other):
        if not isinstance(other, ScalarField) or other.grid != self.grid:
            raise MismatchError("fields must share one grid")

    # -- basic functionals --------------------------------------------

    def integral(self) -> float:
        return float(np.sum(self.values)) * self.grid.cell_area

    def boundary_max(self) -> float:
        """Largest |value| on the outermost ring of the grid."""
        v = np.abs(self.values)
        return float(max(v[0, :].max(), v[-1, :].max(),
                         v[:, 0].max(), v[:, -1].max()))


@dataclass(frozen=True)
class VectorField:
    """Two scalar components sharing one grid."""

    x: ScalarField
    y: ScalarField

    def __post_init__(self):
        if self.x.grid != self.y.grid:
            raise MismatchError("vector components must share one grid")

    @property
    def grid(self) -> Grid:
        return self.x.grid

    def magnitude(self) -> ScalarField:
        return ScalarField(self.grid, np.hypot(self.x.values, self.y.values))

    def max_norm(self) -> float:
        return float(np.max(np.hypot(self.x.values, self.y.values)))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.x - other.x, self.y - other.y)

    def __mul__(self, c) -> "VectorField":
        return VectorField(self.x * c, self.y * c)

    __rmul__ = __mul__


# ---------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------

def lp_norm(f: ScalarField, p: float) -> float:
    """L^p norm by rectangle-rule quadrature; grid max for p = inf."""
    if p == np.inf:
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise DomainError(f"lp_norm needs p >= 1, got {p}")
    a = np.abs(f.values)
    return float((np.sum(a**p) * f.grid.cell_area) ** (1.0 / p))


@lru_cache(maxsize=32)
def _weight_grid(grid: Grid, m: float) -> np.ndarray:
    xx, yy = grid.meshes()
    return (1.0 + xx**2 + yy**2) ** (m / 2.0)


def weighted_norm(f: ScalarField, q: float, m: float) -> float:
    """Norm of (1+|x|^2)^(m/2) f in L^q, weight on unwrapped coordinates."""
    if q != np.inf and q < 1:
        raise DomainError(f"weighted_norm needs q >= 1, got {q}")
    if m < 0:
        raise DomainError(f"weighted_norm needs m >= 0, got {m}")
    if m == 0:
        return lp_norm(f, q)
    w = _weight_grid(f.grid, m)
    return lp_norm(ScalarField(f.grid, w * f.values), q)


# ---------------------------------------------------------------------
# spectral calculus
# ---------------------------------------------------------------------

@lru_cache(maxsize=32)
def _deriv_wavenumbers(grid: Grid) -> np.ndarray:
    """Wavenumbers for odd derivatives: Nyquist mode zeroed."""
    k = grid.wavenumbers().copy()
    k[grid.n // 2] = 0.0
    return k


@lru_cache(maxsize=32)
def _ksq(grid: Grid) -> np.ndarray:
    k = grid.wavenumbers()
    return k[:, None] ** 2 + k[None, :] ** 2


def gradient(f: ScalarField) -> VectorField:
    kd = _deriv_wavenumbers(f.grid)
    fh = f.spectrum
    gx = np.fft.ifft2(1j * kd[:, None] * fh).real
    gy = np.fft.ifft2(1j * kd[None, :] * fh).real
    return VectorField(ScalarField(f.grid, gx), ScalarField(f.grid, gy))


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, np.fft.ifft2(-_ksq(f.grid) * f.spectrum).real)


def divergence(v: VectorField) -> ScalarField:
    kd = _deriv_wavenumbers(v.grid)
    dx = 1j * kd[:, None] * v.x.spectrum
    dy = 1j * kd[None, :] * v.y.spectrum
    return ScalarField(v.grid, np.fft.ifft2(dx + dy).real)


def curl(v: VectorField) -> ScalarField:
    """Scalar curl d(v_y)/dx - d(v_x)/dy."""
    kd = _deriv_wavenumbers(v.grid)
    c = 1j * kd[:, None] * v.y.spectrum - 1j * kd[None, :] * v.x.spectrum
    return ScalarField(v.grid, np.fft.ifft2(c).real)


def _fd_derivative(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """8th-order centered first derivative (local stencil, wraps at edges)."""
    def sh(k):
        return np.roll(values, -k, axis=axis)
    return (672.0 * (sh(1) - sh(-1)) - 168.0 * (sh(2) - sh(-2))
            + 32.0 * (sh(3) - sh(-3)) - 3.0 * (sh(4) - sh(-4))) / (840.0 * h)


def curl_local(v: VectorField) -> ScalarField:
    """Scalar curl by local finite differences.

    Free-space velocities are smooth but not box-periodic, so spectral
    differentiation sees the wrap jump; the local stencil does not (except
    on the outermost three rings, which callers should exclude).
    """
    h = v.grid.h
    return ScalarField(v.grid, _fd_derivative(v.y.values, 0, h)
                       - _fd_derivative(v.x.values, 1, h))


def divergence_local(v: VectorField) -> ScalarField:
    """Divergence by local finite differences (see curl_local)."""
    h = v.grid.h
    return ScalarField(v.grid, _fd_derivative(v.x.values, 0, h)
                       + _fd_derivative(v.y.values, 1, h))


@lru_cache(maxsize=32)
def _dealias_mask(grid: Grid) -> np.ndarray:
    """2/3-rule mask in full-spectrum layout."""
    m = np.fft.fftfreq(grid.n) * grid.n
    keep = np.abs(m) <= grid.n / 3.0
    return keep[:, None] & keep[None, :]


def dealias(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, np.fft.ifft2(_dealias_mask(f.grid) * f.spectrum).real)


def project_mean_zero(f: ScalarField) -> ScalarField:
    """Remove the mean by subtracting (integral of f) times the unit Gaussian.

    The subtracted profile exp(-|x|^2/4)/(4 pi) integrates to one and has
    finite weighted norms for every m, so the projection stays inside all
    weighted spaces.
    """
    total = f.integral()
    if total == 0.0:
        return f
    xx, yy = f.grid.meshes()
    gauss = np.exp(-(xx**2 + yy**2) / 4.0) / (4.0 * np.pi)
    return ScalarField(f.grid, f.values - total * gauss)


# ---------------------------------------------------------------------
# off-grid evaluation of the trigonometric interpolant
# ---------------------------------------------------------------------

def _interp_matrix(grid: Grid, targets: np.ndarray) -> np.ndarray:
    """Complex matrix E with (E @ fft(f))_i = interpolant of f at targets[i].

    Points outside [-L/2, L/2] get an all-zero row (zero extension).  The
    Nyquist mode is evaluated as a cosine so real fields stay real.
    """
    n, L = grid.n, grid.box_size
    theta = (targets + 0.5 * L) / grid.h          # grid-index coordinate
    m = np.fft.fftfreq(n) * n                      # integer mode numbers
    E = np.exp(2j * np.pi * np.outer(theta, m) / n) / n
    E[:, n // 2] = np.cos(np.pi * theta) / n       # symmetric Nyquist
    outside = np.abs(targets) > 0.5 * L * (1 + 1e-12)
    E[outside, :] = 0.0
    return E


def resample_affine(f: ScalarField, scale: float, center: tuple[float, float] = (0.0, 0.0),
                    out_grid: Grid | None = None) -> ScalarField:
    """Evaluate the trigonometric interpolant of f at scale*x + center.

    Returns g with g(x) = f(scale * x + center), sampled on out_grid
    (default: the grid of f), zero beyond the box of f.
    """
    out_grid = out_grid or f.grid
    x = out_grid.coords()
    Ex = _interp_matrix(f.grid, scale * x + center[0])
    Ey = _interp_matrix(f.grid, scale * x + center[1])
    vals = (Ex @ f.spectrum @ Ey.T).real
    return ScalarField(out_grid, vals)


def require_boundary_decay(f: ScalarField, what: str, tol: float = BOUNDARY_DECAY_TOL):
    """MarginError unless |f| at the box boundary is below tol * max|f|."""
    peak = float(np.max(np.abs(f.values)))
    if peak == 0.0:
        return
    if f.boundary_max() > tol * peak:
        raise MarginError(
            f"{what}: field is not negligible at the box boundary "
            f"(boundary/max = {f.boundary_max() / peak:.3e}, tol {tol:.1e})")


# ---------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------

def write_field(f: ScalarField, path) -> None:
    """Binary field file: magic 'FLD2', n (int64 LE), L (float64 LE), samples."""
    with open(path, "wb") as fh:
        fh.write(FIELD_MAGIC)
        fh.write(struct.pack("<q", f.grid.n))
        fh.write(struct.pack("<d", f.grid.box_size))
        fh.write(f.values.astype("<f8").tobytes(order="C"))


def read_field(path) -> ScalarField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != FIELD_MAGIC:
            raise DomainError(f"not a field file (magic {magic!r})")
        n = struct.unpack("<q", fh.read(8))[0]
        L = struct.unpack("<d", fh.read(8))[0]
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
    return ScalarField(Grid(int(n), float(L)), data.astype(float))


def write_norms_csv(rows: Iterable[tuple], path) -> None:
    """CSV with columns t,quantity,p,m,value."""
    with open(path, "w") as fh:
        fh.write("t,quantity,p,m,value\n")
        for t, quantity, p, m, value in rows:
            fh.write(f"{format(t, '.17g')},{quantity},{p},{m},{format(value, '.17g')}\n")
