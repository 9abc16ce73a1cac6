"""Inversion-symmetric amplitude PSFs and the two-source intensity model.

Lengths are in units where the Gaussian amplitude is
``(2 pi sigma^2)^-1/4 exp(-x^2 / (4 sigma^2))`` (``sigma`` is the standard
deviation of the intensity) and the slit amplitude is ``sin(x) / (sqrt(pi) x)``
(first zero at pi, momentum support [-1, 1]).

Each model carries two independent representations. ``amp_x`` lives on the
position grid. ``amp_p`` lives on a momentum grid chosen for quadrature,
which for band-limited models is the compact support itself rather than the
FFT-reciprocal grid.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erfc, ndtr, sici

from .errors import (
    AsymmetryError,
    GridError,
    GridTooNarrowError,
    NonPowerOfTwoError,
    OutOfGridError,
    ZeroNormError,
)
from .export import atomic_write
from .numerics import (
    Grid,
    Measure,
    fourier_transform,
    integrate,
    is_power_of_two,
    quadrature_weights,
    symmetric_nodes,
)

MIN_POINTS = 2**10
GAUSSIAN_HALF_WIDTH = 12.8
GAUSSIAN_POINTS = 2**11
SINC_HALF_WIDTH = 40.96
SINC_POINTS = 2**13
SINC_MOMENTUM_POINTS = 2**14 + 1
FFT_PADDING = 8

_SQRT_PI = np.sqrt(np.pi)


def default_gaussian_grid(sigma: float = 1.0) -> Grid:
    return Grid(GAUSSIAN_HALF_WIDTH * sigma, GAUSSIAN_POINTS)


def default_sinc_grid() -> Grid:
    return Grid(SINC_HALF_WIDTH, SINC_POINTS)


@dataclass(frozen=True)
class SourcePair:
    """Two equally bright incoherent sources at +-separation/2."""

    separation: float

    def __post_init__(self):
        if not np.isfinite(self.separation) or self.separation < 0:
            raise ValueError(f"separation must be finite and >= 0, got {self.separation}")


@dataclass(frozen=True, eq=False)
class PsfModel:
    """Real, inversion-symmetric amplitude PSF.

    Attributes
    ----------
    kind : {"gaussian", "sinc", "sampled"}
    grid : Grid
        Position grid on which ``amp_x`` is sampled.
    amp_x : ndarray
        Amplitude Psi(x) on ``grid.nodes``.
    p, amp_p, p_weights : ndarray
        Momentum nodes, Psi(p) on them, and the quadrature weights used for
        every momentum-space integral.
    norm_residual : float
        ``|integral |Psi(x)|^2 dx - 1|`` on the position grid. Nonzero for the
        slit model because its 1/x tails are cut by any finite grid.
    sigma : float or None
        Intensity standard deviation of the Gaussian model.
    band_limit : float or None
        Half-width of the momentum support, when compact.
    """

    kind: str
    grid: Grid
    amp_x: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    amp_p: np.ndarray = field(repr=False)
    p_weights: np.ndarray = field(repr=False)
    norm_residual: float = 0.0
    sigma: float | None = None
    band_limit: float | None = None

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def is_analytic(self) -> bool:
        return self.kind in ("gaussian", "sinc")

    def amplitude(self, x) -> np.ndarray:
        """Psi(x): closed form for analytic models, cubic spline otherwise."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            s = self.sigma
            return (2 * np.pi * s * s) ** -0.25 * np.exp(-x * x / (4 * s * s))
        if self.kind == "sinc":
            return np.sinc(x / np.pi) / _SQRT_PI
        return np.where(self.grid.contains(x), self._spline(x), 0.0)

    def amplitude_derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return -x / (2 * self.sigma**2) * self.amplitude(x)
        if self.kind == "sinc":
            with np.errstate(divide="ignore", invalid="ignore"):
                d = (np.cos(x) / x - np.sin(x) / (x * x)) / _SQRT_PI
            # series near the origin: -x/3 + x^3/30
            tiny = np.abs(x) < 1e-4
            return np.where(tiny, (-x / 3 + x**3 / 30) / _SQRT_PI, d)
        return np.where(self.grid.contains(x), self._spline(x, 1), 0.0)

    def intensity(self, x) -> np.ndarray:
        return self.amplitude(x) ** 2

    def intensity_derivative(self, x) -> np.ndarray:
        return 2.0 * self.amplitude(x) * self.amplitude_derivative(x)

    def intensity_cdf(self, x) -> np.ndarray:
        """Cumulative integral of |Psi|^2 from -infinity to x."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return ndtr(x / self.sigma)
        if self.kind == "sinc":
            si, _ = sici(2 * x)
            with np.errstate(divide="ignore", invalid="ignore"):
                tail = np.where(x == 0, 0.0, np.sin(x) ** 2 / x)
            return 0.5 + (si - tail) / np.pi
        return np.interp(x, self.grid.nodes, self._cumulative, left=0.0, right=1.0)

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.grid.nodes, self.amp_x)

    @cached_property
    def _cumulative(self) -> np.ndarray:
        i = self.amp_x**2
        h = self.grid.spacing
        c = np.concatenate([[0.0], np.cumsum(0.5 * h * (i[1:] + i[:-1]))])
        return c / c[-1]

    def momentum_measure(self) -> Measure:
        """The measure |Psi(p)|^2 dp on the model's momentum nodes."""
        # FFT round-off leaves a ~1e-32 floor in |Psi(p)|^2 for sampled models
        floor = 1e-280 if self.is_analytic else 1e-24
        return Measure.from_samples(self.p, self.amp_p**2, self.p_weights, floor=floor)


def _check_points(grid: Grid):
    if grid.n_points < MIN_POINTS:
        raise GridError(f"grid has {grid.n_points} points; at least {MIN_POINTS} are required")


def _padded_momentum_grid(grid: Grid, pad: int = FFT_PADDING) -> Grid:
    n = grid.n_points * pad
    return Grid.from_spacing(2 * np.pi / (n * grid.spacing), n)


def make_gaussian_psf(sigma: float = 1.0, grid: Grid | None = None) -> PsfModel:
    """Gaussian amplitude PSF whose intensity has standard deviation ``sigma``.

    The momentum representation ``(2 sigma^2 / pi)^1/4 exp(-sigma^2 p^2)`` is
    filled analytically on the FFT-reciprocal grid of the zero-padded position
    grid, so it lines up node for node with :func:`make_sampled_psf`.
    """
    if not np.isfinite(sigma) or sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    grid = grid or default_gaussian_grid(sigma)
    _check_points(grid)
    tail = float(erfc(grid.x_max / (np.sqrt(2.0) * sigma)))
    if tail > 1e-9:
        raise GridTooNarrowError(f"grid half-width {grid.x_max} truncates {tail:.2e} of the PSF norm")
    amp_x = (2 * np.pi * sigma**2) ** -0.25 * np.exp(-grid.nodes**2 / (4 * sigma**2))
    pgrid = _padded_momentum_grid(grid)
    p = pgrid.nodes
    amp_p = (2 * sigma**2 / np.pi) ** 0.25 * np.exp(-(sigma**2) * p * p)
    resid = abs(float(integrate(amp_x**2, grid.nodes)) - 1.0)
    return PsfModel("gaussian", grid, amp_x, p, amp_p, pgrid.weights, resid, sigma=float(sigma))


def make_sinc_psf(grid: Grid | None = None, n_momentum: int = SINC_MOMENTUM_POINTS) -> PsfModel:
    """Slit-aperture PSF ``sin(x) / (sqrt(pi) x)``, flat spectrum on [-1, 1].

    Momentum integrals run over the compact support only, so they are exact
    up to Simpson error on smooth integrands. The position samples lose about
    ``1 / (pi * x_max)`` of the norm to the cut 1/x tails; that loss is
    recorded in ``norm_residual`` rather than treated as an error.
    """
    grid = grid or default_sinc_grid()
    _check_points(grid)
    if grid.x_max < 40.0:
        raise GridTooNarrowError(f"sinc grid must span at least [-40, 40], got half-width {grid.x_max}")
    amp_x = np.sinc(grid.nodes / np.pi) / _SQRT_PI
    p = symmetric_nodes(1.0, n_momentum)
    amp_p = np.full(n_momentum, 1.0 / np.sqrt(2.0))
    weights = quadrature_weights(n_momentum, 2.0 / (n_momentum - 1))
    resid = abs(float(integrate(amp_x**2, grid.nodes)) - 1.0)
    return PsfModel("sinc", grid, amp_x, p, amp_p, weights, resid, band_limit=1.0)


def make_sampled_psf(grid: Grid, amplitudes, asymmetry_tol: float = 1e-6) -> PsfModel:
    """PSF from user samples: symmetrize, renormalize, transform by FFT.

    Asymmetry up to ``asymmetry_tol`` (relative to the peak) is averaged
    away; anything larger is rejected.
    """
    a = np.asarray(amplitudes, dtype=float)
    if a.shape != (grid.n_points,):
        raise GridError(f"expected {grid.n_points} amplitudes, got shape {a.shape}")
    _check_points(grid)
    if not is_power_of_two(grid.n_points):
        raise NonPowerOfTwoError("sampled PSFs need a power-of-two grid for the FFT")
    peak = np.max(np.abs(a))
    if not np.isfinite(peak) or peak == 0:
        raise ZeroNormError("PSF samples have zero norm")
    asym = np.max(np.abs(a - a[::-1])) / peak
    if asym > asymmetry_tol:
        raise AsymmetryError(f"PSF asymmetry {asym:.2e} exceeds {asymmetry_tol:g}")
    a = 0.5 * (a + a[::-1])
    norm = float(integrate(a * a, grid.nodes))
    if norm <= 0:
        raise ZeroNormError("PSF samples have zero norm")
    a = a / np.sqrt(norm)
    pgrid = _padded_momentum_grid(grid)
    pad = (pgrid.n_points - grid.n_points) // 2
    spec, _ = fourier_transform(np.pad(a, pad), Grid.from_spacing(grid.spacing, pgrid.n_points))
    amp_p = spec.real
    amp_p = 0.5 * (amp_p + amp_p[::-1])
    return PsfModel("sampled", grid, a, pgrid.nodes, amp_p, pgrid.weights, 0.0)


def two_source_intensity(psf: PsfModel, pair: SourcePair | float, x) -> np.ndarray:
    """Mean image-plane intensity of two sources at +-s/2.

    Analytic models are evaluated in closed form. Sampled models interpolate
    |Psi|^2 linearly between grid nodes and treat it as zero off the grid.
    """
    s = pair.separation if isinstance(pair, SourcePair) else SourcePair(float(pair)).separation
    x = np.asarray(x, dtype=float)
    if not np.all(psf.grid.contains(x)):
        raise OutOfGridError(f"x outside the grid [{psf.grid.x_min}, {psf.grid.x_max}]")
    if psf.is_analytic:
        return 0.5 * (psf.intensity(x - s / 2) + psf.intensity(x + s / 2))
    i = psf.amp_x**2
    nodes = psf.grid.nodes
    return 0.5 * (
        np.interp(x - s / 2, nodes, i, left=0.0, right=0.0)
        + np.interp(x + s / 2, nodes, i, left=0.0, right=0.0)
    )


def load_psf_csv(path: str | Path) -> PsfModel:
    """Read a sampled PSF from a two-column ``x,amplitude`` CSV file."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "amplitude"]:
        raise GridError(f"{path}: header must be 'x,amplitude'")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise GridError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 2:
        raise GridError(f"{path}: expected two columns")
    x, amp = data[:, 0], data[:, 1]
    grid = Grid(float(x[-1]), x.size)
    if abs(x[0] + x[-1]) > 1e-9 * grid.x_max or np.max(np.abs(x - grid.nodes)) > 1e-6 * grid.spacing:
        raise GridError(f"{path}: x column is not a uniform grid symmetric about 0")
    return make_sampled_psf(grid, amp)


def save_psf_csv(psf: PsfModel, path: str | Path) -> None:
    def _w(fh):
        fh.write("x,amplitude\n")
        for xi, ai in zip(psf.grid.nodes, psf.amp_x):
            fh.write(f"{xi:.17g},{ai:.17g}\n")

    atomic_write(path, _w)
