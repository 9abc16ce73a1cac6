"""Measurement mode sets: PSF-adapted, closed-form slit, Hermite-Gauss and
plane-wave modes.

Phase convention: the n-th adapted momentum mode is ``(-i)^n Q_n(p) Psi(p)``.
For a real symmetric Psi this makes every position-space mode real with
parity (-1)^n and every projection amplitude real. The sign choice is the
one under which the Gaussian case reproduces the standard Hermite functions
and the slit case reproduces ``sqrt(n+1/2) J_{n+1/2}(x)/sqrt(x)`` exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuumModesError, GridError, GridTooNarrowError
from .numerics import (
    MAX_DEGREE,
    Grid,
    OrthoBasis,
    integrate,
    inverse_transform_by_quadrature,
    orthonormalize,
)
from .psf_models import PsfModel, default_sinc_grid
from .special import hermite_functions, spherical_jn_table

MAX_HERMITE_GAUSS = 200


@dataclass(frozen=True, eq=False)
class ModeSet:
    """A family of measurement modes sampled in position (and momentum).

    Attributes
    ----------
    provenance : str
        ``"adapted"``, ``"hermite_gauss"``, ``"sinc_closed_form"`` or
        ``"plane_wave"``.
    x, modes_x : ndarray
        Position nodes and real mode values, shape (count, len(x)).
    p, modes_p : ndarray or None
        Momentum nodes and complex mode values, when known.
    parity : ndarray of int
        +1 for even modes, -1 for odd ones.
    continuum : bool
        True for delta-normalized plane waves, which have no Gram matrix.
    inner_space : {"x", "p"}
        Representation in which the modes are complete on their grid and
        in which overlaps are computed.
    """

    provenance: str
    x: np.ndarray = field(repr=False)
    modes_x: np.ndarray = field(repr=False)
    parity: np.ndarray = field(repr=False)
    p: np.ndarray | None = field(default=None, repr=False)
    modes_p: np.ndarray | None = field(default=None, repr=False)
    p_weights: np.ndarray | None = field(default=None, repr=False)
    continuum: bool = False
    inner_space: str = "x"
    params: dict = field(default_factory=dict)
    basis: OrthoBasis | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return self.modes_x.shape[0]

    def head(self, count: int) -> "ModeSet":
        """The first ``count`` modes as a new set."""
        mp = None if self.modes_p is None else self.modes_p[:count]
        return ModeSet(
            self.provenance, self.x, self.modes_x[:count], self.parity[:count],
            self.p, mp, self.p_weights, self.continuum, self.inner_space,
            dict(self.params), self.basis,
        )


def _phase(n: np.ndarray) -> np.ndarray:
    return (-1j) ** (np.asarray(n) % 4)


def build_adapted_modes(psf: PsfModel, count: int) -> ModeSet:
    """Modes ``(-i)^n Q_n(p) Psi(p)`` with Q_n orthonormal under |Psi(p)|^2 dp.

    Position-space modes come from a direct quadrature of the inverse
    Fourier integral over the momentum support, evaluated on the PSF grid.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    measure = psf.momentum_measure()
    basis = orthonormalize(measure, count - 1)
    n = np.arange(count)
    # the measure trims its tails symmetrically; put the nodes back in place
    lo = (psf.p.size - measure.nodes.size) // 2
    sl = slice(lo, lo + measure.nodes.size)
    q_full = np.zeros((count, psf.p.size))
    q_full[:, sl] = basis.sampled_polys
    modes_p = _phase(n)[:, None] * q_full * psf.amp_p
    sup = modes_p[:, sl]
    modes_x = inverse_transform_by_quadrature(sup, psf.p[sl], psf.p_weights[sl], psf.x).real
    parity = np.where(n % 2 == 0, 1, -1)
    return ModeSet(
        "adapted", psf.x, modes_x, parity, psf.p, modes_p, psf.p_weights,
        inner_space="p", params={"psf": psf.kind}, basis=basis,
    )


def sinc_mode_closed_form(n: int, x) -> np.ndarray:
    """Slit-adapted mode ``sqrt(n+1/2) J_{n+1/2}(x) / sqrt(x)``.

    Written as ``sqrt((2n+1)/pi) j_n(x)`` with the spherical Bessel j_n, which
    is the analytic continuation to x <= 0 (finite at the origin for even n,
    zero for odd n).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    return np.sqrt((2 * n + 1) / np.pi) * spherical_jn_table(n, x)[n]


def build_sinc_closed_form_modes(count: int, grid: Grid | None = None) -> ModeSet:
    grid = grid or default_sinc_grid()
    x = grid.nodes
    n = np.arange(count)
    modes = np.sqrt((2 * n + 1) / np.pi)[:, None] * spherical_jn_table(count - 1, x)
    return ModeSet("sinc_closed_form", x, modes, np.where(n % 2 == 0, 1, -1))


def default_hermite_gauss_grid(sigma: float, count: int) -> Grid:
    ell = np.sqrt(2.0) * sigma
    half = ell * (np.sqrt(2.0 * count + 1.0) + 10.0)
    return Grid(float(half), 2**13 if count <= 160 else 2**14)


def build_hermite_gauss_modes(
    sigma: float,
    count: int,
    grid: Grid | None = None,
    p: np.ndarray | None = None,
    p_weights: np.ndarray | None = None,
) -> ModeSet:
    """Hermite-Gauss modes with ground mode proportional to exp(-x^2 / (4 sigma^2)).

    ``sigma`` is the intensity standard deviation of the ground mode, as for
    the Gaussian PSF. If momentum nodes ``p`` are given, the momentum
    representation ``(-i)^n sqrt(l) h_n(p l)`` with ``l = sqrt(2) sigma`` is
    filled in on them (e.g. a PSF's momentum grid, for projection).
    """
    if not np.isfinite(sigma) or sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not 1 <= count <= MAX_HERMITE_GAUSS:
        raise ValueError(f"count must be in [1, {MAX_HERMITE_GAUSS}]")
    grid = grid or default_hermite_gauss_grid(sigma, count)
    ell = np.sqrt(2.0) * sigma
    x = grid.nodes
    modes_x = hermite_functions(count - 1, x / ell) / np.sqrt(ell)
    tail = 1.0 - float(integrate(modes_x[-1] ** 2, x))
    if tail > 1e-6:
        raise GridTooNarrowError(
            f"grid half-width {grid.x_max} truncates {tail:.2e} of Hermite-Gauss mode {count - 1}"
        )
    n = np.arange(count)
    modes_p = None
    if p is not None:
        p = np.asarray(p, dtype=float)
        modes_p = _phase(n)[:, None] * hermite_functions(count - 1, p * ell) * np.sqrt(ell)
    return ModeSet(
        "hermite_gauss", x, modes_x, np.where(n % 2 == 0, 1, -1), p, modes_p, p_weights,
        params={"sigma": float(sigma)},
    )


def build_plane_wave_modes(k_grid, grid: Grid | None = None) -> ModeSet:
    """Cosine and sine plane waves ``cos(kx)/sqrt(2 pi)``, ``sin(kx)/sqrt(2 pi)``.

    Cosine modes come first, then sine modes, in ``k_grid`` order. They are
    delta-normalized continuum modes and carry no Gram matrix.
    """
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or np.any(k < 0) or np.unique(k).size != k.size:
        raise ValueError("k values must be distinct and nonnegative")
    grid = grid or default_sinc_grid()
    x = grid.nodes
    arg = k[:, None] * x[None, :]
    modes = np.vstack([np.cos(arg), np.sin(arg)]) / np.sqrt(2 * np.pi)
    parity = np.concatenate([np.ones(k.size, int), -np.ones(k.size, int)])
    return ModeSet("plane_wave", x, modes, parity, continuum=True, params={"k": k})


def gram_matrix(modes: ModeSet) -> np.ndarray:
    """Pairwise overlaps of the modes in their complete representation.

    Band-limited adapted modes decay only like 1/x, so their overlaps are
    taken in momentum space where they are exact; all others use position
    space.
    """
    if modes.continuum:
        raise ContinuumModesError("plane-wave modes are not normalizable")
    if modes.inner_space == "p":
        m = modes.modes_p
        return ((m.conj() * modes.p_weights) @ m.T).real
    w = Grid(float(modes.x[-1]), modes.x.size).weights
    return (modes.modes_x * w) @ modes.modes_x.T


def concatenate_modes(*sets: ModeSet) -> ModeSet:
    """Stack mode sets sharing a position grid; overlaps then use x-space."""
    x = sets[0].x
    for m in sets[1:]:
        if m.x.shape != x.shape or np.max(np.abs(m.x - x)) > 0:
            raise GridError("mode sets live on different position grids")
    return ModeSet(
        "+".join(m.provenance for m in sets), x,
        np.vstack([m.modes_x for m in sets]),
        np.concatenate([m.parity for m in sets]),
        continuum=any(m.continuum for m in sets),
    )


def parity_defect(modes: ModeSet) -> float:
    """``max |Phi_n(-x) - parity_n Phi_n(x)|`` over all modes."""
    return float(np.max(np.abs(modes.modes_x[:, ::-1] - modes.parity[:, None] * modes.modes_x)))


__all__ = [
    "MAX_DEGREE",
    "ModeSet",
    "build_adapted_modes",
    "build_hermite_gauss_modes",
    "build_plane_wave_modes",
    "build_sinc_closed_form_modes",
    "concatenate_modes",
    "gram_matrix",
    "parity_defect",
    "sinc_mode_closed_form",
]
