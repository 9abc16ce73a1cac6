"""Deterministic numeric kernels: grids, quadrature, unitary Fourier
transforms, finite differences and orthonormal polynomials for symmetric
weights.

Everything here is a pure function of its inputs. Quadrature is always done
on the caller's grid; there is no adaptive subdivision.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal

import numpy as np
from scipy import fft as sfft

from .errors import (
    DomainError,
    GridError,
    InstabilityError,
    NonPowerOfTwoError,
)

SQRT_2PI = np.sqrt(2.0 * np.pi)
MAX_DEGREE = 60


def symmetric_nodes(x_max: float, n_points: int) -> np.ndarray:
    """Uniform nodes on [-x_max, x_max] that are exactly mirror symmetric.

    ``np.linspace`` does not guarantee ``x[i] == -x[n-1-i]`` bitwise; the
    integer numerator used here does, which keeps parity properties exact.
    """
    i = np.arange(n_points, dtype=float)
    return x_max * (2.0 * i - (n_points - 1)) / (n_points - 1)


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform grid symmetric about the origin, endpoints included."""

    x_max: float
    n_points: int

    def __post_init__(self):
        if not np.isfinite(self.x_max) or self.x_max <= 0:
            raise GridError(f"x_max must be positive and finite, got {self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise GridError(f"n_points must be an integer >= 2, got {self.n_points}")

    @property
    def x_min(self) -> float:
        return -self.x_max

    @property
    def spacing(self) -> float:
        return 2.0 * self.x_max / (self.n_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = symmetric_nodes(self.x_max, self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        w = quadrature_weights(self.n_points, self.spacing)
        w.flags.writeable = False
        return w

    def contains(self, x) -> np.ndarray:
        return np.abs(np.asarray(x, dtype=float)) <= self.x_max * (1 + 1e-12)

    @classmethod
    def from_spacing(cls, spacing: float, n_points: int) -> "Grid":
        return cls(spacing * (n_points - 1) / 2.0, n_points)


def quadrature_weights(n_points: int, h: float) -> np.ndarray:
    """Composite Simpson weights for ``n_points`` uniform nodes of spacing h.

    An odd number of intervals is handled by a 3/8 panel; the result is the
    average of the panel placed at either end, so the weights stay positive
    and mirror symmetric. Fourth order in h either way.
    """
    n = int(n_points)
    if n < 2:
        raise GridError("need at least two nodes")
    if n == 2:
        return np.array([h / 2, h / 2])
    if n % 2 == 1:
        w = np.ones(n)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * h / 3.0
    if n == 4:
        return np.array([1.0, 3.0, 3.0, 1.0]) * 3.0 * h / 8.0
    left = np.zeros(n)
    left[: n - 3] = quadrature_weights(n - 3, h)
    left[n - 4 :] += np.array([1.0, 3.0, 3.0, 1.0]) * 3.0 * h / 8.0
    return 0.5 * (left + left[::-1])


def _uniform_spacing(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise GridError("sample positions must be a 1-D array of length >= 2")
    h = (x[-1] - x[0]) / (x.size - 1)
    if h <= 0 or np.max(np.abs(np.diff(x) - h)) > 1e-8 * h:
        raise GridError("samples are not on a uniform increasing grid")
    return h


def integrate(values, x, domain: tuple[float, float] | None = None):
    """Integrate samples ``values`` taken at uniform positions ``x``.

    ``domain`` restricts the integral to a sub-interval whose endpoints must
    be grid nodes. Reduction is over the last axis, so a stack of functions
    is integrated in one call.
    """
    values = np.asarray(values)
    x = np.asarray(x, dtype=float)
    h = _uniform_spacing(x)
    if values.shape[-1] != x.size:
        raise GridError("values and positions differ in length")
    if domain is not None:
        a, b = float(domain[0]), float(domain[1])
        tol = 1e-9 * h
        if a < x[0] - tol or b > x[-1] + tol or a >= b:
            raise DomainError(f"domain [{a}, {b}] not covered by grid [{x[0]}, {x[-1]}]")
        ia = int(round((a - x[0]) / h))
        ib = int(round((b - x[0]) / h))
        if abs(x[ia] - a) > 1e-6 * h or abs(x[ib] - b) > 1e-6 * h:
            raise DomainError("domain endpoints must coincide with grid nodes")
        values = values[..., ia : ib + 1]
    w = quadrature_weights(values.shape[-1], h)
    return values @ w


def fourier_transform(
    values,
    grid: Grid,
    direction: Literal["forward", "inverse"] = "forward",
) -> tuple[np.ndarray, Grid]:
    """Unitary continuous Fourier transform sampled by FFT.

    Forward kernel is ``exp(-i p x) / sqrt(2 pi)``, inverse ``exp(+i p x) /
    sqrt(2 pi)``. The returned grid is the reciprocal one: same node count,
    spacing ``2 pi / (n * h)``, again symmetric about zero. Forward followed by
    inverse is the identity to rounding.
    """
    n = grid.n_points
    if not is_power_of_two(n):
        raise NonPowerOfTwoError(f"FFT grid needs a power-of-two size, got {n}")
    f = np.asarray(values, dtype=complex)
    if f.shape[-1] != n:
        raise GridError("values do not match grid size")
    h = grid.spacing
    other = Grid.from_spacing(2.0 * np.pi / (n * h), n)
    x0 = grid.nodes[0]
    q = other.nodes
    j = np.arange(n)
    if direction == "forward":
        pre = np.exp(-1j * q[0] * j * h)
        out = np.fft.fft(f * pre, axis=-1) * np.exp(-1j * x0 * q)
        return out * (h / SQRT_2PI), other
    if direction == "inverse":
        pre = np.exp(1j * q[0] * j * h)
        out = np.fft.ifft(f * pre, axis=-1) * np.exp(1j * x0 * q) * n
        return out * (h / SQRT_2PI), other
    raise ValueError(f"unknown direction {direction!r}")


def chirp_sum(g, theta: float, m: int) -> np.ndarray:
    """``X_j = sum_k g_k exp(i theta j k)`` for j < m, by Bluestein's algorithm.

    Chirp phases are formed from exact integer squares, which keeps the
    result within ~1e-12 of the direct sum for 10^4-point inputs.
    """
    g = np.asarray(g, dtype=complex)
    k = g.shape[-1]
    n = sfft.next_fast_len(k + m - 1)
    kk = np.arange(k, dtype=float)
    mm = np.arange(-(k - 1), m, dtype=float)
    a = g * np.exp(0.5j * theta * (kk * kk))
    b = np.exp(-0.5j * theta * (mm * mm))
    conv = sfft.ifft(sfft.fft(a, n, axis=-1) * sfft.fft(b, n), axis=-1)[..., k - 1 : k - 1 + m]
    jj = np.arange(m, dtype=float)
    return np.exp(0.5j * theta * (jj * jj)) * conv


def inverse_transform_by_quadrature(values_p, p, weights_p, x, chunk: int = 256) -> np.ndarray:
    """Evaluate ``(2 pi)^-1/2 * integral f(p) exp(i p x) dp`` at the points x.

    A weighted sum over the momentum nodes. Unlike the FFT this does not tie
    the x sampling to the momentum spacing, so band-limited functions with
    compact momentum support are transformed to quadrature accuracy.
    ``values_p`` may hold several functions stacked along axis 0. Uniform x
    goes through :func:`chirp_sum`; anything else through a dense sum.
    """
    f = np.atleast_2d(np.asarray(values_p, dtype=complex)) * weights_p
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.size > 2 and p.size > 2:
        dp = (p[-1] - p[0]) / (p.size - 1)
        dx = (x[-1] - x[0]) / (x.size - 1)
        if np.max(np.abs(np.diff(x) - dx)) <= 1e-8 * abs(dx) and np.max(np.abs(np.diff(p) - dp)) <= 1e-8 * dp:
            g = f * np.exp(1j * x[0] * dp * np.arange(p.size))
            return np.exp(1j * p[0] * x) * chirp_sum(g, dp * dx, x.size) / SQRT_2PI
    out = np.empty((f.shape[0], x.size), dtype=complex)
    fr, fi = f.real.T, f.imag.T
    for start in range(0, x.size, chunk):
        xs = x[start : start + chunk, None] * p[None, :]
        c, s = np.cos(xs), np.sin(xs)
        out[:, start : start + chunk] = ((c @ fr - s @ fi) + 1j * (s @ fr + c @ fi)).T
    return out / SQRT_2PI


def finite_diff(f: Callable[[float], float], x0: float, h: float) -> float:
    """Five-point central difference, truncation error O(h**4)."""
    return (-f(x0 + 2 * h) + 8 * f(x0 + h) - 8 * f(x0 - h) + f(x0 - 2 * h)) / (12.0 * h)


@dataclass(frozen=True)
class Measure:
    """Discrete symmetric measure: nodes, density samples and quadrature weights.

    ``mass`` holds the per-node masses (density times quadrature weight);
    inner products are plain weighted sums against it.
    """

    nodes: np.ndarray
    density: np.ndarray
    quad: np.ndarray

    def __post_init__(self):
        if np.any(self.density < 0):
            raise ValueError("measure density must be nonnegative")
        if np.max(np.abs(self.density - self.density[::-1])) > 1e-12 * np.max(self.density):
            raise ValueError("measure density is not symmetric")
        if np.max(np.abs(self.nodes + self.nodes[::-1])) > 1e-12 * np.max(np.abs(self.nodes)):
            raise ValueError("measure support is not symmetric")

    @cached_property
    def mass(self) -> np.ndarray:
        return self.density * self.quad

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.mass))

    @classmethod
    def from_samples(cls, nodes, density, quad=None, floor: float = 1e-280) -> "Measure":
        """Build a measure, symmetrizing and trimming the far tails.

        Nodes whose density falls below ``floor`` times the peak are dropped
        from both ends symmetrically; high-degree polynomials would otherwise
        overflow there while contributing nothing.
        """
        nodes = np.asarray(nodes, dtype=float)
        density = np.asarray(density, dtype=float)
        if quad is None:
            quad = quadrature_weights(nodes.size, _uniform_spacing(nodes))
        density = 0.5 * (density + density[::-1])
        quad = 0.5 * (quad + quad[::-1])
        keep = density > floor * np.max(density)
        idx = np.flatnonzero(keep)
        if idx.size == 0:
            raise ValueError("measure has no mass")
        lo = min(idx[0], nodes.size - 1 - idx[-1])
        sl = slice(lo, nodes.size - lo)
        return cls(nodes[sl], density[sl], quad[sl])


@dataclass(frozen=True)
class OrthoBasis:
    """Orthonormal polynomials Q_0..Q_N sampled on a measure's nodes.

    ``recurrence_b[k-1]`` is beta_k in ``p Q_n = sqrt(beta_{n+1}) Q_{n+1} +
    sqrt(beta_n) Q_{n-1}``; all alpha_k vanish for symmetric weights.
    """

    measure: Measure
    recurrence_b: np.ndarray
    sampled_polys: np.ndarray = field(repr=False)

    @property
    def degree_max(self) -> int:
        return self.sampled_polys.shape[0] - 1

    def gram(self) -> np.ndarray:
        q = self.sampled_polys
        return (q * self.measure.mass) @ q.T


def orthonormalize(measure: Measure, degree_max: int, tol: float = 1e-6) -> OrthoBasis:
    """Stieltjes procedure for polynomials orthonormal under ``measure``.

    Works from weighted inner products of the sampled polynomials, never from
    raw moments. The odd recurrence coefficients are fixed at zero, which
    together with exactly mirrored nodes gives ``Q_n(-p) = (-1)^n Q_n(p)``
    bit for bit.
    """
    if degree_max < 0:
        raise ValueError("degree_max must be >= 0")
    if degree_max > MAX_DEGREE:
        raise InstabilityError(f"degree {degree_max} exceeds the stability cap {MAX_DEGREE}")
    p = measure.nodes
    mu = measure.mass
    q = np.zeros((degree_max + 1, p.size))
    q[0] = 1.0 / np.sqrt(np.sum(mu))
    beta = np.zeros(degree_max)
    for n in range(degree_max):
        r = p * q[n]
        if n > 0:
            r = r - np.sqrt(beta[n - 1]) * q[n - 1]
        b = float(np.sum(r * r * mu))
        if not np.isfinite(b) or b <= 0:
            raise InstabilityError(f"recurrence coefficient beta_{n + 1} = {b} is not positive")
        beta[n] = b
        q[n + 1] = r / np.sqrt(b)
    basis = OrthoBasis(measure, beta, q)
    resid = np.max(np.abs(basis.gram() - np.eye(degree_max + 1)))
    if not resid <= tol:
        raise InstabilityError(f"orthonormality residual {resid:.3e} exceeds {tol:g}")
    return basis
