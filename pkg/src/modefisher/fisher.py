"""Fisher information for separation estimation.

Covers the quantum bound, direct intensity imaging, projections onto mode
sets (per mode and cumulative), and the slit PSF's plane-wave channels.
Projection amplitudes use the phase convention of :mod:`mode_builder`, under
which they are real.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import IncompatibleGridError, NonSincError
from .mode_builder import ModeSet
from .psf_models import PsfModel
from .special import spherical_jn_table

INTENSITY_FLOOR = 1e-14


def quantum_fisher(psf: PsfModel) -> float:
    """Second moment of momentum, ``integral p^2 |Psi(p)|^2 dp``.

    This is the separation Fisher information of any parity-definite complete
    projective measurement and the quantum limit; it does not depend on s.
    """
    return float(np.sum(psf.p_weights * psf.p**2 * psf.amp_p**2))


@dataclass(frozen=True, eq=False)
class AmplitudeTable:
    """Real projection amplitudes a_n(s) and their s-derivatives.

    ``imag_residue`` is ``max |Im(a_n * conj(da_n/ds))|`` before the real part
    is taken. It vanishes for parity-definite bases.
    """

    separations: np.ndarray
    amplitudes: np.ndarray
    derivative: np.ndarray
    imag_residue: float = 0.0

    @property
    def probabilities(self) -> np.ndarray:
        return self.amplitudes**2

    @property
    def tail(self) -> np.ndarray:
        """Probability not captured by the tabulated modes, per separation."""
        return 1.0 - np.sum(self.amplitudes**2, axis=1)


def _check_compatible(psf: PsfModel, modes: ModeSet):
    if modes.modes_p is None or modes.p is None:
        raise IncompatibleGridError("mode set has no momentum representation")
    if modes.p.shape != psf.p.shape or np.max(np.abs(modes.p - psf.p)) > 1e-12 * np.max(np.abs(psf.p)):
        raise IncompatibleGridError("mode set and PSF use different momentum grids")


def projection_kernel(psf: PsfModel, modes: ModeSet) -> np.ndarray:
    """Rows ``conj(Phi_n(p)) Psi(p) w(p)``; a_n(s) is the row times exp(-i p s/2)."""
    _check_compatible(psf, modes)
    return modes.modes_p.conj() * (psf.amp_p * psf.p_weights)


def mode_amplitudes(psf: PsfModel, modes: ModeSet, separations, chunk: int = 64) -> AmplitudeTable:
    """Amplitudes ``a_n(s) = integral conj(Phi_n(p)) Psi(p) exp(-i s p/2) dp``.

    Derivatives are the same integral with an extra ``-i p/2``, so no finite
    differencing is involved.
    """
    s = np.atleast_1d(np.asarray(separations, dtype=float))
    kern = projection_kernel(psf, modes)
    p = psf.p
    amps = np.empty((s.size, kern.shape[0]))
    ders = np.empty_like(amps)
    resid = 0.0
    for start in range(0, s.size, chunk):
        ss = s[start : start + chunk]
        ph = np.exp(-0.5j * p[:, None] * ss[None, :])
        a = kern @ ph
        da = kern @ (ph * (-0.5j * p)[:, None])
        resid = max(resid, float(np.max(np.abs((a * da.conj()).imag))))
        amps[start : start + chunk] = a.real.T
        ders[start : start + chunk] = da.real.T
    return AmplitudeTable(s, amps, ders, resid)


def per_mode_fisher(table: AmplitudeTable) -> np.ndarray:
    """``F_{s,n} = 4 (da_n/ds)^2``, shape (len(separations), n_modes)."""
    return 4.0 * table.derivative**2


def sinc_per_mode_fisher_table(n_max: int, s) -> np.ndarray:
    """Closed-form per-mode information of the slit-adapted basis, n = 0..n_max.

    Uses ``F_{s,n} = [n j_{n-1}(s/2) - (n+1) j_{n+1}(s/2)]^2 / (2n+1)`` with
    spherical Bessel j, identical to the half-integer-order form
    ``pi [n J_{n-1/2} - (n+1) J_{n+3/2}]^2 / ((2n+1) s)`` for s > 0 and
    continuous at s = 0 (1/3 for n = 1, zero otherwise).
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    j = spherical_jn_table(n_max + 1, s / 2)
    n = np.arange(n_max + 1)[:, None]
    jm1 = np.vstack([np.zeros_like(j[:1]), j[:-2]])
    return ((n * jm1 - (n + 1) * j[1:]) ** 2 / (2 * n + 1)).T


def sinc_per_mode_fisher_closed(n: int, s):
    """Closed-form information carried by slit-adapted mode ``n`` at separation ``s``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    out = sinc_per_mode_fisher_table(n, s)[:, n]
    return float(out[0]) if np.ndim(s) == 0 else out


@dataclass(frozen=True, eq=False)
class FisherCurve:
    """Fisher information of a mode set tabulated over separations.

    ``cumulative[:, D-1]`` is the information in the first D modes.
    """

    separations: np.ndarray
    per_mode: np.ndarray
    quantum: float
    tail: np.ndarray
    direct: np.ndarray | None = None
    cumulative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "cumulative", np.cumsum(self.per_mode, axis=1))

    @property
    def n_modes(self) -> int:
        return self.per_mode.shape[1]


def fisher_curve(psf: PsfModel, modes: ModeSet, separations, with_direct: bool = False) -> FisherCurve:
    table = mode_amplitudes(psf, modes, separations)
    direct = None
    if with_direct:
        direct = np.array([direct_imaging_fisher(psf, s) for s in table.separations])
    return FisherCurve(table.separations, per_mode_fisher(table), quantum_fisher(psf), table.tail, direct)


def cumulative_fisher(curve: FisherCurve, depth: int) -> np.ndarray:
    """Information summed over the first ``depth`` modes, per separation."""
    if depth < 0 or depth > curve.n_modes:
        raise ValueError(f"depth must be in [0, {curve.n_modes}], got {depth}")
    if depth == 0:
        return np.zeros(curve.separations.size)
    return curve.cumulative[:, depth - 1].copy()


def minimal_depth(curve: FisherCurve, fraction: float = 0.985) -> int | None:
    """Smallest D reaching ``fraction`` of the quantum bound at every separation."""
    ok = np.all(curve.cumulative >= fraction * curve.quantum, axis=0)
    idx = np.flatnonzero(ok)
    return int(idx[0]) + 1 if idx.size else None


def multinomial_fisher(probabilities, derivatives, floor: float = 1e-300) -> float:
    """``sum (dp_k/ds)^2 / p_k`` over outcomes with nonnegligible probability."""
    p = np.asarray(probabilities, dtype=float)
    d = np.asarray(derivatives, dtype=float)
    m = p > floor
    return float(np.sum(d[m] ** 2 / p[m]))


# --- direct imaging -------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _intensity_zeros(psf: PsfModel) -> np.ndarray:
    """Positive zeros (or deep minima) of |Psi|^2, refined off the grid."""
    x = psf.grid.nodes
    half = x > 0
    xi = x[half]
    amp = psf.amplitude(xi)
    ii = amp * amp
    h = psf.grid.spacing
    out = []
    for k in np.flatnonzero(np.sign(amp[1:]) * np.sign(amp[:-1]) < 0):
        out.append(brentq(psf.amplitude, xi[k], xi[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    dips = (ii[1:-1] < ii[:-2]) & (ii[1:-1] <= ii[2:]) & (ii[1:-1] < 1e-3 * np.max(ii))
    for k in np.flatnonzero(dips) + 1:
        if np.sign(amp[k - 1]) * np.sign(amp[k + 1]) < 0:
            continue
        res = minimize_scalar(
            lambda t: float(psf.intensity(t)), bounds=(xi[k] - h, xi[k] + h),
            method="bounded", options={"xatol": 1e-13},
        )
        out.append(res.x)
    return np.sort(np.array(out))


def _graded_edges(x_max: float, panel: float, zeros: np.ndarray, finest: float) -> np.ndarray:
    edges = [np.linspace(0.0, x_max, int(np.ceil(x_max / panel)) + 1)]
    for z in zeros:
        d = panel
        ds = []
        while d > finest:
            ds.append(d)
            d *= 0.5
        ds = np.array(ds)
        edges.append(z - ds)
        edges.append(z + ds)
        edges.append([z])
    e = np.concatenate(edges)
    e = e[(e >= 0) & (e <= x_max)]
    return np.unique(e)


def direct_imaging_fisher(psf: PsfModel, s: float) -> float:
    """Fisher information per photon of ideal image-plane intensity detection.

    ``F = integral (d rho_s/ds)^2 / rho_s dx`` over the PSF grid's extent,
    with ``d rho_s/ds = [I'(x + s/2) - I'(x - s/2)] / 4`` evaluated from the
    PSF's amplitude and derivative. Where |Psi|^2 has zeros the integrand has
    peaks of width ~s; the composite Gauss-Legendre mesh is graded toward
    them down to ``s * 1e-4``. Points with rho_s below 1e-14 are dropped.
    """
    s = float(s)
    if s < 0:
        raise ValueError("separation must be >= 0")
    if s == 0:
        return 0.0
    x_max = psf.grid.x_max
    panel = 8 * psf.grid.spacing
    zeros = _intensity_zeros(psf)
    edges = _graded_edges(x_max, panel, zeros, finest=max(s * 1e-4, 1e-12))
    a, b = edges[:-1, None], edges[1:, None]
    x = (0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * _GL_WEIGHTS).ravel()
    xp, xm = x + s / 2, x - s / 2
    rho = 0.5 * (psf.intensity(xm) + psf.intensity(xp))
    drho = 0.25 * (psf.intensity_derivative(xp) - psf.intensity_derivative(xm))
    keep = rho >= INTENSITY_FLOOR
    # integrand is even in x
    return float(2.0 * np.sum(w[keep] * drho[keep] ** 2 / rho[keep]))


# --- plane-wave channels ----------------------------------------------------

@dataclass(frozen=True)
class PlaneWaveFisher:
    """Information in one plane-wave channel of the slit PSF.

    ``derived`` comes from projecting the shifted PSF onto the channel's
    modes; ``as_printed`` is the published curve for the sine channel
    (``1/2 integral k^2 sin^2(ks/2) dk``) and its complement to 1/3 for the
    cosine channel.
    """

    channel: str
    separation: float
    derived: float
    as_printed: float


def plane_wave_amplitudes(psf: PsfModel, s: float, channel: str):
    """Channel amplitude densities over k and their s-derivatives.

    Projecting Psi(x - s/2) onto ``sin(kx)/sqrt(2 pi)`` gives
    ``Psi(k) sin(ks/2)``, onto ``cos(kx)/sqrt(2 pi)`` gives ``Psi(k) cos(ks/2)``.
    """
    k = psf.p
    half = 0.5 * k * s
    if channel == "sine":
        return psf.amp_p * np.sin(half), 0.5 * k * psf.amp_p * np.cos(half)
    if channel == "cosine":
        return psf.amp_p * np.cos(half), -0.5 * k * psf.amp_p * np.sin(half)
    raise ValueError(f"channel must be 'sine' or 'cosine', got {channel!r}")


def plane_wave_fisher(psf: PsfModel, s: float, channel: str = "sine") -> PlaneWaveFisher:
    if psf.kind != "sinc":
        raise NonSincError("plane-wave channel information is defined for the slit (sinc) PSF")
    _, da = plane_wave_amplitudes(psf, s, channel)
    derived = float(4.0 * np.sum(psf.p_weights * da**2))
    k = psf.p
    printed_sine = float(0.5 * np.sum(psf.p_weights * k**2 * np.sin(0.5 * k * s) ** 2))
    printed = printed_sine if channel == "sine" else quantum_fisher(psf) - printed_sine
    return PlaneWaveFisher(channel, float(s), derived, printed)
