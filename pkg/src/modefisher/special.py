"""Special functions evaluated by stable recurrences.

Spherical Bessel functions of order n <= |x| come from the upward
recurrence, which is stable there. Smaller arguments use Miller's downward
recurrence normalized with ``sum (2n+1) j_n(x)^2 = 1``; this stays accurate
near the zeros of j_0, where the usual ``sin(x)/x`` normalization breaks
down.
"""
from __future__ import annotations

import numpy as np

_RESCALE = 1e100
_SERIES_X = 1e-8


def spherical_jn_table(n_max: int, x) -> np.ndarray:
    """Return ``j_0(x) .. j_{n_max}(x)`` as an array of shape (n_max+1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    wanted = n_max
    n_max = max(n_max, 1)
    out = np.zeros((n_max + 1, x.size))
    ax = np.abs(x)

    small = ax < _SERIES_X
    if np.any(small):
        xs = ax[small]
        dfact = 1.0
        for n in range(n_max + 1):
            dfact *= 2 * n + 1
            out[n, small] = xs**n / dfact * (1.0 - xs * xs / (2.0 * (2 * n + 3)))

    # upward recurrence is stable while n <= |x|; Miller's method below that
    up = ax >= max(n_max, _SERIES_X)
    if np.any(up):
        out[:, up] = _upward(n_max, ax[up])
    mid = ~small & ~up
    if np.any(mid):
        out[:, mid] = _miller(n_max, ax[mid])

    neg = x < 0
    if np.any(neg):
        odd = (np.arange(n_max + 1) % 2 == 1)[:, None]
        out[:, neg] = np.where(odd, -out[:, neg], out[:, neg])
    return out[: wanted + 1]


def _upward(n_max: int, x: np.ndarray) -> np.ndarray:
    out = np.empty((n_max + 1, x.size))
    out[0] = np.sin(x) / x
    out[1] = out[0] / x - np.cos(x) / x
    for n in range(1, n_max):
        out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
    return out


def _miller(n_max: int, x: np.ndarray) -> np.ndarray:
    top = max(n_max, float(np.max(x)))
    start = int(top + 30 + 3.0 * np.sqrt(top))
    f_next = np.zeros(x.size)
    f_cur = np.full(x.size, 1e-30)
    stored = np.zeros((n_max + 1, x.size))
    norm = np.zeros(x.size)
    for n in range(start, -1, -1):
        # f_cur holds the unnormalized j_n
        if n <= n_max:
            stored[n] = f_cur
        norm += (2 * n + 1) * f_cur * f_cur
        if n == 0:
            break
        f_prev = (2 * n + 1) / x * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        huge = np.abs(f_cur) > _RESCALE
        if np.any(huge):
            scale = np.where(huge, 1.0 / _RESCALE, 1.0)
            f_cur = f_cur * scale
            f_next = f_next * scale
            stored *= scale
            norm *= scale * scale
    vals = stored / np.sqrt(norm)
    # fix the overall sign against whichever of j_0, j_1 is larger
    j0 = np.sin(x) / x
    j1 = np.sin(x) / x**2 - np.cos(x) / x
    use0 = np.abs(j0) >= np.abs(j1)
    ref = np.where(use0, j0, j1)
    got = np.where(use0, vals[0], vals[1])
    return vals * np.where(np.sign(got) == np.sign(ref), 1.0, -1.0)


def spherical_jn(n: int, x) -> np.ndarray:
    return spherical_jn_table(n, x)[n]


def spherical_jn_derivative_table(n_max: int, x) -> np.ndarray:
    """``j_n'(x)`` for n = 0..n_max via ``(2n+1) j_n' = n j_{n-1} - (n+1) j_{n+1}``."""
    j = spherical_jn_table(n_max + 1, x)
    n = np.arange(n_max + 1)[:, None]
    jm1 = np.vstack([np.zeros_like(j[:1]), j[:-2]])
    return (n * jm1 - (n + 1) * j[1:]) / (2 * n + 1)


def hermite_functions(n_max: int, u) -> np.ndarray:
    """Orthonormal Hermite functions h_0..h_{n_max} on the real line.

    ``h_n(u) = (2^n n! sqrt(pi))^-1/2 H_n(u) exp(-u^2/2)`` with the
    physicists' H_n, so every h_n has positive leading coefficient.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    h = np.zeros((n_max + 1, u.size))
    h[0] = np.pi**-0.25 * np.exp(-0.5 * u * u)
    if n_max >= 1:
        h[1] = np.sqrt(2.0) * u * h[0]
    for n in range(2, n_max + 1):
        h[n] = np.sqrt(2.0 / n) * u * h[n - 1] - np.sqrt((n - 1.0) / n) * h[n - 2]
    return h
