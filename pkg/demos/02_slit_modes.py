"""PSF-adapted modes for a slit aperture.

The slit PSF sin(x)/(sqrt(pi) x) has a flat spectrum on [-1, 1]. Its adapted
modes come from Legendre polynomials in momentum space and land on
spherical Bessel functions in position space. We build them numerically,
check them against the closed form, then count how many are needed.
"""
# %%
import numpy as np

from modefisher import (
    build_adapted_modes,
    build_hermite_gauss_modes,
    build_sinc_closed_form_modes,
    fisher_curve,
    make_sinc_psf,
    minimal_depth,
    quantum_fisher,
)
from modefisher.fisher import sinc_per_mode_fisher_table

psf = make_sinc_psf()
print("quantum limit:", quantum_fisher(psf))   # 1/3

# %% numerical modes against sqrt((2n+1)/pi) j_n(x)
numeric = build_adapted_modes(psf, 6)
closed = build_sinc_closed_form_modes(6, psf.grid)
for n in range(6):
    err = np.sqrt(np.mean((numeric.modes_x[n] - closed.modes_x[n]) ** 2))
    print(f"mode {n}: parity {numeric.parity[n]:+d}   RMS deviation {err:.1e}")

# a few samples of the first four modes near the origin
x = psf.x
sel = np.flatnonzero((np.abs(x) < 8) & (np.arange(x.size) % 200 == 0))
print("     x      phi0      phi1      phi2      phi3")
for i in sel:
    print(f"{x[i]:7.3f}" + "".join(f"{numeric.modes_x[n, i]:10.4f}" for n in range(4)))

# %% information per mode, from the closed form, at three separations
table = sinc_per_mode_fisher_table(14, [1.0, 2.0, 15.0])
for s, row in zip((1, 2, 15), table):
    top = np.argsort(row)[::-1][:3]
    print(f"s = {s:2d}: total {row.sum():.6f}; largest modes {top.tolist()}")

# %% ten adapted modes vs Hermite-Gauss modes of width pi
s = np.linspace(0, 15, 151)
adapted = fisher_curve(psf, build_adapted_modes(psf, 20), s)
hg = fisher_curve(psf, build_hermite_gauss_modes(np.pi, 150, p=psf.p, p_weights=psf.p_weights), s)
print("adapted modes needed for 98.5% at every s:", minimal_depth(adapted))
print("Hermite-Gauss modes needed:", minimal_depth(hg))
print("Hermite-Gauss, 100 modes, worst fraction:", (hg.cumulative[:, 99] / adapted.quantum).min())
