"""Measuring the Fourier sine and cosine transforms of the image.

Projecting on sin(kx) and cos(kx) splits the slit PSF's information into two
channels. Working the amplitude derivatives through gives the sine channel
1/2 int k^2 cos^2(ks/2) dk, optimal as s -> 0; the cosine channel carries
the rest. The sin^2 variant is tabulated too; it coincides with the cosine
channel.
"""
# %%
import numpy as np

from modefisher import make_sinc_psf, plane_wave_fisher

psf = make_sinc_psf()

print("     s    sine    cosine    sum    sin^2-form")
for s in np.linspace(0, 12, 13):
    sine = plane_wave_fisher(psf, s, "sine")
    cosine = plane_wave_fisher(psf, s, "cosine")
    print(f"{s:6.1f} {sine.derived:8.4f} {cosine.derived:8.4f} {sine.derived + cosine.derived:8.4f}"
          f" {sine.as_printed:8.4f}")

# %% small s: sin^2 form behaves like s^2/20
s = 1e-2
print("sin^2 form at s=0.01:", plane_wave_fisher(psf, s).as_printed, " s^2/20 =", s * s / 20)
