import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modefisher import (
    Grid,
    SourcePair,
    integrate,
    load_psf_csv,
    make_gaussian_psf,
    make_sampled_psf,
    make_sinc_psf,
    save_psf_csv,
    two_source_intensity,
)
from modefisher.errors import (
    AsymmetryError,
    GridError,
    GridTooNarrowError,
    OutOfGridError,
    ZeroNormError,
)


def test_gaussian_peak_value(gauss_psf):
    assert gauss_psf.amplitude(0.0) == pytest.approx((2 * np.pi) ** -0.25, rel=1e-14)


def test_gaussian_normalized_both_spaces(gauss_psf):
    assert integrate(gauss_psf.amp_x**2, gauss_psf.x) == pytest.approx(1.0, abs=1e-9)
    assert np.sum(gauss_psf.p_weights * gauss_psf.amp_p**2) == pytest.approx(1.0, abs=1e-9)


def test_gaussian_momentum_second_moment_scales():
    psf = make_gaussian_psf(2.0)
    assert np.sum(psf.p_weights * psf.p**2 * psf.amp_p**2) == pytest.approx(1 / 16, abs=1e-12)


def test_gaussian_momentum_is_fourier_transform(gauss_psf):
    from modefisher.numerics import inverse_transform_by_quadrature

    back = inverse_transform_by_quadrature(gauss_psf.amp_p, gauss_psf.p, gauss_psf.p_weights, gauss_psf.x)[0]
    assert np.sqrt(np.mean(np.abs(back - gauss_psf.amp_x) ** 2)) < 1e-8


def test_gaussian_symmetry(gauss_psf):
    assert np.max(np.abs(gauss_psf.amp_x - gauss_psf.amp_x[::-1])) <= 1e-12


def test_gaussian_narrow_grid_rejected():
    with pytest.raises(GridTooNarrowError):
        make_gaussian_psf(1.0, Grid(5.0, 1024))


def test_gaussian_sigma_must_be_positive():
    with pytest.raises(ValueError):
        make_gaussian_psf(-1.0)


def test_sinc_values(sinc_psf):
    assert sinc_psf.amplitude(0.0) == pytest.approx(1 / np.sqrt(np.pi), rel=1e-15)
    i = np.searchsorted(sinc_psf.p, 0.5)
    assert sinc_psf.p[i] == 0.5 and sinc_psf.amp_p[i] == pytest.approx(2**-0.5)
    # the spectrum is only sampled on its support [-1, 1]; it is zero beyond
    assert sinc_psf.band_limit == 1.0 and np.max(np.abs(sinc_psf.p)) == 1.0


def test_sinc_unit_norm_in_momentum(sinc_psf):
    assert np.sum(sinc_psf.p_weights * sinc_psf.amp_p**2) == pytest.approx(1.0, abs=1e-12)


def test_sinc_position_norm_loses_only_tails(sinc_psf):
    # the cut 1/x^2 tails carry about 1/(pi x_max) of the norm
    assert sinc_psf.norm_residual == pytest.approx(1 / (np.pi * 40.96), rel=0.02)


def test_sinc_grid_must_span_40():
    with pytest.raises(GridTooNarrowError):
        make_sinc_psf(Grid(30.0, 8192))


def test_sinc_cdf_matches_quadrature(sinc_psf):
    x = sinc_psf.x
    i = sinc_psf.intensity(x)
    # CDF increments over a node-aligned window equal the quadrature of I
    a, b = x[4096 - 200], x[4096 + 300]
    sl = slice(4096 - 200, 4096 + 301)
    assert sinc_psf.intensity_cdf(b) - sinc_psf.intensity_cdf(a) == pytest.approx(integrate(i[sl], x[sl]), abs=1e-10)
    assert sinc_psf.intensity_cdf(0.0) == pytest.approx(0.5, abs=1e-15)


def test_sampled_gaussian_round_trip(gauss_psf):
    sampled = make_sampled_psf(gauss_psf.grid, gauss_psf.amp_x)
    assert np.max(np.abs(sampled.amp_x - gauss_psf.amp_x)) < 1e-10
    assert np.sqrt(np.mean((sampled.amp_p - gauss_psf.amp_p) ** 2)) < 1e-10


def test_sampled_zero_input():
    with pytest.raises(ZeroNormError):
        make_sampled_psf(Grid(10.0, 1024), np.zeros(1024))


def test_sampled_asymmetric_input():
    g = Grid(10.0, 1024)
    with pytest.raises(AsymmetryError):
        make_sampled_psf(g, g.nodes)


def test_sampled_small_asymmetry_is_averaged(gauss_psf, rng):
    noisy = gauss_psf.amp_x * (1 + 1e-8 * rng.standard_normal(gauss_psf.x.size))
    psf = make_sampled_psf(gauss_psf.grid, noisy)
    assert np.array_equal(psf.amp_x, psf.amp_x[::-1])
    assert integrate(psf.amp_x**2, psf.x) == pytest.approx(1.0, abs=1e-12)


def test_sampled_wrong_length():
    with pytest.raises(GridError):
        make_sampled_psf(Grid(10.0, 1024), np.ones(1000))


def test_two_source_intensity_coincident(gauss_psf):
    x = gauss_psf.x[::37]
    assert np.allclose(two_source_intensity(gauss_psf, SourcePair(0.0), x), gauss_psf.amp_x[::37] ** 2)


def test_two_source_intensity_gaussian_value(gauss_psf):
    val = two_source_intensity(gauss_psf, SourcePair(2.0), 0.0)
    assert val == pytest.approx(np.exp(-0.5) / np.sqrt(2 * np.pi), rel=1e-14)


@pytest.mark.parametrize("s", [0.0, 1.0, 5.0])
def test_two_source_intensity_normalized(gauss_psf, s):
    x = gauss_psf.x
    assert integrate(two_source_intensity(gauss_psf, s, x), x) == pytest.approx(1.0, abs=1e-9)


def test_two_source_intensity_sampled_uses_grid(gauss_psf):
    sampled = make_sampled_psf(gauss_psf.grid, gauss_psf.amp_x)
    x = gauss_psf.x[100:-100]
    s = 2 * gauss_psf.grid.spacing * 7  # shift by whole nodes: interpolation exact
    assert np.allclose(two_source_intensity(sampled, s, x), two_source_intensity(gauss_psf, s, x), atol=1e-10)


def test_two_source_intensity_out_of_grid(gauss_psf):
    with pytest.raises(OutOfGridError):
        two_source_intensity(gauss_psf, 1.0, 20.0)


def test_source_pair_validation():
    with pytest.raises(ValueError):
        SourcePair(-1.0)
    with pytest.raises(ValueError):
        SourcePair(float("nan"))


def test_csv_round_trip(tmp_path, gauss_psf):
    path = tmp_path / "psf.csv"
    save_psf_csv(gauss_psf, path)
    assert path.read_text().splitlines()[0] == "x,amplitude"
    back = load_psf_csv(path)
    assert back.kind == "sampled"
    assert np.max(np.abs(back.amp_x - gauss_psf.amp_x)) < 1e-12


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n0,1\n")
    with pytest.raises(GridError):
        load_psf_csv(path)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 8), st.floats(0, 12))
def test_two_source_intensity_is_even(s, x):
    psf = make_gaussian_psf(1.0)
    assert two_source_intensity(psf, s, x) == pytest.approx(two_source_intensity(psf, s, -x), rel=1e-13, abs=1e-300)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.5, 3.0))
def test_parseval_for_any_gaussian_width(sigma):
    psf = make_gaussian_psf(sigma)
    px = integrate(psf.amp_x**2, psf.x)
    pp = float(np.sum(psf.p_weights * psf.amp_p**2))
    assert px == pytest.approx(pp, abs=1e-8)
