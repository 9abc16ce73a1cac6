import numpy as np
import pytest

from modefisher import build_adapted_modes, make_gaussian_psf, make_sinc_psf


@pytest.fixture(scope="session")
def sinc_psf():
    return make_sinc_psf()


@pytest.fixture(scope="session")
def gauss_psf():
    return make_gaussian_psf(1.0)


@pytest.fixture(scope="session")
def sinc_modes(sinc_psf):
    return build_adapted_modes(sinc_psf, 41)


@pytest.fixture(scope="session")
def gauss_modes(gauss_psf):
    return build_adapted_modes(gauss_psf, 20)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
