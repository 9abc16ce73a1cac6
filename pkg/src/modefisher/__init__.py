"""Fisher information of spatial-mode measurements for two-point resolution.

Build a PSF, construct measurement modes (PSF-adapted, Hermite-Gauss,
plane waves), and compare the information each measurement extracts about
the separation of two incoherent point sources with the quantum limit and
with direct imaging.
"""
__version__ = "0.1.0"

from . import errors
from .errors import *  # noqa: F401,F403
from .estimation import (
    DirectImaging,
    ExperimentConfig,
    ModeSorter,
    SimulationReport,
    detection_probabilities,
    load_config,
    mle_separation,
    run_study,
    simulate_counts,
)
from .fisher import (
    cumulative_fisher,
    direct_imaging_fisher,
    fisher_curve,
    minimal_depth,
    mode_amplitudes,
    multinomial_fisher,
    per_mode_fisher,
    plane_wave_fisher,
    quantum_fisher,
    sinc_per_mode_fisher_closed,
)
from .mode_builder import (
    ModeSet,
    build_adapted_modes,
    build_hermite_gauss_modes,
    build_plane_wave_modes,
    build_sinc_closed_form_modes,
    gram_matrix,
    sinc_mode_closed_form,
)
from .numerics import Grid, Measure, fourier_transform, integrate, orthonormalize
from .psf_models import (
    PsfModel,
    SourcePair,
    load_psf_csv,
    make_gaussian_psf,
    make_sampled_psf,
    make_sinc_psf,
    save_psf_csv,
    two_source_intensity,
)

__all__ = [
    "__version__",
    "errors",
    "DirectImaging",
    "ExperimentConfig",
    "Grid",
    "Measure",
    "ModeSet",
    "ModeSorter",
    "PsfModel",
    "SimulationReport",
    "SourcePair",
    "build_adapted_modes",
    "build_hermite_gauss_modes",
    "build_plane_wave_modes",
    "build_sinc_closed_form_modes",
    "cumulative_fisher",
    "detection_probabilities",
    "direct_imaging_fisher",
    "fisher_curve",
    "fourier_transform",
    "gram_matrix",
    "integrate",
    "load_config",
    "load_psf_csv",
    "make_gaussian_psf",
    "make_sampled_psf",
    "make_sinc_psf",
    "minimal_depth",
    "mle_separation",
    "mode_amplitudes",
    "multinomial_fisher",
    "orthonormalize",
    "per_mode_fisher",
    "plane_wave_fisher",
    "quantum_fisher",
    "run_study",
    "save_psf_csv",
    "simulate_counts",
    "sinc_mode_closed_form",
    "sinc_per_mode_fisher_closed",
    "two_source_intensity",
] + errors.__all__
