import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modefisher import (
    DirectImaging,
    ExperimentConfig,
    ModeSorter,
    build_adapted_modes,
    detection_probabilities,
    load_config,
    mle_separation,
    run_study,
    simulate_counts,
)
from modefisher.errors import BoundaryError
from modefisher.estimation import channel_fisher, make_channel


def sorter_config(psf, s=1.0, photons=10_000, trials=100, seed=7, depth=10, bracket=(0.0, 4.0)):
    modes = build_adapted_modes(psf, depth)
    return ExperimentConfig(psf, ModeSorter(modes, depth), s, photons, trials, seed, bracket)


def direct_config(psf, s, photons, trials=100, seed=3, bins=256, bracket=(0.0, 4.0)):
    return ExperimentConfig(psf, DirectImaging(bins), s, photons, trials, seed, bracket)


@pytest.fixture(scope="module")
def sorter(sinc_psf):
    return sorter_config(sinc_psf)


# --- outcome probabilities ---------------------------------------------------------

def test_sorter_zero_separation(sorter):
    p = detection_probabilities(sorter, 0.0)
    expect = np.zeros(11)
    expect[0] = 1
    assert np.allclose(p, expect, atol=1e-12)


def test_sorter_overflow_at_two(sorter):
    p = detection_probabilities(sorter, 2.0)
    assert p.size == 11
    assert abs(p.sum() - 1) <= 1e-12
    assert 0 <= p[-1] <= 1.5e-2


def test_direct_imaging_probabilities_symmetric(sinc_psf, gauss_psf):
    for psf in (sinc_psf, gauss_psf):
        p = detection_probabilities(direct_config(psf, 0.5, 10), 0.0)
        bins = p[:-1]
        assert np.allclose(bins, bins[::-1], rtol=0, atol=1e-15)
        assert abs(p.sum() - 1) <= 1e-12
        assert p[-1] >= 0


def test_direct_imaging_overflow_is_out_of_grid_mass(sinc_psf):
    p = detection_probabilities(direct_config(sinc_psf, 0.5, 10), 0.0)
    # the slit intensity beyond |x| = 40.96 carries about 1/(pi * 40.96)
    assert p[-1] == pytest.approx(1 / (np.pi * 40.96), rel=0.02)


def test_tabulated_likelihood_matches_exact(sorter):
    ch = make_channel(sorter)
    for s in (0.0, 0.37, 1.0, 2.9, 4.0):
        assert np.max(np.abs(ch.log_probabilities(s) - ch.probabilities(s))) < 1e-10


def test_channel_fisher_of_sorter_is_quantum_bound(sorter):
    assert channel_fisher(sorter, 1.0) == pytest.approx(1 / 3, abs=1e-6)


def test_binned_direct_fisher_below_continuous(gauss_psf):
    from modefisher import direct_imaging_fisher

    cfg = direct_config(gauss_psf, 1.0, 10)
    assert channel_fisher(cfg, 1.0) <= direct_imaging_fisher(gauss_psf, 1.0) + 1e-9
    assert channel_fisher(cfg, 1.0) == pytest.approx(direct_imaging_fisher(gauss_psf, 1.0), rel=1e-2)


# --- photon counts -------------------------------------------------------------------

def test_certain_outcome():
    c = simulate_counts([1.0, 0.0, 0.0], 100, np.random.default_rng(0))
    assert list(c) == [100, 0, 0]


def test_fair_coin_concentration():
    c = simulate_counts([0.5, 0.5], 10**6, np.random.default_rng(12345))
    assert abs(c[0] - 5e5) <= 5 * np.sqrt(2.5e5)
    assert c.sum() == 10**6


def test_zero_photons():
    assert np.all(simulate_counts([0.2, 0.8], 0, np.random.default_rng(0)) == 0)


def test_counts_need_normalized_probabilities():
    with pytest.raises(ValueError):
        simulate_counts([0.2, 0.2], 10, np.random.default_rng(0))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5000))
def test_counts_deterministic_and_conserved(seed, photons):
    p = np.array([0.1, 0.2, 0.3, 0.4])
    a = simulate_counts(p, photons, np.random.default_rng(seed))
    b = simulate_counts(p, photons, np.random.default_rng(seed))
    assert np.array_equal(a, b) and a.sum() == photons


# --- maximum likelihood ------------------------------------------------------------------

def test_noise_free_counts_recover_separation(sorter):
    counts = 10_000 * detection_probabilities(sorter, 1.0)
    est = mle_separation(counts, sorter)
    assert est.separation == pytest.approx(1.0, abs=1e-5)
    assert not est.at_boundary


def test_estimate_at_two_within_five_standard_errors(sinc_psf):
    cfg = sorter_config(sinc_psf, s=2.0, photons=10**5)
    counts = simulate_counts(detection_probabilities(cfg, 2.0), 10**5, np.random.default_rng(99))
    est = mle_separation(counts, cfg)
    se = 1 / np.sqrt(10**5 * channel_fisher(cfg, 2.0))
    assert abs(est.separation - 2.0) <= 5 * se


def test_all_counts_in_fundamental_mode(sorter):
    counts = np.zeros(11)
    counts[0] = 10_000
    est = mle_separation(counts, sorter)
    assert est.at_boundary
    assert est.separation <= sorter.bracket[0] + 1e-4


def test_direct_imaging_noise_free(gauss_psf):
    cfg = direct_config(gauss_psf, 1.5, 10**6)
    counts = 1e6 * detection_probabilities(cfg, 1.5)
    assert mle_separation(counts, cfg).separation == pytest.approx(1.5, abs=1e-5)


# --- studies -----------------------------------------------------------------------------

def test_study_is_reproducible_and_scheduling_independent(sinc_psf):
    cfg = sorter_config(sinc_psf, trials=40, seed=2024)
    a = run_study(cfg, workers=1)
    b = run_study(cfg, workers=4)
    assert np.array_equal(a.estimates, b.estimates)
    assert a.to_dict() == b.to_dict()


def test_single_trial_flags_insufficient(sinc_psf):
    r = run_study(sorter_config(sinc_psf, trials=1))
    assert r.insufficient_trials
    assert np.isnan(r.empirical_variance) and np.isnan(r.efficiency)


def test_crlb_respected(sinc_psf):
    r = run_study(sorter_config(sinc_psf, trials=300, seed=5))
    assert r.crlb == pytest.approx(1 / (10_000 / 3), rel=1e-6)
    assert r.empirical_variance >= r.crlb * (1 - 3 * np.sqrt(2 / r.trials))
    assert 0 < r.efficiency <= 1 + 3 * np.sqrt(2 / r.trials)


def test_doubling_photons_halves_variance(sinc_psf):
    v1 = run_study(sorter_config(sinc_psf, s=0.8, photons=5_000, trials=800, seed=31)).empirical_variance
    v2 = run_study(sorter_config(sinc_psf, s=0.8, photons=10_000, trials=800, seed=32)).empirical_variance
    assert v1 / v2 == pytest.approx(2.0, rel=0.15)


def test_boundary_abort(sinc_psf):
    # ten photons cannot resolve s = 0.05: most estimates collapse onto s = 0
    cfg = sorter_config(sinc_psf, s=0.05, photons=10, trials=50)
    with pytest.raises(BoundaryError):
        run_study(cfg)


def test_thread_cap_from_environment(sinc_psf, monkeypatch):
    from modefisher.estimation import _worker_count

    monkeypatch.setenv("MODEFISHER_THREADS", "2")
    assert _worker_count(16) == 2
    monkeypatch.delenv("MODEFISHER_THREADS")
    assert _worker_count(None) == 1


def test_report_files(sinc_psf, tmp_path):
    r = run_study(sorter_config(sinc_psf, trials=5))
    r.write(tmp_path / "r.json", tmp_path / "e.csv")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["seed"] == 7 and len(data["estimates"]) == 5
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "trial,estimate,boundary_flag" and len(lines) == 6


# --- configs --------------------------------------------------------------------------------

def test_config_validation(sinc_psf):
    modes = build_adapted_modes(sinc_psf, 3)
    with pytest.raises(ValueError):
        ExperimentConfig(sinc_psf, ModeSorter(modes, 3), 5.0, 10, 10, 1, (0.0, 4.0))
    with pytest.raises(ValueError):
        ExperimentConfig(sinc_psf, ModeSorter(modes, 3), 1.0, 10, 0, 1)
    with pytest.raises(ValueError):
        ModeSorter(modes, 4)


def test_load_toml_and_json(tmp_path):
    body = {
        "psf": {"kind": "gaussian", "sigma": 1.0},
        "measurement": {"kind": "mode_sorter", "basis": "hermite_gauss", "sigma": 1.0, "depth": 4},
        "true_separation": 1.0, "photons_per_trial": 100, "trials": 3, "seed": 1,
    }
    (tmp_path / "c.json").write_text(json.dumps(body))
    (tmp_path / "c.toml").write_text(
        'true_separation = 1.0\nphotons_per_trial = 100\ntrials = 3\nseed = 1\n'
        '[psf]\nkind = "gaussian"\nsigma = 1.0\n'
        '[measurement]\nkind = "mode_sorter"\nbasis = "hermite_gauss"\nsigma = 1.0\ndepth = 4\n'
    )
    a, b = load_config(tmp_path / "c.json"), load_config(tmp_path / "c.toml")
    assert a.measurement.depth == b.measurement.depth == 4
    assert np.allclose(detection_probabilities(a, 1.0), detection_probabilities(b, 1.0))
    # four modes plus the overflow bucket keep all but ~1e-7 of the bound
    assert channel_fisher(a, 1.0) == pytest.approx(0.25, abs=1e-6)


def test_config_from_psf_file(tmp_path, gauss_psf):
    from modefisher import save_psf_csv

    save_psf_csv(gauss_psf, tmp_path / "psf.csv")
    cfg = ExperimentConfig.from_mapping(
        {"psf": {"kind": "file", "path": "psf.csv"}, "measurement": {"kind": "direct_imaging", "bins": 64},
         "true_separation": 1.0, "photons_per_trial": 10, "trials": 2},
        base_dir=tmp_path,
    )
    assert cfg.psf.kind == "sampled"
    assert detection_probabilities(cfg, 1.0).size == 65


def test_unknown_kinds_rejected():
    with pytest.raises(ValueError):
        ExperimentConfig.from_mapping(
            {"psf": {"kind": "airy"}, "true_separation": 1, "photons_per_trial": 1, "trials": 1}
        )
