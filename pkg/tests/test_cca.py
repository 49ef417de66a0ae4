import math

import numpy as np
import pytest

from neurosearch.cca import (
    _batch_scores,
    build_reference_bank,
    cca_correlation,
    recognize,
    stimulus_frequency_grid,
)
from neurosearch.errors import ConfigurationError, DomainError, NoDecision
from neurosearch.stimulus import tag_for_target
from neurosearch.synth import EegWindow, SynthSpec, synth_background, synth_ssvep

FS = 250.0


@pytest.fixture(scope="module")
def bank():
    return build_reference_bank(FS, 250, 5)


def least_squares_rho(window: EegWindow, ref: np.ndarray) -> float:
    """Independent oracle: cosine between a channel and the reference span.

    Valid for the gain-model synthetic windows, where every channel is a
    scalar multiple of one shared time course, so CCA cannot beat (or lose
    to) a plain projection of that time course.
    """
    s = window.samples[0] - window.samples[0].mean()
    y = (ref - ref.mean(axis=1, keepdims=True)).T  # (Ns, 2N)
    coef, *_ = np.linalg.lstsq(y, s, rcond=None)
    proj = y @ coef
    return float(np.linalg.norm(proj) / np.linalg.norm(s))


def test_bank_shapes_and_first_row(bank):
    assert bank.refs.shape == (33, 10, 250)
    assert np.allclose(bank.frequencies, stimulus_frequency_grid())
    # Row 0 of the 8.00 Hz matrix at t=1/250.
    assert bank.refs[0, 0, 0] == pytest.approx(math.sin(2 * math.pi * 8.0 / 250.0), abs=1e-12)
    assert bank.refs[0, 1, 0] == pytest.approx(math.cos(2 * math.pi * 8.0 / 250.0), abs=1e-12)


def test_bank_rows_near_zero_mean(bank):
    # Partial trailing cycles leave a residual bounded by ~1/(pi*f*T).
    assert np.all(np.abs(bank.refs.mean(axis=2)) < 0.05)


def test_bank_nyquist_guard():
    with pytest.raises(ConfigurationError):
        build_reference_bank(100.0, 100, 5)  # 5 * 15.68 = 78.4 >= 50


def test_self_correlation_is_one(bank):
    ref = bank.ref_matrix(0)
    window = EegWindow([f"r{i}" for i in range(9)], FS, ref[:9])
    assert cca_correlation(window, ref) == pytest.approx(1.0, abs=1e-6)


def test_noise_free_true_vs_wrong_bank(bank):
    w = synth_ssvep(SynthSpec(duration=1.0, snr_db=None, seed=0), tag_for_target(10))
    rho_true = cca_correlation(w, bank.ref_matrix(9))
    rho_wrong = cca_correlation(w, bank.ref_matrix(0))
    assert rho_true > 0.99
    assert rho_wrong < 0.3


def test_noise_free_agrees_with_projection_oracle(bank):
    w = synth_ssvep(SynthSpec(duration=1.0, snr_db=None, seed=0), tag_for_target(10))
    for i in range(33):
        rho = cca_correlation(w, bank.ref_matrix(i))
        assert rho == pytest.approx(least_squares_rho(w, bank.ref_matrix(i)), abs=1e-6)


def test_white_noise_null_distribution(bank):
    # Monte-Carlo over 100 seeds; measured mean ~0.342, max ~0.449.
    maxes, means = [], []
    for seed in range(100):
        w = synth_background(SynthSpec(duration=1.0, n_channels=9, noise_mix=1.0, seed=seed))
        rho = _batch_scores(w, bank)
        maxes.append(rho.max())
        means.append(rho.mean())
    assert max(maxes) < 0.5
    assert 0.30 < float(np.mean(means)) < 0.38


def test_affine_invariance(bank):
    w = synth_ssvep(SynthSpec(duration=1.0, snr_db=0.0, seed=5), tag_for_target(4))
    rho = cca_correlation(w, bank.ref_matrix(3))
    rng = np.random.default_rng(0)
    scale = rng.uniform(0.5, 3.0, size=(9, 1))
    offset = rng.uniform(-10.0, 10.0, size=(9, 1))
    w2 = EegWindow(w.channel_labels, FS, scale * w.samples + offset)
    assert abs(cca_correlation(w2, bank.ref_matrix(3)) - rho) < 1e-9


def test_time_shift_invariance(bank):
    long_w = synth_ssvep(SynthSpec(duration=2.0, snr_db=None, seed=1), tag_for_target(7))
    a = EegWindow(long_w.channel_labels, FS, long_w.samples[:, 0:250])
    b = EegWindow(long_w.channel_labels, FS, long_w.samples[:, 37 : 37 + 250])
    ra = cca_correlation(a, bank.ref_matrix(6))
    rb = cca_correlation(b, bank.ref_matrix(6))
    assert abs(ra - rb) < 1e-6


def test_recognize_all_targets_noise_free(bank):
    for k in range(1, 34):
        w = synth_ssvep(SynthSpec(duration=1.0, snr_db=None, seed=k), tag_for_target(k))
        assert recognize(w, bank).best_k == k


def test_recognize_zero_window(bank):
    w = EegWindow([f"c{i}" for i in range(9)], FS, np.zeros((9, 250)))
    result = recognize(w, bank)
    assert result.best_k == 1  # ties break to the lowest index
    assert np.all(result.scores == 0.0)
    with pytest.raises(NoDecision):
        recognize(w, bank, min_confidence=0.01)


def test_no_decision_carries_result(bank):
    w = EegWindow([f"c{i}" for i in range(9)], FS, np.zeros((9, 250)))
    with pytest.raises(NoDecision) as err:
        recognize(w, bank, min_confidence=0.5)
    assert err.value.result is not None
    assert err.value.result.confidence == 0.0


def test_length_and_channel_preconditions(bank):
    w = synth_ssvep(SynthSpec(duration=0.5, snr_db=None), tag_for_target(1))
    with pytest.raises(DomainError):
        cca_correlation(w, bank.ref_matrix(0))  # 125 vs 250 samples
    single = EegWindow(["x"], FS, np.ones((1, 250)))
    with pytest.raises(DomainError):
        cca_correlation(single, bank.ref_matrix(0))


def test_constant_window_scores_zero(bank):
    w = EegWindow([f"c{i}" for i in range(9)], FS, np.full((9, 250), 3.7))
    assert cca_correlation(w, bank.ref_matrix(0)) == 0.0


def test_batch_matches_scalar(bank):
    w = synth_ssvep(SynthSpec(duration=1.0, snr_db=-5.0, seed=11), tag_for_target(20))
    batch = _batch_scores(w, bank)
    for i in range(33):
        assert batch[i] == pytest.approx(cca_correlation(w, bank.ref_matrix(i)), abs=1e-9)


def test_scores_in_unit_interval(bank):
    for seed in range(5):
        w = synth_ssvep(SynthSpec(duration=1.0, snr_db=-10.0, seed=seed), tag_for_target(2))
        rho = _batch_scores(w, bank)
        assert np.all(rho >= 0.0) and np.all(rho <= 1.0)
