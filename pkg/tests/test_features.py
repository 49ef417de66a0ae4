import math

import numpy as np
import pytest

from neurosearch.errors import DomainError
from neurosearch.features import (
    BANDS,
    LabeledFeatureSet,
    band_power,
    de_features,
    stft_psd,
)
from neurosearch.synth import EegWindow, default_channel_labels

FS = 250.0


def sinusoid_window(freq, duration=2.0, n_channels=1, amplitude=1.0, fs=FS):
    t = np.arange(int(duration * fs)) / fs
    row = amplitude * np.sin(2 * np.pi * freq * t)
    return EegWindow(default_channel_labels(n_channels), fs, np.tile(row, (n_channels, 1)))


def sixty_two(window_row, fs=FS):
    return EegWindow(default_channel_labels(62), fs, np.tile(window_row, (62, 1)))


def test_unit_sinusoid_band_power_half():
    w = sinusoid_window(10.0)
    freqs, psd = stft_psd(w)
    alpha = float(band_power(freqs, psd, 8.0, 13.0, reduce="sum")[0])
    assert alpha == pytest.approx(0.5, rel=0.05)
    peak_bin = int(np.argmax(psd[0]))
    assert freqs[peak_bin] == pytest.approx(10.0, abs=1.0)


def test_zero_signal_zero_psd():
    w = EegWindow(["a"], FS, np.zeros((1, 500)))
    _, psd = stft_psd(w)
    assert np.all(psd == 0.0)


def test_white_noise_parseval_total():
    rng = np.random.default_rng(1)
    w = EegWindow(["a"], FS, rng.standard_normal((1, 1000)))
    freqs, psd = stft_psd(w)
    total = float(psd[0].sum())
    assert total == pytest.approx(1.0, rel=0.10)


def test_window_shorter_than_frame_rejected():
    w = EegWindow(["a"], FS, np.zeros((1, 100)))
    with pytest.raises(DomainError):
        stft_psd(w, frame_s=0.5)


def test_low_sampling_rate_rejected():
    w = EegWindow(["a"], 80.0, np.zeros((1, 200)))
    with pytest.raises(DomainError):
        stft_psd(w)


def test_band_power_requires_bins():
    w = sinusoid_window(10.0)
    freqs, psd = stft_psd(w)
    with pytest.raises(DomainError):
        band_power(freqs, psd, 0.6, 0.7)


def test_feature_vector_length_310():
    rng = np.random.default_rng(0)
    w = EegWindow(default_channel_labels(62), FS, rng.standard_normal((62, 250)))
    fv = de_features(w)
    assert fv.values.shape == (310,)
    assert np.all(np.isfinite(fv.values))


def test_amplitude_doubling_shifts_by_ln2():
    rng = np.random.default_rng(2)
    base = rng.standard_normal((62, 500))
    a = de_features(EegWindow(default_channel_labels(62), FS, base))
    b = de_features(EegWindow(default_channel_labels(62), FS, 2.0 * base))
    assert np.all(np.abs((b.values - a.values) - math.log(2.0)) < 1e-6)


def test_arbitrary_scale_shifts_by_ln_a():
    rng = np.random.default_rng(3)
    base = rng.standard_normal((62, 500))
    a = de_features(EegWindow(default_channel_labels(62), FS, base))
    for scale in (0.3, 1.7, 9.9):
        s = de_features(EegWindow(default_channel_labels(62), FS, scale * base))
        assert np.all(np.abs((s.values - a.values) - math.log(scale)) < 1e-9)


def test_pure_alpha_sinusoid_dominates_alpha_band():
    w = sixty_two(np.sin(2 * np.pi * 10.0 * np.arange(500) / FS))
    fv = de_features(w)
    per_channel = fv.values.reshape(62, 5)
    band_names = [b.name for b in BANDS]
    alpha_idx = band_names.index("alpha")
    for c in range(62):
        for i in range(5):
            if i != alpha_idx:
                assert per_channel[c, alpha_idx] > per_channel[c, i]


def test_channel_permutation_equivariance():
    rng = np.random.default_rng(4)
    base = rng.standard_normal((62, 300))
    labels = default_channel_labels(62)
    fv = de_features(EegWindow(labels, FS, base))
    perm = rng.permutation(62)
    fv_p = de_features(EegWindow([labels[i] for i in perm], FS, base[perm]))
    blocks = fv.values.reshape(62, 5)
    blocks_p = fv_p.values.reshape(62, 5)
    assert np.array_equal(blocks_p, blocks[perm])


def test_channel_count_and_duration_preconditions():
    rng = np.random.default_rng(5)
    with pytest.raises(DomainError):
        de_features(EegWindow(default_channel_labels(9), FS, rng.standard_normal((9, 300))))
    with pytest.raises(DomainError):
        de_features(EegWindow(default_channel_labels(62), FS, rng.standard_normal((62, 125))))


def test_zero_signal_floored_not_infinite():
    w = EegWindow(default_channel_labels(62), FS, np.zeros((62, 250)))
    fv = de_features(w)
    expected = 0.5 * math.log(2 * math.pi * math.e * 1e-12)
    assert np.all(fv.values == pytest.approx(expected, abs=1e-12))


def test_labeled_feature_set_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    data = LabeledFeatureSet(
        participants=np.array(["P01", "P01", "P02"]),
        labels=np.array([0, 1, 1]),
        features=rng.standard_normal((3, 7)),
    )
    path = tmp_path / "feats.tsv"
    data.save(path)
    loaded = LabeledFeatureSet.load(path)
    assert np.array_equal(loaded.labels, data.labels)
    assert np.array_equal(loaded.participants.astype(str), data.participants)
    assert np.array_equal(loaded.features, data.features)


def test_labeled_feature_set_validation(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("P01\t2\t1.0,2.0\n", encoding="utf-8")
    with pytest.raises(DomainError):
        LabeledFeatureSet.load(bad)
    ragged = tmp_path / "ragged.tsv"
    ragged.write_text("P01\t0\t1.0,2.0\nP01\t1\t1.0\n", encoding="utf-8")
    with pytest.raises(DomainError):
        LabeledFeatureSet.load(ragged)
    with pytest.raises(DomainError):
        LabeledFeatureSet(np.array(["a"]), np.array([3]), np.ones((1, 2)))
