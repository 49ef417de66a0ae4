"""Differential-entropy features over the five classic EEG bands.

A Hann-windowed short-time Fourier transform gives an averaged per-channel
power spectrum; per band, the differential entropy under a Gaussian band-power
assumption is 0.5 * ln(2*pi*e * P). 62 channels x 5 bands = 310 features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .synth import EegWindow

N_FEATURE_CHANNELS = 62
POWER_FLOOR = 1e-12

DEFAULT_FRAME_S = 0.5
DEFAULT_HOP_S = 0.25


@dataclass(frozen=True)
class Band:
    name: str
    lo: float
    hi: float


# Fixed order delta -> gamma; edges per the usual EEG convention, with bins
# assigned half-open [lo, hi).
BANDS = (
    Band("delta", 0.5, 4.0),
    Band("theta", 4.0, 8.0),
    Band("alpha", 8.0, 13.0),
    Band("beta", 14.0, 30.0),
    Band("gamma", 30.0, 50.0),
)

N_FEATURES = N_FEATURE_CHANNELS * len(BANDS)


@dataclass
class FeatureVector:
    """310 differential-entropy values, channel-major (ch1 delta..gamma, ch2 ...)."""

    values: np.ndarray
    channel_labels: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.channel_labels) * len(BANDS),):
            raise DomainError(
                f"expected {len(self.channel_labels) * len(BANDS)} values, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise DomainError("feature vector contains non-finite values")


def stft_psd(
    window: EegWindow,
    frame_s: float = DEFAULT_FRAME_S,
    hop_s: float = DEFAULT_HOP_S,
) -> tuple[np.ndarray, np.ndarray]:
    """Averaged Hann periodogram per channel.

    Returns (freqs, psd) with psd of shape (n_channels, n_bins). The spectrum
    is energy-normalized: summing psd over all bins recovers the windowed
    signal power, so a unit-amplitude sinusoid carries total mass ~0.5 and
    unit-variance white noise totals ~1.
    """
    fs = window.sampling_rate
    if fs < 100.0:
        raise DomainError(f"sampling rate {fs} Hz cannot resolve the gamma band")
    frame_n = int(round(frame_s * fs))
    hop_n = max(1, int(round(hop_s * fs)))
    if frame_n < 2:
        raise DomainError("frame too short")
    if window.n_samples < frame_n:
        raise DomainError(
            f"window of {window.n_samples} samples is shorter than one {frame_n}-sample frame"
        )
    w = np.hanning(frame_n)
    w_energy = float(np.sum(w**2))
    starts = range(0, window.n_samples - frame_n + 1, hop_n)
    freqs = np.fft.rfftfreq(frame_n, d=1.0 / fs)
    # One-sided correction: double every bin except DC and (for even lengths) Nyquist.
    scale = np.full(len(freqs), 2.0)
    scale[0] = 1.0
    if frame_n % 2 == 0:
        scale[-1] = 1.0
    acc = np.zeros((window.n_channels, len(freqs)))
    for s in starts:
        seg = window.samples[:, s : s + frame_n] * w[None, :]
        spec = np.fft.rfft(seg, axis=1)
        acc += scale[None, :] * np.abs(spec) ** 2 / (frame_n * w_energy)
    return freqs, acc / len(list(starts))


def band_power(
    freqs: np.ndarray, psd: np.ndarray, lo: float, hi: float, reduce: str = "sum"
) -> np.ndarray:
    """Aggregate PSD bins with lo <= f < hi per channel (sum or mean)."""
    mask = (freqs >= lo) & (freqs < hi)
    if not np.any(mask):
        raise DomainError(f"no spectral bins inside [{lo}, {hi}) Hz")
    sel = psd[..., mask]
    return sel.sum(axis=-1) if reduce == "sum" else sel.mean(axis=-1)


def de_features(
    window: EegWindow,
    bands=BANDS,
    frame_s: float = DEFAULT_FRAME_S,
    hop_s: float = DEFAULT_HOP_S,
) -> FeatureVector:
    """Differential entropy per channel and band: 0.5 * ln(2*pi*e * P_band)."""
    if window.n_channels != N_FEATURE_CHANNELS:
        raise DomainError(
            f"satisfaction features need exactly {N_FEATURE_CHANNELS} channels, got {window.n_channels}"
        )
    if window.duration < 1.0 - 1e-9:
        raise DomainError(f"window of {window.duration:.3f} s is shorter than 1 s")
    freqs, psd = stft_psd(window, frame_s=frame_s, hop_s=hop_s)
    values = np.empty(window.n_channels * len(bands))
    i = 0
    for c in range(window.n_channels):
        for band in bands:
            p = float(band_power(freqs, psd[c : c + 1], band.lo, band.hi, reduce="mean")[0])
            values[i] = 0.5 * math.log(2.0 * math.pi * math.e * max(p, POWER_FLOOR))
            i += 1
    return FeatureVector(values=values, channel_labels=list(window.channel_labels))


# --- labeled feature sets -----------------------------------------------------


@dataclass
class LabeledFeatureSet:
    """Rows of (participant, binary label, feature vector)."""

    participants: np.ndarray  # (n,) str
    labels: np.ndarray  # (n,) int in {0, 1}
    features: np.ndarray  # (n, d) float64

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.features = np.asarray(self.features, dtype=np.float64)
        self.participants = np.asarray(self.participants)
        n = len(self.labels)
        if self.features.ndim != 2 or self.features.shape[0] != n or len(self.participants) != n:
            raise DomainError("participants, labels and features must have matching row counts")
        if not np.isin(self.labels, (0, 1)).all():
            raise DomainError("labels must be 0 or 1")

    @property
    def n_rows(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, mask: np.ndarray) -> "LabeledFeatureSet":
        return LabeledFeatureSet(self.participants[mask], self.labels[mask], self.features[mask])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for pid, label, row in zip(self.participants, self.labels, self.features):
                vals = ",".join(repr(float(v)) for v in row)
                fh.write(f"{pid}\t{int(label)}\t{vals}\n")

    @classmethod
    def load(cls, path) -> "LabeledFeatureSet":
        participants, labels, rows = [], [], []
        width = None
        with open(path, "r", encoding="utf-8") as fh:
            for ln, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise DomainError(f"{path}:{ln}: expected 3 tab-separated fields")
                pid, label_str, vec_str = parts
                if label_str not in ("0", "1"):
                    raise DomainError(f"{path}:{ln}: label must be 0 or 1, got {label_str!r}")
                vec = [float(v) for v in vec_str.split(",")]
                if width is None:
                    width = len(vec)
                elif len(vec) != width:
                    raise DomainError(f"{path}:{ln}: inconsistent feature width")
                participants.append(pid)
                labels.append(int(label_str))
                rows.append(vec)
        if not rows:
            raise DomainError(f"{path}: no feature rows")
        return cls(np.asarray(participants), np.asarray(labels), np.asarray(rows))
