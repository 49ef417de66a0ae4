"""Synthetic multichannel EEG.

Stands in for the acquisition headset: steady-state responses are modelled as
phase-locked harmonic stacks on top of a white + 1/f noise background, with a
controllable SNR. Everything is deterministic given the seed so closed-loop
tests and benchmarks are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .stimulus import FlickerTag

# The paper's nine parietal/occipital recording sites used for target decoding.
OCCIPITAL_CHANNELS = ("Pz", "PO3", "PO5", "PO4", "PO6", "POz", "O1", "Oz", "O2")

DEFAULT_SAMPLING_RATE = 250.0
DEFAULT_N_HARMONICS = 5


@dataclass
class EegWindow:
    """A block of multichannel samples at a fixed sampling rate."""

    channel_labels: list[str]
    sampling_rate: float
    samples: np.ndarray  # (n_channels, n_samples), float64

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2:
            raise DomainError(f"samples must be 2-D, got shape {self.samples.shape}")
        if self.samples.shape[0] != len(self.channel_labels):
            raise DomainError(
                f"{len(self.channel_labels)} labels for {self.samples.shape[0]} channel rows"
            )
        if self.samples.shape[1] < 1:
            raise DomainError("window must contain at least one sample")
        if self.sampling_rate <= 0:
            raise DomainError("sampling rate must be positive")

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sampling_rate

    def select_channels(self, labels) -> "EegWindow":
        idx = []
        for lab in labels:
            try:
                idx.append(self.channel_labels.index(lab))
            except ValueError:
                raise DomainError(f"window has no channel {lab!r}") from None
        return EegWindow(list(labels), self.sampling_rate, self.samples[idx])

    # --- wire / file formats -------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "channel_labels": list(self.channel_labels),
            "sampling_rate": self.sampling_rate,
            "samples": self.samples.tolist(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "EegWindow":
        try:
            return cls(
                channel_labels=list(obj["channel_labels"]),
                sampling_rate=float(obj["sampling_rate"]),
                samples=np.asarray(obj["samples"], dtype=np.float64),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed window payload: {exc}") from exc

    def to_bytes(self) -> bytes:
        """Flat binary form: one ASCII header line, then little-endian float32 row-major."""
        header = f"{self.n_channels} {self.n_samples} {self.sampling_rate:.6f}\n".encode("ascii")
        return header + self.samples.astype("<f4").tobytes(order="C")

    @classmethod
    def from_bytes(cls, blob: bytes, channel_labels=None) -> "EegWindow":
        nl = blob.find(b"\n")
        if nl < 0:
            raise DomainError("binary window missing header line")
        try:
            c_str, n_str, fs_str = blob[:nl].decode("ascii").split()
            n_channels, n_samples, fs = int(c_str), int(n_str), float(fs_str)
        except (UnicodeDecodeError, ValueError) as exc:
            raise DomainError(f"bad binary window header: {exc}") from exc
        body = blob[nl + 1 :]
        expected = n_channels * n_samples * 4
        if len(body) != expected:
            raise DomainError(f"binary window body has {len(body)} bytes, expected {expected}")
        samples = np.frombuffer(body, dtype="<f4").reshape(n_channels, n_samples).astype(np.float64)
        if channel_labels is None:
            if n_channels == len(OCCIPITAL_CHANNELS):
                channel_labels = list(OCCIPITAL_CHANNELS)
            else:
                channel_labels = default_channel_labels(n_channels)
        return cls(channel_labels, fs, samples)


def default_channel_labels(n: int) -> list[str]:
    return [f"CH{i + 1:02d}" for i in range(n)]


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for one synthesized window."""

    duration: float = 1.0
    sampling_rate: float = DEFAULT_SAMPLING_RATE
    n_channels: int = 9
    n_harmonics: int = DEFAULT_N_HARMONICS
    harmonic_amplitudes: tuple[float, ...] | None = None  # default 1/n decay
    snr_db: float | None = 0.0  # None or +inf disables noise
    noise_mix: float = 0.5  # white fraction by power; remainder is 1/f
    seed: int = 0

    def __post_init__(self):
        if self.duration <= 0:
            raise DomainError("duration must be positive")
        if self.n_harmonics < 1:
            raise DomainError("need at least one harmonic")
        if self.harmonic_amplitudes is not None and len(self.harmonic_amplitudes) != self.n_harmonics:
            raise DomainError("harmonic_amplitudes length must equal n_harmonics")
        if not 0.0 <= self.noise_mix <= 1.0:
            raise DomainError("noise_mix must lie in [0, 1]")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sampling_rate))

    def amplitudes(self) -> np.ndarray:
        if self.harmonic_amplitudes is not None:
            return np.asarray(self.harmonic_amplitudes, dtype=np.float64)
        return 1.0 / np.arange(1, self.n_harmonics + 1, dtype=np.float64)


def _channel_gains(n_channels: int) -> np.ndarray:
    # Fixed per-channel response strength; varied but deterministic so the
    # noise-free window stays a pure gain model (one shared time course).
    if n_channels == 1:
        return np.ones(1)
    return np.linspace(1.2, 0.8, n_channels)


def _clean_ssvep(spec: SynthSpec, tag: FlickerTag) -> np.ndarray:
    n = spec.n_samples
    fs = spec.sampling_rate
    amps = spec.amplitudes()
    for h in range(1, spec.n_harmonics + 1):
        if h * tag.f >= fs / 2.0:
            raise DomainError(
                f"harmonic {h} of {tag.f} Hz is at/above Nyquist ({fs / 2} Hz)"
            )
    t = np.arange(1, n + 1) / fs
    wave = np.zeros(n)
    for h in range(1, spec.n_harmonics + 1):
        wave += amps[h - 1] * np.sin(2.0 * math.pi * h * tag.f * t + h * tag.phi)
    return _channel_gains(spec.n_channels)[:, None] * wave[None, :]


def _unit_noise(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    """Unit-power noise per channel: white and 1/f components mixed by power."""
    n = spec.n_samples
    out = np.zeros((spec.n_channels, n))
    w_frac = spec.noise_mix
    p_frac = 1.0 - w_frac
    for c in range(spec.n_channels):
        white = rng.standard_normal(n)
        pink = _pink_noise(n, rng)
        white /= max(white.std(), 1e-30)
        pink /= max(pink.std(), 1e-30)
        out[c] = math.sqrt(w_frac) * white + math.sqrt(p_frac) * pink
    return out


def _pink_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    """1/f-power noise via spectral shaping of white noise (DC removed)."""
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n)
    scale = np.zeros_like(freqs)
    nz = freqs > 0
    scale[nz] = 1.0 / np.sqrt(freqs[nz])
    return np.fft.irfft(spec * scale, n=n)


def _labels_for(spec: SynthSpec) -> list[str]:
    if spec.n_channels == len(OCCIPITAL_CHANNELS):
        return list(OCCIPITAL_CHANNELS)
    return default_channel_labels(spec.n_channels)


def synth_ssvep(spec: SynthSpec, tag: FlickerTag) -> EegWindow:
    """Steady-state response to ``tag`` plus background noise at the requested SNR.

    The clean part is sum_n a_n * sin(2*pi*n*f*t + n*phi) scaled by a fixed
    per-channel gain; noise is scaled per channel so that
    10*log10(signal_power / noise_power) equals ``spec.snr_db``.
    """
    clean = _clean_ssvep(spec, tag)
    if spec.snr_db is None or math.isinf(spec.snr_db):
        return EegWindow(_labels_for(spec), spec.sampling_rate, clean)
    rng = np.random.default_rng(spec.seed)
    noise = _unit_noise(spec, rng)
    snr_lin = 10.0 ** (spec.snr_db / 10.0)
    sig_power = np.mean(clean**2, axis=1)
    noise_power = np.mean(noise**2, axis=1)
    alpha = np.sqrt(sig_power / (snr_lin * np.maximum(noise_power, 1e-30)))
    return EegWindow(_labels_for(spec), spec.sampling_rate, clean + alpha[:, None] * noise)


def synth_background(spec: SynthSpec) -> EegWindow:
    """Pure background noise (no target), unit power per channel."""
    rng = np.random.default_rng(spec.seed)
    return EegWindow(_labels_for(spec), spec.sampling_rate, _unit_noise(spec, rng))


# --- satisfaction EEG and feature datasets -----------------------------------

N_SATISFACTION_CHANNELS = 62

# Fixed +-1 channel pattern; satisfied windows boost the + channels and damp
# the - channels, unsatisfied windows do the opposite. Differential-entropy
# features then separate by a per-channel log-amplitude shift.
_SAT_PATTERN = np.array([1.0 if i % 2 == 0 else -1.0 for i in range(N_SATISFACTION_CHANNELS)])


def synth_satisfaction_eeg(
    satisfied: bool,
    duration: float = 1.0,
    sampling_rate: float = DEFAULT_SAMPLING_RATE,
    strength: float = 0.4,
    seed: int = 0,
) -> EegWindow:
    """A 62-channel window whose band-power profile encodes the satisfaction class."""
    spec = SynthSpec(
        duration=duration,
        sampling_rate=sampling_rate,
        n_channels=N_SATISFACTION_CHANNELS,
        seed=seed,
    )
    rng = np.random.default_rng(seed)
    noise = _unit_noise(spec, rng)
    sign = 1.0 if satisfied else -1.0
    gains = np.exp(sign * strength * _SAT_PATTERN)
    return EegWindow(
        default_channel_labels(N_SATISFACTION_CHANNELS), sampling_rate, gains[:, None] * noise
    )


def synth_satisfaction_feature_dataset(
    n_per_class: int = 40,
    seed: int = 0,
    strength: float = 0.4,
    n_participants: int = 6,
):
    """DE features extracted from class-conditioned synthetic EEG windows.

    The honest training path for the closed loop: windows come from
    synth_satisfaction_eeg and go through the real feature extractor.
    """
    from .features import LabeledFeatureSet, de_features

    rows, labels, participants = [], [], []
    for i in range(n_per_class * 2):
        satisfied = i % 2 == 1
        window = synth_satisfaction_eeg(
            satisfied=satisfied, duration=1.0, strength=strength, seed=seed + i
        )
        rows.append(de_features(window).values)
        labels.append(int(satisfied))
        participants.append(f"P{(i % n_participants) + 1:02d}")
    return LabeledFeatureSet(
        participants=np.asarray(participants),
        labels=np.asarray(labels, dtype=np.int64),
        features=np.asarray(rows, dtype=np.float64),
    )


def synth_satisfaction_dataset(
    n_participants: int = 18,
    n_trials: int = 40,
    separation: float = 1.0,
    seed: int = 0,
    n_features: int = 310,
):
    """Gaussian class-conditional feature rows, a training stand-in corpus.

    Per participant, ``n_trials`` rows with balanced 0/1 labels: class means
    sit at -+separation/2 on every feature, plus a participant-specific offset
    shared by both classes, plus unit noise.
    """
    from .features import LabeledFeatureSet

    if separation < 0:
        raise DomainError("separation must be >= 0")
    rng = np.random.default_rng(seed)
    rows, labels, participants = [], [], []
    for p in range(n_participants):
        offset = rng.normal(0.0, 0.5, size=n_features)
        for trial in range(n_trials):
            y = trial % 2
            mean = offset + (separation / 2.0) * (1.0 if y == 1 else -1.0)
            rows.append(mean + rng.standard_normal(n_features))
            labels.append(y)
            participants.append(f"P{p + 1:02d}")
    return LabeledFeatureSet(
        participants=np.asarray(participants),
        labels=np.asarray(labels, dtype=np.int64),
        features=np.asarray(rows, dtype=np.float64),
    )
