"""Canonical-correlation target recognition.

Each stimulus frequency gets a bank of sin/cos harmonic reference rows; the
first canonical correlation between a multichannel window and each bank is
the recognition score, and the argmax frequency names the gazed key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, NoDecision
from .stimulus import StimulusConfig, tag_for_target
from .synth import EegWindow

RIDGE_EPS = 1e-8


def stimulus_frequency_grid(cfg: StimulusConfig | None = None) -> np.ndarray:
    cfg = cfg or StimulusConfig()
    return np.array([tag_for_target(k, cfg).f for k in range(1, cfg.n_targets + 1)])


@dataclass
class ReferenceBank:
    """Per-frequency reference matrices R_f of stacked sin/cos harmonics.

    refs[k] has rows sin(2*pi*f*t), cos(2*pi*f*t), ..., sin(2*pi*N*f*t),
    cos(2*pi*N*f*t) sampled at t = 1/Fs .. Ns/Fs.
    """

    frequencies: np.ndarray  # (K,)
    refs: np.ndarray  # (K, 2N, Ns)
    sampling_rate: float
    n_samples: int
    n_harmonics: int

    def __post_init__(self):
        # Cache centered references and inverse auto-covariances: they are
        # reused for every window during a recognition sweep.
        yc = _center_normalize(self.refs - self.refs.mean(axis=2, keepdims=True))
        cyy = yc @ yc.transpose(0, 2, 1)
        dim = cyy.shape[1]
        tr = np.trace(cyy, axis1=1, axis2=2)
        ridge = RIDGE_EPS * tr / dim
        cyy = cyy + ridge[:, None, None] * np.eye(dim)[None]
        self._yc = yc
        self._cyy_inv = np.linalg.inv(cyy)

    @property
    def n_banks(self) -> int:
        return len(self.frequencies)

    def ref_matrix(self, index: int) -> np.ndarray:
        return self.refs[index]


@dataclass(frozen=True)
class RecognitionResult:
    """Scores over the whole grid plus the winning target."""

    scores: np.ndarray  # (K,) canonical correlations in [0, 1]
    best_k: int  # 1-based target index
    confidence: float  # rho_best - rho_second


def build_reference_bank(
    sampling_rate: float,
    n_samples: int,
    n_harmonics: int,
    freq_grid=None,
) -> ReferenceBank:
    """Construct reference matrices for every frequency in the grid."""
    freqs = np.asarray(freq_grid if freq_grid is not None else stimulus_frequency_grid())
    if n_samples < 2:
        raise DomainError("need at least 2 samples")
    nyq = sampling_rate / 2.0
    worst = float(freqs.max()) * n_harmonics
    if worst >= nyq:
        raise ConfigurationError(
            f"harmonic {n_harmonics} of {freqs.max()} Hz reaches {worst} Hz, at/above Nyquist {nyq} Hz"
        )
    t = np.arange(1, n_samples + 1) / sampling_rate
    refs = np.empty((len(freqs), 2 * n_harmonics, n_samples))
    for i, f in enumerate(freqs):
        for h in range(1, n_harmonics + 1):
            arg = 2.0 * math.pi * h * f * t
            refs[i, 2 * (h - 1)] = np.sin(arg)
            refs[i, 2 * (h - 1) + 1] = np.cos(arg)
    return ReferenceBank(
        frequencies=freqs,
        refs=refs,
        sampling_rate=sampling_rate,
        n_samples=n_samples,
        n_harmonics=n_harmonics,
    )


def _center(x: np.ndarray) -> np.ndarray:
    return x - x.mean(axis=-1, keepdims=True)


def _center_normalize(xc: np.ndarray) -> np.ndarray:
    """Scale each (already centered) row to unit RMS; zero rows stay zero.

    Working with correlation-form rows makes rho exactly invariant to
    per-channel affine transforms even with the ridge applied.
    """
    rms = np.sqrt(np.mean(xc**2, axis=-1, keepdims=True))
    return xc / np.maximum(rms, 1e-300)


def cca_correlation(window: EegWindow, ref: np.ndarray) -> float:
    """First canonical correlation between a window and one reference matrix.

    Covariance route with a small relative ridge on both auto-covariances:
    rho^2 is the largest eigenvalue of Cxx^-1 Cxy Cyy^-1 Cyx, clamped to [0, 1].
    An all-constant window is defined to score 0.
    """
    x = np.asarray(window.samples, dtype=np.float64)
    y = np.asarray(ref, dtype=np.float64)
    if x.shape[0] < 2:
        raise DomainError("canonical correlation needs at least 2 channels")
    if x.shape[1] != y.shape[1]:
        raise DomainError(f"window has {x.shape[1]} samples, reference {y.shape[1]}")
    xc = _center_normalize(_center(x))
    yc = _center_normalize(_center(y))
    cxx = xc @ xc.T
    cyy = yc @ yc.T
    tr_x = float(np.trace(cxx))
    tr_y = float(np.trace(cyy))
    if tr_x <= 0.0 or tr_y <= 0.0:
        return 0.0
    cxx += (RIDGE_EPS * tr_x / cxx.shape[0]) * np.eye(cxx.shape[0])
    cyy += (RIDGE_EPS * tr_y / cyy.shape[0]) * np.eye(cyy.shape[0])
    cxy = xc @ yc.T
    k = cxy @ np.linalg.solve(cyy, cxy.T)
    l = np.linalg.cholesky(cxx)
    s = np.linalg.solve(l, np.linalg.solve(l, k).T)
    s = 0.5 * (s + s.T)
    lam = float(np.linalg.eigvalsh(s)[-1])
    return math.sqrt(min(max(lam, 0.0), 1.0))


def _batch_scores(window: EegWindow, bank: ReferenceBank) -> np.ndarray:
    """Scores over all banks at once; matches cca_correlation per bank."""
    x = np.asarray(window.samples, dtype=np.float64)
    if x.shape[0] < 2:
        raise DomainError("canonical correlation needs at least 2 channels")
    if x.shape[1] != bank.n_samples:
        raise DomainError(f"window has {x.shape[1]} samples, bank expects {bank.n_samples}")
    xc = _center_normalize(_center(x))
    cxx = xc @ xc.T
    tr_x = float(np.trace(cxx))
    if tr_x <= 0.0:
        return np.zeros(bank.n_banks)
    c = cxx.shape[0]
    cxx += (RIDGE_EPS * tr_x / c) * np.eye(c)
    l = np.linalg.cholesky(cxx)
    cxy = np.einsum("cn,ktn->kct", xc, bank._yc)
    k_mats = cxy @ bank._cyy_inv @ cxy.transpose(0, 2, 1)
    l_b = np.broadcast_to(l, (bank.n_banks, c, c))
    s = np.linalg.solve(l_b, np.linalg.solve(l_b, k_mats).transpose(0, 2, 1))
    s = 0.5 * (s + s.transpose(0, 2, 1))
    lam = np.linalg.eigvalsh(s)[:, -1]
    return np.sqrt(np.clip(lam, 0.0, 1.0))


def recognize(
    window: EegWindow,
    bank: ReferenceBank,
    min_confidence: float | None = None,
) -> RecognitionResult:
    """Score every bank and return the argmax target (ties to the lowest index).

    With ``min_confidence`` set, a winning margin below it raises NoDecision so
    the caller can retry with a longer window.
    """
    scores = _batch_scores(window, bank)
    best = int(np.argmax(scores))
    if len(scores) > 1:
        second = float(np.partition(scores, -2)[-2])
    else:
        second = 0.0
    confidence = float(scores[best]) - second
    result = RecognitionResult(scores=scores, best_k=best + 1, confidence=confidence)
    if min_confidence is not None and confidence < min_confidence:
        raise NoDecision(result=result)
    return result
