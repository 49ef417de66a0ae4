"""Frequency-phase flicker coding for the 33-key speller.

Every target key is tagged with a sinusoidal flicker: frequencies form an
arithmetic grid starting at 8 Hz with 0.24 Hz spacing, phases step by half pi.
Per-frame grayscale follows a sampled sinusoid in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, DomainError

TWO_PI = 2.0 * math.pi

# Retinal response range for flicker stimulation, in Hz.
RETINAL_RANGE = (3.5, 75.0)


@dataclass(frozen=True)
class StimulusConfig:
    """Global stimulus-coding parameters."""

    refresh_rate: float = 60.0
    f0: float = 8.0
    phi0: float = 0.0
    delta_f: float = 0.24
    delta_phi: float = 0.5 * math.pi
    n_targets: int = 33

    def __post_init__(self):
        if self.n_targets < 1:
            raise ConfigurationError("n_targets must be >= 1")
        lo, hi = RETINAL_RANGE
        f_max = self.f0 + (self.n_targets - 1) * self.delta_f
        if not (lo <= self.f0 and f_max <= hi):
            raise ConfigurationError(
                f"target frequencies [{self.f0}, {f_max}] exceed the retinal range {RETINAL_RANGE}"
            )


@dataclass(frozen=True)
class FlickerTag:
    """Frequency (Hz) and phase (radians, wrapped to [0, 2pi)) of one flicker."""

    f: float
    phi: float

    def __post_init__(self):
        if self.f <= 0:
            raise DomainError(f"flicker frequency must be positive, got {self.f}")
        object.__setattr__(self, "phi", self.phi % TWO_PI)


@dataclass(frozen=True)
class KeyTarget:
    """One key of the speller grid."""

    k: int
    label: str
    row: int
    col: int


# Row-major key order: digits, three QWERTY letter rows, then function keys.
KEY_ROWS = (
    ("1", "2", "3", "4", "5"),
    ("Q", "W", "E", "R", "T", "Y", "U", "I", "O", "P"),
    ("A", "S", "D", "F", "G", "H", "J", "K", "L"),
    ("Z", "X", "C", "V", "B", "N", "M"),
    ("DELETE", "SEARCH"),
)

DIGIT_LABELS = frozenset(KEY_ROWS[0])
LETTER_LABELS = frozenset(KEY_ROWS[1] + KEY_ROWS[2] + KEY_ROWS[3])


def tag_for_target(k: int, cfg: StimulusConfig | None = None) -> FlickerTag:
    """Tag for target index ``k`` (1-based): f = f0 + (k-1)*df, phi = phi0 + (k-1)*dphi."""
    cfg = cfg or StimulusConfig()
    if not 1 <= k <= cfg.n_targets:
        raise DomainError(f"target index {k} outside 1..{cfg.n_targets}")
    f = cfg.f0 + (k - 1) * cfg.delta_f
    phi = cfg.phi0 + (k - 1) * cfg.delta_phi
    return FlickerTag(f=f, phi=phi)


def luminance(tag: FlickerTag, i: int, refresh_rate: float) -> float:
    """Grayscale of frame ``i``: 0.5 * (1 + sin(2*pi*f*i/refresh_rate + phi)).

    0 is dark, 1 the brightest the screen shows. The refresh rate must be
    above twice the flicker frequency for the sampled sinusoid to be valid.
    """
    if i < 0:
        raise DomainError(f"frame index must be >= 0, got {i}")
    if refresh_rate <= 2.0 * tag.f:
        raise ConfigurationError(
            f"refresh rate {refresh_rate} Hz aliases a {tag.f} Hz flicker (needs > {2 * tag.f})"
        )
    return 0.5 * (1.0 + math.sin(TWO_PI * tag.f * (i / refresh_rate) + tag.phi))


def luminance_schedule(tag: FlickerTag, n_frames: int, refresh_rate: float) -> list[float]:
    """Per-frame grayscale values for frames 0..n_frames-1."""
    return [luminance(tag, i, refresh_rate) for i in range(n_frames)]


def keyboard_layout(cfg: StimulusConfig | None = None) -> list[tuple[KeyTarget, FlickerTag]]:
    """All 33 keys in row-major order, each paired with its flicker tag."""
    cfg = cfg or StimulusConfig()
    out = []
    k = 0
    for row, labels in enumerate(KEY_ROWS):
        for col, label in enumerate(labels):
            k += 1
            out.append((KeyTarget(k=k, label=label, row=row, col=col), tag_for_target(k, cfg)))
    if k != cfg.n_targets:
        raise ConfigurationError(f"layout defines {k} keys but config expects {cfg.n_targets}")
    return out


def layout_table(cfg: StimulusConfig | None = None) -> list[dict]:
    """Machine-readable layout rows (key, k, row, col, f, phi) for the UI."""
    return [
        {"key": key.label, "k": key.k, "row": key.row, "col": key.col, "f": tag.f, "phi": tag.phi}
        for key, tag in keyboard_layout(cfg)
    ]


def layout_tsv(cfg: StimulusConfig | None = None) -> str:
    """Tab-separated dump of the layout table."""
    lines = ["key\tk\trow\tcol\tf\tphi"]
    for row in layout_table(cfg):
        lines.append(
            f"{row['key']}\t{row['k']}\t{row['row']}\t{row['col']}\t{row['f']:.6f}\t{row['phi']:.10f}"
        )
    return "\n".join(lines) + "\n"


def key_for_label(label: str, cfg: StimulusConfig | None = None) -> KeyTarget:
    """Look up a key by its label (case-insensitive for letters)."""
    wanted = label.upper()
    for key, _ in keyboard_layout(cfg):
        if key.label == wanted:
            return key
    raise DomainError(f"no key labelled {label!r}")
