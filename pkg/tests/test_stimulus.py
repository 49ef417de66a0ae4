import math

import pytest

from neurosearch.errors import ConfigurationError, DomainError
from neurosearch.stimulus import (
    KEY_ROWS,
    FlickerTag,
    StimulusConfig,
    key_for_label,
    keyboard_layout,
    layout_table,
    layout_tsv,
    luminance,
    luminance_schedule,
    tag_for_target,
)


def test_frequency_grid_matches_arithmetic_oracle():
    # Independent loop oracle over all 33 indices.
    cfg = StimulusConfig()
    for k in range(1, 34):
        expected_f = 8.0 + (k - 1) * 0.24
        expected_phi = ((k - 1) * 0.5 * math.pi) % (2 * math.pi)
        tag = tag_for_target(k, cfg)
        assert abs(tag.f - expected_f) < 1e-9
        assert abs(tag.phi - expected_phi) < 1e-9


def test_paper_endpoint_tags():
    assert tag_for_target(1) == FlickerTag(8.0, 0.0)
    t33 = tag_for_target(33)
    assert abs(t33.f - 15.68) < 1e-9
    assert abs(t33.phi) < 1e-9  # 32 * 0.5pi wraps to 0
    t10 = tag_for_target(10)
    assert abs(t10.f - 10.16) < 1e-9
    assert abs(t10.phi - 0.5 * math.pi) < 1e-9


def test_phase_grid_cycles_quarters():
    quarters = [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]
    for k in range(1, 34):
        assert abs(tag_for_target(k).phi - quarters[(k - 1) % 4]) < 1e-9


def test_target_index_out_of_range():
    with pytest.raises(DomainError):
        tag_for_target(0)
    with pytest.raises(DomainError):
        tag_for_target(34)


def test_frequencies_injective_and_spaced():
    freqs = [tag_for_target(k).f for k in range(1, 34)]
    assert len(set(freqs)) == 33
    for a, b in zip(freqs, freqs[1:]):
        assert abs((b - a) - 0.24) < 1e-9
    assert all(3.5 <= f <= 75.0 for f in freqs)


def test_config_rejects_out_of_retinal_range():
    with pytest.raises(ConfigurationError):
        StimulusConfig(f0=74.0, delta_f=1.0)
    with pytest.raises(ConfigurationError):
        StimulusConfig(f0=2.0)


def test_luminance_examples():
    assert luminance(FlickerTag(8.0, 0.0), 0, 60.0) == pytest.approx(0.5, abs=1e-12)
    assert luminance(FlickerTag(8.0, 0.5 * math.pi), 0, 60.0) == pytest.approx(1.0, abs=1e-12)
    # 2*pi*10*(90/60) is an integer number of cycles.
    assert luminance(FlickerTag(10.0, 0.0), 90, 60.0) == pytest.approx(0.5, abs=1e-9)


def test_luminance_range_and_periodicity():
    tag = tag_for_target(1)  # 8 Hz at 60 fps repeats every 15 frames
    frames = luminance_schedule(tag, 600, 60.0)
    assert min(frames) >= 0.0 and max(frames) <= 1.0
    for i in range(len(frames) - 15):
        assert frames[i] == pytest.approx(frames[i + 15], abs=1e-9)


def test_luminance_errors():
    with pytest.raises(ConfigurationError):
        luminance(FlickerTag(31.0, 0.0), 0, 60.0)
    with pytest.raises(DomainError):
        luminance(FlickerTag(8.0, 0.0), -1, 60.0)


def test_layout_shape_and_labels():
    layout = keyboard_layout()
    assert len(layout) == 33
    labels = [key.label for key, _ in layout]
    assert len(set(labels)) == 33
    digits = [l for l in labels if l in "12345"]
    letters = [l for l in labels if len(l) == 1 and l.isalpha()]
    assert len(digits) == 5 and len(letters) == 26
    assert "DELETE" in labels and "SEARCH" in labels
    assert tuple(len(r) for r in KEY_ROWS) == (5, 10, 9, 7, 2)


def test_layout_key_one_is_eight_hz():
    key, tag = keyboard_layout()[0]
    assert key.label == "1" and key.k == 1
    assert tag.f == pytest.approx(8.0, abs=1e-12)
    assert key_for_label("l").k == 24
    assert key_for_label("SEARCH").k == 33


def test_layout_table_and_tsv():
    rows = layout_table()
    assert len(rows) == 33
    assert set(rows[0]) == {"key", "k", "row", "col", "f", "phi"}
    text = layout_tsv()
    lines = text.strip().split("\n")
    assert lines[0].split("\t") == ["key", "k", "row", "col", "f", "phi"]
    assert len(lines) == 34


def test_phase_stored_wrapped():
    tag = FlickerTag(8.0, 2 * math.pi + 0.25)
    assert 0.0 <= tag.phi < 2 * math.pi
    assert tag.phi == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(DomainError):
        FlickerTag(0.0, 0.0)
