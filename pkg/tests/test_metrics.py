import math

import pytest

from neurosearch.errors import DomainError
from neurosearch.metrics import MetricsRegistry, itr


def test_itr_perfect_accuracy_closed_form():
    # 33 targets, 1.5 s per selection: 40 * log2(33).
    assert itr(33, 1.0, 1.5) == pytest.approx(40.0 * math.log2(33.0), abs=1e-9)


def test_itr_chance_level_is_zero():
    assert itr(33, 1.0 / 33.0, 1.0) == pytest.approx(0.0, abs=1e-9)
    assert itr(2, 0.5, 60.0) == pytest.approx(0.0, abs=1e-9)


def test_itr_monotone_in_accuracy():
    values = [itr(33, p, 1.0) for p in (0.2, 0.5, 0.8, 0.95, 1.0)]
    assert values == sorted(values)


def test_itr_domain_errors():
    with pytest.raises(DomainError):
        itr(33, 0.01, 1.0)  # below chance
    with pytest.raises(DomainError):
        itr(1, 1.0, 1.0)
    with pytest.raises(DomainError):
        itr(33, 1.0, 0.0)
    with pytest.raises(DomainError):
        itr(33, 1.1, 1.0)


def test_metrics_registry_latency_accounting():
    reg = MetricsRegistry()
    reg.record_latency(10.0)
    reg.record_latency(30.0)
    reg.record_latency(1500.0)  # violation
    reg.bump("decode_count")
    snap = reg.snapshot()
    assert snap["latency_samples"] == 3
    assert snap["latency_mean_ms"] == pytest.approx((10 + 30 + 1500) / 3)
    assert snap["latency_max_ms"] == 1500.0
    assert snap["latency_violations"] == 1
    assert snap["decode_count"] == 1
