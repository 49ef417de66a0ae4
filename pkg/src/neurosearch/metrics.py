"""Throughput and latency metrics for the closed loop."""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field

from .errors import DomainError

LATENCY_BUDGET_MS = 200.0
LATENCY_VIOLATION_MS = 1000.0


def itr(n_targets: int, accuracy: float, seconds_per_selection: float) -> float:
    """Information transfer rate in bits/minute for an N-way selection task.

    (60/T) * [log2 N + p log2 p + (1-p) log2((1-p)/(N-1))], with the p = 1
    limit handled explicitly. Accuracy below chance is a domain error.
    """
    if n_targets < 2:
        raise DomainError("need at least 2 targets")
    if seconds_per_selection <= 0:
        raise DomainError("selection time must be positive")
    if accuracy < 1.0 / n_targets or accuracy > 1.0:
        raise DomainError(
            f"accuracy {accuracy} outside [chance={1.0 / n_targets:.4f}, 1.0]"
        )
    if accuracy == 1.0:
        bits = math.log2(n_targets)
    else:
        p = accuracy
        n = n_targets
        bits = math.log2(n) + p * math.log2(p) + (1.0 - p) * math.log2((1.0 - p) / (n - 1))
    return max(bits, 0.0) * 60.0 / seconds_per_selection


def decode_latency_ms(window, model, de_features_fn, predict_fn) -> float:
    """Wall time of one feature-extraction + prediction pass, in milliseconds."""
    t0 = time.perf_counter()
    fv = de_features_fn(window)
    predict_fn(model, fv.values)
    return (time.perf_counter() - t0) * 1000.0


@dataclass
class MetricsRegistry:
    """Thread-safe counters exposed on the service's /metrics endpoint."""

    decode_count: int = 0
    no_decision_count: int = 0
    rejected_count: int = 0
    feedback_count: int = 0
    latency_sum_ms: float = 0.0
    latency_max_ms: float = 0.0
    latency_samples: int = 0
    latency_violations: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record_latency(self, elapsed_ms: float) -> None:
        with self._lock:
            self.latency_sum_ms += elapsed_ms
            self.latency_max_ms = max(self.latency_max_ms, elapsed_ms)
            self.latency_samples += 1
            if elapsed_ms > LATENCY_VIOLATION_MS:
                self.latency_violations += 1

    def bump(self, field_name: str) -> None:
        with self._lock:
            setattr(self, field_name, getattr(self, field_name) + 1)

    def snapshot(self) -> dict:
        with self._lock:
            mean = self.latency_sum_ms / self.latency_samples if self.latency_samples else 0.0
            return {
                "decode_count": self.decode_count,
                "no_decision_count": self.no_decision_count,
                "rejected_count": self.rejected_count,
                "feedback_count": self.feedback_count,
                "latency_mean_ms": mean,
                "latency_max_ms": self.latency_max_ms,
                "latency_samples": self.latency_samples,
                "latency_violations": self.latency_violations,
                "latency_budget_ms": LATENCY_BUDGET_MS,
            }
