"""Benchmark harnesses: speller accuracy/ITR sweeps and split-kernel timing."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import split_backend
from .cca import build_reference_bank, recognize, stimulus_frequency_grid
from .errors import DomainError
from .gbdt import GbdtParams, train
from .metrics import itr
from .stimulus import StimulusConfig, tag_for_target
from .synth import SynthSpec, synth_ssvep


@dataclass(frozen=True)
class SpellerBenchRow:
    snr_db: float
    window_s: float
    trials_per_target: int
    accuracy: float
    mean_decode_ms: float
    itr_bits_per_min: float
    seed: int


def bench_speller(
    snr_db: float = -5.0,
    window_s: float = 1.0,
    trials_per_target: int = 200,
    sampling_rate: float = 250.0,
    n_harmonics: int = 5,
    seed: int = 2024,
    cfg: StimulusConfig | None = None,
) -> SpellerBenchRow:
    """Recognition accuracy over all targets at one SNR / window length.

    Deterministic: trial seeds derive from (seed, k, trial). ITR uses the
    window length as the per-selection time.
    """
    cfg = cfg or StimulusConfig()
    grid = stimulus_frequency_grid(cfg)
    n_samples = int(round(window_s * sampling_rate))
    bank = build_reference_bank(sampling_rate, n_samples, n_harmonics, grid)
    correct = 0
    total = 0
    decode_s = 0.0
    for k in range(1, cfg.n_targets + 1):
        tag = tag_for_target(k, cfg)
        for trial in range(trials_per_target):
            spec = SynthSpec(
                duration=window_s,
                sampling_rate=sampling_rate,
                n_harmonics=n_harmonics,
                snr_db=snr_db,
                seed=seed + 100_000 * k + trial,
            )
            window = synth_ssvep(spec, tag)
            t0 = time.perf_counter()
            result = recognize(window, bank)
            decode_s += time.perf_counter() - t0
            correct += int(result.best_k == k)
            total += 1
    accuracy = correct / total
    chance = 1.0 / cfg.n_targets
    bits = itr(cfg.n_targets, max(accuracy, chance), window_s)
    return SpellerBenchRow(
        snr_db=snr_db,
        window_s=window_s,
        trials_per_target=trials_per_target,
        accuracy=accuracy,
        mean_decode_ms=1000.0 * decode_s / total,
        itr_bits_per_min=bits,
        seed=seed,
    )


def speller_table(rows: list[SpellerBenchRow]) -> str:
    lines = ["snr_db\twindow_s\taccuracy\tmean_decode_ms\titr_bits_per_min"]
    for r in rows:
        lines.append(
            f"{r.snr_db:g}\t{r.window_s:g}\t{r.accuracy:.4f}\t{r.mean_decode_ms:.3f}\t{r.itr_bits_per_min:.2f}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class KernelBenchRow:
    backend: str
    rows: int
    features: int
    trees: int
    train_seconds: float


def bench_kernels(
    n_rows: int = 2000,
    n_features: int = 310,
    n_trees: int = 20,
    max_depth: int = 5,
    seed: int = 7,
) -> list[KernelBenchRow]:
    """Time identical training runs on every available split backend.

    Also verifies that the backends grew identical trees; a mismatch is a
    bug, not a tolerance issue.
    """
    from .features import LabeledFeatureSet

    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_rows, n_features))
    logits = x[:, 0] + 0.5 * x[:, 1] - 0.5 * x[:, 2]
    y = (logits + rng.standard_normal(n_rows) > 0).astype(np.int64)
    data = LabeledFeatureSet(np.array([f"p{i % 6}" for i in range(n_rows)]), y, x)
    params = GbdtParams(n_estimators=n_trees, max_depth=max_depth, max_leaf_nodes=31)
    out = []
    models = {}
    original = split_backend.get_backend()
    try:
        for backend in split_backend.available_backends():
            split_backend.set_backend(backend)
            t0 = time.perf_counter()
            models[backend] = train(data, params)
            out.append(
                KernelBenchRow(
                    backend=backend,
                    rows=n_rows,
                    features=n_features,
                    trees=n_trees,
                    train_seconds=time.perf_counter() - t0,
                )
            )
    finally:
        split_backend.set_backend(original)
    names = list(models)
    for other in names[1:]:
        for ta, tb in zip(models[names[0]].trees, models[other].trees):
            if not (
                np.array_equal(ta.feature, tb.feature)
                and np.array_equal(ta.threshold, tb.threshold)
                and np.array_equal(ta.value, tb.value)
            ):
                raise DomainError(f"backends {names[0]} and {other} grew different trees")
    return out


def kernel_table(rows: list[KernelBenchRow]) -> str:
    lines = ["backend\trows\tfeatures\ttrees\ttrain_seconds"]
    for r in rows:
        lines.append(f"{r.backend}\t{r.rows}\t{r.features}\t{r.trees}\t{r.train_seconds:.3f}")
    return "\n".join(lines) + "\n"
