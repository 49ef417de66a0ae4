"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. Every tolerance is pinned
here; the benchmark criteria are seeded and their golden numbers recorded in
the assertions.
"""

import math
import time

import numpy as np
import pytest

from neurosearch.bench import bench_speller
from neurosearch.config import DEFAULT_PINYIN_DICT, DEFAULT_QUERY_LOG, RuntimeConfig, asset_path
from neurosearch.cca import build_reference_bank, recognize
from neurosearch.features import de_features
from neurosearch.gbdt import GbdtParams, auc, lopo_tune, predict, train
from neurosearch.metrics import decode_latency_ms
from neurosearch.serp import SatisfactionFeedback, SearchResult, Serp, rerank, top_ranked_page
from neurosearch.session import Session, SessionAssets, replay
from neurosearch.stimulus import key_for_label, tag_for_target
from neurosearch.suggest import QueryLog, bench_suggestion, load_pinyin_dict
from neurosearch.synth import (
    EegWindow,
    SynthSpec,
    default_channel_labels,
    synth_satisfaction_dataset,
    synth_ssvep,
)
from tests.test_cca import least_squares_rho

PASS = "[PASS]"


def report(name):
    print(f"\n{PASS} {name}")


# --- criterion 1: stimulus grid ------------------------------------------------------


def test_c1_stimulus_grid_exact():
    quarters = [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]
    for k in range(1, 34):
        tag = tag_for_target(k)
        assert abs(tag.f - (8.0 + 0.24 * (k - 1))) < 1e-9
        assert abs(tag.phi - quarters[(k - 1) % 4]) < 1e-9
    assert abs(tag_for_target(33).f - 15.68) < 1e-9
    report("stimulus grid: 33 (f, phi) pairs exact, 8.00..15.68 step 0.24, quarter-pi phases")


# --- criterion 2: noise-free recognition --------------------------------------------


def test_c2_noise_free_recognition_with_oracle():
    t0 = time.perf_counter()
    n_samples = 125  # 0.5 s at 250 Hz
    bank = build_reference_bank(250.0, n_samples, 5)
    hits = 0
    for k in range(1, 34):
        window = synth_ssvep(
            SynthSpec(duration=0.5, snr_db=None, seed=k), tag_for_target(k)
        )
        result = recognize(window, bank)
        hits += int(result.best_k == k)
        rho_true = float(result.scores[k - 1])
        assert rho_true > 0.99
        oracle = least_squares_rho(window, bank.ref_matrix(k - 1))
        assert abs(rho_true - oracle) < 1e-6
    elapsed = time.perf_counter() - t0
    assert hits == 33
    assert elapsed < 5.0
    report(
        f"noise-free recognition: 33/33 from 0.5 s windows, rho>0.99, "
        f"LS-oracle agreement <1e-6, sweep {elapsed:.2f}s < 5s"
    )


# --- criterion 3: noisy benchmark ----------------------------------------------------


def test_c3_noisy_benchmark_and_monotonicity():
    # Recorded seed 2024; goldens 0.9959 / 1.0000 / 1.0000.
    rows = {
        w: bench_speller(snr_db=-5.0, window_s=w, trials_per_target=200, seed=2024)
        for w in (0.5, 1.0, 1.5)
    }
    assert rows[1.0].accuracy >= 0.90
    assert rows[1.0].accuracy == pytest.approx(1.0000, abs=1e-9)
    assert rows[0.5].accuracy == pytest.approx(0.9959, abs=1e-3)
    assert rows[1.0].accuracy >= rows[0.5].accuracy - 0.02
    assert rows[1.5].accuracy >= rows[1.0].accuracy - 0.02
    report(
        "noisy benchmark: -5 dB, 200 trials/target, seed 2024 -> "
        f"acc(0.5s)={rows[0.5].accuracy:.4f}, acc(1.0s)={rows[1.0].accuracy:.4f} >= 0.90, "
        f"acc(1.5s)={rows[1.5].accuracy:.4f}, non-decreasing within 2%"
    )


# --- criterion 4: differential-entropy properties -------------------------------------


def test_c4_de_properties():
    rng = np.random.default_rng(0)
    base = rng.standard_normal((62, 500))
    labels = default_channel_labels(62)
    fv = de_features(EegWindow(labels, 250.0, base))
    assert fv.values.shape == (310,)
    doubled = de_features(EegWindow(labels, 250.0, 2.0 * base))
    assert np.all(np.abs((doubled.values - fv.values) - math.log(2.0)) < 1e-6)
    # Parseval: unit-variance white noise -> total spectral mass ~1.
    from neurosearch.features import stft_psd

    w = EegWindow(["a"], 250.0, rng.standard_normal((1, 1000)))
    _, psd = stft_psd(w)
    assert abs(float(psd.sum()) - 1.0) < 0.10
    report("DE: 310 features, amplitude doubling shifts ln 2 +-1e-6, Parseval within 10%")


# --- criterion 5: latency budget ------------------------------------------------------


def test_c5_latency_budget():
    data = synth_satisfaction_dataset(n_participants=4, n_trials=20, separation=1.0, seed=3)
    model = train(data, GbdtParams(n_estimators=100, max_depth=3, max_leaf_nodes=8))
    rng = np.random.default_rng(1)
    labels = default_channel_labels(62)
    times = []
    for _ in range(100):
        window = EegWindow(labels, 250.0, rng.standard_normal((62, 250)))
        times.append(decode_latency_ms(window, model, de_features, lambda m, v: predict(m, v)))
    mean_ms = float(np.mean(times))
    assert mean_ms <= 200.0
    report(f"latency: DE extraction + GBDT predict mean {mean_ms:.1f} ms <= 200 ms over 100 windows")


# --- criterion 6: GBDT training, LOPO protocol ---------------------------------------


def test_c6_gbdt_losses_separable_and_lopo():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((200, 2))
    y = (x[:, 0] > 0).astype(np.int64)
    from neurosearch.features import LabeledFeatureSet

    sep_set = LabeledFeatureSet(np.array(["a"] * 200), y, x)
    model = train(sep_set, GbdtParams(learning_rate=0.1, n_estimators=50, max_depth=3))
    for a, b in zip(model.train_log_loss, model.train_log_loss[1:]):
        assert b <= a + 1e-12
    assert auc(predict(model, x), y) == 1.0

    params = (GbdtParams(learning_rate=0.1, n_estimators=50, max_depth=3, max_leaf_nodes=8),)
    strong = lopo_tune(
        synth_satisfaction_dataset(n_participants=18, n_trials=40, separation=2.0, seed=11),
        params,
    )
    assert strong.mean_auc >= 0.95
    null = lopo_tune(
        synth_satisfaction_dataset(n_participants=18, n_trials=40, separation=0.0, seed=11),
        params,
    )
    assert abs(null.mean_auc - 0.5) <= 0.05
    report(
        "GBDT: per-round log-loss non-increasing, separable AUC=1.0, "
        f"18-participant LOPO AUC {strong.mean_auc:.3f} >= 0.95 at sep 2.0, "
        f"{null.mean_auc:.3f} within 0.5+-0.05 at sep 0"
    )


# --- criterion 7: suggestion harness ---------------------------------------------------


def test_c7_suggestion_goldens_and_directionality():
    log = QueryLog.load(asset_path(DEFAULT_QUERY_LOG))
    pinyin = load_pinyin_dict(asset_path(DEFAULT_PINYIN_DICT))
    first = bench_suggestion(log, pinyin, "first_letter")
    full = bench_suggestion(log, pinyin, "full_letter")
    # Hand-computed goldens (independent brute-force oracle, exact fractions).
    assert first.match_ratio == 39 / 40
    assert abs(first.keys_per_char - 36041 / 49140) < 1e-9
    assert full.match_ratio == 1.0
    assert abs(full.keys_per_char - 38561 / 50400) < 1e-9
    assert full.match_ratio >= first.match_ratio
    report(
        "suggestion: toy-corpus goldens exact "
        f"(first {first.match_ratio:.4f}/{first.keys_per_char:.4f}, "
        f"full {full.match_ratio:.4f}/{full.keys_per_char:.4f}), full>=first ratio"
    )


# --- criterion 8: rerank properties + demo scenarios ------------------------------------


def test_c8_rerank_properties_and_demo_scenarios():
    rng = np.random.default_rng(2024)
    topics = list("ABCDEFG")
    for trial in range(1000):
        n = int(rng.integers(1, 12))
        results = []
        for i in range(n):
            size = int(rng.integers(0, 4))
            results.append(
                SearchResult(
                    f"r{i}", f"t{i}", f"u{i}", "s",
                    frozenset(rng.choice(topics, size=size, replace=False).tolist()),
                )
            )
        serp = Serp("q", results)
        landing_subs = frozenset(
            rng.choice(topics, size=int(rng.integers(0, 4)), replace=False).tolist()
        )
        landing = SearchResult("landing", "t", "u", "s", landing_subs)
        satisfied = SatisfactionFeedback(probability=1.0, source="manual")
        unsatisfied = SatisfactionFeedback(probability=0.0, source="manual")
        out_sat = rerank(serp, landing, satisfied)
        out_unsat = rerank(serp, landing, unsatisfied)
        overlap = [r.result_id for r in results if r.subtopics & landing_subs]
        rest = [r.result_id for r in results if not (r.subtopics & landing_subs)]
        assert sorted(out_sat.ids()) == sorted(serp.ids())  # permutation
        assert out_sat.ids() == overlap + rest  # stability
        assert out_unsat.ids() == rest + overlap  # complement
        assert rerank(out_sat, landing, satisfied).ids() == out_sat.ids()  # idempotence

    assets = SessionAssets.bundled()
    cheetah = assets.corpus.lookup("猎豹浏览器")
    sat = SatisfactionFeedback(probability=1.0, source="manual")
    assert rerank(cheetah, top_ranked_page(cheetah), sat).ids() == [
        "lb1", "lb3", "lb5", "lb2", "lb4", "lb6",
    ]
    paris = assets.corpus.lookup("巴黎")
    unsat = SatisfactionFeedback(probability=0.0, source="manual")
    assert rerank(paris, top_ranked_page(paris), unsat).ids() == [
        "bl2", "bl4", "bl5", "bl1", "bl3", "bl6",
    ]
    report(
        "rerank: permutation/stability/idempotence/complement on 1000 random SERPs; "
        "Cheetah-satisfied and Paris-unsatisfied orderings reproduced"
    )


# --- criterion 9: end-to-end determinism ------------------------------------------------


def test_c9_end_to_end_replay_and_noise_free_loop():
    t0 = time.perf_counter()
    assets = SessionAssets.bundled(RuntimeConfig())
    session = Session(assets, session_id="acceptance")
    seed = 9000
    for label in ("L", "B"):
        window = synth_ssvep(
            SynthSpec(duration=1.0, snr_db=None, seed=seed), tag_for_target(key_for_label(label).k)
        )
        session.step(window)
        seed += 1
    window = synth_ssvep(SynthSpec(duration=1.0, snr_db=None, seed=seed), tag_for_target(33))
    session.step(window)
    assert session.state.phase == "landing_exam"
    assert session.state.query == "猎豹浏览器"
    session.step({"kind": "feedback", "verdict": "satisfied"})
    assert session.state.phase == "serp_browse"
    assert session.state.serp.ids() == ["lb1", "lb3", "lb5", "lb2", "lb4", "lb6"]

    rebuilt = replay(session.log_lines(), assets)
    assert rebuilt.state.snapshot() == session.state.snapshot()
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    report(
        f"end-to-end: noise-free loop spells 'lb', lands, reranks, reaches serp_browse "
        f"in {elapsed:.2f}s < 10s; replay reproduces the identical state"
    )
