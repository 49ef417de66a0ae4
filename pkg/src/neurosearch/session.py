"""Closed-loop session orchestration.

A session walks Spelling -> CandidateSelect -> LandingExam -> SerpBrowse,
driven by decoded events. Raw EEG windows are routed to the decoder that the
current phase calls for: speller-band recognition while typing or browsing,
differential-entropy + boosted-tree satisfaction scoring while a landing page
is examined. Every accepted event is appended to an event log; replaying a
log rebuilds the identical state.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cca import ReferenceBank, build_reference_bank, recognize, stimulus_frequency_grid
from .config import (
    DEFAULT_PINYIN_DICT,
    DEFAULT_QUERY_LOG,
    DEFAULT_SERP_CORPUS,
    RuntimeConfig,
    asset_path,
)
from .errors import DomainError, PhaseError
from .features import de_features
from .gbdt import SatisfactionModel, predict
from .serp import SatisfactionFeedback, SearchResult, Serp, SerpCorpus, rerank, top_ranked_page
from .stimulus import DIGIT_LABELS, LETTER_LABELS, StimulusConfig, keyboard_layout
from .suggest import QueryLog, Suggester, load_pinyin_dict
from .synth import OCCIPITAL_CHANNELS, EegWindow

PHASES = ("spelling", "candidate_select", "landing_exam", "serp_browse", "done")

# Interaction blocks on the re-ranked SERP reuse the first speller tags:
# k=1..5 click the viewport rows, k=6/7 scroll.
N_INTERACTION_BLOCKS = 7
INTERACTION_ACTIONS = (
    "click_result_1",
    "click_result_2",
    "click_result_3",
    "click_result_4",
    "click_result_5",
    "scroll_up",
    "scroll_down",
)


class _BankCache:
    """Reference banks keyed by window length (and target subset size)."""

    def __init__(self, cfg: RuntimeConfig):
        self.cfg = cfg
        self.grid = stimulus_frequency_grid(StimulusConfig(refresh_rate=cfg.refresh_rate))
        self._banks: dict[tuple[int, int], ReferenceBank] = {}

    def get(self, n_samples: int, n_targets: int | None = None) -> ReferenceBank:
        n_targets = n_targets or len(self.grid)
        key = (n_samples, n_targets)
        if key not in self._banks:
            self._banks[key] = build_reference_bank(
                self.cfg.sampling_rate, n_samples, self.cfg.n_harmonics, self.grid[:n_targets]
            )
        return self._banks[key]


@dataclass
class SessionAssets:
    """Shared immutable context: layout, suggester, corpus, model, banks."""

    config: RuntimeConfig
    suggester: Suggester
    corpus: SerpCorpus
    model: SatisfactionModel | None = None
    stimulus_config: StimulusConfig = field(default_factory=StimulusConfig)

    def __post_init__(self):
        self.layout = keyboard_layout(self.stimulus_config)
        self.label_by_k = {key.k: key.label for key, _ in self.layout}
        self.banks = _BankCache(self.config)

    @classmethod
    def bundled(
        cls, config: RuntimeConfig | None = None, model: SatisfactionModel | None = None
    ) -> "SessionAssets":
        config = config or RuntimeConfig()
        suggester = Suggester(
            QueryLog.load(asset_path(DEFAULT_QUERY_LOG)),
            load_pinyin_dict(asset_path(DEFAULT_PINYIN_DICT)),
            config.suggestion_strategy,
        )
        corpus = SerpCorpus.load(asset_path(DEFAULT_SERP_CORPUS))
        return cls(config=config, suggester=suggester, corpus=corpus, model=model)


@dataclass
class SessionState:
    phase: str = "spelling"
    typed_keys: str = ""
    candidates: list[str] = field(default_factory=list)
    query: str | None = None
    serp: Serp | None = None
    landing: SearchResult | None = None
    feedback: SatisfactionFeedback | None = None
    viewport_offset: int = 0
    sat_probs: list[float] = field(default_factory=list)
    event_log: list[dict] = field(default_factory=list)

    def snapshot(self) -> dict:
        return {
            "phase": self.phase,
            "typed_keys": self.typed_keys,
            "candidates": list(self.candidates),
            "query": self.query,
            "serp": self.serp.to_json_dict() if self.serp else None,
            "landing": self.landing.to_json_dict() if self.landing else None,
            "feedback": self.feedback.to_json_dict() if self.feedback else None,
            "viewport_offset": self.viewport_offset,
            "sat_probs": list(self.sat_probs),
            "event_log": [dict(e) for e in self.event_log],
        }


class Session:
    """One user's closed loop; single-writer (callers serialize step())."""

    def __init__(self, assets: SessionAssets, session_id: str = "local"):
        self.assets = assets
        self.session_id = session_id
        self.state = SessionState()

    # --- EEG routing -----------------------------------------------------------

    def decode_window(self, window: EegWindow) -> dict:
        """Turn a raw window into the decoded event the current phase expects."""
        phase = self.state.phase
        if phase in ("spelling", "candidate_select"):
            result = self._recognize(window, n_targets=None)
            label = self.assets.label_by_k[result.best_k]
            return {"kind": "key", "key": label, "rho": float(result.scores[result.best_k - 1])}
        if phase == "serp_browse":
            result = self._recognize(window, n_targets=N_INTERACTION_BLOCKS)
            return {
                "kind": "interaction",
                "action": INTERACTION_ACTIONS[result.best_k - 1],
                "rho": float(result.scores[result.best_k - 1]),
            }
        if phase == "landing_exam":
            if self.assets.model is None:
                raise PhaseError("no satisfaction model loaded")
            fv = de_features(window)
            prob = float(predict(self.assets.model, fv.values))
            return {"kind": "sat_prob", "probability": prob}
        raise PhaseError(f"no decoder for phase {phase}")

    def _recognize(self, window: EegWindow, n_targets: int | None):
        if set(OCCIPITAL_CHANNELS) <= set(window.channel_labels):
            window = window.select_channels(OCCIPITAL_CHANNELS)
        bank = self.assets.banks.get(window.n_samples, n_targets)
        return recognize(window, bank, min_confidence=self.assets.config.min_confidence)

    # --- state machine -----------------------------------------------------------

    def step(self, event, ts: float | None = None) -> tuple[SessionState, list[str]]:
        """Apply one event (or route one EegWindow); reject without mutating."""
        if isinstance(event, EegWindow):
            event = self.decode_window(event)
        if not isinstance(event, dict) or "kind" not in event:
            raise DomainError(f"malformed event: {event!r}")
        handler = {
            "key": self._on_key,
            "interaction": self._on_interaction,
            "sat_prob": self._on_sat_prob,
            "feedback": self._on_feedback,
            "end": self._on_end,
        }.get(event["kind"])
        if handler is None:
            raise DomainError(f"unknown event kind {event['kind']!r}")
        if self.state.phase == "done":
            raise PhaseError("session is finished")
        actions = handler(event)
        logged = dict(event)
        logged["ts"] = time.time() if ts is None else ts
        self.state.event_log.append(logged)
        return self.state, actions

    def _refresh_candidates(self) -> None:
        s = self.state
        s.candidates = (
            self.assets.suggester.suggest(s.typed_keys, k=5) if s.typed_keys else []
        )

    def _on_key(self, event) -> list[str]:
        s = self.state
        if s.phase not in ("spelling", "candidate_select"):
            raise PhaseError(f"key event invalid in phase {s.phase}")
        key = str(event.get("key", "")).upper()
        if key in LETTER_LABELS:
            s.typed_keys += key.lower()
            s.query = None
            s.phase = "spelling"
            self._refresh_candidates()
            return ["typed"]
        if key == "DELETE":
            if s.phase == "candidate_select":
                s.query = None
                s.phase = "spelling"
                return ["deselected"]
            if not s.typed_keys:
                return ["noop"]
            s.typed_keys = s.typed_keys[:-1]
            self._refresh_candidates()
            return ["deleted"]
        if key in DIGIT_LABELS:
            idx = int(key) - 1
            if idx >= len(s.candidates):
                raise PhaseError(f"no candidate #{key} to select")
            s.query = s.candidates[idx]
            s.phase = "candidate_select"
            return ["candidate_selected"]
        if key == "SEARCH":
            return self._submit()
        raise DomainError(f"unknown key {event.get('key')!r}")

    def _submit(self) -> list[str]:
        s = self.state
        if s.phase == "candidate_select" and s.query:
            query = s.query
        elif s.candidates:
            query = s.candidates[0]
        elif s.typed_keys:
            query = s.typed_keys
        else:
            raise PhaseError("nothing to search")
        try:
            serp = self.assets.corpus.lookup(query)
        except DomainError as exc:
            raise PhaseError(str(exc)) from exc
        s.query = query
        s.serp = serp
        s.landing = top_ranked_page(serp)
        s.feedback = None
        s.sat_probs = []
        s.viewport_offset = 0
        s.phase = "landing_exam"
        return ["submitted", "landing_presented"]

    def _on_sat_prob(self, event) -> list[str]:
        s = self.state
        if s.phase != "landing_exam":
            raise PhaseError(f"satisfaction probe invalid in phase {s.phase}")
        prob = float(event["probability"])
        if not 0.0 <= prob <= 1.0:
            raise DomainError(f"probability {prob} outside [0, 1]")
        s.sat_probs.append(prob)
        return ["sat_prob_recorded"]

    def _on_feedback(self, event) -> list[str]:
        s = self.state
        if s.phase != "landing_exam":
            raise PhaseError(f"feedback invalid in phase {s.phase}")
        source = event.get("source", "decoded")
        prob = event.get("probability")
        if prob is None and "verdict" in event:
            prob = 1.0 if event["verdict"] == "satisfied" else 0.0
            source = event.get("source", "manual")
        if prob is None:
            if not s.sat_probs:
                raise PhaseError("no decoded satisfaction probabilities to pool")
            prob = float(np.mean(s.sat_probs))
        feedback = SatisfactionFeedback(
            probability=float(prob),
            source=source,
            threshold=self.assets.config.satisfaction_threshold,
        )
        s.feedback = feedback
        s.serp = rerank(s.serp, s.landing, feedback)
        s.viewport_offset = 0
        s.phase = "serp_browse"
        return ["reranked"]

    def _on_interaction(self, event) -> list[str]:
        s = self.state
        if s.phase != "serp_browse":
            raise PhaseError(f"interaction invalid in phase {s.phase}")
        action = event.get("action")
        viewport = self.assets.config.viewport_size
        n = len(s.serp)
        if action == "scroll_down":
            s.viewport_offset = min(s.viewport_offset + viewport, max(0, n - viewport))
            return ["scrolled"]
        if action == "scroll_up":
            s.viewport_offset = max(s.viewport_offset - viewport, 0)
            return ["scrolled"]
        if action in INTERACTION_ACTIONS[:5]:
            slot = int(action.rsplit("_", 1)[1])
            idx = s.viewport_offset + slot - 1
            if idx >= n:
                raise PhaseError(f"viewport slot {slot} is past the end of the SERP")
            s.landing = s.serp.results[idx]
            s.feedback = None
            s.sat_probs = []
            s.phase = "landing_exam"
            return ["clicked", "landing_presented"]
        raise DomainError(f"unknown interaction {action!r}")

    def _on_end(self, event) -> list[str]:
        del event
        self.state.phase = "done"
        return ["ended"]

    # --- persistence -----------------------------------------------------------

    def log_lines(self) -> list[str]:
        return [
            json.dumps({"session": self.session_id, "event": e}, ensure_ascii=False)
            for e in self.state.event_log
        ]


def replay(lines, assets: SessionAssets, session_id: str = "replay") -> Session:
    """Rebuild a session from logged lines; stops at the first bad line."""
    session = Session(assets, session_id=session_id)
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            event = dict(record["event"])
            ts = event.pop("ts")
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            warnings.warn(f"replay stopped at line {i}: {exc}", stacklevel=2)
            break
        session.step(event, ts=ts)
    return session


def replay_file(path, assets: SessionAssets) -> Session:
    with open(path, "r", encoding="utf-8") as fh:
        return replay(fh.readlines(), assets)
