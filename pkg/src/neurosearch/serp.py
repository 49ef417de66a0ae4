"""Search-result lists, subtopic annotations, and satisfaction-driven re-ranking.

Re-ranking is a stable partition around the landing page's subtopics: results
sharing a subtopic move as a block to the front (satisfied) or the back
(unsatisfied), preserving the engine's relative order inside each block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError

SATISFACTION_THRESHOLD = 0.5


@dataclass(frozen=True)
class SearchResult:
    result_id: str
    title: str
    url: str
    snippet: str
    subtopics: frozenset[str] = frozenset()

    def to_json_dict(self) -> dict:
        return {
            "result_id": self.result_id,
            "title": self.title,
            "url": self.url,
            "snippet": self.snippet,
            "subtopics": sorted(self.subtopics),
        }


@dataclass
class Serp:
    query: str
    results: list[SearchResult]

    def __post_init__(self):
        ids = [r.result_id for r in self.results]
        if len(ids) != len(set(ids)):
            raise DomainError(f"duplicate result ids in SERP for {self.query!r}")

    def __len__(self):
        return len(self.results)

    def ids(self) -> list[str]:
        return [r.result_id for r in self.results]

    def to_json_dict(self) -> dict:
        return {"query": self.query, "results": [r.to_json_dict() for r in self.results]}


@dataclass(frozen=True)
class SatisfactionFeedback:
    probability: float
    source: str = "decoded"  # decoded | manual
    threshold: float = SATISFACTION_THRESHOLD

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise DomainError("probability must lie in [0, 1]")
        if self.source not in ("decoded", "manual"):
            raise DomainError(f"unknown feedback source {self.source!r}")

    @property
    def verdict(self) -> str:
        return "satisfied" if self.probability >= self.threshold else "unsatisfied"

    @property
    def satisfied(self) -> bool:
        return self.probability >= self.threshold

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "probability": self.probability,
            "source": self.source,
        }


def top_ranked_page(serp: Serp) -> SearchResult:
    """The landing page: the first result of the original ranking."""
    if len(serp) == 0:
        raise DomainError(f"SERP for {serp.query!r} is empty")
    return serp.results[0]


def rerank(serp: Serp, landing: SearchResult, feedback: SatisfactionFeedback) -> Serp:
    """Stable partition around subtopic overlap with the landing page.

    Overlap group O holds every result sharing at least one subtopic with the
    landing page (the landing page itself included when present). Satisfied
    puts O first, unsatisfied puts O last; relative order inside each group is
    untouched.
    """
    overlap = []
    rest = []
    for r in serp.results:
        if r.result_id == landing.result_id or (r.subtopics & landing.subtopics):
            overlap.append(r)
        else:
            rest.append(r)
    ordered = overlap + rest if feedback.satisfied else rest + overlap
    return Serp(query=serp.query, results=ordered)


# --- bundled corpus -------------------------------------------------------------


@dataclass
class SerpCorpus:
    """Offline search engine: one canned SERP per query."""

    serps: dict[str, Serp] = field(default_factory=dict)

    def lookup(self, query: str) -> Serp:
        if query not in self.serps:
            raise DomainError(f"no SERP recorded for query {query!r}")
        serp = self.serps[query]
        # Hand out a copy: sessions re-rank their own lists.
        return Serp(query=serp.query, results=list(serp.results))

    def queries(self) -> list[str]:
        return list(self.serps)

    @classmethod
    def load(cls, path) -> "SerpCorpus":
        """Parse the record format: a ``query:`` line, result lines, blank separators.

        Result lines are tab-separated: id, title, url, snippet, comma-joined
        subtopics (the last field may be empty).
        """
        corpus = cls()
        current_query = None
        current_results: list[SearchResult] = []

        def flush():
            nonlocal current_query, current_results
            if current_query is not None:
                corpus.serps[current_query] = Serp(current_query, current_results)
            current_query, current_results = None, []

        with open(path, "r", encoding="utf-8") as fh:
            for ln, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if line.startswith("#"):
                    continue
                if not line.strip():
                    flush()
                    continue
                if line.startswith("query:"):
                    flush()
                    current_query = line[len("query:") :].strip()
                    if not current_query:
                        raise DomainError(f"{path}:{ln}: empty query")
                    continue
                if current_query is None:
                    raise DomainError(f"{path}:{ln}: result line before any query")
                parts = line.split("\t")
                if len(parts) not in (4, 5):
                    raise DomainError(f"{path}:{ln}: expected 4 or 5 tab-separated fields")
                rid, title, url, snippet = parts[:4]
                subs = parts[4] if len(parts) == 5 else ""
                subtopics = frozenset(s.strip() for s in subs.split(",") if s.strip())
                current_results.append(SearchResult(rid, title, url, snippet, subtopics))
        flush()
        if not corpus.serps:
            raise DomainError(f"{path}: no SERP records")
        return corpus
