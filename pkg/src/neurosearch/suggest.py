"""Pinyin-driven query suggestion over a local query log.

Replaces the external suggestion service with prefix matching on pinyin
encodings of logged queries, ranked by pageviews. The benchmark harness
simulates key-by-key typing and reports the successful-match ratio and mean
keys per character under the first-letter and full-letter input strategies.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, EncodingError

STRATEGIES = ("first_letter", "full_letter")


@dataclass(frozen=True)
class LogEntry:
    query: str
    pageviews: int
    intent_id: str | None = None


@dataclass
class QueryLog:
    entries: list[LogEntry]

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.pageviews < 0:
                raise DomainError(f"negative pageviews for {e.query!r}")
            if e.query in seen:
                raise DomainError(f"duplicate query {e.query!r}")
            seen.add(e.query)

    def __len__(self):
        return len(self.entries)

    @classmethod
    def load(cls, path) -> "QueryLog":
        entries = []
        with open(path, "r", encoding="utf-8") as fh:
            for ln, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) not in (2, 3):
                    raise DomainError(f"{path}:{ln}: expected 2 or 3 tab-separated fields")
                intent = parts[2] if len(parts) == 3 and parts[2] else None
                entries.append(LogEntry(parts[0], int(parts[1]), intent))
        return cls(entries)


def load_pinyin_dict(path) -> dict[str, str]:
    mapping = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or len(parts[0]) != 1:
                raise DomainError(f"{path}:{ln}: expected 'char<TAB>pinyin'")
            char, pinyin = parts
            if not pinyin or not pinyin.isascii() or not pinyin.isalpha():
                raise DomainError(f"{path}:{ln}: pinyin must be non-empty ascii letters")
            mapping[char] = pinyin.lower()
    return mapping


def pinyin_encode(query: str, strategy: str, pinyin: dict[str, str]) -> str:
    """Key sequence for a query: concatenated initials or full spellings.

    Characters absent from the dictionary pass through lowercased when they
    are plain ASCII; anything else raises EncodingError naming the offenders.
    """
    if strategy not in STRATEGIES:
        raise DomainError(f"unknown strategy {strategy!r}")
    out = []
    missing = []
    for ch in query:
        if ch in pinyin:
            spelling = pinyin[ch]
            out.append(spelling[0] if strategy == "first_letter" else spelling)
        elif ch.isascii():
            out.append(ch.lower())
        else:
            missing.append(ch)
    if missing:
        raise EncodingError(missing)
    return "".join(out)


class Suggester:
    """Prefix-matching candidate source with encodings precomputed per strategy."""

    def __init__(self, log: QueryLog, pinyin: dict[str, str], strategy: str = "first_letter"):
        if strategy not in STRATEGIES:
            raise DomainError(f"unknown strategy {strategy!r}")
        self.log = log
        self.pinyin = pinyin
        self.strategy = strategy
        # Rank order is fixed up front: pageviews descending, query ascending.
        # Queries the dictionary cannot encode can never be suggested; skip them.
        ranked = sorted(log.entries, key=lambda e: (-e.pageviews, e.query))
        self._ranked = []
        for e in ranked:
            try:
                self._ranked.append((pinyin_encode(e.query, strategy, pinyin), e))
            except EncodingError:
                continue

    def suggest(self, typed_keys: str, k: int = 5) -> list[str]:
        if not typed_keys:
            raise DomainError("typed_keys must be non-empty")
        typed = typed_keys.lower()
        out = []
        for enc, entry in self._ranked:
            if enc.startswith(typed):
                out.append(entry.query)
                if len(out) == k:
                    break
        return out


def suggest(typed_keys: str, strategy: str, log: QueryLog, pinyin: dict[str, str], k: int = 5):
    return Suggester(log, pinyin, strategy).suggest(typed_keys, k)


def match_success(candidate: str, intended: str, intents: dict[str, str] | None = None) -> bool:
    """A candidate matches when it equals or refines the intended query.

    Refinement means the intended query is a prefix of the candidate, or both
    carry the same intent id in the optional mapping.
    """
    if candidate == intended or candidate.startswith(intended):
        return True
    if intents:
        ci = intents.get(candidate)
        return ci is not None and ci == intents.get(intended)
    return False


@dataclass(frozen=True)
class SuggestionBench:
    strategy: str
    match_ratio: float
    keys_per_char: float
    n_queries: int
    n_matched: int


def bench_suggestion(
    log: QueryLog, pinyin: dict[str, str], strategy: str, k: int = 5
) -> SuggestionBench:
    """Type every logged query key-by-key and score the candidate lists.

    A query counts as matched at the first key count where any candidate
    satisfies match_success; its key cost adds one selection keystroke when
    the matching candidate is not ranked first. keys_per_char averages
    keys/len(query) over matched queries only.
    """
    if len(log) == 0:
        raise DomainError("query log is empty")
    suggester = Suggester(log, pinyin, strategy)
    intents = {e.query: e.intent_id for e in log.entries if e.intent_id}
    n_matched = 0
    kpc_sum = 0.0
    for entry in log.entries:
        try:
            encoding = pinyin_encode(entry.query, strategy, pinyin)
        except EncodingError:
            continue  # cannot be typed, counts as unmatched
        for n_keys in range(1, len(encoding) + 1):
            candidates = suggester.suggest(encoding[:n_keys], k)
            rank = next(
                (i + 1 for i, c in enumerate(candidates) if match_success(c, entry.query, intents)),
                None,
            )
            if rank is not None:
                keys = n_keys + (0 if rank == 1 else 1)
                kpc_sum += keys / len(entry.query)
                n_matched += 1
                break
    return SuggestionBench(
        strategy=strategy,
        match_ratio=n_matched / len(log),
        keys_per_char=(kpc_sum / n_matched) if n_matched else 0.0,
        n_queries=len(log),
        n_matched=n_matched,
    )
