"""Knowledge corpus construction: parse search-result files, filter and clean
snippets, deduplicate, and persist as JSON Lines.

The corpus is built offline from pre-fetched search results; no live HTTP
calls happen here. Snippet granularity is kept as-is (no sentence splitting).
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .jsonio import JsonlError
from .text import word_count

# A language filter maps text to half-open [start, end) character spans
# flagged as non-English.
LanguageFilter = Callable[[str], List[Tuple[int, int]]]

_LATIN_LETTER_RE = re.compile(r"[A-Za-z]")
_WINDOW = 20


@dataclass(frozen=True)
class SearchItem:
    title: str
    link: str
    snippet: str


@dataclass(frozen=True)
class RawSearchResult:
    """One search call: the (question, answer) query and its top hits."""

    query_question: str
    query_answer: str
    items: Tuple[SearchItem, ...]


@dataclass(frozen=True)
class KnowledgeEntry:
    """One knowledge snippet with provenance."""

    id: int
    text: str
    source_url: str
    source_query: Tuple[str, str]


@dataclass(frozen=True)
class Corpus:
    """Immutable, id-ordered knowledge collection.

    Ids are dense from 0 and no two entries share normalized text; both are
    checked at construction so every Corpus in the system satisfies them.
    """

    entries: Tuple[KnowledgeEntry, ...]
    frozen: bool = True

    def __post_init__(self):
        seen = set()
        for pos, entry in enumerate(self.entries):
            if entry.id != pos:
                raise ValueError(f"corpus ids must be dense from 0: position {pos} has id {entry.id}")
            key = dedup_key(entry.text)
            if key in seen:
                raise ValueError(f"corpus entries share normalized text (id {entry.id})")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def get(self, entry_id: int) -> KnowledgeEntry:
        if not 0 <= entry_id < len(self.entries):
            raise KeyError(f"unknown knowledge id {entry_id}")
        return self.entries[entry_id]

    def texts(self) -> List[str]:
        return [e.text for e in self.entries]


@dataclass(frozen=True)
class FilterDecision:
    """Outcome of filter_knowledge: kept text or a rejection reason."""

    kept: bool
    text: Optional[str] = None
    reason: Optional[str] = None


@dataclass
class IngestStats:
    results: int = 0
    items: int = 0
    skipped_items: int = 0
    rejected: dict = field(default_factory=lambda: {"too_short": 0, "too_long": 0, "non_english": 0})
    duplicates_removed: int = 0


def prepare_queries(question: str, answers: Sequence[str]) -> List[Tuple[str, str]]:
    """Pair the question with each distinct answer, order preserved.

    Four answers yield four queries; exact duplicates collapse to one.
    """
    if not question.strip():
        raise ValueError("question must be nonempty")
    if not answers:
        raise ValueError("no queries derivable: empty answers list")
    out = []
    seen = set()
    for raw in answers:
        answer = raw.strip()
        if not answer:
            raise ValueError("no queries derivable: blank answer")
        if answer not in seen:
            seen.add(answer)
            out.append((question, answer))
    return out


def parse_search_results(data: bytes) -> Tuple[List[RawSearchResult], int]:
    """Parse a search-result JSONL payload.

    One object per query: {"question", "answer", "items": [{"title", "link",
    "snippet"}, ...]}. Items missing a snippet (or blank after trim) are
    skipped; anything beyond the first ten items is dropped. Returns the
    results plus the count of skipped/dropped items.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    results: List[RawSearchResult] = []
    skipped = 0
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise JsonlError(f"malformed JSON at line {lineno}: {exc.msg}") from exc
        if not isinstance(obj, dict) or "question" not in obj or "answer" not in obj:
            raise JsonlError(f"line {lineno}: expected object with question/answer fields")
        raw_items = obj.get("items", [])
        if len(raw_items) > 10:
            skipped += len(raw_items) - 10
            raw_items = raw_items[:10]
        items = []
        for item in raw_items:
            snippet = item.get("snippet")
            if snippet is None or not str(snippet).strip():
                skipped += 1
                continue
            items.append(SearchItem(title=str(item.get("title", "")), link=str(item.get("link", "")), snippet=str(snippet)))
        results.append(RawSearchResult(str(obj["question"]), str(obj["answer"]), tuple(items)))
    return results, skipped


def default_language_filter(text: str) -> List[Tuple[int, int]]:
    """Flag spans where non-ASCII-letter characters exceed half of a 20-char
    sliding window. Texts shorter than the window are judged as one window."""
    n = len(text)
    if n == 0:
        return []
    flags = [False] * n
    width = min(_WINDOW, n)
    # prefix counts of non-ASCII-letter characters
    prefix = [0] * (n + 1)
    for i, ch in enumerate(text):
        prefix[i + 1] = prefix[i] + (0 if _LATIN_LETTER_RE.match(ch) else 1)
    for start in range(n - width + 1):
        bad = prefix[start + width] - prefix[start]
        if bad * 2 > width:
            for i in range(start, start + width):
                flags[i] = True
    spans: List[Tuple[int, int]] = []
    i = 0
    while i < n:
        if flags[i]:
            j = i
            while j < n and flags[j]:
                j += 1
            spans.append((i, j))
            i = j
        else:
            i += 1
    return spans


def _excise(text: str, spans: Sequence[Tuple[int, int]]) -> str:
    if not spans:
        return text
    parts = []
    cursor = 0
    for start, end in spans:
        parts.append(text[cursor:start])
        cursor = end
    parts.append(text[cursor:])
    return "".join(parts)


def filter_knowledge(text: str, language_filter: LanguageFilter = default_language_filter) -> FilterDecision:
    """Keep a snippet iff its word count lands in [10, 300] and it is not
    flagged wholesale as non-English; flagged sub-spans are removed from kept
    text. Bounds are inclusive and counted on the cleaned text. Total: never
    raises."""
    spans = language_filter(text)
    cleaned = _excise(text, spans).strip()
    n = word_count(cleaned)
    if spans and n == 0:
        return FilterDecision(kept=False, reason="non_english")
    if n < 10:
        return FilterDecision(kept=False, reason="too_short")
    if n > 300:
        return FilterDecision(kept=False, reason="too_long")
    return FilterDecision(kept=True, text=cleaned)


def dedup_key(text: str) -> str:
    """Duplicate detection key: lowercased, whitespace collapsed, trimmed."""
    return " ".join(text.lower().split())


def dedup(entries: Iterable[KnowledgeEntry]) -> Corpus:
    """Drop later duplicates by normalized text; reassign ids densely from 0
    in first-occurrence order. Idempotent."""
    seen = set()
    kept: List[KnowledgeEntry] = []
    for entry in entries:
        key = dedup_key(entry.text)
        if key in seen:
            continue
        seen.add(key)
        kept.append(
            KnowledgeEntry(id=len(kept), text=entry.text, source_url=entry.source_url, source_query=entry.source_query)
        )
    return Corpus(entries=tuple(kept))


def load_bad_words(path) -> List[str]:
    """One term per line; blank lines ignored."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"bad-word list not found: {path}")
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            term = line.strip().lower()
            if term:
                out.append(term)
    return out


def _bad_word_pattern(bad_words: Sequence[str]) -> Optional[re.Pattern]:
    terms = sorted({t.strip().lower() for t in bad_words if t.strip()})
    if not terms:
        return None
    # token-boundary match; internal whitespace in a phrase matches any run
    alts = "|".join(re.escape(t).replace(r"\ ", r"\s+").replace(" ", r"\s+") for t in terms)
    return re.compile(r"(?<!\w)(?:" + alts + r")(?!\w)", re.IGNORECASE)


def entry_is_objectionable(text: str, pattern: Optional[re.Pattern]) -> bool:
    """The three cleaning rule families: bad-word hit (token-boundary),
    boilerplate markers ("javascript"/"lorem ipsum" substrings), or an opening
    curly bracket."""
    lowered = text.lower()
    if "javascript" in lowered or "lorem ipsum" in lowered:
        return True
    if "{" in text:
        return True
    return bool(pattern and pattern.search(text))


def clean_corpus(corpus: Corpus, bad_words: Sequence[str]) -> Tuple[Corpus, int]:
    """Remove objectionable/boilerplate entries; surviving entries are
    renumbered densely. Returns (clean corpus, removed count)."""
    if bad_words is None:
        raise ValueError("bad-word list is required")
    pattern = _bad_word_pattern(bad_words)
    kept: List[KnowledgeEntry] = []
    for entry in corpus:
        if entry_is_objectionable(entry.text, pattern):
            continue
        kept.append(
            KnowledgeEntry(id=len(kept), text=entry.text, source_url=entry.source_url, source_query=entry.source_query)
        )
    removed = len(corpus) - len(kept)
    return Corpus(entries=tuple(kept)), removed


def save_corpus(corpus: Corpus, path) -> None:
    """JSONL, one entry per line: {"id", "text", "url", "q", "a"}."""
    with open(path, "w", encoding="utf-8") as fh:
        for entry in corpus:
            rec = {
                "id": entry.id,
                "text": entry.text,
                "url": entry.source_url,
                "q": entry.source_query[0],
                "a": entry.source_query[1],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_corpus(path) -> Corpus:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise JsonlError(f"{path}: malformed JSON at line {lineno}: {exc.msg}") from exc
            try:
                entries.append(
                    KnowledgeEntry(
                        id=int(obj["id"]),
                        text=str(obj["text"]),
                        source_url=str(obj.get("url", "")),
                        source_query=(str(obj.get("q", "")), str(obj.get("a", ""))),
                    )
                )
            except KeyError as exc:
                raise JsonlError(f"{path}: line {lineno} missing field {exc}") from exc
    return Corpus(entries=tuple(entries))


def ingest_search_results(
    data: bytes,
    language_filter: LanguageFilter = default_language_filter,
) -> Tuple[Corpus, IngestStats]:
    """Full ingestion: parse raw search results, filter each snippet, attach
    provenance, and deduplicate into a frozen corpus."""
    results, skipped = parse_search_results(data)
    stats = IngestStats(results=len(results), skipped_items=skipped)
    candidates: List[KnowledgeEntry] = []
    for result in results:
        for item in result.items:
            stats.items += 1
            decision = filter_knowledge(item.snippet, language_filter)
            if not decision.kept:
                stats.rejected[decision.reason] += 1
                continue
            candidates.append(
                KnowledgeEntry(
                    id=len(candidates),
                    text=decision.text,
                    source_url=item.link,
                    source_query=(result.query_question, result.query_answer),
                )
            )
    corpus = dedup(candidates)
    stats.duplicates_removed = len(candidates) - len(corpus)
    return corpus, stats
