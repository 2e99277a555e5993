"""Extractive answer decoding and per-question aggregation.

The reader proper is an external model; this module consumes its token-score
matrices (or precomputed candidate files), decodes the best span per
knowledge, and merges per-knowledge candidates into one final answer.

Token position 0 is reserved for the special word "unanswerable": when its
start+end score beats every true span, the knowledge is rejected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .jsonio import JsonlError, read_jsonl
from .retriever import RetrievalResult
from .text import find_answer_spans, normalize_answer

UNANSWERABLE = "unanswerable"

HIGHEST_SCORE = "score"
HIGHEST_FREQUENCY = "freq"
STRATEGIES = (HIGHEST_SCORE, HIGHEST_FREQUENCY)

DEFAULT_MAX_SPAN_LEN = 10


class ReaderError(ValueError):
    pass


@dataclass(frozen=True)
class SpanScores:
    """Per-token start/end scores; position 0 is the unanswerable sentinel."""

    tokens: Tuple[str, ...]
    start_scores: Tuple[float, ...]
    end_scores: Tuple[float, ...]

    def __post_init__(self):
        n = len(self.tokens)
        if n < 1:
            raise ReaderError("empty token list")
        if len(self.start_scores) != n or len(self.end_scores) != n:
            raise ReaderError("tokens/start/end lengths differ")


@dataclass(frozen=True)
class AnswerCandidate:
    text: str
    score: float
    knowledge_id: int

    @property
    def is_unanswerable(self) -> bool:
        return self.text == UNANSWERABLE


@dataclass(frozen=True)
class SpanTarget:
    """Training target: all occurrences of the answer, or the sentinel when
    the knowledge does not contain it."""

    knowledge_id: int
    spans: Tuple[Tuple[int, int], ...]
    answer: str

    @property
    def is_unanswerable(self) -> bool:
        return not self.spans


def _softmax(values: Sequence[float]) -> List[float]:
    top = max(values)
    exps = [math.exp(v - top) for v in values]
    total = sum(exps)
    return [e / total for e in exps]


def _best_span(scores: SpanScores, max_span_len: int) -> Optional[Tuple[int, int, float]]:
    """Best true span (s, e, start[s]+end[e]) with 1 <= s <= e and length at
    most max_span_len; ties resolved to the smallest s, then smallest e."""
    start, end = scores.start_scores, scores.end_scores
    n = len(scores.tokens)
    best = None
    for s in range(1, n):
        for e in range(s, min(s + max_span_len, n)):
            total = start[s] + end[e]
            if best is None or total > best[2]:
                best = (s, e, total)
    return best


def decode_span(scores: SpanScores, max_span_len: int = DEFAULT_MAX_SPAN_LEN, knowledge_id: int = -1) -> AnswerCandidate:
    """Pick the span maximizing start+end score, or the sentinel when position
    0 outranks every span. Candidate score is the product of the start and end
    softmax probabilities."""
    if max_span_len < 1:
        raise ReaderError("max_span_len must be >= 1")
    best = _best_span(scores, max_span_len)
    sentinel_total = scores.start_scores[0] + scores.end_scores[0]
    p_start = _softmax(scores.start_scores)
    p_end = _softmax(scores.end_scores)
    if best is None or sentinel_total > best[2]:
        return AnswerCandidate(text=UNANSWERABLE, score=p_start[0] * p_end[0], knowledge_id=knowledge_id)
    s, e, _ = best
    return AnswerCandidate(
        text=" ".join(scores.tokens[s : e + 1]),
        score=p_start[s] * p_end[e],
        knowledge_id=knowledge_id,
    )


def decode_forced_span(scores: SpanScores, max_span_len: int = DEFAULT_MAX_SPAN_LEN, knowledge_id: int = -1) -> Optional[AnswerCandidate]:
    """Best true span regardless of the sentinel; None when no span exists.
    Used as the relaxed pass when every knowledge decoded to unanswerable."""
    best = _best_span(scores, max_span_len)
    if best is None:
        return None
    s, e, _ = best
    p_start = _softmax(scores.start_scores)
    p_end = _softmax(scores.end_scores)
    return AnswerCandidate(
        text=" ".join(scores.tokens[s : e + 1]),
        score=p_start[s] * p_end[e],
        knowledge_id=knowledge_id,
    )


def locate_span_targets(tokens: Sequence[str], answer: str, knowledge_id: int = -1) -> SpanTarget:
    """All token-boundary occurrences of the answer, ascending; no occurrence
    means the pair becomes an unanswerable target."""
    spans = tuple(find_answer_spans(tokens, answer))
    if not spans:
        return SpanTarget(knowledge_id=knowledge_id, spans=(), answer=UNANSWERABLE)
    return SpanTarget(knowledge_id=knowledge_id, spans=spans, answer=answer)


def aggregate(candidates: Sequence[AnswerCandidate], strategy: str) -> str:
    """Merge per-knowledge candidates into a final answer.

    Highest-Score takes the maximum-score candidate. Highest-Frequency takes
    the most frequent normalized answer; count ties break to the higher best
    score, remaining ties lexicographically. Unanswerable candidates are
    dropped first; an empty remainder is an error.
    """
    if strategy not in STRATEGIES:
        raise ReaderError(f"unknown strategy {strategy!r}")
    kept = [c for c in candidates if not c.is_unanswerable]
    if not kept:
        raise ReaderError("no candidates")
    if strategy == HIGHEST_SCORE:
        best = min(kept, key=lambda c: (-c.score, normalize_answer(c.text), c.text))
        return best.text
    groups: Dict[str, List[AnswerCandidate]] = {}
    for cand in kept:
        groups.setdefault(normalize_answer(cand.text), []).append(cand)
    ranked = sorted(
        groups.items(),
        key=lambda item: (-len(item[1]), -max(c.score for c in item[1]), item[0]),
    )
    _, members = ranked[0]
    return min(members, key=lambda c: (-c.score, c.text)).text


class ScoreMatrixSource:
    """Candidates decoded on demand from {"qid","kid","tokens","start","end"}
    records. Supports the relaxed (sentinel-ignoring) pass."""

    def __init__(self, records: Dict[Tuple[str, int], SpanScores], max_span_len: int = DEFAULT_MAX_SPAN_LEN):
        self.records = records
        self.max_span_len = max_span_len

    @classmethod
    def from_file(cls, path, max_span_len: int = DEFAULT_MAX_SPAN_LEN) -> "ScoreMatrixSource":
        records = {}
        for lineno, obj in read_jsonl(path):
            for key in ("qid", "kid", "tokens", "start", "end"):
                if key not in obj:
                    raise JsonlError(f"{path}: line {lineno} missing {key}")
            records[(str(obj["qid"]), int(obj["kid"]))] = SpanScores(
                tokens=tuple(str(t) for t in obj["tokens"]),
                start_scores=tuple(float(x) for x in obj["start"]),
                end_scores=tuple(float(x) for x in obj["end"]),
            )
        return cls(records, max_span_len=max_span_len)

    def get(self, qid: str, kid: int) -> Optional[AnswerCandidate]:
        scores = self.records.get((qid, kid))
        if scores is None:
            return None
        return decode_span(scores, self.max_span_len, knowledge_id=kid)

    def get_forced(self, qid: str, kid: int) -> Optional[AnswerCandidate]:
        scores = self.records.get((qid, kid))
        if scores is None:
            return None
        return decode_forced_span(scores, self.max_span_len, knowledge_id=kid)


class CandidateFileSource:
    """Precomputed candidates from {"qid","kid","answer","score"} records
    (the interface an external classification reader emits through)."""

    def __init__(self, records: Dict[Tuple[str, int], AnswerCandidate]):
        self.records = records

    @classmethod
    def from_file(cls, path) -> "CandidateFileSource":
        records = {}
        for lineno, obj in read_jsonl(path):
            for key in ("qid", "kid", "answer", "score"):
                if key not in obj:
                    raise JsonlError(f"{path}: line {lineno} missing {key}")
            kid = int(obj["kid"])
            records[(str(obj["qid"]), kid)] = AnswerCandidate(
                text=str(obj["answer"]), score=float(obj["score"]), knowledge_id=kid
            )
        return cls(records)

    def get(self, qid: str, kid: int) -> Optional[AnswerCandidate]:
        return self.records.get((qid, kid))

    def get_forced(self, qid: str, kid: int) -> Optional[AnswerCandidate]:
        return None


def read_pipeline(retrieval: RetrievalResult, candidate_source, strategy: str, k: int) -> str:
    """Answer one question: candidates for the top-k hits, then aggregation.

    If every candidate is unanswerable the sources that can re-decode without
    the sentinel provide a relaxed pass; otherwise the question is an error.
    """
    if k < 1:
        raise ReaderError("k must be >= 1")
    qid = retrieval.query_id
    top = retrieval.hits[:k]
    candidates = [c for c in (candidate_source.get(qid, kid) for kid, _ in top) if c is not None]
    if not candidates:
        raise ReaderError(f"no candidates for question {qid!r}")
    if all(c.is_unanswerable for c in candidates):
        relaxed = [c for c in (candidate_source.get_forced(qid, kid) for kid, _ in top) if c is not None]
        if not relaxed:
            raise ReaderError(f"all candidates unanswerable for question {qid!r}")
        candidates = relaxed
    return aggregate(candidates, strategy)
