"""Shared text primitives: word counting, search tokenization, answer normalization.

Every component that counts words, indexes text, or compares answers goes
through this module, so there is exactly one definition of each notion.
"""
from __future__ import annotations

import re
import unicodedata
from typing import List, Sequence, Tuple

# Search tokens are maximal runs of letters/digits; everything else
# (whitespace, punctuation, symbols, underscores) is a boundary.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def words(text: str) -> List[str]:
    """Split on Unicode whitespace, punctuation left attached."""
    return text.split()


def word_count(text: str) -> int:
    return len(text.split())


def tokenize(text: str) -> List[str]:
    """Lowercased search tokens; no stemming, no stopword removal."""
    return _TOKEN_RE.findall(text.lower())


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_edge_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def normalize_token(token: str) -> str:
    """Lowercase and strip punctuation at the token edges (interior kept)."""
    return _strip_edge_punct(token.lower())


def normalize_tokens(text: str) -> List[str]:
    """Whitespace-split, normalize each token, drop tokens that vanish."""
    out = []
    for tok in text.split():
        norm = normalize_token(tok)
        if norm:
            out.append(norm)
    return out


def normalize_answer(text: str) -> str:
    """Canonical form used wherever two answers are compared for equality."""
    return " ".join(normalize_tokens(text))


def contains_answer(answer: str, text: str) -> bool:
    """True iff the normalized answer occurs in the text at token boundaries.

    "cat" does not match "concatenate"; "fire hydrant" matches
    "...a fire hydrant stores..." as a contiguous token run.
    """
    needle = normalize_tokens(answer)
    if not needle:
        return False
    hay = normalize_tokens(text)
    return _find_subsequence(hay, needle) >= 0


def substring_match(answer: str, text: str) -> bool:
    """Relaxed containment: normalized answer as a plain substring."""
    needle = normalize_answer(answer)
    return bool(needle) and needle in normalize_answer(text)


def find_answer_spans(tokens: Sequence[str], answer: str) -> List[Tuple[int, int]]:
    """All (start, end) inclusive index pairs where the normalized answer
    occurs in the given token sequence. Positions are preserved: tokens that
    normalize to nothing (pure punctuation) never match."""
    needle = normalize_tokens(answer)
    if not needle:
        return []
    hay = [normalize_token(t) for t in tokens]
    n, m = len(hay), len(needle)
    spans = []
    for s in range(n - m + 1):
        if hay[s : s + m] == needle:
            spans.append((s, s + m - 1))
    return spans


def _find_subsequence(hay: List[str], needle: List[str]) -> int:
    n, m = len(hay), len(needle)
    for s in range(n - m + 1):
        if hay[s : s + m] == needle:
            return s
    return -1
