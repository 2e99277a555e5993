#!/usr/bin/env python3
"""Extractive reading: decoding answer spans from token scores, rejecting
unusable knowledge through the sentinel, and merging per-knowledge candidates
into a final answer.

The scoring model itself is external; the engine consumes its start/end score
matrices. Token position 0 is always the special word "unanswerable".
"""
from snippetqa.reader import (
    HIGHEST_FREQUENCY,
    HIGHEST_SCORE,
    AnswerCandidate,
    SpanScores,
    aggregate,
    decode_span,
    locate_span_targets,
)

# A matrix whose best span is "fire hydrant":
scores = SpanScores(
    tokens=("unanswerable", "a", "fire", "hydrant", "stores", "water"),
    start_scores=(-2.0, 0.1, 4.0, 0.3, 0.0, 0.0),
    end_scores=(-2.0, 0.0, 0.2, 4.5, 0.4, 0.1),
)
candidate = decode_span(scores, max_span_len=10, knowledge_id=3)
print(f"decoded: {candidate.text!r} (p={candidate.score:.3f}, knowledge {candidate.knowledge_id})")

# When position 0 dominates, the knowledge is declared unanswerable:
noisy = SpanScores(
    tokens=("unanswerable", "irrelevant", "snippet"),
    start_scores=(6.0, 0.5, 0.1),
    end_scores=(5.5, 0.2, 0.3),
)
print("noisy knowledge ->", decode_span(noisy, max_span_len=10).text)

# Weak-supervision targets: every occurrence of the answer, or the sentinel
# when the knowledge does not contain it.
tokens = ["the", "fire", "hydrant", "near", "the", "fire", "hydrant"]
target = locate_span_targets(tokens, "fire hydrant", knowledge_id=7)
print(f"\ntarget spans for 'fire hydrant': {target.spans}")
print("absent answer ->", locate_span_targets(tokens, "zebra").answer)

# Aggregation across the top-K knowledge: Highest-Score takes the best single
# candidate, Highest-Frequency the most recurrent normalized answer.
candidates = [
    AnswerCandidate("fire hydrant", 0.55, 0),
    AnswerCandidate("Fire Hydrant", 0.40, 1),
    AnswerCandidate("water tank", 0.70, 2),
]
print("\nHighest-Score   ->", aggregate(candidates, HIGHEST_SCORE))
print("Highest-Frequency ->", aggregate(candidates, HIGHEST_FREQUENCY))
