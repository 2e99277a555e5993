#!/usr/bin/env python3
"""Open-domain answer evaluation: questions become slotted statements, an
entailment provider compares gold-filled and prediction-filled versions, and
near-miss answers ("girls" for "girl") earn partial credit.

A real provider is an NLI model behind the wire protocol; this demo uses a
simple string-similarity stand-in so it runs anywhere.
"""
import difflib

from snippetqa.metrics import QAInstance
from snippetqa.odeval import (
    assemble,
    evaluate_open,
    ground_question,
    mean_entailment,
    open_score,
)

# Grounding: first-match-wins over an ordered rule list.
for question in [
    "What is this type of blanket called?",
    "Who invented this device?",
    "Why is the cow going to the water?",
    "Is this bathroom high or low end?",
    "Name the model of train shown in this picture?",
]:
    outcome = ground_question(question)
    print(f"{question!r}\n  -> {outcome!r}")

# Assembling maps every gold answer to the question's statements.
statement = ground_question("Who is in this room?")
mapping = assemble([statement], ["girl", "woman"])
print("\nassembled:", {a: [s.template for s in stmts] for a, stmts in mapping.items()})


def similarity_provider(premise: str, hypothesis: str) -> float:
    """Toy stand-in for a sentence entailment model."""
    return difflib.SequenceMatcher(None, premise, hypothesis).ratio()


score = mean_entailment("girl", "girls", [statement], similarity_provider)
print(f"\nmean entailment girl->girls: {score:.3f}")

# Full per-question scoring: the best-entailed gold answer's score is
# credited, scaled by that entailment; nothing below the 0.5 threshold.
instance = QAInstance("q0", "Who is in this room?", "img", "", (("girl", 10),))
record = open_score(instance, "girls", similarity_provider)
print(f"prediction 'girls': open score {record.score:.3f} (exact match: {record.exact_match})")

record = open_score(instance, "girl", similarity_provider)
print(f"prediction 'girl':  open score {record.score:.3f} (exact match: {record.exact_match})")

# Corpus-level evaluation reports coverage and skip counts alongside the mean.
instances = [
    instance,
    QAInstance("q1", "How many zebras are in the photo?", "", "", (("two", 10),)),   # numeric -> skipped
    QAInstance("q2", "Is this bathroom high or low end?", "", "", (("high", 10),)),  # choice -> skipped
]
report = evaluate_open({"q0": "girls", "q1": "two", "q2": "high"}, instances, similarity_provider)
print(
    f"\nopen accuracy {report.accuracy:.3f} | coverage {report.coverage:.0%} | "
    f"numeric skipped {report.n_numeric} | choice skipped {report.n_choice}"
)
