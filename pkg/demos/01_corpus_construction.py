#!/usr/bin/env python3
"""Corpus construction walkthrough: from raw search results to a clean,
deduplicated knowledge corpus.

Run from the repository root:  python3 demos/01_corpus_construction.py
"""
from pathlib import Path
from tempfile import TemporaryDirectory

from snippetqa.corpus import (
    clean_corpus,
    filter_knowledge,
    ingest_search_results,
    load_corpus,
    prepare_queries,
    save_corpus,
)

DATA = Path(__file__).parent / "data"

# Step 1: query preparation. Each (question, answer) pair becomes one search
# query; duplicate answers collapse.
question = "What is the natural habitat of these animals?"
answers = ["savannah", "grassland", "plains", "savannah"]
queries = prepare_queries(question, answers)
print(f"{len(answers)} answers -> {len(queries)} queries:")
for q, a in queries:
    print(f"  {q!r} + {a!r}")

# Steps 2-3 (the actual web search) happen offline; the engine ingests the
# saved result file. Snippets shorter than 10 words or longer than 300 are
# dropped, non-English spans are stripped, duplicates are removed.
raw = (DATA / "search_results.jsonl").read_bytes()
corpus, stats = ingest_search_results(raw)
print(f"\ningested {stats.results} result records, {stats.items} snippets")
print(f"rejected: {stats.rejected}, duplicates removed: {stats.duplicates_removed}")
print(f"corpus size: {len(corpus)}")
for entry in corpus:
    print(f"  [{entry.id}] {entry.text[:60]}...  (from {entry.source_url})")

# The word-count filter on its own:
print("\nfilter decisions:")
for text in ["nine words is just short of the lower bound", "exactly ten words passes the knowledge length filter just fine"]:
    decision = filter_knowledge(text)
    print(f"  {decision.kept=} {decision.reason=} <- {text!r}")

# Blocklist cleaning: entries containing listed bad words, boilerplate
# markers, or curly brackets are dropped and ids are renumbered.
cleaned, removed = clean_corpus(corpus, bad_words=["offensiveterm"])
print(f"\ncleaning removed {removed} entries (the lorem-ipsum snippet)")

# Corpora round-trip exactly through JSON Lines.
with TemporaryDirectory() as tmp:
    path = Path(tmp) / "corpus.jsonl"
    save_corpus(cleaned, path)
    assert load_corpus(path) == cleaned
    print(f"saved and reloaded {len(cleaned)} entries byte-exactly")
