#!/usr/bin/env python3
"""Term-based retrieval with Okapi BM25 over the knowledge corpus.

The query is the question concatenated with the image caption, so image
content reaches the text-only ranker through the caption.
"""
from pathlib import Path

from snippetqa.corpus import ingest_search_results
from snippetqa.retriever import bm25_build, bm25_search, build_query_text

DATA = Path(__file__).parent / "data"

corpus, _ = ingest_search_results((DATA / "search_results.jsonl").read_bytes())
print(f"corpus: {len(corpus)} knowledge entries")

index = bm25_build(corpus, k1=1.2, b=0.75)
print(f"index: {index.n_docs} documents, {len(index.postings)} terms, avg length {index.avg_len:.2f}")

question = "What is the natural habitat of these animals?"
caption = "zebras standing in tall grass"
query = build_query_text(question, caption)
print(f"\nquery: {query!r}")

result = bm25_search(index, query, k=3)
for rank, (kid, score) in enumerate(result.hits, start=1):
    print(f"  #{rank} score={score:.4f} id={kid}: {corpus.get(kid).text[:70]}")

# The b parameter controls length normalization; b=0 ignores document length
# entirely. Ties always break toward the smaller knowledge id.
for b in (0.0, 0.75, 1.0):
    flat = bm25_build(corpus, k1=1.2, b=b)
    ids = bm25_search(flat, query, k=3).ids()
    print(f"b={b}: top ids {ids}")

# A query with no corpus terms ranks everything at zero, ids ascending.
print("\nno-overlap query:", bm25_search(index, "xylophone quartet", k=3).hits)
