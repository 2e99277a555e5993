#!/usr/bin/env python3
"""Dense retrieval by exact inner product, the weak-supervision labeling rule,
and the in-batch-negative NLL objective used to train dual encoders.

Encoders live behind the provider protocol; here toy vectors stand in so the
math is visible end to end.
"""
import numpy as np

from snippetqa.corpus import Corpus, KnowledgeEntry
from snippetqa.metrics import QAInstance
from snippetqa.retriever import (
    DenseIndex,
    build_training_pairs,
    dense_search,
    group_into_batches,
    in_batch_nll,
    label_relevance,
)


def toy_corpus() -> Corpus:
    texts = [
        "the cat sleeps on the warm windowsill every afternoon",
        "a hammer drives nails into wooden boards",
        "nothing in this sentence answers either question",
    ]
    return Corpus(tuple(KnowledgeEntry(i, t, "", ("", "")) for i, t in enumerate(texts)))

# --- exact top-k by inner product -------------------------------------------
rng = np.random.default_rng(0)
vectors = rng.normal(size=(100, 16)).astype(np.float32)
index = DenseIndex(ids=np.arange(100), vectors=vectors)

query = vectors[42] + 0.01 * rng.normal(size=16).astype(np.float32)
result = dense_search(index, query, k=5)
print("top-5 by inner product (id 42 should lead):")
for kid, score in result.hits:
    print(f"  id={kid:3d} score={score:.3f}")

# --- weak supervision --------------------------------------------------------
# Without gold relevance labels, any knowledge containing a gold answer is
# treated as relevant (token-boundary matching).
print("\nlabel_relevance examples:")
print("  fire hydrant in text ->", label_relevance(["fire hydrant"], "a fire hydrant stores water"))
print("  'cat' vs 'concatenate' ->", label_relevance(["cat"], "concatenate strings"))

corpus = toy_corpus()
instances = [
    QAInstance("q0", "what animal is this?", "img0", "a cat photo", (("cat", 10),)),
    QAInstance("q1", "what tool is this?", "img1", "a tool photo", (("hammer", 10),)),
]
pairs, dropped = build_training_pairs(instances, corpus)
print(f"\ntraining pairs: {len(pairs)} (instances without relevant knowledge: {dropped})")
for batch in group_into_batches(pairs, batch_size=2):
    for pair in batch:
        print(f"  positive={pair.positive_id} negatives={pair.negative_ids} <- {pair.query.question!r}")

# --- the contrastive objective ----------------------------------------------
# Each query's own context is its positive; the other contexts in the batch
# are negatives. The loss is the mean NLL of the positives under a row-wise
# softmax over inner products.
B, d = 4, 8
q = rng.normal(size=(B, d))
c = rng.normal(size=(B, d))
loss, grad_q, grad_c = in_batch_nll(q, c)
print(f"\nin-batch NLL: loss={loss:.4f}, |grad_q|={np.linalg.norm(grad_q):.4f}")

# One gradient-descent step reduces the loss:
lr = 0.5
loss_after, _, _ = in_batch_nll(q - lr * grad_q, c - lr * grad_c)
print(f"after one step: {loss_after:.4f} (was {loss:.4f})")

# Pulling q_i toward c_i drives the loss to zero:
aligned = 10.0 * np.eye(4)
print("well-separated batch loss:", in_batch_nll(aligned, aligned)[0])
