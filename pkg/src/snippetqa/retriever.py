"""Knowledge retrieval: Okapi BM25 over an inverted index, exact inner-product
search over dense vectors, weak-supervision pair construction, and the
in-batch-negative NLL objective with analytic gradients.

Both search paths rank the full corpus (no approximation) and break score
ties by ascending knowledge id, so results are deterministic and directly
checkable against brute-force oracles.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .corpus import Corpus
from .jsonio import JsonlError, read_jsonl
from .text import contains_answer, substring_match, tokenize

EMBEDDING_MAGIC = b"OKEM"
EMBEDDING_VERSION = 1


@dataclass(frozen=True)
class Query:
    question: str
    caption: str = ""
    answers: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.question.strip():
            raise ValueError("query question must be nonempty")

    @property
    def text(self) -> str:
        return build_query_text(self.question, self.caption)


@dataclass(frozen=True)
class RetrievalResult:
    """Ranked hits for one query: (knowledge id, score), scores non-increasing."""

    query_id: str
    hits: Tuple[Tuple[int, float], ...]

    def ids(self) -> List[int]:
        return [kid for kid, _ in self.hits]

    def top(self, k: int) -> "RetrievalResult":
        return RetrievalResult(self.query_id, self.hits[:k])


@dataclass(frozen=True)
class TrainingPair:
    """A weakly-labeled (query, positive knowledge) pair. In-batch negatives
    are the other pairs' positives once pairs are grouped into batches."""

    query: Query
    positive_id: int
    negative_ids: Tuple[int, ...] = ()


def build_query_text(question: str, caption: str) -> str:
    """Question and caption joined by a single space; caption may be empty."""
    if not caption:
        return question
    return question + " " + caption


class Bm25Index:
    """Inverted index with Okapi BM25 scoring.

    score(q, d) = sum over query tokens t of
        idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(d) / avgdl))
    with idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1).

    Scoring is plain float arithmetic in query-token order, so an independent
    per-document evaluation of the same formula reproduces scores bit for bit.
    """

    def __init__(self, doc_ids: Sequence[int], doc_tokens: Sequence[Sequence[str]], k1: float = 1.2, b: float = 0.75):
        if k1 < 0 or not 0 <= b <= 1:
            raise ValueError(f"invalid BM25 parameters k1={k1} b={b}")
        self.k1 = float(k1)
        self.b = float(b)
        self.doc_ids = list(doc_ids)
        self.doc_lens = [len(toks) for toks in doc_tokens]
        self.total_len = sum(self.doc_lens)
        self.postings: Dict[str, List[Tuple[int, int]]] = {}
        for pos, toks in enumerate(doc_tokens):
            counts: Dict[str, int] = {}
            for tok in toks:
                counts[tok] = counts.get(tok, 0) + 1
            for tok in sorted(counts):
                self.postings.setdefault(tok, []).append((pos, counts[tok]))

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def avg_len(self) -> float:
        return self.total_len / self.n_docs if self.n_docs else 0.0

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        df = self.df(term)
        return math.log((self.n_docs - df + 0.5) / (df + 0.5) + 1.0)

    def scores(self, query_text: str) -> List[float]:
        """BM25 score of every document, in corpus position order."""
        scores = [0.0] * self.n_docs
        if not self.n_docs:
            return scores
        avgdl = self.avg_len
        for tok in tokenize(query_text):
            postings = self.postings.get(tok)
            if not postings:
                continue
            idf = self.idf(tok)
            for pos, tf in postings:
                denom = tf + self.k1 * (1.0 - self.b + self.b * self.doc_lens[pos] / avgdl)
                scores[pos] += idf * tf * (self.k1 + 1.0) / denom
        return scores

    def search(self, query_text: str, k: int, query_id: str = "") -> RetrievalResult:
        if k < 1:
            raise ValueError("k must be >= 1")
        scores = self.scores(query_text)
        order = sorted(range(self.n_docs), key=lambda pos: (-scores[pos], self.doc_ids[pos]))
        hits = tuple((self.doc_ids[pos], scores[pos]) for pos in order[:k])
        return RetrievalResult(query_id=query_id, hits=hits)

    def save(self, path) -> None:
        payload = {
            "k1": self.k1,
            "b": self.b,
            "doc_ids": self.doc_ids,
            "doc_lens": self.doc_lens,
            "postings": {tok: plist for tok, plist in sorted(self.postings.items())},
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Bm25Index":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        index = cls.__new__(cls)
        index.k1 = float(payload["k1"])
        index.b = float(payload["b"])
        index.doc_ids = [int(i) for i in payload["doc_ids"]]
        index.doc_lens = [int(n) for n in payload["doc_lens"]]
        index.total_len = sum(index.doc_lens)
        index.postings = {tok: [(int(p), int(tf)) for p, tf in plist] for tok, plist in payload["postings"].items()}
        return index


def bm25_build(corpus: Corpus, k1: float = 1.2, b: float = 0.75) -> Bm25Index:
    return Bm25Index(
        doc_ids=[e.id for e in corpus],
        doc_tokens=[tokenize(e.text) for e in corpus],
        k1=k1,
        b=b,
    )


def bm25_search(index: Bm25Index, query_text: str, k: int, query_id: str = "") -> RetrievalResult:
    return index.search(query_text, k, query_id=query_id)


class DenseIndex:
    """Exhaustive inner-product index over float32 vectors keyed by id."""

    def __init__(self, ids: Sequence[int], vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D array")
        if len(ids) != vectors.shape[0]:
            raise ValueError("ids and vectors disagree on count")
        self.ids = np.asarray(ids, dtype=np.int64)
        if len(np.unique(self.ids)) != len(self.ids):
            raise ValueError("duplicate ids in dense index")
        self.vectors = vectors

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def validate_against(self, corpus: Corpus) -> None:
        if sorted(self.ids.tolist()) != [e.id for e in corpus]:
            raise ValueError("dense index ids do not match the corpus")

    def search(self, query_vector, k: int, query_id: str = "") -> RetrievalResult:
        if k < 1:
            raise ValueError("k must be >= 1")
        q = np.asarray(query_vector, dtype=np.float32)
        if q.shape != (self.dim,):
            raise ValueError(f"query vector has dimension {q.shape}, index expects ({self.dim},)")
        if len(self) == 0:
            return RetrievalResult(query_id=query_id, hits=())
        scores = self.vectors @ q
        # primary key: score descending; secondary: id ascending
        order = np.lexsort((self.ids, -scores.astype(np.float64)))[:k]
        hits = tuple((int(self.ids[pos]), float(scores[pos])) for pos in order)
        return RetrievalResult(query_id=query_id, hits=hits)


def dense_search(index: DenseIndex, query_vector, k: int, query_id: str = "") -> RetrievalResult:
    return index.search(query_vector, k, query_id=query_id)


def merge_shard_results(results: Sequence[RetrievalResult], k: int) -> RetrievalResult:
    """Combine per-shard top-k lists into one: score descending, ties by
    ascending id. Shards must not share knowledge ids. Equals a single search
    over the union when every shard contributed at least k hits (or all it
    had)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    merged = sorted(
        (hit for result in results for hit in result.hits),
        key=lambda hit: (-hit[1], hit[0]),
    )
    query_ids = {result.query_id for result in results}
    if len(query_ids) > 1:
        raise ValueError("cannot merge results for different queries")
    query_id = next(iter(query_ids)) if query_ids else ""
    return RetrievalResult(query_id=query_id, hits=tuple(merged[:k]))


def label_relevance(answers: Sequence[str], knowledge_text: str, substring: bool = False) -> bool:
    """Weak relevance: the knowledge contains any of the answers.

    Token-boundary containment by default; `substring` switches to plain
    normalized substring matching for comparison runs.
    """
    match = substring_match if substring else contains_answer
    return any(match(answer, knowledge_text) for answer in answers)


def build_training_pairs(instances, corpus: Corpus, substring: bool = False) -> Tuple[List[TrainingPair], int]:
    """One pair per (instance, relevant knowledge). Instances with no relevant
    knowledge are dropped; the count of dropped instances is returned."""
    pairs: List[TrainingPair] = []
    dropped = 0
    for inst in instances:
        answers = [text for text, _ in inst.answers]
        query = Query(question=inst.question, caption=inst.caption, answers=tuple(answers))
        found = False
        for entry in corpus:
            if label_relevance(answers, entry.text, substring=substring):
                pairs.append(TrainingPair(query=query, positive_id=entry.id))
                found = True
        if not found:
            dropped += 1
    return pairs, dropped


def group_into_batches(pairs: Sequence[TrainingPair], batch_size: int) -> List[List[TrainingPair]]:
    """Chunk pairs into batches, filling each pair's in-batch negatives with
    the other pairs' positives."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    batches = []
    for start in range(0, len(pairs), batch_size):
        chunk = pairs[start : start + batch_size]
        positives = [p.positive_id for p in chunk]
        batches.append(
            [
                TrainingPair(
                    query=p.query,
                    positive_id=p.positive_id,
                    negative_ids=tuple(pid for j, pid in enumerate(positives) if j != i),
                )
                for i, p in enumerate(chunk)
            ]
        )
    return batches


def in_batch_nll(query_vectors, context_vectors) -> Tuple[float, np.ndarray, np.ndarray]:
    """Negative log-likelihood of each query's own context against the batch.

    With S[i, j] = q_i . c_j the loss is -(1/B) * sum_i log softmax_j(S[i])[i];
    context j serves as the positive for query j and as an in-batch negative
    for every other query. Returns (loss, dL/dQ, dL/dC), both gradients exact.
    """
    q = np.asarray(query_vectors, dtype=np.float64)
    c = np.asarray(context_vectors, dtype=np.float64)
    if q.ndim != 2 or c.ndim != 2 or q.shape != c.shape:
        raise ValueError(f"query/context batches must share a BxD shape, got {q.shape} and {c.shape}")
    b = q.shape[0]
    scores = q @ c.T
    shift = scores.max(axis=1, keepdims=True)
    logsumexp = shift[:, 0] + np.log(np.exp(scores - shift).sum(axis=1))
    loss = float(-(np.trace(scores) - logsumexp.sum()) / b) + 0.0  # +0.0 folds -0.0
    probs = np.exp(scores - logsumexp[:, None])
    delta = (probs - np.eye(b)) / b
    grad_q = delta @ c
    grad_c = delta.T @ q
    return loss, grad_q, grad_c


def save_embeddings_binary(path, ids: Sequence[int], vectors: np.ndarray) -> None:
    """Binary layout, little-endian: "OKEM", u32 version, u32 dim, u64 count,
    then per record a u64 id followed by dim float32 values."""
    vectors = np.asarray(vectors, dtype="<f4")
    if vectors.ndim != 2:
        raise ValueError("vectors must be 2-D")
    count, dim = vectors.shape
    if len(ids) != count:
        raise ValueError("ids and vectors disagree on count")
    record = np.dtype([("id", "<u8"), ("vec", "<f4", (dim,))])
    table = np.zeros(count, dtype=record)
    table["id"] = np.asarray(ids, dtype="<u8")
    table["vec"] = vectors
    with open(path, "wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<IIQ", EMBEDDING_VERSION, dim, count))
        fh.write(table.tobytes())


def save_embeddings_jsonl(path, ids: Sequence[int], vectors: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for kid, vec in zip(ids, np.asarray(vectors, dtype=np.float32)):
            fh.write(json.dumps({"id": int(kid), "vec": [float(x) for x in vec]}) + "\n")


def load_embeddings(path) -> Tuple[np.ndarray, np.ndarray]:
    """Read either embedding format (binary sniffed by magic, else JSONL).

    Returns (ids int64, vectors float32 N x d).
    """
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == EMBEDDING_MAGIC:
        return _load_embeddings_binary(path)
    return _load_embeddings_jsonl(path)


def _load_embeddings_binary(path) -> Tuple[np.ndarray, np.ndarray]:
    with open(path, "rb") as fh:
        fh.read(4)
        header = fh.read(16)
        if len(header) != 16:
            raise ValueError(f"{path}: truncated embedding header")
        version, dim, count = struct.unpack("<IIQ", header)
        if version != EMBEDDING_VERSION:
            raise ValueError(f"{path}: unsupported embedding file version {version}")
        record = np.dtype([("id", "<u8"), ("vec", "<f4", (dim,))])
        table = np.frombuffer(fh.read(), dtype=record)
    if len(table) != count:
        raise ValueError(f"{path}: expected {count} records, found {len(table)}")
    return table["id"].astype(np.int64), table["vec"].astype(np.float32)


def _load_embeddings_jsonl(path) -> Tuple[np.ndarray, np.ndarray]:
    ids: List[int] = []
    rows: List[List[float]] = []
    dim: Optional[int] = None
    for lineno, obj in read_jsonl(path):
        if "id" not in obj or "vec" not in obj:
            raise JsonlError(f"{path}: line {lineno} missing id/vec")
        vec = obj["vec"]
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise JsonlError(f"{path}: line {lineno} has dimension {len(vec)}, expected {dim}")
        ids.append(int(obj["id"]))
        rows.append([float(x) for x in vec])
    return np.asarray(ids, dtype=np.int64), np.asarray(rows, dtype=np.float32)


def save_hits(path, results: Iterable[RetrievalResult], sig: int = 6) -> None:
    """Retrieval output JSONL: {"qid", "hits": [{"id", "score"}, ...]}."""
    with open(path, "w", encoding="utf-8") as fh:
        for result in results:
            rec = {
                "qid": result.query_id,
                "hits": [{"id": kid, "score": float(f"{score:.{sig}g}")} for kid, score in result.hits],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_hits(path) -> Dict[str, RetrievalResult]:
    out: Dict[str, RetrievalResult] = {}
    for lineno, obj in read_jsonl(path):
        if "qid" not in obj or "hits" not in obj:
            raise JsonlError(f"{path}: line {lineno} missing qid/hits")
        hits = tuple((int(h["id"]), float(h["score"])) for h in obj["hits"])
        out[str(obj["qid"])] = RetrievalResult(query_id=str(obj["qid"]), hits=hits)
    return out


def load_queries(path) -> List[Tuple[str, Query]]:
    """Query file lines: {"qid", "question", "caption"}; yields (qid, Query)
    pairs since Query itself is id-free."""
    queries = []
    for lineno, obj in read_jsonl(path):
        if "qid" not in obj or "question" not in obj:
            raise JsonlError(f"{path}: line {lineno} missing qid/question")
        queries.append((str(obj["qid"]), Query(question=str(obj["question"]), caption=str(obj.get("caption", "")))))
    return queries
