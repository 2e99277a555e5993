"""Embedding and entailment backends.

The default backends are deterministic and dependency-free so the provider
runs anywhere; transformer-backed variants load lazily and need the `models`
extra plus local weights. Which model sits behind the protocol is
configuration: the engine only sees vectors and scores.
"""
from __future__ import annotations

import difflib
import hashlib
import math
import re
import struct
from typing import List

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _tokens(text: str) -> List[str]:
    return _TOKEN_RE.findall(text.lower())


class HashEmbedder:
    """Bag-of-tokens embedding over hash-derived unit directions.

    Each token deterministically maps to a pseudo-random direction (SHA-256
    expanded to floats); a text embeds as the L2-normalized sum. Identical
    text gives an identical vector in any process on any platform.
    """

    name = "hash"

    def __init__(self, dim: int = 256):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self._directions = {}

    def _direction(self, token: str) -> List[float]:
        cached = self._directions.get(token)
        if cached is not None:
            return cached
        values: List[float] = []
        counter = 0
        while len(values) < self.dim:
            digest = hashlib.sha256(f"{token}\x00{counter}".encode("utf-8")).digest()
            for offset in range(0, 32, 8):
                if len(values) == self.dim:
                    break
                (raw,) = struct.unpack_from("<Q", digest, offset)
                values.append(raw / 2**64 * 2.0 - 1.0)
            counter += 1
        norm = math.sqrt(sum(v * v for v in values)) or 1.0
        direction = [v / norm for v in values]
        self._directions[token] = direction
        return direction

    def embed(self, text: str) -> List[float]:
        acc = [0.0] * self.dim
        for token in _tokens(text):
            direction = self._direction(token)
            for i, v in enumerate(direction):
                acc[i] += v
        norm = math.sqrt(sum(v * v for v in acc))
        if norm == 0.0:
            return acc
        return [v / norm for v in acc]


class LexicalEntailer:
    """Surface-similarity entailment score in [0, 1].

    Each hypothesis token is credited with its best match among premise
    tokens (1.0 on equality, character-ratio similarity otherwise); the score
    is the mean credit. Identical sentences score 1.0, near-misses such as a
    plural/singular swap stay well above 0.5.
    """

    name = "lexical"

    def score(self, premise: str, hypothesis: str) -> float:
        if premise == hypothesis:
            return 1.0
        premise_tokens = _tokens(premise)
        hypothesis_tokens = _tokens(hypothesis)
        if not hypothesis_tokens or not premise_tokens:
            return 0.0
        total = 0.0
        for h in hypothesis_tokens:
            best = 0.0
            for p in premise_tokens:
                if p == h:
                    best = 1.0
                    break
                ratio = difflib.SequenceMatcher(None, p, h).ratio()
                if ratio > best:
                    best = ratio
            total += best
        value = total / len(hypothesis_tokens)
        return min(max(value, 0.0), 1.0)


class SentenceTransformerEmbedder:
    """sentence-transformers encoder behind the same interface (needs the
    `models` extra and locally available weights)."""

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise RuntimeError("sentence-transformers is not installed (pip install 'snippetqa-provider[models]')") from exc
        self.name = f"st:{model_name}"
        self._model = SentenceTransformer(model_name)
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def embed(self, text: str) -> List[float]:
        vector = self._model.encode([text], convert_to_numpy=True, normalize_embeddings=False)[0]
        return [float(x) for x in vector]


class CrossEncoderEntailer:
    """NLI cross-encoder scored as the softmax probability of the entailment
    label (needs the `models` extra and locally available weights)."""

    def __init__(self, model_name: str):
        try:
            import torch
            from transformers import AutoModelForSequenceClassification, AutoTokenizer
        except ImportError as exc:
            raise RuntimeError("transformers/torch are not installed (pip install 'snippetqa-provider[models]')") from exc
        self.name = f"hf:{model_name}"
        self._torch = torch
        self._tokenizer = AutoTokenizer.from_pretrained(model_name)
        self._model = AutoModelForSequenceClassification.from_pretrained(model_name)
        self._model.eval()
        labels = {v.lower(): int(k) for k, v in self._model.config.id2label.items()}
        self._entail_index = labels.get("entailment", len(labels) - 1)

    def score(self, premise: str, hypothesis: str) -> float:
        inputs = self._tokenizer(premise, hypothesis, return_tensors="pt", truncation=True)
        with self._torch.no_grad():
            logits = self._model(**inputs).logits[0]
        probs = self._torch.softmax(logits, dim=-1)
        return float(probs[self._entail_index])


def make_embedder(spec: str, dim: int):
    """"none" | "hash" | "st:<model-name>"."""
    if spec == "none":
        return None
    if spec == "hash":
        return HashEmbedder(dim=dim)
    if spec.startswith("st:"):
        return SentenceTransformerEmbedder(spec[3:])
    raise ValueError(f"unknown embedding backend {spec!r}")


def make_entailer(spec: str):
    """"none" | "lexical" | "hf:<model-name>"."""
    if spec == "none":
        return None
    if spec == "lexical":
        return LexicalEntailer()
    if spec.startswith("hf:"):
        return CrossEncoderEntailer(spec[3:])
    raise ValueError(f"unknown entailment backend {spec!r}")
