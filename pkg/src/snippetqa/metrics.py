"""Retrieval and answer-accuracy metrics.

Retrieval precision/recall here are answer-containment proxies, not the
classical definitions: a retrieved knowledge counts as relevant iff it
contains any annotated answer. Answer accuracy is the soft score
min(matching annotation count / 3, 1) under the doubled-count convention
(five annotations counted twice, ten total).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .corpus import Corpus
from .jsonio import JsonlError, read_jsonl
from .retriever import RetrievalResult, label_relevance
from .text import normalize_answer


@dataclass(frozen=True)
class QAInstance:
    """A question with its gold answer multiset (per-answer human counts)."""

    qid: str
    question: str
    image_id: str
    caption: str
    answers: Tuple[Tuple[str, int], ...]

    def answer_texts(self) -> List[str]:
        return [text for text, _ in self.answers]

    def total_count(self) -> int:
        return sum(count for _, count in self.answers)


@dataclass(frozen=True)
class RetrievalEvalReport:
    k: int
    mean_precision: float
    mean_recall: float
    per_question: Tuple[Tuple[str, float, float], ...]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "mean_precision": self.mean_precision,
            "mean_recall": self.mean_recall,
            "per_question": [
                {"qid": qid, "precision": p, "recall": r} for qid, p, r in self.per_question
            ],
        }


@dataclass(frozen=True)
class AnswerEvalReport:
    accuracy: float
    n_questions: int
    n_missing: int
    per_question: Tuple[Tuple[str, float], ...]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "n_questions": self.n_questions,
            "n_missing": self.n_missing,
            "per_question": [{"qid": qid, "score": s} for qid, s in self.per_question],
        }


def load_instances(path) -> List[QAInstance]:
    """Instance JSONL: {"qid","question","image","caption","answers":[{"text",
    "count"}...]}. A record with "raw_counts": true carries the five raw
    annotations; its counts are doubled on load. Counts must total ten."""
    instances = []
    for lineno, obj in read_jsonl(path):
        if "qid" not in obj or "question" not in obj or "answers" not in obj:
            raise JsonlError(f"{path}: line {lineno} missing qid/question/answers")
        multiplier = 2 if obj.get("raw_counts") else 1
        answers = []
        for ans in obj["answers"]:
            text = str(ans["text"])
            if not text.strip():
                raise JsonlError(f"{path}: line {lineno} has an empty answer text")
            answers.append((text, int(ans["count"]) * multiplier))
        total = sum(c for _, c in answers)
        if total != 10:
            raise JsonlError(
                f"{path}: line {lineno} ({obj['qid']}): answer counts total {total}, expected 10"
            )
        instances.append(
            QAInstance(
                qid=str(obj["qid"]),
                question=str(obj["question"]),
                image_id=str(obj.get("image", "")),
                caption=str(obj.get("caption", "")),
                answers=tuple(answers),
            )
        )
    return instances


def load_predictions(path) -> Dict[str, str]:
    """Prediction JSONL: {"qid", "answer"}."""
    preds: Dict[str, str] = {}
    for lineno, obj in read_jsonl(path):
        if "qid" not in obj or "answer" not in obj:
            raise JsonlError(f"{path}: line {lineno} missing qid/answer")
        preds[str(obj["qid"])] = str(obj["answer"])
    return preds


def precision_star(answers: Sequence[str], retrieved_texts: Sequence[str], substring: bool = False) -> float:
    """Fraction of retrieved knowledge containing any answer. A knowledge
    containing several answers still contributes exactly 1."""
    k = len(retrieved_texts)
    if k == 0:
        return 0.0
    hits = sum(1 for text in retrieved_texts if label_relevance(answers, text, substring=substring))
    return hits / k


def recall_star(answers: Sequence[str], retrieved_texts: Sequence[str], substring: bool = False) -> float:
    """1.0 iff at least one retrieved knowledge contains any answer, else 0.0."""
    for text in retrieved_texts:
        if label_relevance(answers, text, substring=substring):
            return 1.0
    return 0.0


def vqa_score(prediction: str, instance: QAInstance) -> float:
    """Soft accuracy min(count/3, 1): count is how many of the ten annotations
    equal the prediction after shared normalization."""
    target = normalize_answer(prediction)
    if not target:
        return 0.0
    count = sum(c for text, c in instance.answers if normalize_answer(text) == target)
    return min(count / 3.0, 1.0)


def gold_answer_score(instance: QAInstance, answer: str) -> float:
    """Gold score of one annotated answer, by the same count rule."""
    return vqa_score(answer, instance)


def evaluate_retrieval(
    instances: Sequence[QAInstance],
    hits_by_qid: Dict[str, RetrievalResult],
    corpus: Corpus,
    k: int,
    substring: bool = False,
) -> RetrievalEvalReport:
    """Mean precision/recall at k over all instances; an instance with no
    retrieval line scores zero on both."""
    if k < 1:
        raise ValueError("k must be >= 1")
    per_question = []
    for inst in instances:
        result = hits_by_qid.get(inst.qid)
        texts = [corpus.get(kid).text for kid in result.ids()[:k]] if result else []
        answers = inst.answer_texts()
        per_question.append(
            (inst.qid, precision_star(answers, texts, substring), recall_star(answers, texts, substring))
        )
    n = len(per_question)
    mean_p = sum(p for _, p, _ in per_question) / n if n else 0.0
    mean_r = sum(r for _, _, r in per_question) / n if n else 0.0
    return RetrievalEvalReport(k=k, mean_precision=mean_p, mean_recall=mean_r, per_question=tuple(per_question))


def evaluate_run(predictions: Dict[str, str], instances: Sequence[QAInstance]) -> AnswerEvalReport:
    """Mean soft accuracy over instances; a missing prediction scores zero."""
    per_question = []
    missing = 0
    for inst in instances:
        pred = predictions.get(inst.qid)
        if pred is None:
            missing += 1
            per_question.append((inst.qid, 0.0))
        else:
            per_question.append((inst.qid, vqa_score(pred, inst)))
    n = len(per_question)
    accuracy = sum(s for _, s in per_question) / n if n else 0.0
    return AnswerEvalReport(accuracy=accuracy, n_questions=n, n_missing=missing, per_question=tuple(per_question))
