"""Open-domain answer evaluation.

Questions are rewritten into declarative statements with a single answer slot
"_"; a gold answer fills the slot to form the premise and the prediction to
form the hypothesis, and an entailment provider scores the pair. The
best-entailed gold answer's score is credited when its mean entailment clears
the 0.5 threshold. Predictions that already equal a gold answer bypass
entailment and take that answer's gold score directly (the bypass is flagged
on every record).

The grounding rule list is a reconstruction; coverage is measured and
reported rather than assumed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .metrics import QAInstance, gold_answer_score
from .text import normalize_answer

# entailment provider: (premise, hypothesis) -> score in [0, 1]
EntailmentProvider = Callable[[str, str], float]

ENTAILMENT_THRESHOLD = 0.5

CHOICE_RULE = "choice"

SKIP_UNSUPPORTED = "unsupported_pattern"
SKIP_CHOICE = "choice_question"
SKIP_NUMERIC = "numeric_answer"


class OdEvalError(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundedStatement:
    """Declarative template with exactly one "_" slot for the answer."""

    template: str
    qid: str = ""
    rule: str = ""

    def __post_init__(self):
        if self.template.count("_") != 1:
            raise ValueError(f"template must contain exactly one slot: {self.template!r}")
        if not self.template.replace("_", "").strip():
            raise ValueError("template is empty besides the slot")

    def fill(self, answer: str) -> str:
        return self.template.replace("_", answer)


@dataclass(frozen=True)
class SkippedQuestion:
    qid: str
    reason: str


GroundingOutcome = Union[GroundedStatement, SkippedQuestion]


_BE = r"(?:is|are|was|were)"
_DO = r"(?:do|does|did)"
_AUX = r"(?:is|are|was|were|am|do|does|did|can|could|will|would|should)"

_PARTICIPLES = frozenset(
    "taken given made done seen shown worn held kept built grown known thrown drawn eaten "
    "written driven ridden hidden broken chosen frozen stolen spoken fallen risen born put set".split()
)


def _verbish(token: str) -> bool:
    word = token.strip(".,!?;:'\"").lower()
    if word in _PARTICIPLES:
        return True
    return len(word) > 4 and (word.endswith("ing") or word.endswith("ed"))


def _insert_aux(aux: str, rest: str, fallback: str) -> str:
    """Re-order an inverted clause: the auxiliary moves in front of the first
    verb-like token; with none found it lands before the last token
    ("the sky blue" -> "the sky is blue") or is appended ("the cat" ->
    "the cat is"), per the rule's fallback."""
    tokens = rest.split()
    for i in range(1, len(tokens)):
        if _verbish(tokens[i]):
            return " ".join(tokens[:i] + [aux] + tokens[i:])
    if fallback == "before_last" and len(tokens) >= 2:
        return " ".join(tokens[:-1] + [aux] + tokens[-1:])
    return " ".join(tokens + [aux])


def _rule_what_is_called(question: str) -> Optional[str]:
    m = re.match(r"^what\s+(" + _BE + r")\s+(.+?)\s+called\s*\?$", question, re.IGNORECASE)
    if not m:
        return None
    return f"{m.group(2)} {m.group(1).lower()} called _."


def _rule_what_is(question: str) -> Optional[str]:
    m = re.match(r"^what\s+(" + _BE + r")\s+(.+?)\s*\?$", question, re.IGNORECASE)
    if not m:
        return None
    return f"{m.group(2)} {m.group(1).lower()} _."


def _rule_who(question: str) -> Optional[str]:
    m = re.match(r"^who\s+(.+?)\s*\?$", question, re.IGNORECASE)
    if not m:
        return None
    return f"_ {m.group(1)}."


def _rule_why(question: str) -> Optional[str]:
    m = re.match(r"^why\s+(" + _BE + r")\s+(.+?)\s*\?$", question, re.IGNORECASE)
    if m:
        clause = _insert_aux(m.group(1).lower(), m.group(2), fallback="before_last")
        return f"{clause} because of _."
    m = re.match(r"^why\s+(" + _DO + r")\s+(.+?)\s*\?$", question, re.IGNORECASE)
    if m:
        return f"{m.group(2)} because of _."
    return None


def _rule_where(question: str) -> Optional[str]:
    m = re.match(r"^where\s+(" + _BE + r")\s+(.+?)\s*\?$", question, re.IGNORECASE)
    if m:
        clause = _insert_aux(m.group(1).lower(), m.group(2), fallback="append")
        return f"{clause} _."
    m = re.match(r"^where\s+(" + _DO + r")\s+(.+?)\s*\?$", question, re.IGNORECASE)
    if m:
        return f"{m.group(2)} _."
    return None


def _rule_which(question: str) -> Optional[str]:
    if not question.rstrip().endswith("?"):
        return None
    if not re.search(r"\bwhich\b", question, re.IGNORECASE):
        return None
    body = re.sub(r"\bwhich\b", "_", question, count=1, flags=re.IGNORECASE)
    return body.rstrip().rstrip("?").rstrip() + "."


def _rule_how(question: str) -> Optional[str]:
    if re.search(r"\bhow\s+(?:many|much)\b", question, re.IGNORECASE):
        if not question.rstrip().endswith("?"):
            return None
        body = re.sub(r"\bhow\s+(?:many|much)\b", "_", question, count=1, flags=re.IGNORECASE)
        return body.rstrip().rstrip("?").rstrip() + "."
    m = re.match(r"^how\s+(" + _BE + r")\s+(.+?)\s*\?$", question, re.IGNORECASE)
    if m:
        clause = _insert_aux(m.group(1).lower(), m.group(2), fallback="append")
        return f"{clause} _."
    m = re.match(r"^how\s+(" + _DO + r")\s+(.+?)\s*\?$", question, re.IGNORECASE)
    if m:
        return f"{m.group(2)} by _."
    m = re.match(r"^how\s+(\w+)\s+(" + _BE + r")\s+(.+?)\s*\?$", question, re.IGNORECASE)
    if m:
        return f"{m.group(3)} {m.group(2).lower()} _ {m.group(1).lower()}."
    return None


def _rule_choice(question: str) -> Optional[str]:
    m = re.match(r"^(" + _AUX + r")\s+(.+?)\s*\?$", question, re.IGNORECASE)
    if not m:
        return None
    aux = m.group(1).lower()
    tokens = m.group(2).split()
    or_positions = [i for i, t in enumerate(tokens) if t.lower() == "or"]
    if not or_positions:
        return None
    idx = or_positions[0]
    if idx == 0 or idx == len(tokens) - 1:
        return None
    x_start = idx - 1
    if x_start > 0 and tokens[x_start - 1].lower() in ("a", "an", "the"):
        x_start -= 1
    subject = tokens[:x_start]
    if not subject:
        return None
    head = " ".join(subject)
    if re.fullmatch(_BE + r"|am", aux):
        return f"{head} {aux} _."
    return f"{head} _."


GROUNDING_RULES: Tuple[Tuple[str, Callable[[str], Optional[str]]], ...] = (
    ("what_is_called", _rule_what_is_called),
    ("what_is", _rule_what_is),
    ("who", _rule_who),
    ("why_because_of", _rule_why),
    ("where", _rule_where),
    ("which", _rule_which),
    ("how", _rule_how),
    (CHOICE_RULE, _rule_choice),
)


def ground_question(question: str, qid: str = "") -> GroundingOutcome:
    """First matching rule wins; anything unmatched (including inputs that are
    already declarative) is skipped, never an error."""
    if not question.strip():
        return SkippedQuestion(qid=qid, reason=SKIP_UNSUPPORTED)
    stripped = question.strip()
    for rule_id, rule in GROUNDING_RULES:
        template = rule(stripped)
        if template is not None:
            try:
                return GroundedStatement(template=template, qid=qid, rule=rule_id)
            except ValueError:
                return SkippedQuestion(qid=qid, reason=SKIP_UNSUPPORTED)
    return SkippedQuestion(qid=qid, reason=SKIP_UNSUPPORTED)


def assemble(
    statements: Sequence[GroundedStatement], gold_answers: Sequence[str]
) -> Dict[str, Tuple[GroundedStatement, ...]]:
    """Re-key the question's statements by gold answer: every answer plays the
    same role in every statement, so each maps to all of them."""
    unique = []
    seen = set()
    for answer in gold_answers:
        if answer not in seen:
            seen.add(answer)
            unique.append(answer)
    return {answer: tuple(statements) for answer in unique}


def mean_entailment(
    gold_answer: str,
    prediction: str,
    statements: Sequence[GroundedStatement],
    entail: EntailmentProvider,
) -> float:
    """Mean provider score over the answer's statements; the slot takes the
    gold answer on the premise side and the prediction on the hypothesis side.
    Provider scores are clamped into [0, 1]."""
    if not statements:
        raise OdEvalError(f"no grounded statements for answer {gold_answer!r}")
    total = 0.0
    for statement in statements:
        premise = statement.fill(gold_answer)
        hypothesis = statement.fill(prediction)
        try:
            score = float(entail(premise, hypothesis))
        except Exception as exc:
            raise OdEvalError(f"entailment provider failed on statement {statement.template!r}: {exc}") from exc
        total += min(max(score, 0.0), 1.0)
    return total / len(statements)


_NUMBER_WORDS = frozenset(
    "zero one two three four five six seven eight nine ten eleven twelve thirteen fourteen "
    "fifteen sixteen seventeen eighteen nineteen twenty".split()
)


def is_numeric_answer(answer: str) -> bool:
    text = answer.strip().lower()
    if text in _NUMBER_WORDS:
        return True
    try:
        float(text)
        return True
    except ValueError:
        return False


@dataclass(frozen=True)
class OpenEvalRecord:
    qid: str
    prediction: str
    entailment_by_answer: Tuple[Tuple[str, float], ...]
    chosen_answer: Optional[str]
    score: float
    exact_match: bool = False
    skipped: Optional[str] = None

    def to_dict(self) -> dict:
        out = {
            "qid": self.qid,
            "prediction": self.prediction,
            "score": self.score,
            "exact_match": self.exact_match,
        }
        if self.skipped is not None:
            out["skipped"] = self.skipped
        if self.chosen_answer is not None:
            out["chosen_answer"] = self.chosen_answer
        if self.entailment_by_answer:
            out["entailment"] = {a: s for a, s in self.entailment_by_answer}
        return out


def open_score(
    instance: QAInstance,
    prediction: str,
    entail: EntailmentProvider,
    statement: Optional[GroundingOutcome] = None,
) -> OpenEvalRecord:
    """Score one prediction against an instance's gold answers.

    The gold answer with the highest mean entailment is chosen first; its gold
    score is credited scaled by that entailment, and nothing is credited at or
    below the 0.5 threshold. Choice questions and numeric-answer questions are
    skipped, as are questions no grounding rule covers.
    """
    if statement is None:
        statement = ground_question(instance.question, qid=instance.qid)
    if isinstance(statement, SkippedQuestion):
        return OpenEvalRecord(
            qid=instance.qid, prediction=prediction, entailment_by_answer=(), chosen_answer=None,
            score=0.0, skipped=statement.reason,
        )
    if statement.rule == CHOICE_RULE:
        return OpenEvalRecord(
            qid=instance.qid, prediction=prediction, entailment_by_answer=(), chosen_answer=None,
            score=0.0, skipped=SKIP_CHOICE,
        )
    if any(is_numeric_answer(text) for text, _ in instance.answers):
        return OpenEvalRecord(
            qid=instance.qid, prediction=prediction, entailment_by_answer=(), chosen_answer=None,
            score=0.0, skipped=SKIP_NUMERIC,
        )

    norm_pred = normalize_answer(prediction)
    if not norm_pred:
        return OpenEvalRecord(
            qid=instance.qid, prediction=prediction, entailment_by_answer=(), chosen_answer=None, score=0.0
        )

    exact = [text for text, _ in instance.answers if normalize_answer(text) == norm_pred]
    if exact:
        return OpenEvalRecord(
            qid=instance.qid,
            prediction=prediction,
            entailment_by_answer=(),
            chosen_answer=exact[0],
            score=gold_answer_score(instance, exact[0]),
            exact_match=True,
        )

    by_answer = assemble([statement], [text for text, _ in instance.answers])
    entailments = [
        (answer, mean_entailment(answer, prediction, statements, entail))
        for answer, statements in by_answer.items()
    ]
    chosen, best = min(
        entailments,
        key=lambda item: (-item[1], -gold_answer_score(instance, item[0]), normalize_answer(item[0])),
    )
    if best <= ENTAILMENT_THRESHOLD:
        score = 0.0
    else:
        score = best * gold_answer_score(instance, chosen)
    return OpenEvalRecord(
        qid=instance.qid,
        prediction=prediction,
        entailment_by_answer=tuple(entailments),
        chosen_answer=chosen,
        score=score,
    )


@dataclass(frozen=True)
class OpenEvalReport:
    accuracy: float
    n_instances: int
    n_evaluated: int
    n_ungrounded: int
    n_choice: int
    n_numeric: int
    n_missing_prediction: int
    coverage: float
    records: Tuple[OpenEvalRecord, ...]

    def to_dict(self) -> dict:
        return {
            "open_accuracy": self.accuracy,
            "n_instances": self.n_instances,
            "n_evaluated": self.n_evaluated,
            "n_ungrounded": self.n_ungrounded,
            "n_skipped_choice": self.n_choice,
            "n_skipped_numeric": self.n_numeric,
            "n_missing_prediction": self.n_missing_prediction,
            "grounding_coverage": self.coverage,
            "exact_match_bypass": True,
            "records": [r.to_dict() for r in self.records],
        }


def evaluate_open(
    predictions: Dict[str, str],
    instances: Sequence[QAInstance],
    entail: EntailmentProvider,
) -> OpenEvalReport:
    """Mean open score over the evaluable instances, with grounding coverage
    and skip counts reported alongside."""
    records: List[OpenEvalRecord] = []
    ungrounded = choice = numeric = missing = 0
    for inst in instances:
        pred = predictions.get(inst.qid)
        if pred is None:
            missing += 1
            pred = ""
        record = open_score(inst, pred, entail)
        records.append(record)
        if record.skipped == SKIP_UNSUPPORTED:
            ungrounded += 1
        elif record.skipped == SKIP_CHOICE:
            choice += 1
        elif record.skipped == SKIP_NUMERIC:
            numeric += 1
    evaluated = [r for r in records if r.skipped is None]
    n = len(instances)
    accuracy = sum(r.score for r in evaluated) / len(evaluated) if evaluated else 0.0
    coverage = (n - ungrounded) / n if n else 0.0
    return OpenEvalReport(
        accuracy=accuracy,
        n_instances=n,
        n_evaluated=len(evaluated),
        n_ungrounded=ungrounded,
        n_choice=choice,
        n_numeric=numeric,
        n_missing_prediction=missing,
        coverage=coverage,
        records=tuple(records),
    )


def exact_match_entailment(premise: str, hypothesis: str) -> float:
    """Oracle provider: full credit iff the two statements are identical."""
    return 1.0 if premise == hypothesis else 0.0


def constant_entailment(value: float) -> EntailmentProvider:
    def provider(premise: str, hypothesis: str) -> float:
        return value

    return provider
