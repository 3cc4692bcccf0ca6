"""Rubric scoring of the four factual questions and mark-sheet assembly.

Numeric answers are banded by percentage difference from the key value
(within 10% full marks, 10-25% half marks), reference strings by cosine
similarity of their term vectors (0.9 and 0.65 boundaries). The model's
[0,1] abstract score is denormalized to an integer 0-6 mark.

Band boundaries are inclusive on the favourable side: d == 10 is still
fully correct and s == 0.9 is fully correct, so the bands partition the
whole input range with no gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Optional

from .errors import DataError, DegenerateKeyError, KeyMismatchError
from .textproc import cosine_similarity, term_vector

if TYPE_CHECKING:  # pragma: no cover
    from .ingest import AnswerKey, Submission


class Verdict(str, Enum):
    INCORRECT = "incorrect"
    PARTIALLY_CORRECT = "partially_correct"
    FULLY_CORRECT = "fully_correct"


_VALUE_FOR_VERDICT = {
    Verdict.INCORRECT: 0.0,
    Verdict.PARTIALLY_CORRECT: 0.5,
    Verdict.FULLY_CORRECT: 1.0,
}
_VERDICT_FOR_VALUE = {v: k for k, v in _VALUE_FOR_VERDICT.items()}


@dataclass(frozen=True)
class Mark:
    """One question's mark with the statistic that produced it."""

    value: float
    verdict: Verdict
    evidence: str
    given: Optional[float] = None
    correct: Optional[float] = None

    def __post_init__(self):
        if _VALUE_FOR_VERDICT[self.verdict] != self.value:
            raise ValueError(f"value {self.value} inconsistent with verdict {self.verdict}")


def fmt_number(x: float) -> str:
    """Render a number the way a marker would write it (42, not 42.0)."""
    if float(x) == int(x):
        return str(int(x))
    return f"{x:g}"


def band_for_percent_diff(d: float) -> Verdict:
    """Band a percentage difference: <=10 full, <=25 partial, else wrong."""
    if d < 0:
        raise ValueError("percentage difference cannot be negative")
    if d <= 10.0:
        return Verdict.FULLY_CORRECT
    if d <= 25.0:
        return Verdict.PARTIALLY_CORRECT
    return Verdict.INCORRECT


def band_for_similarity(s: float) -> Verdict:
    """Band a cosine similarity: >=0.9 full, >=0.65 partial, else wrong."""
    if not 0.0 <= s <= 1.0 + 1e-12:
        raise ValueError(f"similarity {s} outside [0, 1]")
    if s >= 0.9:
        return Verdict.FULLY_CORRECT
    if s >= 0.65:
        return Verdict.PARTIALLY_CORRECT
    return Verdict.INCORRECT


def score_numeric(given: float, correct: float) -> Mark:
    """Mark a numeric answer by percentage difference from the key value."""
    if correct == 0:
        raise DegenerateKeyError("correct value is zero; percentage difference undefined")
    d = 100.0 * abs(given - correct) / abs(correct)
    verdict = band_for_percent_diff(d)
    return Mark(
        value=_VALUE_FOR_VERDICT[verdict],
        verdict=verdict,
        evidence=f"percentage difference {d:.2f}%",
        given=float(given),
        correct=float(correct),
    )


def score_reference(given: str, correct: str) -> Mark:
    """Mark a reference string by term-vector cosine similarity to the key."""
    if not given.strip() or not correct.strip():
        raise ValueError("reference strings must be non-empty")
    s = cosine_similarity(term_vector(given), term_vector(correct))
    verdict = band_for_similarity(s)
    return Mark(
        value=_VALUE_FOR_VERDICT[verdict],
        verdict=verdict,
        evidence=f"cosine similarity {s:.4f}",
    )


def abstract_mark(score01: float) -> int:
    """Denormalize a [0,1] model score to an integer 0-6 abstract mark."""
    if not 0.0 <= score01 <= 1.0:
        raise ValueError(f"score {score01} outside [0, 1]")
    mark = int(math.floor(score01 * 6.0 + 0.5))
    return min(max(mark, 0), 6)


@dataclass(frozen=True)
class MarkSheet:
    q1_impact: Mark
    q2_rsc: Mark
    q3_acs: Mark
    q4_cited: Mark
    abstract_mark: int

    @property
    def total(self) -> float:
        return (
            self.q1_impact.value
            + self.q2_rsc.value
            + self.q3_acs.value
            + self.q4_cited.value
            + self.abstract_mark
        )

    def question_marks(self) -> tuple[Mark, Mark, Mark, Mark]:
        return (self.q1_impact, self.q2_rsc, self.q3_acs, self.q4_cited)

    def to_json_dict(self) -> dict:
        def mark_dict(m: Mark) -> dict:
            return {"value": m.value, "verdict": m.verdict.value, "evidence": m.evidence}

        return {
            "q1_impact": mark_dict(self.q1_impact),
            "q2_rsc": mark_dict(self.q2_rsc),
            "q3_acs": mark_dict(self.q3_acs),
            "q4_cited": mark_dict(self.q4_cited),
            "abstract_mark": self.abstract_mark,
            "total": self.total,
        }


def _mark_from_json(obj, name: str) -> Mark:
    if isinstance(obj, (int, float)):
        value = float(obj)
        if value not in _VERDICT_FOR_VALUE:
            raise DataError(f"{name}: mark value must be 0, 0.5 or 1, got {obj}")
        return Mark(value=value, verdict=_VERDICT_FOR_VALUE[value], evidence="")
    try:
        value = float(obj["value"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{name}: expected a number or an object with 'value'") from exc
    if value not in _VERDICT_FOR_VALUE:
        raise DataError(f"{name}: mark value must be 0, 0.5 or 1, got {value}")
    return Mark(
        value=value,
        verdict=_VERDICT_FOR_VALUE[value],
        evidence=str(obj.get("evidence", "")),
    )


def marksheet_from_json(obj: dict) -> MarkSheet:
    """Parse a mark sheet; question marks may be bare numbers or objects."""
    if not isinstance(obj, dict):
        raise DataError("mark sheet must be a JSON object")
    try:
        abstract = int(obj["abstract_mark"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError("mark sheet missing integer 'abstract_mark'") from exc
    if not 0 <= abstract <= 6:
        raise DataError(f"abstract mark {abstract} outside 0-6")
    marks = {}
    for name in ("q1_impact", "q2_rsc", "q3_acs", "q4_cited"):
        if name not in obj:
            raise DataError(f"mark sheet missing {name!r}")
        marks[name] = _mark_from_json(obj[name], name)
    return MarkSheet(abstract_mark=abstract, **marks)


ScoreFn = Callable[[str], float]


def mark_submission(
    sub: "Submission",
    key: "AnswerKey",
    model,
    vocab=None,
) -> MarkSheet:
    """Assemble the full 10-mark sheet for one submission.

    ``model`` is either a callable mapping abstract text to a [0,1] score
    or trained regression parameters (then ``vocab`` is required).
    """
    if sub.paper_id != key.paper_id:
        raise KeyMismatchError(
            f"submission {sub.submission_id} is for paper {sub.paper_id!r}, "
            f"key is for {key.paper_id!r}"
        )
    score_fn = model if callable(model) else make_scorer(model, vocab)
    score01 = float(score_fn(sub.abstract))
    return MarkSheet(
        q1_impact=score_numeric(sub.impact_factor, key.impact_factor),
        q2_rsc=score_reference(sub.ref_rsc, key.ref_rsc),
        q3_acs=score_reference(sub.ref_acs, key.ref_acs),
        q4_cited=score_numeric(sub.times_cited, key.times_cited),
        abstract_mark=abstract_mark(score01),
    )


def make_scorer(params, vocab) -> ScoreFn:
    """Wrap regression parameters and a vocabulary as a text -> score callable."""
    from .nn import predict_score

    if vocab is None:
        raise ValueError("vocab is required when passing model parameters")
    return lambda text: predict_score(text, params, vocab)
