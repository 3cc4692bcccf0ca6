"""Corpus and submission ingestion.

Parsers for the scored-essay TSV corpora, the labelled-abstract corpus,
and the submission/answer-key JSON files, plus score normalization,
reproducible train/eval splits and modal answer-key derivation.

All functions are pure; parsed objects are plain frozen dataclasses.
"""

from __future__ import annotations

import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum, auto
from pathlib import Path
from typing import Optional, Sequence

from .errors import (
    ConfigError,
    DataError,
    DegenerateRangeError,
    EmptyInputError,
    NotFoundError,
    ParseError,
    RowError,
)
from .scoring import MarkSheet, marksheet_from_json


class Label5(Enum):
    """Sentence roles in the five-class abstract corpus."""

    BACKGROUND = auto()
    OBJECTIVE = auto()
    METHOD = auto()
    RESULT = auto()
    CONCLUSION = auto()


@dataclass(frozen=True)
class RawSample:
    sample_id: str
    prompt_id: str
    text: str
    raw_score: float
    min_score: float
    max_score: float

    def __post_init__(self):
        if not self.text:
            raise ValueError(f"sample {self.sample_id}: empty text")
        if self.min_score >= self.max_score:
            raise ValueError(
                f"sample {self.sample_id}: degenerate range [{self.min_score}, {self.max_score}]"
            )
        if not self.min_score <= self.raw_score <= self.max_score:
            raise ValueError(
                f"sample {self.sample_id}: score {self.raw_score} outside "
                f"[{self.min_score}, {self.max_score}]"
            )


@dataclass(frozen=True)
class NormalizedSample:
    sample_id: str
    prompt_id: str
    text: str
    score01: float


@dataclass(frozen=True)
class RctAbstract:
    abstract_id: str
    sentences: tuple[tuple[Label5, str], ...]


@dataclass(frozen=True)
class Submission:
    submission_id: str
    paper_id: str
    impact_factor: float
    ref_rsc: str
    ref_acs: str
    times_cited: int
    abstract: str
    human_marks: Optional[MarkSheet] = None

    def __post_init__(self):
        if not self.abstract.strip():
            raise ValueError(f"submission {self.submission_id}: empty abstract")
        if self.impact_factor <= 0:
            raise ValueError(f"submission {self.submission_id}: impact factor must be > 0")
        if self.times_cited < 0:
            raise ValueError(f"submission {self.submission_id}: negative citation count")


@dataclass(frozen=True)
class AnswerKey:
    paper_id: str
    impact_factor: float
    ref_rsc: str
    ref_acs: str
    times_cited: int


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple
    eval: tuple
    seed: int
    fraction: float


# ---------------------------------------------------------------------------
# Scored TSV corpora
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TsvSchema:
    """Column names and per-prompt score ranges for a scored TSV corpus."""

    id_col: str = "id"
    prompt_col: str = "set"
    text_col: str = "essay"
    score_col: str = "score"
    score_ranges: dict[str, tuple[float, float]] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "TsvSchema":
        try:
            ranges = {str(k): (float(v[0]), float(v[1])) for k, v in d["score_ranges"].items()}
        except KeyError as exc:
            raise ConfigError("TSV schema missing key 'score_ranges'") from exc
        return cls(
            id_col=d.get("id_col", "id"),
            prompt_col=d.get("prompt_col", "set"),
            text_col=d.get("text_col", "essay"),
            score_col=d.get("score_col", "score"),
            score_ranges=ranges,
        )


def _text_lines(stream) -> list[str]:
    if isinstance(stream, (str, Path)):
        return Path(stream).read_text(encoding="utf-8").splitlines()
    data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines()


def parse_scored_tsv(stream, schema: TsvSchema) -> list[RawSample]:
    """Parse a tab-separated scored corpus into raw samples.

    The first line must be a header. Plain tab splitting is used on
    purpose: essay text may contain quote characters that csv-style
    quoting would mangle.
    """
    lines = _text_lines(stream)
    if not lines:
        raise EmptyInputError("empty TSV corpus")
    header = lines[0].split("\t")
    col_index = {}
    for col in (schema.id_col, schema.prompt_col, schema.text_col, schema.score_col):
        if col not in header:
            raise ConfigError(f"TSV header missing column {col!r}")
        col_index[col] = header.index(col)

    samples: list[RawSample] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) < len(header):
            raise RowError(f"expected {len(header)} columns, got {len(cells)}", lineno)
        prompt = cells[col_index[schema.prompt_col]]
        if prompt not in schema.score_ranges:
            raise ConfigError(f"no score range configured for prompt {prompt!r}")
        lo, hi = schema.score_ranges[prompt]
        raw = cells[col_index[schema.score_col]]
        try:
            score = float(raw)
        except ValueError:
            raise RowError(f"unparseable score {raw!r}", lineno) from None
        if not lo <= score <= hi:
            raise RowError(f"score {score} outside declared range [{lo}, {hi}]", lineno)
        text = cells[col_index[schema.text_col]]
        if not text:
            raise RowError("empty text", lineno)
        samples.append(
            RawSample(
                sample_id=cells[col_index[schema.id_col]],
                prompt_id=prompt,
                text=text,
                raw_score=score,
                min_score=lo,
                max_score=hi,
            )
        )
    return samples


def normalize_scores(samples: Sequence[RawSample]) -> list[NormalizedSample]:
    """Min-max normalize each sample's score to [0, 1] within its prompt range."""
    out = []
    for s in samples:
        if s.max_score == s.min_score:
            raise DegenerateRangeError(f"prompt {s.prompt_id!r}: min == max == {s.min_score}")
        out.append(
            NormalizedSample(
                sample_id=s.sample_id,
                prompt_id=s.prompt_id,
                text=s.text,
                score01=(s.raw_score - s.min_score) / (s.max_score - s.min_score),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Labelled abstract corpus
# ---------------------------------------------------------------------------

def parse_rct(stream) -> list[RctAbstract]:
    """Parse the labelled-abstract corpus format.

    ``###<id>`` opens an abstract, ``<LABEL>\\t<sentence>`` lines follow,
    a blank line closes it.
    """
    lines = _text_lines(stream)
    abstracts: list[RctAbstract] = []
    current_id: str | None = None
    current_line = 0
    sentences: list[tuple[Label5, str]] = []

    def close(lineno: int):
        nonlocal current_id, sentences
        if current_id is None:
            return
        if not sentences:
            raise ParseError(f"abstract {current_id!r} has no sentences", current_line)
        abstracts.append(RctAbstract(current_id, tuple(sentences)))
        current_id = None
        sentences = []

    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            close(lineno)
            continue
        if line.startswith("###"):
            close(lineno)
            current_id = line[3:].strip()
            current_line = lineno
            continue
        if current_id is None:
            raise ParseError("sentence line before any ### header", lineno)
        if "\t" not in line:
            raise ParseError("expected <LABEL><TAB><sentence>", lineno)
        label_name, text = line.split("\t", 1)
        try:
            label = Label5[label_name]
        except KeyError:
            raise ParseError(f"unknown label {label_name!r}", lineno) from None
        if not text.strip():
            raise ParseError("empty sentence", lineno)
        sentences.append((label, text))
    close(len(lines) + 1)
    return abstracts


def serialize_rct(abstracts: Sequence[RctAbstract]) -> str:
    blocks = []
    for a in abstracts:
        lines = [f"###{a.abstract_id}"]
        lines.extend(f"{label.name}\t{text}" for label, text in a.sentences)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------------------
# Train/eval splitting
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31), state


def shuffled_indices(n: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle of range(n) driven by the splitmix64 generator.

    splitmix64 has 64-bit state and a fixed, published update rule, so the
    same seed reproduces the same permutation in any implementation.
    """
    idx = list(range(n))
    state = seed & _MASK64
    for i in range(n - 1, 0, -1):
        value, state = _splitmix64(state)
        j = value % (i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return idx


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def split(samples: Sequence, fraction: float, seed: int) -> DatasetSplit:
    """Deterministic shuffle-then-partition split.

    ``round(fraction * N)`` samples go to train (half rounds away from
    zero), clamped so that both sides stay non-empty.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n = len(samples)
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    n_train = min(max(_round_half_away(fraction * n), 1), n - 1)
    order = shuffled_indices(n, seed)
    train = tuple(samples[i] for i in order[:n_train])
    evals = tuple(samples[i] for i in order[n_train:])
    return DatasetSplit(train=train, eval=evals, seed=seed, fraction=fraction)


# ---------------------------------------------------------------------------
# Answer keys
# ---------------------------------------------------------------------------

def canonical_reference(ref: str) -> str:
    """Collapse whitespace and strip one trailing period, for comparison."""
    collapsed = " ".join(ref.split())
    return collapsed.removesuffix(".")


def _modal(values: list, warnings: list[str], what: str):
    counts = Counter(values)
    top = max(counts.values())
    candidates = sorted(v for v, c in counts.items() if c == top)
    if len(candidates) > 1:
        warnings.append(f"{what}: tie between {candidates}, using {candidates[0]}")
    return candidates[0]


def derive_answer_key(
    submissions: Sequence[Submission], paper_id: str
) -> tuple[AnswerKey, list[str]]:
    """Derive the per-paper answer key as the modal value of each field.

    Reference strings are compared in canonical form (whitespace collapsed,
    trailing period stripped); the stored value is the first submitted raw
    form of the winning canonical class. Ties resolve to the smallest
    value and are reported in the returned warning list.
    """
    subs = [s for s in submissions if s.paper_id == paper_id]
    if not subs:
        raise NotFoundError(f"no submissions for paper {paper_id!r}")
    warnings: list[str] = []
    impact = _modal([s.impact_factor for s in subs], warnings, f"{paper_id} impact_factor")
    cited = _modal([s.times_cited for s in subs], warnings, f"{paper_id} times_cited")

    def modal_reference(field_name: str) -> str:
        raws = [getattr(s, field_name) for s in subs]
        canonical = _modal([canonical_reference(r) for r in raws], warnings, f"{paper_id} {field_name}")
        for r in raws:
            if canonical_reference(r) == canonical:
                return r
        raise AssertionError("modal canonical not found among inputs")

    key = AnswerKey(
        paper_id=paper_id,
        impact_factor=impact,
        ref_rsc=modal_reference("ref_rsc"),
        ref_acs=modal_reference("ref_acs"),
        times_cited=cited,
    )
    return key, warnings


# ---------------------------------------------------------------------------
# JSON files: submissions and answer keys
# ---------------------------------------------------------------------------

_SUBMISSION_KEYS = (
    "submission_id",
    "paper_id",
    "impact_factor",
    "ref_rsc",
    "ref_acs",
    "times_cited",
    "abstract",
)


def load_submissions(source) -> list[Submission]:
    """Load a JSON array of submissions; human marks are optional."""
    raw = _read_json(source, "submission file")
    if not isinstance(raw, list):
        raise DataError("submission file must contain a JSON array")
    out = []
    for i, entry in enumerate(raw):
        for key in _SUBMISSION_KEYS:
            if key not in entry:
                raise DataError(f"submission #{i}: missing key {key!r}")
        marks = entry.get("human_marks")
        try:
            out.append(
                Submission(
                    submission_id=str(entry["submission_id"]),
                    paper_id=str(entry["paper_id"]),
                    impact_factor=float(entry["impact_factor"]),
                    ref_rsc=str(entry["ref_rsc"]),
                    ref_acs=str(entry["ref_acs"]),
                    times_cited=int(entry["times_cited"]),
                    abstract=str(entry["abstract"]),
                    human_marks=marksheet_from_json(marks) if marks is not None else None,
                )
            )
        except ValueError as exc:
            raise DataError(f"submission #{i}: {exc}") from exc
    return out


def load_answer_keys(source) -> dict[str, AnswerKey]:
    raw = _read_json(source, "answer-key file")
    if not isinstance(raw, list):
        raise DataError("answer-key file must contain a JSON array")
    keys: dict[str, AnswerKey] = {}
    for i, entry in enumerate(raw):
        try:
            key = AnswerKey(
                paper_id=str(entry["paper_id"]),
                impact_factor=float(entry["impact_factor"]),
                ref_rsc=str(entry["ref_rsc"]),
                ref_acs=str(entry["ref_acs"]),
                times_cited=int(entry["times_cited"]),
            )
        except (KeyError, ValueError) as exc:
            raise DataError(f"answer key #{i}: {exc!r}") from exc
        if key.paper_id in keys:
            raise DataError(f"duplicate answer key for paper {key.paper_id!r}")
        keys[key.paper_id] = key
    return keys


def _read_json(source, what: str):
    try:
        if isinstance(source, (str, Path)):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source.read()
            if isinstance(text, bytes):
                text = text.decode("utf-8")
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON in {what}: {exc}") from exc
