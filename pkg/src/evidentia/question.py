"""Question tokenization, key-entity extraction, type detection, and relation hints."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .normalize import normalize_concept, tokenize

MAX_ENTITY_NGRAM = 4


class QuestionType(Enum):
    HOW = "how"
    WHAT = "what"
    WHERE = "where"
    WHEN = "when"
    WHY = "why"
    OTHER = "other"


_TRIGGERS = {
    "how": QuestionType.HOW,
    "what": QuestionType.WHAT,
    "where": QuestionType.WHERE,
    "when": QuestionType.WHEN,
    "why": QuestionType.WHY,
}


@dataclass(frozen=True)
class RelationHint:
    relations: tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.relations)) != len(self.relations):
            raise ValueError("duplicate relations in hint")


@dataclass
class Choice:
    label: str
    text: str
    tokens: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.tokens:
            self.tokens = tokenize(self.text)


@dataclass
class Question:
    id: str
    stem: str
    stem_tokens: list[str]
    question_concept: str
    choices: list[Choice]


def build_question(qid: str, stem: str, question_concept: str, choices: list[Choice]) -> Question:
    if not choices:
        raise ValueError(f"question {qid!r} has no choices")
    labels = [c.label for c in choices]
    if len(set(labels)) != len(labels):
        raise ValueError(f"question {qid!r} has duplicate choice labels")
    return Question(qid, stem, tokenize(stem), normalize_concept(question_concept), choices)


def _load_resource_text(name: str) -> str:
    return resources.files("evidentia.resources").joinpath(name).read_text(encoding="utf-8")


_STOPWORDS: frozenset[str] | None = None


def stopwords() -> frozenset[str]:
    """The shipped stopword list (resources/stopwords.txt, one word per line)."""
    global _STOPWORDS
    if _STOPWORDS is None:
        words = _load_resource_text("stopwords.txt").split()
        _STOPWORDS = frozenset(words)
    return _STOPWORDS


def remove_stopwords(tokens: list[str]) -> list[str]:
    sw = stopwords()
    return [t for t in tokens if t not in sw]


def longest_match_spans(tokens: list[str], vocab: set[str], max_ngram: int = MAX_ENTITY_NGRAM) -> list[str]:
    """Greedy left-to-right longest n-gram matching against a concept vocabulary.

    Matched spans never overlap: after a match of length n the scan resumes
    past it. Returns the matched concept labels in scan order.
    """
    matches: list[str] = []
    i = 0
    while i < len(tokens):
        hit = None
        for n in range(min(max_ngram, len(tokens) - i), 0, -1):
            candidate = "_".join(tokens[i : i + n])
            if candidate in vocab:
                hit = (candidate, n)
                break
        if hit is None:
            i += 1
        else:
            matches.append(hit[0])
            i += hit[1]
    return matches


def extract_entities(question: Question, vocab: set[str]) -> list[str]:
    """Key concepts of the stem: the question concept plus vocabulary matches.

    The question concept always comes first; scan matches follow in stem order,
    deduplicated.
    """
    found = [question.question_concept]
    found.extend(longest_match_spans(question.stem_tokens, vocab))
    seen: set[str] = set()
    ordered = []
    for label in found:
        if label not in seen:
            seen.add(label)
            ordered.append(label)
    return ordered


def detect_question_type(stem: str) -> QuestionType:
    """Type of the earliest trigger token (how/what/where/when/why), else OTHER."""
    for token in tokenize(stem):
        if token in _TRIGGERS:
            return _TRIGGERS[token]
    return QuestionType.OTHER


_DEFAULT_HINTS: dict[QuestionType, RelationHint] | None = None


def _parse_mapping(obj: dict) -> dict[QuestionType, RelationHint]:
    mapping: dict[QuestionType, RelationHint] = {}
    for qtype in QuestionType:
        rels = obj.get(qtype.value, [])
        mapping[qtype] = RelationHint(tuple(rels))
    return mapping


def default_relation_hints() -> dict[QuestionType, RelationHint]:
    """The shipped question-type to relation mapping (resources/relation_hints.json)."""
    global _DEFAULT_HINTS
    if _DEFAULT_HINTS is None:
        _DEFAULT_HINTS = _parse_mapping(json.loads(_load_resource_text("relation_hints.json")))
    return _DEFAULT_HINTS


def load_relation_hints(path: str | Path) -> dict[QuestionType, RelationHint]:
    return _parse_mapping(json.loads(Path(path).read_text(encoding="utf-8")))


def infer_relations(qtype: QuestionType, mapping: dict[QuestionType, RelationHint] | None = None) -> RelationHint:
    table = mapping if mapping is not None else default_relation_hints()
    return table.get(qtype, RelationHint())
