"""Per-choice evidence retrieval over graph, corpus, and dictionary sources.

Graph retrieval expands iteratively from question-side and choice-side seed
nodes and emits (a) hop-1 assertions incident to seeds and (b) simple assertion
paths connecting a question-side seed to a choice-side seed. Candidates from
all enabled sources are pooled and ranked; dictionary explanations are always
retained and do not compete for the top-N slots.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .dictionary import DictStore
from .kg import Assertion, KnowledgeGraph, triple_to_text
from .normalize import concept_to_text, normalize_concept, tokenize
from .question import (
    Choice,
    Question,
    QuestionType,
    RelationHint,
    detect_question_type,
    extract_entities,
    infer_relations,
    longest_match_spans,
)
from .remote import EncoderClient, EncoderServiceError
from .textindex import InvertedIndex, SentenceRef, TextStore

SOURCE_CONCEPTNET = "ConceptNet"
SOURCE_WIKIPEDIA = "Wikipedia"
SOURCE_DICTIONARY = "Dictionary"

# Tie-break priority after score: Dictionary, then ConceptNet, then Wikipedia.
_SOURCE_PRIORITY = {SOURCE_DICTIONARY: 0, SOURCE_CONCEPTNET: 1, SOURCE_WIKIPEDIA: 2}


@dataclass
class RetrievalConfig:
    max_hops: int = 2
    per_node_cap: int | None = 50
    strict_relations: bool = True
    top_paragraphs: int | None = 20
    wiki_sentences: int = 10
    final_top_n: int = 10
    use_conceptnet: bool = True
    use_wiki: bool = True
    use_dict: bool = True
    wiki_query_with_choice: bool = True

    def __post_init__(self):
        if self.max_hops < 1:
            raise ValueError("max_hops must be >= 1")
        for name in ("wiki_sentences", "final_top_n"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return {
            "max_hops": self.max_hops,
            "per_node_cap": self.per_node_cap,
            "strict_relations": self.strict_relations,
            "top_paragraphs": self.top_paragraphs,
            "wiki_sentences": self.wiki_sentences,
            "final_top_n": self.final_top_n,
            "use_conceptnet": self.use_conceptnet,
            "use_wiki": self.use_wiki,
            "use_dict": self.use_dict,
            "wiki_query_with_choice": self.wiki_query_with_choice,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RetrievalConfig":
        known = {f: d[f] for f in cls.__dataclass_fields__ if f in d}
        return cls(**known)


@dataclass
class EvidenceItem:
    text: str
    source: str
    score: float | None = None
    provenance: list[Assertion] | SentenceRef | str | None = None

    def to_dict(self) -> dict:
        if self.source == SOURCE_CONCEPTNET:
            prov = [a.to_dict() for a in self.provenance]
        elif self.source == SOURCE_WIKIPEDIA:
            prov = self.provenance.to_dict()
        else:
            prov = self.provenance
        return {"text": self.text, "source": self.source, "score": self.score, "provenance": prov}

    @classmethod
    def from_dict(cls, d: dict) -> "EvidenceItem":
        source = d["source"]
        prov = d.get("provenance")
        if source == SOURCE_CONCEPTNET:
            prov = [Assertion.from_dict(x) for x in prov]
        elif source == SOURCE_WIKIPEDIA:
            prov = SentenceRef(prov["doc_id"], prov["para_idx"], prov["sent_idx"], d["text"])
        return cls(d["text"], source, d.get("score"), prov)


@dataclass
class EvidenceBundle:
    question_id: str
    choice_label: str
    items: list[EvidenceItem] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "choice_label": self.choice_label,
            "items": [it.to_dict() for it in self.items],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvidenceBundle":
        return cls(d["question_id"], d["choice_label"], [EvidenceItem.from_dict(x) for x in d["items"]])

    def dictionary_explanations(self, question_concept: str, choice_text: str) -> tuple[str | None, str | None]:
        """Recover (concept explanation, choice explanation) from Dictionary items.

        Dictionary item text is always "<headword>: <explanation>" with the
        normalized headword as provenance, so the split is exact. An item fills
        the concept slot when its headword resolves from the question concept,
        and the choice slot when it resolves from an n-gram of the choice text;
        a shared headword fills both.
        """
        concept_keys = _plural_tolerant_keys([normalize_concept(question_concept)])
        choice_keys = _choice_lookup_keys(choice_text)
        concept_expl = None
        choice_expl = None
        for item in self.items:
            if item.source != SOURCE_DICTIONARY:
                continue
            headword = item.provenance
            explanation = item.text.removeprefix(f"{concept_to_text(headword)}: ")
            if concept_expl is None and headword in concept_keys:
                concept_expl = explanation
            if choice_expl is None and headword in choice_keys:
                choice_expl = explanation
        return concept_expl, choice_expl


def _plural_tolerant_keys(labels: list[str]) -> set[str]:
    keys = set()
    for label in labels:
        if label:
            keys.add(label)
            if label.endswith("s"):
                keys.add(label[:-1])
    return keys


def _choice_lookup_keys(choice_text: str, max_ngram: int = 4) -> set[str]:
    """Every key the dictionary's phrase lookup could have matched for this text."""
    labels = [normalize_concept(choice_text)]
    tokens = tokenize(choice_text)
    for n in range(min(len(tokens), max_ngram), 0, -1):
        for start in range(len(tokens) - n + 1):
            labels.append("_".join(tokens[start : start + n]))
    return _plural_tolerant_keys(labels)


def dump_bundles(bundles: list[EvidenceBundle], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for b in bundles:
            fh.write(json.dumps(b.to_dict(), ensure_ascii=False) + "\n")


def load_bundles(path: str | Path) -> list[EvidenceBundle]:
    bundles = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                bundles.append(EvidenceBundle.from_dict(json.loads(line)))
    return bundles


def choice_seed_nodes(choice: Choice, vocab: set[str]) -> list[str]:
    """Graph seeds for a choice: vocabulary matches, else the whole text normalized."""
    matches = longest_match_spans(choice.tokens, vocab)
    if matches:
        seen = set()
        out = []
        for m in matches:
            if m not in seen:
                seen.add(m)
                out.append(m)
        return out
    normalized = normalize_concept(choice.text)
    return [normalized] if normalized else []


def _expansion_ids(g: KnowledgeGraph, node: str, relations: set[str] | None, cap: int | None) -> list[int]:
    ids = g.neighbor_ids(node, relations=relations, direction="both")
    return ids if cap is None else ids[:cap]


def connecting_paths(
    g: KnowledgeGraph,
    question_nodes: list[str],
    choice_nodes: list[str],
    hint_relations: set[str] | None,
    max_hops: int,
    per_node_cap: int | None,
) -> list[tuple[int, ...]]:
    """Simple assertion paths (as id tuples) from a question seed to a choice seed.

    Traversal is undirected; when a hint is active it constrains only the first
    edge of a path. Paths are enumerated depth-first in ascending assertion-id
    order, so output order is deterministic.
    """
    c_set = set(choice_nodes)
    found: list[tuple[int, ...]] = []
    emitted: set[tuple[int, ...]] = set()

    def walk(node: str, visited: set[str], path: list[int]) -> None:
        if len(path) >= max_hops:
            return
        relations = hint_relations if not path else None
        for aid in _expansion_ids(g, node, relations, per_node_cap):
            a = g.assertions[aid]
            other = a.tail if a.head == node else a.head
            if other in visited:
                continue
            path.append(aid)
            if other in c_set:
                key = tuple(path)
                if key not in emitted:
                    emitted.add(key)
                    found.append(key)
            visited.add(other)
            walk(other, visited, path)
            visited.remove(other)
            path.pop()

    seen_start = set()
    for start in question_nodes:
        if start in seen_start:
            continue
        seen_start.add(start)
        walk(start, {start}, [])
    return found


def retrieve_kg(
    q: Question,
    c: Choice,
    g: KnowledgeGraph,
    hint: RelationHint,
    cfg: RetrievalConfig,
) -> list[EvidenceItem]:
    """Graph evidence for one (question, choice) pair, deduplicated by text."""
    if not cfg.use_conceptnet:
        return []
    hint_relations = set(hint.relations) if (cfg.strict_relations and hint.relations) else None
    q_nodes = extract_entities(q, g.vocab)
    c_nodes = choice_seed_nodes(c, g.vocab)

    items: list[EvidenceItem] = []
    seen_texts: set[str] = set()

    def emit(text: str, path: list[Assertion]) -> None:
        if text not in seen_texts:
            seen_texts.add(text)
            items.append(EvidenceItem(text, SOURCE_CONCEPTNET, None, path))

    initial: list[str] = []
    for node in q_nodes + c_nodes:
        if node not in initial:
            initial.append(node)
    for node in initial:
        for aid in _expansion_ids(g, node, hint_relations, cfg.per_node_cap):
            a = g.assertions[aid]
            emit(triple_to_text(a), [a])

    for id_path in connecting_paths(g, q_nodes, c_nodes, hint_relations, cfg.max_hops, cfg.per_node_cap):
        assertions = [g.assertions[i] for i in id_path]
        emit("; ".join(triple_to_text(a) for a in assertions), assertions)
    return items


def retrieve_wiki(q: Question, c: Choice, store: TextStore, cfg: RetrievalConfig) -> list[EvidenceItem]:
    if not cfg.use_wiki:
        return []
    query = q.stem + (" " + c.text if cfg.wiki_query_with_choice else "")
    hits = store.retrieve(query, top_paragraphs=cfg.top_paragraphs, top_sentences=cfg.wiki_sentences)
    return [EvidenceItem(h.ref.text, SOURCE_WIKIPEDIA, h.score, h.ref) for h in hits]


def retrieve_dict(q: Question, c: Choice, store: DictStore) -> list[EvidenceItem]:
    """Up to two explanation items: one for the question concept, one for the choice."""
    items: list[EvidenceItem] = []
    texts: set[str] = set()
    concept_expl = store.explanation_text(q.question_concept)
    if concept_expl is not None:
        entry = store.lookup(q.question_concept)
        text = f"{concept_to_text(entry.headword)}: {concept_expl}"
        texts.add(text)
        items.append(EvidenceItem(text, SOURCE_DICTIONARY, None, entry.headword))
    choice_hit = store.phrase_lookup(c.text)
    if choice_hit is not None:
        headword, explanation = choice_hit
        text = f"{concept_to_text(headword)}: {explanation}"
        if text not in texts:
            items.append(EvidenceItem(text, SOURCE_DICTIONARY, None, headword))
    return items


class LexicalScorer:
    """IDF-weighted query coverage in [0, 1].

    score = sum of IDF over distinct query terms present in the candidate,
    divided by the IDF mass of the whole query. IDF comes from the sentence
    index when available; unknown terms (and the index-less case) use df = 0.
    """

    def __init__(self, index: InvertedIndex | None = None):
        self.index = index

    def _idf(self, term: str) -> float:
        if self.index is None:
            return math.log(2.0)  # df = 0 against an empty collection
        return self.index.idf(term)

    def score(self, query_text: str, candidate_text: str) -> float:
        return self.score_many(query_text, [candidate_text])[0]

    def score_many(self, query_text: str, candidate_texts: list[str]) -> list[float]:
        query_terms = sorted(set(tokenize(query_text)))
        denom = sum(self._idf(t) for t in query_terms)
        if denom <= 0.0:
            return [0.0 for _ in candidate_texts]
        out = []
        for text in candidate_texts:
            cand = set(tokenize(text))
            num = sum(self._idf(t) for t in query_terms if t in cand)
            out.append(num / denom)
        return out


class RemoteScorer:
    """Relevance scores from the encoder sidecar's /v1/score endpoint."""

    def __init__(self, url: str, timeout: float = 60.0):
        self.client = EncoderClient(url, timeout=timeout)

    def score(self, query_text: str, candidate_text: str) -> float:
        return self.score_many(query_text, [candidate_text])[0]

    def score_many(self, query_text: str, candidate_texts: list[str]) -> list[float]:
        if not candidate_texts:
            return []
        return self.client.score(query_text, candidate_texts)


class FallbackScorer:
    """Remote scorer that degrades to the lexical scorer when the service fails."""

    def __init__(self, remote: RemoteScorer, lexical: LexicalScorer):
        self.remote = remote
        self.lexical = lexical

    def score(self, query_text: str, candidate_text: str) -> float:
        return self.score_many(query_text, [candidate_text])[0]

    def score_many(self, query_text: str, candidate_texts: list[str]) -> list[float]:
        try:
            return self.remote.score_many(query_text, candidate_texts)
        except EncoderServiceError:
            return self.lexical.score_many(query_text, candidate_texts)


def rank_evidence(query_text: str, items: list[EvidenceItem], scorer, n: int) -> list[EvidenceItem]:
    """Score, sort (desc; ties by source priority then text), and keep the top n."""
    if not items:
        return []
    scores = scorer.score_many(query_text, [it.text for it in items])
    rescored = [replace(it, score=float(s)) for it, s in zip(items, scores)]
    rescored.sort(key=lambda it: (-it.score, _SOURCE_PRIORITY[it.source], it.text))
    return rescored[:n]


@dataclass
class Stores:
    kg: KnowledgeGraph | None = None
    text: TextStore | None = None
    dictionary: DictStore | None = None


def retrieve_for_choice(
    q: Question,
    c: Choice,
    stores: Stores,
    cfg: RetrievalConfig,
    scorer,
    hint: RelationHint,
) -> EvidenceBundle:
    candidates: list[EvidenceItem] = []
    if cfg.use_conceptnet and stores.kg is not None:
        candidates.extend(retrieve_kg(q, c, stores.kg, hint, cfg))
    if cfg.use_wiki and stores.text is not None:
        candidates.extend(retrieve_wiki(q, c, stores.text, cfg))
    if cfg.use_dict and stores.dictionary is not None:
        candidates.extend(retrieve_dict(q, c, stores.dictionary))
    query_text = f"{q.stem} {c.text}"
    ranked = rank_evidence(query_text, candidates, scorer, len(candidates))
    kept: list[EvidenceItem] = []
    non_dict = 0
    for item in ranked:
        if item.source == SOURCE_DICTIONARY:
            kept.append(item)
        elif non_dict < cfg.final_top_n:
            kept.append(item)
            non_dict += 1
    return EvidenceBundle(q.id, c.label, kept)


def retrieve_all(
    q: Question,
    stores: Stores,
    cfg: RetrievalConfig,
    scorer,
    hint_mapping: dict[QuestionType, RelationHint] | None = None,
) -> list[EvidenceBundle]:
    """One ranked bundle per answer choice."""
    hint = infer_relations(detect_question_type(q.stem), hint_mapping)
    return [retrieve_for_choice(q, c, stores, cfg, scorer, hint) for c in q.choices]
