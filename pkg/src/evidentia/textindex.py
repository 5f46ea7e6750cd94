"""Two-stage BM25 sentence retrieval over a paragraph/sentence-split corpus.

Stage 1 narrows to the best paragraphs (title tokens folded into each paragraph
unit), stage 2 ranks the sentences inside the surviving paragraphs. Both stages
use BM25 with the "+1" IDF floor, so scores are always non-negative.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .normalize import tokenize

FORMAT_VERSION = 1

_TERMINATORS = ".!?"


class CorpusError(Exception):
    """Raised for unreadable corpora or invalid store directories."""


def split_sentences(paragraph_text: str) -> list[str]:
    """Split on ./!/? followed by whitespace; single-letter abbreviations do not split.

    A period closes an abbreviation when the character before it is a lone letter
    (preceded by start-of-text or a non-alphanumeric, as in "U.S."); such periods
    are not split points. Segments are trimmed and empties dropped.
    """
    sentences: list[str] = []
    start = 0
    for i, ch in enumerate(paragraph_text):
        if ch not in _TERMINATORS:
            continue
        if i + 1 >= len(paragraph_text) or not paragraph_text[i + 1].isspace():
            continue
        if ch == ".":
            prev_is_lone_letter = (
                i >= 1
                and paragraph_text[i - 1].isalpha()
                and (i == 1 or not paragraph_text[i - 2].isalnum())
            )
            if prev_is_lone_letter:
                continue
        segment = paragraph_text[start : i + 1].strip()
        if segment:
            sentences.append(segment)
        start = i + 1
    tail = paragraph_text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


@dataclass
class Paragraph:
    para_idx: int
    text: str
    sentences: list[str]


@dataclass
class Document:
    doc_id: int
    title: str
    paragraphs: list[Paragraph]


@dataclass(frozen=True)
class SentenceRef:
    doc_id: int
    para_idx: int
    sent_idx: int
    text: str

    def key(self) -> tuple[int, int, int]:
        return (self.doc_id, self.para_idx, self.sent_idx)

    def to_dict(self) -> dict:
        return {"doc_id": self.doc_id, "para_idx": self.para_idx, "sent_idx": self.sent_idx}


@dataclass
class ScoredSentence:
    ref: SentenceRef
    score: float


class InvertedIndex:
    """BM25 postings over paragraph or sentence units.

    unit_keys[i] addresses unit i in the corpus: (doc_id, para_idx) for
    paragraph granularity, (doc_id, para_idx, sent_idx) for sentences.
    """

    def __init__(self, granularity: str, k1: float = 1.2, b: float = 0.75):
        if granularity not in ("paragraph", "sentence"):
            raise ValueError(f"bad granularity: {granularity!r}")
        self.granularity = granularity
        self.k1 = k1
        self.b = b
        self.postings: dict[str, list[tuple[int, int]]] = {}
        self.unit_lengths: list[int] = []
        self.unit_keys: list[tuple] = []
        self.unit_texts: list[str] = []
        self._tf: dict[int, dict[str, int]] = {}

    @property
    def n_units(self) -> int:
        return len(self.unit_lengths)

    @property
    def avg_len(self) -> float:
        if not self.unit_lengths:
            return 0.0
        return sum(self.unit_lengths) / len(self.unit_lengths)

    def add_unit(self, key: tuple, tokens: list[str], text: str) -> int:
        unit_id = len(self.unit_lengths)
        self.unit_lengths.append(len(tokens))
        self.unit_keys.append(key)
        self.unit_texts.append(text)
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for term in sorted(counts):
            self.postings.setdefault(term, []).append((unit_id, counts[term]))
        self._tf[unit_id] = counts
        return unit_id

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        n = self.n_units
        return math.log(1.0 + (n - df + 0.5) / (df + 0.5))

    def score(self, query_terms: list[str], unit_id: int) -> float:
        if not 0 <= unit_id < self.n_units:
            raise IndexError(f"unknown unit id {unit_id}")
        counts = self._tf[unit_id]
        length = self.unit_lengths[unit_id]
        avg = self.avg_len
        norm = 1.0 - self.b + (self.b * length / avg if avg > 0 else 0.0)
        total = 0.0
        for term in sorted(set(query_terms)):
            tf = counts.get(term, 0)
            if tf == 0:
                continue
            total += self.idf(term) * tf * (self.k1 + 1.0) / (tf + self.k1 * norm)
        return total

    def to_dict(self) -> dict:
        return {
            "granularity": self.granularity,
            "k1": self.k1,
            "b": self.b,
            "unit_keys": [list(k) for k in self.unit_keys],
            "unit_lengths": self.unit_lengths,
            "unit_texts": self.unit_texts,
            "postings": {t: [list(p) for p in plist] for t, plist in self.postings.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InvertedIndex":
        index = cls(d["granularity"], float(d["k1"]), float(d["b"]))
        index.unit_keys = [tuple(k) for k in d["unit_keys"]]
        index.unit_lengths = [int(x) for x in d["unit_lengths"]]
        index.unit_texts = list(d["unit_texts"])
        index.postings = {t: [(int(u), int(tf)) for u, tf in plist] for t, plist in d["postings"].items()}
        index._tf = {i: {} for i in range(len(index.unit_lengths))}
        for term, plist in index.postings.items():
            for unit_id, tf in plist:
                index._tf[unit_id][term] = tf
        return index


def bm25_score(index: InvertedIndex, query_terms: list[str], unit_id: int) -> float:
    return index.score(query_terms, unit_id)


def build_index(corpus: list[Document], granularity: str, k1: float = 1.2, b: float = 0.75) -> InvertedIndex:
    """Index a corpus at the given granularity.

    Paragraph units prepend the document title's tokens so titles participate
    in stage-1 narrowing; sentence units index the sentence text alone.
    """
    index = InvertedIndex(granularity, k1=k1, b=b)
    for doc in corpus:
        title_tokens = tokenize(doc.title)
        for para in doc.paragraphs:
            if granularity == "paragraph":
                index.add_unit((doc.doc_id, para.para_idx), title_tokens + tokenize(para.text), para.text)
            else:
                for sent_idx, sent in enumerate(para.sentences):
                    index.add_unit((doc.doc_id, para.para_idx, sent_idx), tokenize(sent), sent)
    return index


def retrieve_sentences(
    paragraph_index: InvertedIndex,
    sentence_index: InvertedIndex,
    query: str,
    top_paragraphs: int | None = 20,
    top_sentences: int = 10,
) -> list[ScoredSentence]:
    """Paragraph-then-sentence BM25 retrieval.

    Only sentences sharing at least one query term (score > 0) are returned.
    Ties break by ascending (doc_id, para_idx, sent_idx); top_paragraphs=None
    disables stage-1 narrowing (equivalent to a global sentence ranking).
    """
    terms = tokenize(query)
    para_ranking = sorted(
        range(paragraph_index.n_units),
        key=lambda uid: (-paragraph_index.score(terms, uid), paragraph_index.unit_keys[uid]),
    )
    if top_paragraphs is not None:
        para_ranking = para_ranking[:top_paragraphs]
    surviving = {paragraph_index.unit_keys[uid] for uid in para_ranking}

    scored: list[ScoredSentence] = []
    for uid in range(sentence_index.n_units):
        doc_id, para_idx, sent_idx = sentence_index.unit_keys[uid]
        if (doc_id, para_idx) not in surviving:
            continue
        score = sentence_index.score(terms, uid)
        if score <= 0.0:
            continue
        ref = SentenceRef(doc_id, para_idx, sent_idx, sentence_index.unit_texts[uid])
        scored.append(ScoredSentence(ref, score))
    scored.sort(key=lambda s: (-s.score, s.ref.key()))
    return scored[:top_sentences]


class TextStore:
    """A corpus with its paragraph- and sentence-level indexes."""

    def __init__(self, documents: list[Document], k1: float = 1.2, b: float = 0.75):
        self.documents = documents
        self.paragraph_index = build_index(documents, "paragraph", k1=k1, b=b)
        self.sentence_index = build_index(documents, "sentence", k1=k1, b=b)
        self.skipped = 0

    def retrieve(self, query: str, top_paragraphs: int | None = 20, top_sentences: int = 10) -> list[ScoredSentence]:
        return retrieve_sentences(self.paragraph_index, self.sentence_index, query, top_paragraphs, top_sentences)

    @classmethod
    def _from_parts(cls, documents: list[Document], para: InvertedIndex, sent: InvertedIndex) -> "TextStore":
        store = cls.__new__(cls)
        store.documents = documents
        store.paragraph_index = para
        store.sentence_index = sent
        store.skipped = 0
        return store


def make_document(doc_id: int, title: str, paragraph_texts: list[str]) -> Document:
    paragraphs = [Paragraph(i, text, split_sentences(text)) for i, text in enumerate(paragraph_texts)]
    return Document(doc_id, title, paragraphs)


def load_corpus(path: str | Path) -> tuple[list[Document], int]:
    """Read newline-delimited {"title", "paragraphs"} objects; bad lines are skipped and counted."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus {path}: {exc}") from exc
    documents: list[Document] = []
    skipped = 0
    for raw in text.splitlines():
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError:
            skipped += 1
            continue
        title = obj.get("title")
        paragraphs = obj.get("paragraphs")
        if not isinstance(title, str) or not title or not isinstance(paragraphs, list):
            skipped += 1
            continue
        documents.append(make_document(len(documents), title, [str(p) for p in paragraphs]))
    return documents, skipped


def ingest_corpus(path: str | Path, k1: float = 1.2, b: float = 0.75) -> TextStore:
    documents, skipped = load_corpus(path)
    store = TextStore(documents, k1=k1, b=b)
    store.skipped = skipped
    return store


def save_text_store(store: TextStore, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": "text",
        "documents": len(store.documents),
        "paragraph_units": store.paragraph_index.n_units,
        "sentence_units": store.sentence_index.n_units,
        "skipped": store.skipped,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    payload = {
        "documents": [
            {
                "doc_id": doc.doc_id,
                "title": doc.title,
                "paragraphs": [{"text": p.text, "sentences": p.sentences} for p in doc.paragraphs],
            }
            for doc in store.documents
        ],
        "paragraph": store.paragraph_index.to_dict(),
        "sentence": store.sentence_index.to_dict(),
    }
    (out / "index.json").write_text(json.dumps(payload, ensure_ascii=False) + "\n", encoding="utf-8")


def load_text_store(store_dir: str | Path) -> TextStore:
    store_path = Path(store_dir)
    try:
        manifest = json.loads((store_path / "manifest.json").read_text(encoding="utf-8"))
    except OSError as exc:
        raise CorpusError(f"cannot read text store {store_dir}: {exc}") from exc
    if manifest.get("format_version") != FORMAT_VERSION or manifest.get("kind") != "text":
        raise CorpusError(f"unsupported text store manifest in {store_dir}")
    payload = json.loads((store_path / "index.json").read_text(encoding="utf-8"))
    documents = [
        Document(
            d["doc_id"],
            d["title"],
            [Paragraph(i, p["text"], list(p["sentences"])) for i, p in enumerate(d["paragraphs"])],
        )
        for d in payload["documents"]
    ]
    return TextStore._from_parts(
        documents,
        InvertedIndex.from_dict(payload["paragraph"]),
        InvertedIndex.from_dict(payload["sentence"]),
    )
