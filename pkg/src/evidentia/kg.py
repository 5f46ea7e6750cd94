"""Relation-typed assertion store over ConceptNet-style dumps.

Supports the native 5-field ConceptNet 5.x assertion layout (assertion URI,
relation URI, start URI, end URI, JSON metadata) and a hand-writable 4-column
layout (head, relation, tail, weight). After ingest the graph is immutable and
safe for concurrent reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .normalize import concept_to_text, normalize_concept

# Default closed relation vocabulary; unknown names from dumps are kept verbatim.
DEFAULT_RELATIONS = (
    "AtLocation",
    "IsA",
    "RelatedTo",
    "PartOf",
    "UsedFor",
    "Causes",
    "HasPrerequisite",
    "HasSubevent",
    "MotivatedByGoal",
    "CapableOf",
    "LocatedNear",
    "Antonym",
    "Synonym",
)

FORMAT_VERSION = 1


class IngestError(Exception):
    """Raised when an input file cannot be read or a store directory is invalid."""


@dataclass(frozen=True)
class Assertion:
    head: str
    relation: str
    tail: str
    weight: float = 1.0
    surface: str | None = None

    def to_dict(self) -> dict:
        d = {"head": self.head, "relation": self.relation, "tail": self.tail, "weight": self.weight}
        if self.surface is not None:
            d["surface"] = self.surface
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Assertion":
        return cls(d["head"], d["relation"], d["tail"], float(d.get("weight", 1.0)), d.get("surface"))


def triple_to_text(a: Assertion) -> str:
    """Render an assertion as evidence text, underscores as spaces, relation verbatim."""
    return f"{concept_to_text(a.head)} {a.relation} {concept_to_text(a.tail)}"


@dataclass
class KnowledgeGraph:
    assertions: list[Assertion] = field(default_factory=list)
    by_head: dict[str, list[int]] = field(default_factory=dict)
    by_tail: dict[str, list[int]] = field(default_factory=dict)
    by_head_rel: dict[tuple[str, str], list[int]] = field(default_factory=dict)
    vocab: set[str] = field(default_factory=set)
    language_filter: str = "en"
    skipped: int = 0

    def _index(self, idx: int, a: Assertion) -> None:
        self.by_head.setdefault(a.head, []).append(idx)
        self.by_tail.setdefault(a.tail, []).append(idx)
        self.by_head_rel.setdefault((a.head, a.relation), []).append(idx)
        self.vocab.add(a.head)
        self.vocab.add(a.tail)

    def add(self, a: Assertion) -> None:
        self.assertions.append(a)
        self._index(len(self.assertions) - 1, a)

    def neighbors(
        self,
        node: str,
        relations: set[str] | None = None,
        direction: str = "both",
    ) -> list[Assertion]:
        """Assertions incident to `node`, optionally filtered by relation name.

        Order is deterministic (ascending assertion id); unknown nodes yield [].
        """
        if direction not in ("outgoing", "incoming", "both"):
            raise ValueError(f"bad direction: {direction!r}")
        ids: set[int] = set()
        if direction in ("outgoing", "both"):
            ids.update(self.by_head.get(node, ()))
        if direction in ("incoming", "both"):
            ids.update(self.by_tail.get(node, ()))
        out = [self.assertions[i] for i in sorted(ids)]
        if relations is not None:
            out = [a for a in out if a.relation in relations]
        return out

    def neighbor_ids(
        self,
        node: str,
        relations: set[str] | None = None,
        direction: str = "both",
    ) -> list[int]:
        """Like neighbors() but returns assertion ids (used by path enumeration)."""
        if direction not in ("outgoing", "incoming", "both"):
            raise ValueError(f"bad direction: {direction!r}")
        ids: set[int] = set()
        if direction in ("outgoing", "both"):
            ids.update(self.by_head.get(node, ()))
        if direction in ("incoming", "both"):
            ids.update(self.by_tail.get(node, ()))
        ordered = sorted(ids)
        if relations is not None:
            ordered = [i for i in ordered if self.assertions[i].relation in relations]
        return ordered


def _concept_from_uri(uri: str) -> tuple[str, str] | None:
    """Split a /c/<lang>/<term>[/...] URI into (lang, normalized term)."""
    parts = uri.split("/")
    if len(parts) < 4 or parts[1] != "c" or not parts[3]:
        return None
    return parts[2], normalize_concept(parts[3])


def _relation_from_uri(uri: str) -> str:
    parts = uri.split("/")
    if len(parts) >= 3 and parts[1] == "r" and parts[2]:
        return parts[2]
    return uri  # open-world: keep unknown relation spellings verbatim


def _parse_native(fields: list[str], language_filter: str) -> Assertion | None | str:
    """Parse a 5-field dump line. Returns Assertion, None (malformed) or "lang" (filtered)."""
    if len(fields) < 4:
        return None
    relation = _relation_from_uri(fields[1].strip())
    start = _concept_from_uri(fields[2].strip())
    end = _concept_from_uri(fields[3].strip())
    if start is None or end is None:
        return None
    if start[0] != language_filter or end[0] != language_filter:
        return "lang"
    weight = 1.0
    surface = None
    if len(fields) >= 5 and fields[4].strip():
        try:
            meta = json.loads(fields[4])
        except json.JSONDecodeError:
            return None
        if not isinstance(meta, dict):
            return None
        weight = float(meta.get("weight", 1.0))
        surface = meta.get("surfaceText")
    if weight < 0:
        return None
    return Assertion(start[1], relation, end[1], weight, surface)


def _parse_simplified(fields: list[str]) -> Assertion | None:
    if len(fields) < 3 or not all(f.strip() for f in fields[:3]):
        return None
    weight = 1.0
    if len(fields) >= 4 and fields[3].strip():
        try:
            weight = float(fields[3])
        except ValueError:
            return None
    if weight < 0:
        return None
    return Assertion(
        normalize_concept(fields[0]),
        fields[1].strip(),
        normalize_concept(fields[2]),
        weight,
    )


def ingest_conceptnet(path: str | Path, language_filter: str = "en") -> KnowledgeGraph:
    """Load an assertion dump, keeping lines whose start and end carry the language tag.

    Malformed lines (and lines filtered out by language) are skipped and counted
    on the returned graph rather than aborting the ingest.
    """
    path = Path(path)
    graph = KnowledgeGraph(language_filter=language_filter)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read assertion dump {path}: {exc}") from exc
    for raw in text.splitlines():
        if not raw.strip():
            continue
        fields = raw.split("\t")
        if "/c/" in raw:
            parsed = _parse_native(fields, language_filter)
            if parsed is None or parsed == "lang":
                graph.skipped += 1
                continue
            graph.add(parsed)
        else:
            simple = _parse_simplified(fields)
            if simple is None:
                graph.skipped += 1
                continue
            graph.add(simple)
    return graph


def save_graph(graph: KnowledgeGraph, out_dir: str | Path) -> None:
    """Persist to a versioned directory: manifest.json + assertions.jsonl."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": "conceptnet",
        "assertions": len(graph.assertions),
        "skipped": graph.skipped,
        "vocab": len(graph.vocab),
        "language_filter": graph.language_filter,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    with (out / "assertions.jsonl").open("w", encoding="utf-8") as fh:
        for a in graph.assertions:
            fh.write(json.dumps(a.to_dict(), ensure_ascii=False) + "\n")


def load_graph(store_dir: str | Path) -> KnowledgeGraph:
    store = Path(store_dir)
    try:
        manifest = json.loads((store / "manifest.json").read_text(encoding="utf-8"))
    except OSError as exc:
        raise IngestError(f"cannot read graph store {store}: {exc}") from exc
    if manifest.get("format_version") != FORMAT_VERSION or manifest.get("kind") != "conceptnet":
        raise IngestError(f"unsupported graph store manifest in {store}")
    graph = KnowledgeGraph(
        language_filter=manifest.get("language_filter", "en"),
        skipped=int(manifest.get("skipped", 0)),
    )
    with (store / "assertions.jsonl").open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                graph.add(Assertion.from_dict(json.loads(line)))
    if len(graph.assertions) != manifest["assertions"]:
        raise IngestError(f"graph store {store} is inconsistent with its manifest")
    return graph
