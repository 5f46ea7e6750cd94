"""Dictionary entry store serving explanation lookups for concepts and answer choices."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .normalize import normalize_concept, tokenize

FORMAT_VERSION = 1


class DictionaryError(Exception):
    pass


@dataclass
class DictEntry:
    headword: str
    explanations: list[str]
    pos: str | None = None
    examples: list[str] = field(default_factory=list)
    synonyms: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d: dict = {"headword": self.headword, "explanations": self.explanations}
        if self.pos is not None:
            d["pos"] = self.pos
        if self.examples:
            d["examples"] = self.examples
        if self.synonyms:
            d["synonyms"] = self.synonyms
        return d


class DictStore:
    """Entries keyed by normalized headword; duplicates merge in file order."""

    def __init__(self):
        self.entries: dict[str, DictEntry] = {}
        self.skipped = 0

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, headword: str, explanations: list[str], pos: str | None = None,
            examples: list[str] | None = None, synonyms: list[str] | None = None) -> None:
        key = normalize_concept(headword)
        entry = self.entries.get(key)
        if entry is None:
            self.entries[key] = DictEntry(key, list(explanations), pos, list(examples or []), list(synonyms or []))
        else:
            entry.explanations.extend(explanations)
            entry.examples.extend(examples or [])
            entry.synonyms.extend(synonyms or [])

    def lookup(self, term: str) -> DictEntry | None:
        """Exact match on the normalized term, else a plural fallback stripping one trailing 's'."""
        key = normalize_concept(term)
        entry = self.entries.get(key)
        if entry is None and key.endswith("s"):
            entry = self.entries.get(key[:-1])
        return entry

    def explanation_text(self, term: str) -> str | None:
        entry = self.lookup(term)
        if entry is None:
            return None
        text = "; ".join(entry.explanations)
        return text or None

    def phrase_lookup(self, text: str, max_ngram: int = 4) -> tuple[str, str] | None:
        """Longest-match headword within a phrase.

        Tries the whole normalized phrase first, then n-grams from longest to
        shortest, leftmost first. Returns (matched headword, joined explanations).
        """
        entry = self.lookup(text)
        if entry is not None:
            return entry.headword, "; ".join(entry.explanations)
        tokens = tokenize(text)
        for n in range(min(len(tokens), max_ngram), 0, -1):
            for start in range(len(tokens) - n + 1):
                candidate = "_".join(tokens[start : start + n])
                entry = self.lookup(candidate)
                if entry is not None:
                    return entry.headword, "; ".join(entry.explanations)
        return None


def ingest_dictionary(path: str | Path) -> DictStore:
    """Load newline-delimited entries; lines missing headword/explanations skip and count."""
    path = Path(path)
    store = DictStore()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DictionaryError(f"cannot read dictionary {path}: {exc}") from exc
    for raw in text.splitlines():
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError:
            store.skipped += 1
            continue
        headword = obj.get("headword")
        explanations = obj.get("explanations")
        if not isinstance(headword, str) or not headword.strip() or not isinstance(explanations, list) \
                or not explanations or not all(isinstance(e, str) and e for e in explanations):
            store.skipped += 1
            continue
        store.add(
            headword,
            explanations,
            obj.get("pos"),
            obj.get("examples") or [],
            obj.get("synonyms") or [],
        )
    return store


def save_dict_store(store: DictStore, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": "dictionary",
        "entries": len(store.entries),
        "skipped": store.skipped,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    with (out / "entries.jsonl").open("w", encoding="utf-8") as fh:
        for key in store.entries:  # insertion order, deterministic
            fh.write(json.dumps(store.entries[key].to_dict(), ensure_ascii=False) + "\n")


def load_dict_store(store_dir: str | Path) -> DictStore:
    store_path = Path(store_dir)
    try:
        manifest = json.loads((store_path / "manifest.json").read_text(encoding="utf-8"))
    except OSError as exc:
        raise DictionaryError(f"cannot read dictionary store {store_dir}: {exc}") from exc
    if manifest.get("format_version") != FORMAT_VERSION or manifest.get("kind") != "dictionary":
        raise DictionaryError(f"unsupported dictionary store manifest in {store_dir}")
    store = DictStore()
    store.skipped = int(manifest.get("skipped", 0))
    with (store_path / "entries.jsonl").open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                store.add(obj["headword"], obj["explanations"], obj.get("pos"),
                          obj.get("examples") or [], obj.get("synonyms") or [])
    return store
