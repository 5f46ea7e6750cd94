"""Dataset loading, end-to-end orchestration, and evaluation reports."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import dictionary, kg, textindex
from .fusion import (
    ClassifierParams,
    TokenCaps,
    TrainExample,
    TrainingConfig,
    make_provider,
    predict,
    train,
)
from .question import Choice, Question, build_question
from .remote import ENCODER_URL_ENV
from .retrieval import (
    EvidenceBundle,
    LexicalScorer,
    FallbackScorer,
    RemoteScorer,
    RetrievalConfig,
    Stores,
    retrieve_all,
)


class DatasetError(Exception):
    pass


class PipelineError(Exception):
    pass


@dataclass
class DatasetRecord:
    id: str
    question_concept: str
    stem: str
    choices: list[Choice]
    answer_key: str | None = None

    def to_question(self) -> Question:
        return build_question(self.id, self.stem, self.question_concept, self.choices)


def _parse_record(obj: dict) -> DatasetRecord:
    question = obj["question"]
    choices = [Choice(c["label"], c["text"]) for c in question["choices"]]
    if len(choices) < 2:
        raise ValueError("fewer than two choices")
    labels = [c.label for c in choices]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate choice labels")
    answer_key = obj.get("answerKey")
    if answer_key is not None and answer_key not in labels:
        raise ValueError(f"answerKey {answer_key!r} not among labels")
    return DatasetRecord(
        id=str(obj["id"]),
        question_concept=str(question["question_concept"]),
        stem=str(question["stem"]),
        choices=choices,
        answer_key=answer_key,
    )


def load_dataset(path: str | Path) -> list[DatasetRecord]:
    """Load every record or fail: malformed lines abort with their line numbers."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc}") from exc
    records: list[DatasetRecord] = []
    bad: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            records.append(_parse_record(json.loads(raw)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            bad.append(f"line {lineno}: {exc}")
    if bad:
        raise DatasetError(f"dataset {path} has malformed records: " + "; ".join(bad[:20]))
    if not records:
        raise DatasetError(f"dataset {path} contains no records")
    return records


@dataclass
class PipelineConfig:
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    caps: TokenCaps = field(default_factory=TokenCaps)
    provider: dict = field(default_factory=lambda: {"kind": "deterministic", "dim": 64, "seed": 0})
    scorer: dict = field(default_factory=lambda: {"kind": "lexical"})
    workers: int = 4

    def to_dict(self) -> dict:
        return {
            "retrieval": self.retrieval.to_dict(),
            "training": self.training.to_dict(),
            "caps": {"q": self.caps.q, "a": self.caps.a, "c": self.caps.c, "total": self.caps.total},
            "provider": self.provider,
            "scorer": self.scorer,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        cfg = cls()
        if "retrieval" in d:
            cfg.retrieval = RetrievalConfig.from_dict(d["retrieval"])
        if "training" in d:
            cfg.training = TrainingConfig.from_dict(d["training"])
        if "caps" in d:
            caps = d["caps"]
            cfg.caps = TokenCaps(
                caps.get("q", 64), caps.get("a", 64), caps.get("c", 384), caps.get("total", 512)
            )
        if "provider" in d:
            cfg.provider = dict(d["provider"])
        if "scorer" in d:
            cfg.scorer = dict(d["scorer"])
        if "workers" in d:
            cfg.workers = int(d["workers"])
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def encoder_url_from_env() -> str | None:
    url = os.environ.get(ENCODER_URL_ENV)
    return url or None


def make_scorer(cfg: PipelineConfig, stores: Stores):
    """Build the evidence scorer; EVIDENTIA_ENCODER_URL upgrades it to the remote one."""
    sentence_index = stores.text.sentence_index if stores.text is not None else None
    lexical = LexicalScorer(sentence_index)
    env_url = encoder_url_from_env()
    kind = cfg.scorer.get("kind", "lexical")
    if env_url or kind == "remote":
        url = env_url or cfg.scorer.get("url")
        if not url:
            raise PipelineError("remote scorer needs a url (config or EVIDENTIA_ENCODER_URL)")
        remote = RemoteScorer(url)
        if cfg.scorer.get("fallback_lexical", False):
            return FallbackScorer(remote, lexical)
        return remote
    return lexical


def make_pipeline_provider(cfg: PipelineConfig):
    env_url = encoder_url_from_env()
    spec = dict(cfg.provider)
    if env_url:
        spec = {"kind": "remote", "url": env_url}
    return make_provider(spec, env_url)


def load_stores(stores_dir: str | Path, cfg: RetrievalConfig) -> Stores:
    """Load the store subdirectories needed by the enabled sources."""
    base = Path(stores_dir)
    stores = Stores()
    if cfg.use_conceptnet:
        path = base / "conceptnet"
        if not path.is_dir():
            raise PipelineError(f"conceptnet store missing at {path} (required by config)")
        stores.kg = kg.load_graph(path)
    if cfg.use_wiki:
        path = base / "wiki"
        if not path.is_dir():
            raise PipelineError(f"wiki store missing at {path} (required by config)")
        stores.text = textindex.load_text_store(path)
    if cfg.use_dict:
        path = base / "dict"
        if not path.is_dir():
            raise PipelineError(f"dict store missing at {path} (required by config)")
        stores.dictionary = dictionary.load_dict_store(path)
    return stores


def _map_ordered(fn, items, workers: int):
    """Apply fn to items, possibly in threads, preserving input order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def retrieve_dataset(
    records: list[DatasetRecord],
    stores: Stores,
    cfg: PipelineConfig,
    scorer,
) -> list[EvidenceBundle]:
    """Evidence bundles for every (question, choice) pair, in dataset order."""

    def for_record(record: DatasetRecord) -> list[EvidenceBundle]:
        return retrieve_all(record.to_question(), stores, cfg.retrieval, scorer)

    nested = _map_ordered(for_record, records, cfg.workers)
    return [bundle for bundles in nested for bundle in bundles]


def bundles_by_question(bundles: list[EvidenceBundle]) -> dict[str, list[EvidenceBundle]]:
    grouped: dict[str, list[EvidenceBundle]] = {}
    for b in bundles:
        grouped.setdefault(b.question_id, []).append(b)
    return grouped


def build_examples(records: list[DatasetRecord], bundles: list[EvidenceBundle]) -> list[TrainExample]:
    grouped = bundles_by_question(bundles)
    examples = []
    for record in records:
        if record.answer_key is None:
            raise PipelineError(f"record {record.id!r} has no answerKey")
        qbundles = grouped.get(record.id)
        if not qbundles:
            raise PipelineError(f"no evidence bundles for question {record.id!r}")
        examples.append(TrainExample(record.to_question(), qbundles, record.answer_key))
    return examples


@dataclass
class EvalReport:
    n: int
    correct: int
    accuracy: float
    per_question: list[dict]
    config: dict

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "per_question": self.per_question,
            "config": self.config,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )


def predict_bundles(
    records: list[DatasetRecord],
    bundles: list[EvidenceBundle],
    params: ClassifierParams,
    provider,
    caps: TokenCaps = TokenCaps(),
    workers: int = 1,
) -> list[dict]:
    """Per-record predictions (dicts with id/predicted/probabilities), dataset order."""
    grouped = bundles_by_question(bundles)

    def for_record(record: DatasetRecord) -> dict:
        qbundles = grouped.get(record.id)
        if not qbundles:
            raise PipelineError(f"no evidence bundles for question {record.id!r}")
        pred = predict(record.to_question(), qbundles, provider, params, None, caps)
        return {
            "id": record.id,
            "predicted": pred.predicted_label,
            "probabilities": {label: float(p) for label, p in zip(pred.labels, pred.probabilities)},
        }

    return _map_ordered(for_record, records, workers)


def evaluate_bundles(
    records: list[DatasetRecord],
    bundles: list[EvidenceBundle],
    params: ClassifierParams,
    provider,
    caps: TokenCaps = TokenCaps(),
    config_snapshot: dict | None = None,
    workers: int = 1,
) -> EvalReport:
    for record in records:
        if record.answer_key is None:
            raise PipelineError(f"record {record.id!r} has no answerKey (required for evaluation)")
    rows = predict_bundles(records, bundles, params, provider, caps, workers)
    per_question = []
    correct = 0
    for record, row in zip(records, rows):
        match = row["predicted"] == record.answer_key
        correct += int(match)
        per_question.append(
            {
                "id": record.id,
                "predicted": row["predicted"],
                "gold": record.answer_key,
                "probabilities": row["probabilities"],
            }
        )
    n = len(records)
    if n == 0:
        raise PipelineError("cannot evaluate an empty record list")
    return EvalReport(n, correct, correct / n, per_question, config_snapshot or {})


def evaluate(
    records: list[DatasetRecord],
    stores: Stores,
    cfg: PipelineConfig,
    params: ClassifierParams,
    provider,
    scorer=None,
) -> EvalReport:
    """Retrieve evidence and score every record; accuracy over gold answer keys."""
    if scorer is None:
        scorer = make_scorer(cfg, stores)
    bundles = retrieve_dataset(records, stores, cfg, scorer)
    return evaluate_bundles(
        records, bundles, params, provider, cfg.caps, cfg.to_dict(), workers=cfg.workers
    )


def train_from_bundles(
    records: list[DatasetRecord],
    bundles: list[EvidenceBundle],
    provider,
    cfg: PipelineConfig,
    loss_log: list[float] | None = None,
) -> ClassifierParams:
    examples = build_examples(records, bundles)
    return train(examples, provider, cfg.training, None, cfg.caps, loss_log)
