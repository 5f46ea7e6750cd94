"""Input assembly, encoding, choice-aware attention, and the trainable scoring head.

The head scores one choice from three mean-pooled vectors: the question states
reweighted by choice-query attention, the evidence states reweighted the same
way, and the choice states themselves. Encoders are pluggable providers that
map a token list to one hidden vector per token; embeddings stay frozen and
only the two-layer ReLU head trains.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dictionary import DictStore
from .normalize import count_tokens, tokenize, truncate_tokens
from .question import Choice, Question
from .remote import EncoderClient, EncoderServiceError
from .retrieval import SOURCE_CONCEPTNET, SOURCE_WIKIPEDIA, EvidenceBundle

EMPTY_TOKEN = "<empty>"
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TokenCaps:
    q: int = 64
    a: int = 64
    c: int = 384
    total: int = 512


@dataclass
class EncodedInput:
    q_text: str
    a_text: str
    c_text: str


def _join_nonempty(parts: list[str]) -> str:
    return " ".join(p for p in parts if p)


def build_inputs(
    q: Question,
    c: Choice,
    bundle: EvidenceBundle,
    dict_store: DictStore | None = None,
    caps: TokenCaps = TokenCaps(),
) -> EncodedInput:
    """Assemble the three encoder inputs for one (question, choice) pair.

    q = concept explanation + question stem; a = choice text + choice
    explanation; c = Wikipedia then ConceptNet evidence texts joined by " ; ".
    Explanations come from the store when given, otherwise from the bundle's
    own Dictionary items. Token caps drop from the right of c first.
    """
    if dict_store is not None:
        concept_expl = dict_store.explanation_text(q.question_concept)
        hit = dict_store.phrase_lookup(c.text)
        choice_expl = hit[1] if hit else None
    else:
        concept_expl, choice_expl = bundle.dictionary_explanations(q.question_concept, c.text)

    q_text = _join_nonempty([concept_expl or "", q.stem])
    a_text = _join_nonempty([c.text, choice_expl or ""])
    wiki = [it.text for it in bundle.items if it.source == SOURCE_WIKIPEDIA]
    graph = [it.text for it in bundle.items if it.source == SOURCE_CONCEPTNET]
    c_text = " ; ".join(wiki + graph)

    q_text = truncate_tokens(q_text, caps.q)
    a_text = truncate_tokens(a_text, caps.a)
    budget = caps.total - count_tokens(q_text) - count_tokens(a_text)
    c_text = truncate_tokens(c_text, min(caps.c, max(budget, 0)))
    return EncodedInput(q_text, a_text, c_text)


def _hashed_vector(token: str, dim: int, seed: int) -> np.ndarray:
    """Unit-norm vector keyed by a stable hash of the token (process independent)."""
    digest = hashlib.blake2b(f"{seed}\x00{token}".encode("utf-8"), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "big"))
    vec = rng.standard_normal(dim)
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        vec = np.zeros(dim)
        vec[0] = 1.0
        return vec
    return vec / norm


class DeterministicProvider:
    """Seeded hash embeddings: the same token always maps to the same unit vector."""

    kind = "deterministic"

    def __init__(self, dim: int = 64, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    def encode_tokens(self, tokens: list[str]) -> np.ndarray:
        rows = []
        for tok in tokens:
            vec = self._cache.get(tok)
            if vec is None:
                vec = _hashed_vector(tok, self.dim, self.seed)
                self._cache[tok] = vec
            rows.append(vec)
        return np.stack(rows)

    def spec(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "seed": self.seed}


class FileProvider:
    """Word vectors from a text table ("word v1 ... vd" per line); OOV falls back to hash vectors."""

    kind = "file"

    def __init__(self, path: str | Path, fallback_seed: int = 0):
        self.path = str(path)
        self.fallback_seed = fallback_seed
        self.table: dict[str, np.ndarray] = {}
        dim = None
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                parts = line.split()
                if len(parts) < 2:
                    continue
                vec = np.array([float(x) for x in parts[1:]])
                if dim is None:
                    dim = vec.shape[0]
                elif vec.shape[0] != dim:
                    raise ValueError(f"inconsistent vector width in {path}")
                self.table[parts[0]] = vec
        if dim is None:
            raise ValueError(f"no vectors found in {path}")
        self.dim = dim

    def encode_tokens(self, tokens: list[str]) -> np.ndarray:
        rows = [
            self.table.get(tok)
            if tok in self.table
            else _hashed_vector(tok, self.dim, self.fallback_seed)
            for tok in tokens
        ]
        return np.stack(rows)

    def spec(self) -> dict:
        return {"kind": self.kind, "path": self.path, "fallback_seed": self.fallback_seed}


class RemoteProvider:
    """Per-token hidden states from the encoder sidecar's /v1/embed endpoint."""

    kind = "remote"

    def __init__(self, url: str, timeout: float = 60.0):
        self.url = url
        self.client = EncoderClient(url, timeout=timeout)
        self._dim: int | None = None

    @property
    def dim(self) -> int:
        if self._dim is None:
            health = self.client.health()
            self._dim = int(health["dim"])
        return self._dim

    def encode_tokens(self, tokens: list[str]) -> np.ndarray:
        dim, embeddings = self.client.embed([" ".join(tokens)])
        seq = np.array(embeddings[0], dtype=float)
        if seq.ndim != 2 or seq.shape[0] < 1 or seq.shape[1] != dim:
            raise EncoderServiceError(self.url, f"bad embedding shape {seq.shape}")
        self._dim = dim
        return seq

    def spec(self) -> dict:
        return {"kind": self.kind, "url": self.url}


def make_provider(spec: dict, env_url: str | None = None):
    kind = spec.get("kind", "deterministic")
    if kind == "deterministic":
        return DeterministicProvider(int(spec.get("dim", 64)), int(spec.get("seed", 0)))
    if kind == "file":
        return FileProvider(spec["path"], int(spec.get("fallback_seed", 0)))
    if kind == "remote":
        url = env_url or spec.get("url")
        if not url:
            raise ValueError("remote provider needs a url (config or EVIDENTIA_ENCODER_URL)")
        return RemoteProvider(url)
    raise ValueError(f"unknown provider kind: {kind!r}")


def encode(text: str, provider) -> np.ndarray:
    """Hidden-state matrix (rows x dim) for a text; empty text encodes one marker token."""
    tokens = tokenize(text) or [EMPTY_TOKEN]
    seq = np.asarray(provider.encode_tokens(tokens), dtype=float)
    if seq.ndim != 2 or seq.shape[0] < 1:
        raise ValueError(f"provider returned bad shape {seq.shape}")
    if not np.all(np.isfinite(seq)):
        raise ValueError("provider returned non-finite values")
    return seq


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


@dataclass
class AttentionOutput:
    weights: np.ndarray  # (rows of h_a) x (rows of h_x), rows sum to 1
    context: np.ndarray  # (rows of h_a) x dim


def attention(h_x: np.ndarray, h_a: np.ndarray) -> AttentionOutput:
    """Scaled dot-product attention with the choice states as queries."""
    if h_x.ndim != 2 or h_a.ndim != 2 or h_x.shape[1] != h_a.shape[1]:
        raise ValueError(f"incompatible shapes {h_x.shape} and {h_a.shape}")
    d = h_x.shape[1]
    logits = h_a @ h_x.T / np.sqrt(d)
    weights = softmax(logits, axis=-1)
    return AttentionOutput(weights, weights @ h_x)


@dataclass
class ClassifierParams:
    w1: np.ndarray  # (3d, h)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (h,)
    b2: float

    @property
    def d(self) -> int:
        return self.w1.shape[0] // 3

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    @classmethod
    def init(cls, d: int, hidden: int = 128, seed: int = 0) -> "ClassifierParams":
        rng = np.random.default_rng(seed)
        bound = 1.0 / np.sqrt(3 * d)
        w1 = rng.uniform(-bound, bound, size=(3 * d, hidden))
        b1 = rng.uniform(-bound, bound, size=hidden)
        w2 = rng.uniform(-bound, bound, size=hidden)
        b2 = float(rng.uniform(-bound, bound))
        return cls(w1, b1, w2, b2)

    @classmethod
    def zeros(cls, d: int, hidden: int = 128) -> "ClassifierParams":
        return cls(np.zeros((3 * d, hidden)), np.zeros(hidden), np.zeros(hidden), 0.0)

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2)


def score_choice(ctx_q: np.ndarray, ctx_c: np.ndarray, a_vec: np.ndarray, params: ClassifierParams) -> float:
    x = np.concatenate([ctx_q, ctx_c, a_vec])
    if x.shape[0] != params.w1.shape[0]:
        raise ValueError(f"feature width {x.shape[0]} does not match head width {params.w1.shape[0]}")
    hidden = np.maximum(params.w1.T @ x + params.b1, 0.0)
    return float(params.w2 @ hidden + params.b2)


def choice_features(
    q: Question,
    c: Choice,
    bundle: EvidenceBundle,
    provider,
    dict_store: DictStore | None = None,
    caps: TokenCaps = TokenCaps(),
) -> np.ndarray:
    """The (3d,) feature vector for one choice: [pool(O_qa), pool(O_ca), pool(h_a)]."""
    inputs = build_inputs(q, c, bundle, dict_store, caps)
    h_q = encode(inputs.q_text, provider)
    h_a = encode(inputs.a_text, provider)
    h_c = encode(inputs.c_text, provider)
    o_qa = attention(h_q, h_a)
    o_ca = attention(h_c, h_a)
    return np.concatenate([o_qa.context.mean(axis=0), o_ca.context.mean(axis=0), h_a.mean(axis=0)])


@dataclass
class Prediction:
    labels: list[str]
    scores: np.ndarray
    probabilities: np.ndarray
    predicted_label: str


def prediction_from_scores(labels: list[str], scores: np.ndarray) -> Prediction:
    scores = np.asarray(scores, dtype=float)
    probs = softmax(scores)
    best = np.max(scores)
    predicted = min(label for label, s in zip(labels, scores) if s == best)
    return Prediction(list(labels), scores, probs, predicted)


def predict(
    q: Question,
    bundles: list[EvidenceBundle],
    provider,
    params: ClassifierParams,
    dict_store: DictStore | None = None,
    caps: TokenCaps = TokenCaps(),
) -> Prediction:
    """Score every choice and softmax; argmax ties go to the smallest label."""
    by_label = {b.choice_label: b for b in bundles}
    scores = []
    for c in q.choices:
        bundle = by_label.get(c.label)
        if bundle is None:
            raise ValueError(f"no evidence bundle for question {q.id!r} choice {c.label!r}")
        feats = choice_features(q, c, bundle, provider, dict_store, caps)
        d = feats.shape[0] // 3
        scores.append(score_choice(feats[:d], feats[d : 2 * d], feats[2 * d :], params))
    return prediction_from_scores([c.label for c in q.choices], np.array(scores))


@dataclass
class TrainExample:
    question: Question
    bundles: list[EvidenceBundle]
    gold_label: str


@dataclass
class TrainingConfig:
    lr: float = 1e-3
    batch_size: int = 4
    max_steps: int = 6000
    warmup_steps: int = 150
    dropout: float = 0.1
    hidden: int = 128
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def finetune_preset(cls) -> "TrainingConfig":
        # Mirrors the full-encoder fine-tuning schedule (1e-5, batch 4, 6000 steps).
        return cls(lr=1e-5)

    def to_dict(self) -> dict:
        return {
            "lr": self.lr,
            "batch_size": self.batch_size,
            "max_steps": self.max_steps,
            "warmup_steps": self.warmup_steps,
            "dropout": self.dropout,
            "hidden": self.hidden,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingConfig":
        known = {f: d[f] for f in cls.__dataclass_fields__ if f in d}
        return cls(**known)


def example_features(
    example: TrainExample,
    provider,
    dict_store: DictStore | None = None,
    caps: TokenCaps = TokenCaps(),
) -> tuple[np.ndarray, int]:
    """Feature matrix (choices x 3d) and gold index for one training example."""
    by_label = {b.choice_label: b for b in example.bundles}
    rows = []
    gold_idx = None
    for i, c in enumerate(example.question.choices):
        bundle = by_label.get(c.label)
        if bundle is None:
            raise ValueError(f"no bundle for question {example.question.id!r} choice {c.label!r}")
        rows.append(choice_features(example.question, c, bundle, provider, dict_store, caps))
        if c.label == example.gold_label:
            gold_idx = i
    if gold_idx is None:
        raise ValueError(f"gold label {example.gold_label!r} not among choices of {example.question.id!r}")
    return np.stack(rows), gold_idx


def loss_and_grads(
    params: ClassifierParams,
    feature_sets: list[np.ndarray],
    gold_indices: list[int],
    dropout_masks: list[np.ndarray] | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over examples, with analytic gradients for the head.

    dropout_masks, when given, hold the already-scaled inverted-dropout masks
    (one (choices x hidden) array per example).
    """
    n = len(feature_sets)
    grads = {
        "w1": np.zeros_like(params.w1),
        "b1": np.zeros_like(params.b1),
        "w2": np.zeros_like(params.w2),
        "b2": np.zeros(1),
    }
    total = 0.0
    for idx, (feats, gold) in enumerate(zip(feature_sets, gold_indices)):
        z = feats @ params.w1 + params.b1  # (choices, hidden)
        hidden = np.maximum(z, 0.0)
        mask = dropout_masks[idx] if dropout_masks is not None else None
        dropped = hidden * mask if mask is not None else hidden
        scores = dropped @ params.w2 + params.b2
        probs = softmax(scores)
        total += -np.log(max(probs[gold], 1e-300))

        dscores = probs.copy()
        dscores[gold] -= 1.0
        grads["w2"] += dropped.T @ dscores
        grads["b2"][0] += dscores.sum()
        dhidden = np.outer(dscores, params.w2)
        if mask is not None:
            dhidden = dhidden * mask
        dz = dhidden * (z > 0.0)
        grads["w1"] += feats.T @ dz
        grads["b1"] += dz.sum(axis=0)
    for key in grads:
        grads[key] /= n
    return total / n, grads


def train(
    dataset: list[TrainExample],
    provider,
    hyper: TrainingConfig = TrainingConfig(),
    dict_store: DictStore | None = None,
    caps: TokenCaps = TokenCaps(),
    loss_log: list[float] | None = None,
) -> ClassifierParams:
    """Adam over the head's parameters; embeddings stay frozen.

    Deterministic for a fixed seed: initialization, epoch shuffling, and
    dropout masks all draw from one seeded generator. loss_log, when given,
    receives the pre-update batch loss at every step (index 0 = initial loss).
    """
    if not dataset:
        raise ValueError("empty training dataset")
    features = []
    golds = []
    for example in dataset:
        feats, gold = example_features(example, provider, dict_store, caps)
        features.append(feats)
        golds.append(gold)
    d = features[0].shape[1] // 3

    rng = np.random.default_rng(hyper.seed)
    params = ClassifierParams.init(d, hyper.hidden, seed=hyper.seed)
    m = {k: np.zeros_like(v) for k, v in (("w1", params.w1), ("b1", params.b1), ("w2", params.w2))}
    m["b2"] = np.zeros(1)
    v = {k: np.zeros_like(val) for k, val in m.items()}

    order: list[int] = []
    step = 0
    while step < hyper.max_steps:
        while len(order) < hyper.batch_size:
            order.extend(rng.permutation(len(dataset)).tolist())
        batch = [order.pop(0) for _ in range(hyper.batch_size)]
        batch_feats = [features[i] for i in batch]
        batch_golds = [golds[i] for i in batch]
        masks = None
        if hyper.dropout > 0.0:
            keep = 1.0 - hyper.dropout
            masks = [
                (rng.random((feats.shape[0], hyper.hidden)) < keep).astype(float) / keep
                for feats in batch_feats
            ]
        loss, grads = loss_and_grads(params, batch_feats, batch_golds, masks)
        if not np.isfinite(loss):
            raise RuntimeError(f"non-finite loss {loss!r} at step {step}")
        if loss_log is not None:
            loss_log.append(float(loss))

        step += 1
        lr = hyper.lr * min(1.0, step / hyper.warmup_steps) if hyper.warmup_steps > 0 else hyper.lr
        tensors = {"w1": params.w1, "b1": params.b1, "w2": params.w2, "b2": np.array([params.b2])}
        for key, g in grads.items():
            m[key] = hyper.beta1 * m[key] + (1 - hyper.beta1) * g
            v[key] = hyper.beta2 * v[key] + (1 - hyper.beta2) * g * g
            m_hat = m[key] / (1 - hyper.beta1**step)
            v_hat = v[key] / (1 - hyper.beta2**step)
            tensors[key] = tensors[key] - lr * m_hat / (np.sqrt(v_hat) + hyper.eps)
        params = ClassifierParams(tensors["w1"], tensors["b1"], tensors["w2"], float(tensors["b2"][0]))
    return params


def save_model(params: ClassifierParams, provider_spec: dict, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "d": params.d,
        "h": params.hidden,
        "W1": params.w1.tolist(),
        "b1": params.b1.tolist(),
        "W2": params.w2.tolist(),
        "b2": params.b2,
        "provider": provider_spec,
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> tuple[ClassifierParams, dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format in {path}")
    params = ClassifierParams(
        np.array(payload["W1"], dtype=float),
        np.array(payload["b1"], dtype=float),
        np.array(payload["W2"], dtype=float),
        float(payload["b2"]),
    )
    return params, payload.get("provider", {"kind": "deterministic"})
