"""Desk-scale fixture data: the farmland demo question, synthetic dataset
replicas sized like the public splits, and a planted-evidence mini-benchmark.

Everything here is deterministic so tests and scripts can rebuild identical
inputs from scratch.
"""

from __future__ import annotations

import json
from pathlib import Path

# One worked multiple-choice question with evidence available in all three sources.
FARMLAND_QUESTION = {
    "id": "demo-farmland",
    "answerKey": "A",
    "question": {
        "question_concept": "farmland",
        "stem": "James was looking for a good place to buy farmland. Where might he look?",
        "choices": [
            {"label": "A", "text": "midwest"},
            {"label": "B", "text": "countryside"},
            {"label": "C", "text": "estate"},
            {"label": "D", "text": "farming areas"},
            {"label": "E", "text": "illinois"},
        ],
    },
}

# Simplified 4-column dump (head, relation, tail, weight).
FARMLAND_CONCEPTNET = """\
farmland\tAtLocation\tmidwest\t1.0
farmland\tAtLocation\tcountryside\t1.0
farmland\tAtLocation\tillinois\t1.0
illinois\tPartOf\tmidwest\t1.0
countryside\tIsA\tplace\t1.0
estate\tRelatedTo\tplace\t1.0
countryside\tRelatedTo\tfarm\t1.0
buy_house\tHasPrerequisite\tsee_real_estate_agent\t1.0
"""

FARMLAND_WIKI_DOCS = [
    {
        "title": "Farmland",
        "paragraphs": [
            "Farmland in the midwest generally refers to agricultural land, "
            "or land currently used for the purposes of farming."
        ],
    },
    {
        "title": "Countryside Stewardship Scheme",
        "paragraphs": [
            "In a five-year pilot project by the Countryside Commission in 1991, the scheme "
            "aimed to improve the environmental value of farmland throughout England."
        ],
    },
    {
        "title": "Illinois",
        "paragraphs": [
            "Farmland in Illinois is valued, as of August 2018, at $26,000 a hectare."
        ],
    },
]

FARMLAND_DICT_ENTRIES = [
    {"headword": "farmland", "explanations": ["land that is used for or is suitable for farming"]},
    {
        "headword": "midwest",
        "explanations": [
            "an area in the US that includes Ohio, Indiana, Michigan, Illinois, Iowa, "
            "Wisconsin, Minnesota, Nebraska, Missouri, and Kansas"
        ],
    },
    {
        "headword": "countryside",
        "explanations": [
            "land not in towns, cities, or industrial areas, that is either used for "
            "farming or left in its natural condition"
        ],
    },
    {
        "headword": "estate",
        "explanations": [
            "a large area of land in the country that is owned by a family or an "
            "organization and is often used for growing crops or raising animals"
        ],
    },
    {"headword": "farming", "explanations": ["the activity of working on a farm or organizing the work there"]},
    {
        "headword": "illinois",
        "explanations": [
            "a state in the central US, whose capital city is Springfield and whose "
            "largest city is Chicago"
        ],
    },
]


def write_farmland_fixture(out_dir: str | Path) -> dict[str, Path]:
    """Write the demo source files; returns the path of each one."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "conceptnet": out / "conceptnet.tsv",
        "wiki": out / "wiki.jsonl",
        "dict": out / "dict.jsonl",
        "data": out / "questions.jsonl",
    }
    paths["conceptnet"].write_text(FARMLAND_CONCEPTNET, encoding="utf-8")
    paths["wiki"].write_text(
        "".join(json.dumps(d, ensure_ascii=False) + "\n" for d in FARMLAND_WIKI_DOCS), encoding="utf-8"
    )
    paths["dict"].write_text(
        "".join(json.dumps(e, ensure_ascii=False) + "\n" for e in FARMLAND_DICT_ENTRIES), encoding="utf-8"
    )
    paths["data"].write_text(json.dumps(FARMLAND_QUESTION, ensure_ascii=False) + "\n", encoding="utf-8")
    return paths


# Per-type question counts of the public train/dev splits, used to size replicas.
TRAIN_TYPE_COUNTS = {"how": 227, "what": 6142, "where": 2885, "when": 67, "why": 243, "other": 177}
DEV_TYPE_COUNTS = {"how": 30, "what": 784, "where": 345, "when": 10, "why": 35, "other": 17}

_STEM_TEMPLATES = {
    "how": "How would a person carry the bundle number {i} across the river?",
    "what": "What would a squirrel store inside container number {i}?",
    "where": "Where would you keep a spare ladder numbered {i}?",
    "when": "When does the machine numbered {i} finish its cycle?",
    "why": "Why did the villager polish lantern number {i} every evening?",
    "other": "Name the brightest beacon found in sector number {i}.",
}

_CHOICE_LABELS = ["A", "B", "C", "D", "E"]


def synthetic_records(type_counts: dict[str, int], prefix: str) -> list[dict]:
    """Size-faithful replica records; each stem contains exactly one trigger token."""
    records = []
    i = 0
    for qtype in ("how", "what", "where", "when", "why", "other"):
        for _ in range(type_counts.get(qtype, 0)):
            stem = _STEM_TEMPLATES[qtype].format(i=i)
            choices = [
                {"label": label, "text": f"item{i}{label.lower()}"} for label in _CHOICE_LABELS
            ]
            records.append(
                {
                    "id": f"{prefix}-{i:05d}",
                    "answerKey": _CHOICE_LABELS[i % len(_CHOICE_LABELS)],
                    "question": {
                        "question_concept": f"concept{i}",
                        "stem": stem,
                        "choices": choices,
                    },
                }
            )
            i += 1
    return records


def write_synthetic_dataset(path: str | Path, type_counts: dict[str, int], prefix: str) -> int:
    records = synthetic_records(type_counts, prefix)
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return len(records)


# ---------------------------------------------------------------------------
# Planted-evidence mini-benchmark.
#
# Where-type questions with 3 choices. For "graph" questions the gold choice is
# reachable from the concept by a 2-hop path through a relay node (hop-1 edges
# off the concept are shared by every choice's bundle, so only a multi-hop
# connection separates the gold choice); for "dict-only" questions the gold
# choice's dictionary explanation carries the marker word and nothing else
# separates the choices. Disabling sources removes exactly those signals. The
# training split uses disjoint question indices (unseen concepts and choice
# words), so a trained head can only rely on the planted signals at evaluation
# time.
# ---------------------------------------------------------------------------

MARKER_WORD = "beacon"
TRAIN_START = 100


def _bench_choice_text(i: int, k: int) -> str:
    return f"option{i:03d}{'abc'[k]}"


def benchmark_records(n_questions: int = 20, start: int = 0) -> list[dict]:
    records = []
    for i in range(start, start + n_questions):
        gold = i % 3
        records.append(
            {
                "id": f"bench-{i:03d}",
                "answerKey": "ABC"[gold],
                "question": {
                    "question_concept": f"thing{i:03d}",
                    "stem": f"Where could the thing{i:03d} be stored near the old mill?",
                    "choices": [
                        {"label": "ABC"[k], "text": _bench_choice_text(i, k)} for k in range(3)
                    ],
                },
            }
        )
    return records


def benchmark_is_dict_only(i: int) -> bool:
    return i % 5 in (2, 4)


def benchmark_sources(n_questions: int = 20, start: int = 0) -> dict[str, list[str]]:
    """Source-file lines (conceptnet/wiki/dict) for one index range."""
    kg_lines: list[str] = []
    wiki_docs: list[str] = []
    dict_lines: list[str] = []
    for i in range(start, start + n_questions):
        concept = f"thing{i:03d}"
        gold = i % 3
        if benchmark_is_dict_only(i):
            for k in range(3):
                quality = MARKER_WORD if k == gold else "plain"
                dict_lines.append(
                    json.dumps(
                        {
                            "headword": _bench_choice_text(i, k),
                            "explanations": [f"the {quality} variant of the quarry stone"],
                        }
                    )
                )
        else:
            gold_text = _bench_choice_text(i, gold)
            relay = f"relay{i:03d}"
            kg_lines.append(f"{concept}\tAtLocation\t{relay}\t1.0")
            kg_lines.append(f"{relay}\tLocatedNear\t{gold_text}\t1.0")
            wiki_docs.append(
                json.dumps(
                    {
                        "title": f"Survey grid {i:03d}",
                        "paragraphs": [
                            "Regional archives hold assorted annotations from field crews."
                        ],
                    }
                )
            )
    return {"conceptnet": kg_lines, "wiki": wiki_docs, "dict": dict_lines}


def write_benchmark(
    out_dir: str | Path, n_eval: int = 20, n_train: int = 40, train_start: int = TRAIN_START
) -> dict[str, Path]:
    """Write eval and train splits plus source files covering both index ranges."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    eval_sources = benchmark_sources(n_eval, start=0)
    train_sources = benchmark_sources(n_train, start=train_start)
    paths = {
        "conceptnet": out / "bench_conceptnet.tsv",
        "wiki": out / "bench_wiki.jsonl",
        "dict": out / "bench_dict.jsonl",
        "data": out / "bench_questions.jsonl",
        "train_data": out / "bench_train_questions.jsonl",
    }
    for key in ("conceptnet", "wiki", "dict"):
        lines = eval_sources[key] + train_sources[key]
        paths[key].write_text("\n".join(lines) + "\n", encoding="utf-8")
    with paths["data"].open("w", encoding="utf-8") as fh:
        for record in benchmark_records(n_eval, start=0):
            fh.write(json.dumps(record) + "\n")
    with paths["train_data"].open("w", encoding="utf-8") as fh:
        for record in benchmark_records(n_train, start=train_start):
            fh.write(json.dumps(record) + "\n")
    return paths
