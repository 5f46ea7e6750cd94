#!/usr/bin/env python3
"""Source-toggle ablation on the planted-evidence mini-benchmark.

Trains the head on a disjoint split with all sources enabled, then evaluates
the 20-question benchmark under each toggle combination and prints the
accuracy table.
"""

import argparse
import tempfile
from pathlib import Path

from evidentia import demo, dictionary, kg, textindex
from evidentia.fusion import DeterministicProvider, TrainingConfig, train
from evidentia.pipeline import (
    PipelineConfig,
    build_examples,
    evaluate_bundles,
    load_dataset,
    make_scorer,
    retrieve_dataset,
)
from evidentia.retrieval import RetrievalConfig, Stores


def run(workdir: Path, n_train: int) -> None:
    paths = demo.write_benchmark(workdir, n_eval=20, n_train=n_train)
    stores = Stores(
        kg.ingest_conceptnet(paths["conceptnet"]),
        textindex.ingest_corpus(paths["wiki"]),
        dictionary.ingest_dictionary(paths["dict"]),
    )
    eval_records = load_dataset(paths["data"])
    train_records = load_dataset(paths["train_data"])

    cfg = PipelineConfig()
    cfg.training = TrainingConfig(
        lr=1e-3, batch_size=4, max_steps=1200, warmup_steps=150, dropout=0.1, hidden=96, seed=0
    )
    bundles = retrieve_dataset(train_records, stores, cfg, make_scorer(cfg, stores))
    provider = DeterministicProvider(dim=64, seed=0)
    params = train(build_examples(train_records, bundles), provider, cfg.training)

    variants = [
        ("none", RetrievalConfig(use_conceptnet=False, use_wiki=False, use_dict=False)),
        ("+ graph", RetrievalConfig(use_wiki=False, use_dict=False)),
        ("+ corpus", RetrievalConfig(use_conceptnet=False, use_dict=False)),
        ("+ graph + corpus", RetrievalConfig(use_dict=False)),
        ("+ dictionary", RetrievalConfig(use_conceptnet=False, use_wiki=False)),
        ("all sources", RetrievalConfig()),
    ]
    print(f"{'sources':<20} accuracy")
    for name, retrieval_cfg in variants:
        run_cfg = PipelineConfig()
        run_cfg.retrieval = retrieval_cfg
        run_bundles = retrieve_dataset(eval_records, stores, run_cfg, make_scorer(run_cfg, stores))
        report = evaluate_bundles(eval_records, run_bundles, params, provider)
        print(f"{name:<20} {report.accuracy:.3f}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", type=Path, default=None)
    parser.add_argument("--train-questions", type=int, default=60)
    args = parser.parse_args()
    run(args.workdir or Path(tempfile.mkdtemp(prefix="evidentia-ablation-")), args.train_questions)
