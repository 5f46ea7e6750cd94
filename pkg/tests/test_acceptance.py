"""Acceptance suite: one test per release criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
"""

import json
import random
import time

import numpy as np

from evidentia import demo, dictionary, kg, textindex
from evidentia.cli import main
from evidentia.fusion import (
    ClassifierParams,
    DeterministicProvider,
    TrainingConfig,
    attention,
    loss_and_grads,
    prediction_from_scores,
    train,
)
from evidentia.pipeline import (
    PipelineConfig,
    build_examples,
    evaluate_bundles,
    load_dataset,
    make_scorer,
    retrieve_dataset,
)
from evidentia.question import QuestionType, detect_question_type
from evidentia.retrieval import (
    SOURCE_WIKIPEDIA,
    RetrievalConfig,
    Stores,
    connecting_paths,
    retrieve_all,
)

from test_fusion import synthetic_separable_dataset, training_accuracy
from test_retrieval import oracle_paths, random_graph
from test_textindex import brute_force_bm25, brute_force_counts, global_sentence_ranking, random_corpus


def _pass(line: str) -> None:
    print(f"ACCEPTANCE PASS: {line}")


class TestAcceptance:
    def test_fixture_end_to_end(self, farmland_question, farmland_stores):
        started = time.monotonic()
        cfg = PipelineConfig()
        scorer = make_scorer(cfg, farmland_stores)
        bundles = retrieve_all(farmland_question, farmland_stores, cfg.retrieval, scorer)
        midwest = next(b for b in bundles if b.choice_label == "A")
        texts = {it.text for it in midwest.items}
        assert "farmland AtLocation midwest" in texts
        assert "farmland AtLocation illinois; illinois PartOf midwest" in texts
        assert "farmland: land that is used for or is suitable for farming" in texts
        assert (
            "midwest: an area in the US that includes Ohio, Indiana, Michigan, Illinois, "
            "Iowa, Wisconsin, Minnesota, Nebraska, Missouri, and Kansas"
        ) in texts
        assert sum(1 for it in midwest.items if it.source == SOURCE_WIKIPEDIA) >= 1
        elapsed = time.monotonic() - started
        assert elapsed < 1.0
        _pass(f"fixture end-to-end retrieval returns the planted evidence in {elapsed:.3f}s")

    def test_graph_retrieval_oracle_equivalence(self):
        started = time.monotonic()
        rng = random.Random(1234)
        trials = 0
        for _ in range(100):
            graph, nodes, relations = random_graph(rng, max_nodes=100, max_edges=400)
            q_nodes = rng.sample(nodes, rng.randint(1, 3))
            c_nodes = rng.sample(nodes, rng.randint(1, 3))
            hint = set(rng.sample(relations, 2)) if rng.random() < 0.5 else None
            max_hops = rng.randint(1, 3)
            got = set(connecting_paths(graph, q_nodes, c_nodes, hint, max_hops, per_node_cap=None))
            want = oracle_paths(graph, q_nodes, c_nodes, hint, max_hops)
            assert got == want
            trials += 1
        elapsed = time.monotonic() - started
        assert trials >= 100
        assert elapsed < 30.0
        _pass(f"path sets equal brute-force enumeration on {trials} random graphs in {elapsed:.1f}s")

    def test_bm25_oracle(self):
        corpus = random_corpus(n_docs=50, seed=77)
        rng = random.Random(7)
        vocab = [f"w{i}" for i in range(120)]
        checked = 0
        for granularity in ("paragraph", "sentence"):
            index = textindex.build_index(corpus, granularity)
            counts = brute_force_counts(corpus, granularity)
            for _ in range(10):
                query = rng.choices(vocab, k=rng.randint(1, 6))
                for unit_id in range(index.n_units):
                    got = textindex.bm25_score(index, query, unit_id)
                    want = brute_force_bm25(counts, query, unit_id)
                    assert abs(got - want) <= 1e-9
                    checked += 1
        store = textindex.TextStore(corpus)
        for _ in range(10):
            query = " ".join(rng.choices(vocab, k=4))
            two_stage = store.retrieve(query, top_paragraphs=None, top_sentences=10)
            oracle = global_sentence_ranking(store, query, 10)
            assert [(h.score, h.ref.key()) for h in two_stage] == [(s, k) for s, k, _ in oracle]
        _pass(f"{checked} (query, unit) scores match the formula oracle within 1e-9; "
              "unnarrowed two-stage equals the global ranking")

    def test_attention_softmax_properties(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            rows_x = int(rng.integers(1, 7))
            rows_a = int(rng.integers(1, 7))
            dim = int(rng.integers(1, 9))
            h_x = rng.normal(size=(rows_x, dim)) * 3
            h_a = rng.normal(size=(rows_a, dim)) * 3
            out = attention(h_x, h_a)
            assert np.all(np.abs(out.weights.sum(axis=1) - 1.0) <= 1e-6)
            lo, hi = h_x.min(axis=0), h_x.max(axis=0)
            assert np.all(out.context >= lo - 1e-9)
            assert np.all(out.context <= hi + 1e-9)

            labels = [chr(65 + i) for i in range(int(rng.integers(2, 6)))]
            scores = rng.normal(size=len(labels)) * 5
            shift = float(rng.normal()) * 10
            assert (
                prediction_from_scores(labels, scores).predicted_label
                == prediction_from_scores(labels, scores + shift).predicted_label
            )
        _pass("1000 random instances satisfy weight, convex-hull, and shift-invariance properties")

    def test_gradient_check(self):
        from test_fusion import TestGradients

        d, hidden = 4, 3
        rng = np.random.default_rng(5150)
        checker = TestGradients()
        for trial in range(50):
            n_choices = int(rng.integers(2, 5))
            features = [rng.normal(size=(n_choices, 3 * d))]
            golds = [int(rng.integers(0, n_choices))]
            params = ClassifierParams.init(d, hidden, seed=trial + 1000)
            _, analytic = loss_and_grads(params, features, golds)
            numeric = checker.numeric_grads(params, features, golds)
            for key in analytic:
                a, n = analytic[key].ravel(), numeric[key].ravel()
                diff = np.linalg.norm(a - n)
                denom = np.linalg.norm(a) + np.linalg.norm(n)
                assert diff <= 1e-10 or diff / denom <= 1e-4
        _pass("analytic gradients match central finite differences (rel err <= 1e-4, 50 instances)")

    def test_learnability(self):
        started = time.monotonic()
        examples = synthetic_separable_dataset(n=40, dim=16)
        provider = DeterministicProvider(dim=16)
        steps_per_epoch = len(examples) // 4
        hyper = TrainingConfig(
            lr=1e-3, batch_size=4, max_steps=200 * steps_per_epoch,
            warmup_steps=150, dropout=0.1, hidden=32, seed=0,
        )
        params = train(examples, provider, hyper)
        accuracy = training_accuracy(examples, provider, params)
        elapsed = time.monotonic() - started
        assert accuracy >= 0.95
        assert elapsed < 60.0
        _pass(f"separable dataset reaches {accuracy:.0%} training accuracy in {elapsed:.1f}s")

    def test_ablation_direction(self, tmp_path):
        paths = demo.write_benchmark(tmp_path, n_eval=20, n_train=60)
        stores = Stores(
            kg.ingest_conceptnet(paths["conceptnet"]),
            textindex.ingest_corpus(paths["wiki"]),
            dictionary.ingest_dictionary(paths["dict"]),
        )
        eval_records = load_dataset(paths["data"])
        train_records = load_dataset(paths["train_data"])
        cfg = PipelineConfig()
        cfg.training = TrainingConfig(
            lr=1e-3, batch_size=4, max_steps=1200, warmup_steps=150,
            dropout=0.1, hidden=96, seed=0,
        )
        bundles = retrieve_dataset(train_records, stores, cfg, make_scorer(cfg, stores))
        provider = DeterministicProvider(dim=64, seed=0)
        params = train(build_examples(train_records, bundles), provider, cfg.training)

        def accuracy(retrieval_cfg, subset=None):
            run_cfg = PipelineConfig()
            run_cfg.retrieval = retrieval_cfg
            records = eval_records
            if subset is not None:
                records = [r for r in records if subset(int(r.id.split("-")[1]))]
            run_bundles = retrieve_dataset(records, stores, run_cfg, make_scorer(run_cfg, stores))
            return evaluate_bundles(records, run_bundles, params, provider).accuracy

        all_on = accuracy(RetrievalConfig())
        all_off = accuracy(
            RetrievalConfig(use_conceptnet=False, use_wiki=False, use_dict=False)
        )
        subset_on = accuracy(RetrievalConfig(), demo.benchmark_is_dict_only)
        subset_dict_off = accuracy(RetrievalConfig(use_dict=False), demo.benchmark_is_dict_only)
        assert all_on > all_off
        assert subset_dict_off < subset_on
        _pass(
            f"planted benchmark: all sources {all_on:.2f} > none {all_off:.2f}; "
            f"dictionary-only subset {subset_on:.2f} -> {subset_dict_off:.2f} with dictionary off"
        )

    def test_dataset_loader_sizes_and_type_counts(self, tmp_path):
        dev = tmp_path / "dev.jsonl"
        train_path = tmp_path / "train.jsonl"
        assert demo.write_synthetic_dataset(dev, demo.DEV_TYPE_COUNTS, "dev") == 1221
        assert demo.write_synthetic_dataset(train_path, demo.TRAIN_TYPE_COUNTS, "train") == 9741
        dev_records = load_dataset(dev)
        train_records = load_dataset(train_path)
        assert len(dev_records) == 1221
        assert len(train_records) == 9741
        for records, expected in ((dev_records, demo.DEV_TYPE_COUNTS),
                                  (train_records, demo.TRAIN_TYPE_COUNTS)):
            counts = {t: 0 for t in QuestionType}
            for record in records:
                counts[detect_question_type(record.stem)] += 1
            assert {t.value: n for t, n in counts.items() if n} == expected
        _pass("replica splits load to exactly 1221/9741 records with exact per-type counts")

    def test_pipeline_determinism(self, tmp_path):
        def run(base):
            base.mkdir()
            paths = demo.write_farmland_fixture(base / "inputs")
            stores = base / "stores"
            for source in ("conceptnet", "wiki", "dict"):
                assert main(["ingest", source, "--input", str(paths[source]),
                             "--out", str(stores / source)]) == 0
            config = base / "config.json"
            config.write_text(json.dumps({
                "training": {"max_steps": 40, "hidden": 16, "seed": 11},
            }), encoding="utf-8")
            evidence, model, report = base / "e.jsonl", base / "m.json", base / "r.json"
            assert main(["retrieve", "--data", str(paths["data"]), "--stores", str(stores),
                         "--config", str(config), "--out", str(evidence)]) == 0
            assert main(["train", "--data", str(paths["data"]), "--evidence", str(evidence),
                         "--config", str(config), "--out", str(model)]) == 0
            assert main(["evaluate", "--data", str(paths["data"]), "--evidence", str(evidence),
                         "--model", str(model), "--config", str(config),
                         "--report", str(report)]) == 0
            return evidence.read_bytes(), model.read_bytes(), report.read_bytes()

        assert run(tmp_path / "run1") == run(tmp_path / "run2")
        _pass("full pipeline rerun produces byte-identical evidence, model, and report files")
