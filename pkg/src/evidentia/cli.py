"""Command-line interface: ingest, retrieve, train, predict, evaluate."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dictionary, kg, textindex
from .fusion import load_model, make_provider, save_model
from .pipeline import (
    DatasetError,
    PipelineConfig,
    PipelineError,
    encoder_url_from_env,
    load_dataset,
    load_stores,
    make_pipeline_provider,
    make_scorer,
    evaluate_bundles,
    predict_bundles,
    retrieve_dataset,
    train_from_bundles,
)
from .remote import EncoderServiceError
from .retrieval import dump_bundles, load_bundles


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evidentia",
        description="Multi-source evidence retrieval and answer fusion for multiple-choice QA.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="build a persistent store from a source file")
    ingest_sub = ingest.add_subparsers(dest="source", required=True)
    for source in ("conceptnet", "wiki", "dict"):
        p = ingest_sub.add_parser(source)
        p.add_argument("--input", required=True)
        p.add_argument("--out", required=True)
        if source == "conceptnet":
            p.add_argument("--language", default="en")

    retrieve = sub.add_parser("retrieve", help="write evidence bundles for a dataset")
    retrieve.add_argument("--data", required=True)
    retrieve.add_argument("--stores", required=True)
    retrieve.add_argument("--config")
    retrieve.add_argument("--out", required=True)

    train_p = sub.add_parser("train", help="train the scoring head on retrieved evidence")
    train_p.add_argument("--data", required=True)
    train_p.add_argument("--evidence", required=True)
    train_p.add_argument("--config")
    train_p.add_argument("--out", required=True)

    predict_p = sub.add_parser("predict", help="write per-question predictions")
    predict_p.add_argument("--data", required=True)
    predict_p.add_argument("--evidence", required=True)
    predict_p.add_argument("--model", required=True)
    predict_p.add_argument("--config")
    predict_p.add_argument("--out", required=True)

    evaluate_p = sub.add_parser("evaluate", help="score predictions against gold answer keys")
    evaluate_p.add_argument("--data", required=True)
    evaluate_p.add_argument("--evidence", required=True)
    evaluate_p.add_argument("--model", required=True)
    evaluate_p.add_argument("--config")
    evaluate_p.add_argument("--report", required=True)
    return parser


def _load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return PipelineConfig.from_file(path)


def _cmd_ingest(args: argparse.Namespace) -> None:
    out = Path(args.out)
    if args.source == "conceptnet":
        graph = kg.ingest_conceptnet(args.input, language_filter=args.language)
        kg.save_graph(graph, out)
        print(f"ingested {len(graph.assertions)} assertions ({graph.skipped} skipped) -> {out}")
    elif args.source == "wiki":
        store = textindex.ingest_corpus(args.input)
        textindex.save_text_store(store, out)
        print(
            f"indexed {len(store.documents)} documents, "
            f"{store.sentence_index.n_units} sentences ({store.skipped} skipped) -> {out}"
        )
    else:
        store = dictionary.ingest_dictionary(args.input)
        dictionary.save_dict_store(store, out)
        print(f"ingested {len(store)} dictionary entries ({store.skipped} skipped) -> {out}")


def _cmd_retrieve(args: argparse.Namespace) -> None:
    cfg = _load_config(args.config)
    records = load_dataset(args.data)
    stores = load_stores(args.stores, cfg.retrieval)
    scorer = make_scorer(cfg, stores)
    bundles = retrieve_dataset(records, stores, cfg, scorer)
    dump_bundles(bundles, args.out)
    print(f"wrote {len(bundles)} evidence bundles -> {args.out}")


def _cmd_train(args: argparse.Namespace) -> None:
    cfg = _load_config(args.config)
    records = load_dataset(args.data)
    bundles = load_bundles(args.evidence)
    provider = make_pipeline_provider(cfg)
    params = train_from_bundles(records, bundles, provider, cfg)
    save_model(params, provider.spec(), args.out)
    print(f"trained head (d={params.d}, h={params.hidden}) -> {args.out}")


def _resolve_model(path: str):
    params, provider_spec = load_model(path)
    provider = make_provider(provider_spec, encoder_url_from_env())
    return params, provider


def _cmd_predict(args: argparse.Namespace) -> None:
    cfg = _load_config(args.config)
    records = load_dataset(args.data)
    bundles = load_bundles(args.evidence)
    params, provider = _resolve_model(args.model)
    rows = predict_bundles(records, bundles, params, provider, cfg.caps, cfg.workers)
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"wrote {len(rows)} predictions -> {args.out}")


def _cmd_evaluate(args: argparse.Namespace) -> None:
    cfg = _load_config(args.config)
    records = load_dataset(args.data)
    bundles = load_bundles(args.evidence)
    params, provider = _resolve_model(args.model)
    report = evaluate_bundles(records, bundles, params, provider, cfg.caps, cfg.to_dict(), cfg.workers)
    report.save(args.report)
    print(f"accuracy {report.accuracy:.4f} ({report.correct}/{report.n}) -> {args.report}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "ingest": _cmd_ingest,
        "retrieve": _cmd_retrieve,
        "train": _cmd_train,
        "predict": _cmd_predict,
        "evaluate": _cmd_evaluate,
    }
    try:
        handlers[args.command](args)
    except (
        DatasetError,
        PipelineError,
        EncoderServiceError,
        kg.IngestError,
        textindex.CorpusError,
        dictionary.DictionaryError,
        OSError,
        ValueError,
        RuntimeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
