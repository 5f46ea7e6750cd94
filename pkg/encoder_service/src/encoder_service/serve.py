"""CLI entry point: load a local transformer checkpoint and serve it."""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="encoder-service",
        description="Serve per-token embeddings and relevance scores from a local transformer.",
    )
    parser.add_argument("--model", required=True,
                        help="model id or local checkpoint directory (transformers format)")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8601)
    args = parser.parse_args(argv)
    app = create_app(args.model)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
