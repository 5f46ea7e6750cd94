#!/usr/bin/env python3
"""Materialize a small seeded BERT-style checkpoint for offline serving.

See encoder_service.tiny for the construction details. Where a real checkpoint
is available, serve that instead; this exists for environments with no model
hub access.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from encoder_service.tiny import build

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--heads", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    build(args.out, args.dim, args.layers, args.heads, args.seed)
