"""Shared text primitives: tokenization, concept label normalization, token-cap truncation."""

from __future__ import annotations

import re

# Alphanumeric runs; \w minus underscore so "buy_house" splits into two tokens.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters, dropping empties."""
    return _TOKEN_RE.findall(text.lower())


def normalize_concept(text: str) -> str:
    """Canonical concept label: lowercase, whitespace runs joined by single underscores.

    Idempotent, and collapses surface forms differing only in case/whitespace.
    """
    return "_".join(text.lower().split()).strip("_")


def concept_to_text(label: str) -> str:
    """Render a normalized concept label back to a space-separated surface form."""
    return label.replace("_", " ")


def count_tokens(text: str) -> int:
    return len(_TOKEN_RE.findall(text))


def truncate_tokens(text: str, cap: int) -> str:
    """Cut `text` right after its cap-th token (surface form preserved up to the cut)."""
    if cap <= 0:
        return ""
    for i, match in enumerate(_TOKEN_RE.finditer(text)):
        if i == cap - 1:
            return text[: match.end()]
    return text
