"""HTTP client for the optional encoder sidecar (/v1/embed, /v1/score, /health)."""

from __future__ import annotations

import requests

ENCODER_URL_ENV = "EVIDENTIA_ENCODER_URL"


class EncoderServiceError(Exception):
    """Carries the failing endpoint and underlying cause."""

    def __init__(self, endpoint: str, cause: Exception | str):
        self.endpoint = endpoint
        self.cause = cause
        super().__init__(f"encoder service request to {endpoint} failed: {cause}")


def _post_json(url: str, payload: dict, timeout: float) -> dict:
    try:
        resp = requests.post(url, json=payload, timeout=timeout)
        resp.raise_for_status()
        return resp.json()
    except (requests.RequestException, ValueError) as exc:
        raise EncoderServiceError(url, exc) from exc


class EncoderClient:
    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def health(self) -> dict:
        url = f"{self.base_url}/health"
        try:
            resp = requests.get(url, timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise EncoderServiceError(url, exc) from exc

    def embed(self, texts: list[str]) -> tuple[int, list[list[list[float]]]]:
        url = f"{self.base_url}/v1/embed"
        body = _post_json(url, {"texts": texts}, self.timeout)
        try:
            return int(body["dim"]), body["embeddings"]
        except (KeyError, TypeError) as exc:
            raise EncoderServiceError(url, f"malformed response: {exc}") from exc

    def score(self, query: str, candidates: list[str]) -> list[float]:
        url = f"{self.base_url}/v1/score"
        body = _post_json(url, {"query": query, "candidates": candidates}, self.timeout)
        try:
            scores = [float(s) for s in body["scores"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise EncoderServiceError(url, f"malformed response: {exc}") from exc
        if len(scores) != len(candidates):
            raise EncoderServiceError(url, "score count does not match candidate count")
        return scores
