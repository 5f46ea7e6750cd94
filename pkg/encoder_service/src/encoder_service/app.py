"""FastAPI application: /health, /v1/embed, /v1/score over a local transformer.

The model is loaded once per process and used read-only in eval mode, so
identical request bodies always produce identical responses and concurrent
requests are safe.
"""

from __future__ import annotations

import torch
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from transformers import AutoModel, AutoTokenizer

BATCH_SIZE = 32


class EmbedRequest(BaseModel):
    texts: list[str]


class ScoreRequest(BaseModel):
    query: str
    candidates: list[str]


class EncoderBackend:
    """Per-token last hidden states and mean-pooled cosine relevance."""

    def __init__(self, model_dir: str):
        self.tokenizer = AutoTokenizer.from_pretrained(model_dir)
        self.model = AutoModel.from_pretrained(model_dir)
        self.model.eval()
        self.dim = int(self.model.config.hidden_size)

    @torch.no_grad()
    def embed(self, texts: list[str]) -> list[list[list[float]]]:
        sequences: list[list[list[float]]] = []
        for start in range(0, len(texts), BATCH_SIZE):
            batch = texts[start : start + BATCH_SIZE]
            enc = self.tokenizer(
                batch, return_tensors="pt", padding=True, truncation=True, max_length=512
            )
            hidden = self.model(**enc).last_hidden_state
            for row, mask in zip(hidden, enc["attention_mask"]):
                length = int(mask.sum())
                sequences.append(row[:length].tolist())
        return sequences

    @torch.no_grad()
    def pooled(self, texts: list[str]) -> torch.Tensor:
        vectors = []
        for start in range(0, len(texts), BATCH_SIZE):
            batch = texts[start : start + BATCH_SIZE]
            enc = self.tokenizer(
                batch, return_tensors="pt", padding=True, truncation=True, max_length=512
            )
            hidden = self.model(**enc).last_hidden_state
            mask = enc["attention_mask"].unsqueeze(-1).to(hidden.dtype)
            vectors.append((hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0))
        return torch.cat(vectors, dim=0)

    def score(self, query: str, candidates: list[str]) -> list[float]:
        pooled = self.pooled([query] + candidates)
        normed = torch.nn.functional.normalize(pooled, dim=-1)
        return (normed[1:] @ normed[0]).tolist()


def create_app(model_dir: str) -> FastAPI:
    backend = EncoderBackend(model_dir)
    app = FastAPI(title="encoder-service")

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "dim": backend.dim}

    @app.post("/v1/embed")
    def embed(req: EmbedRequest):
        try:
            return {"dim": backend.dim, "embeddings": backend.embed(req.texts)}
        except Exception as exc:  # model/runtime failure
            raise HTTPException(status_code=500, detail=f"embedding failed: {exc}") from exc

    @app.post("/v1/score")
    def score(req: ScoreRequest):
        try:
            return {"scores": backend.score(req.query, req.candidates)}
        except Exception as exc:
            raise HTTPException(status_code=500, detail=f"scoring failed: {exc}") from exc

    return app
