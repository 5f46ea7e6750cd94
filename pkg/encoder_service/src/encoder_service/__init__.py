"""HTTP sidecar serving per-token transformer embeddings and relevance scores."""

__version__ = "0.1.0"
