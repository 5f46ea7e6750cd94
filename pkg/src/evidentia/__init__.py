"""Multi-source evidence retrieval and answer fusion for multiple-choice QA."""

__version__ = "0.1.0"
