"""Deterministic text embeddings for retrieval.

The default backend is feature hashing: lowercase, split on non-alphanumeric
characters, hash word unigrams and per-word character trigrams into 256
signed buckets (keyed blake2b, fixed seed), then L2-normalize.  The seed is
part of the persisted-embedding contract and must not change.  An external
HTTP backend with the same output contract can be selected via the
``GRAPHCHAIN_EMBED_BACKEND`` environment variable (``hashing`` or
``external:<url>``).
"""

from __future__ import annotations

import hashlib
import os
import re
from typing import Protocol

import numpy as np

EMBED_DIM = 256
HASH_SEED = 0x5EED
_KEY = HASH_SEED.to_bytes(8, "little")
_SPLIT = re.compile(r"[^0-9a-z]+")

ENV_BACKEND = "GRAPHCHAIN_EMBED_BACKEND"


class EmbeddingBackendError(RuntimeError):
    """External backend failure; callers may retry."""


class EmbeddingBackend(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


def _features(text: str):
    for token in _SPLIT.split(text.lower()):
        if not token:
            continue
        yield "w:" + token
        for i in range(len(token) - 2):
            yield "t:" + token[i : i + 3]


def _normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        out = np.zeros(len(vec))
        out[0] = 1.0  # zero input maps to the first basis vector
        return out
    return vec / norm


class HashingEmbedder:
    """Signed feature hashing onto a fixed number of buckets."""

    def __init__(self, dim: int = EMBED_DIM):
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        for feature in _features(text):
            digest = hashlib.blake2b(feature.encode(), key=_KEY, digest_size=8).digest()
            idx = int.from_bytes(digest[:4], "little") % self.dim
            sign = 1.0 if digest[4] & 1 == 0 else -1.0
            vec[idx] += sign
        return _normalize(vec)


class ExternalEmbedder:
    """Client for an embedding service: POST {"text": ...} -> {"values": [...]}.

    Output is re-normalized so the unit-norm contract holds regardless of
    the service."""

    def __init__(self, url: str, dim: int = EMBED_DIM, timeout: float = 10.0):
        self.url = url
        self.dim = dim
        self.timeout = timeout

    def embed(self, text: str) -> np.ndarray:
        import httpx

        try:
            resp = httpx.post(self.url, json={"text": text}, timeout=self.timeout)
            resp.raise_for_status()
            values = resp.json()["values"]
        except Exception as exc:
            raise EmbeddingBackendError(f"embedding service at {self.url} failed: {exc}") from exc
        vec = np.asarray(values, dtype=float)
        if vec.shape != (self.dim,):
            raise EmbeddingBackendError(
                f"embedding service returned shape {vec.shape}, expected ({self.dim},)"
            )
        return _normalize(vec)


def embedder_from_env(default_dim: int = EMBED_DIM) -> EmbeddingBackend:
    setting = os.environ.get(ENV_BACKEND, "hashing")
    if setting == "hashing":
        return HashingEmbedder(default_dim)
    if setting.startswith("external:"):
        return ExternalEmbedder(setting.split(":", 1)[1], default_dim)
    raise ValueError(f"unrecognized {ENV_BACKEND} value {setting!r}")


def embed_text(text: str) -> np.ndarray:
    """One-off hashing embedding (module-level convenience)."""
    return HashingEmbedder().embed(text)
