"""Embedding providers.

Three kinds: a remote OpenAI-compatible /v1/embeddings endpoint, a text-file
word-vector table (GloVe-style line format, averaged into sentence vectors),
and a fully deterministic offline embedder for tests and fixtures (feature
hashing of word n-grams).
"""

import hashlib
import math
import os
import re
import threading
import time
from dataclasses import dataclass

import requests

from .errors import ConfigError, EmptyEmbeddingError, IntegrityError, ProviderError

EMBED_API_KEY_VAR = "EMBED_API_KEY"
REMOTE_BATCH_SIZE = 64
RETRY_ATTEMPTS = 3
RETRY_BACKOFF_S = 0.25
MAX_IN_FLIGHT = 4


@dataclass
class EmbeddingVector:
    values: list[float]
    dim: int
    provider_id: str

    def __post_init__(self):
        if len(self.values) != self.dim:
            raise IntegrityError(f"vector has {len(self.values)} values, dim says {self.dim}")
        for v in self.values:
            if not math.isfinite(v):
                raise IntegrityError("vector has non-finite values")


def _l2(values):
    return math.sqrt(sum(v * v for v in values))


def _unit(values):
    n = _l2(values)
    if n == 0.0:
        raise IntegrityError("cannot normalize a zero vector")
    return [v / n for v in values]


class DeterministicEmbedder:
    """Feature-hashes word unigrams and bigrams into dim buckets.

    Pure function of the text: stable across runs, platforms, and processes
    (hashlib, not the salted built-in hash).
    """

    kind = "deterministic_test"

    def __init__(self, dim=64, unit_normalize=True, provider_id="deterministic-test"):
        if dim <= 0:
            raise ConfigError("dim must be positive")
        self.dim = dim
        self.unit_normalize = unit_normalize
        self.provider_id = provider_id

    def _bucket(self, feature: str):
        digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
        value = int.from_bytes(digest, "little")
        sign = 1.0 if value & 1 else -1.0
        return (value >> 1) % self.dim, sign

    def embed_texts(self, texts):
        out = []
        for text in texts:
            words = text.lower().split()
            if not words:
                raise IntegrityError("cannot embed empty text")
            feats = list(words)
            feats.extend(f"{a} {b}" for a, b in zip(words, words[1:]))
            values = [0.0] * self.dim
            for feat in feats:
                bucket, sign = self._bucket(feat)
                values[bucket] += sign
            if self.unit_normalize:
                values = _unit(values)
            out.append(EmbeddingVector(values, self.dim, self.provider_id))
        return out


class RemoteEmbedder:
    """OpenAI-compatible embeddings endpoint client.

    POST {base_url}/v1/embeddings with {"model": ..., "input": [...]};
    retries transport errors and HTTP 429/5xx with exponential backoff.
    """

    kind = "remote"

    def __init__(self, base_url, model, dim, unit_normalize=False, timeout_s=60.0,
                 session=None, max_in_flight=MAX_IN_FLIGHT):
        if not base_url or not model:
            raise ConfigError("remote embedder needs base_url and model")
        if dim <= 0:
            raise ConfigError("dim must be positive")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.dim = dim
        self.unit_normalize = unit_normalize
        self.timeout_s = timeout_s
        self.provider_id = f"remote:{model}"
        self._session = session or requests.Session()
        self._gate = threading.Semaphore(max_in_flight)

    def _headers(self):
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(EMBED_API_KEY_VAR)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post_batch(self, batch):
        body = {"model": self.model, "input": list(batch)}
        last_err = None
        for attempt in range(RETRY_ATTEMPTS):
            if attempt:
                time.sleep(RETRY_BACKOFF_S * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    resp = self._session.post(
                        f"{self.base_url}/v1/embeddings",
                        json=body, headers=self._headers(), timeout=self.timeout_s,
                    )
            except requests.RequestException as exc:
                last_err = ProviderError(f"embeddings transport error: {exc}")
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_err = ProviderError(
                    f"embeddings endpoint returned {resp.status_code}", status=resp.status_code)
                continue
            if resp.status_code != 200:
                raise ProviderError(
                    f"embeddings endpoint returned {resp.status_code}", status=resp.status_code)
            return resp.json()
        raise last_err

    def embed_texts(self, texts):
        texts = list(texts)
        out = []
        for base in range(0, len(texts), REMOTE_BATCH_SIZE):
            batch = texts[base:base + REMOTE_BATCH_SIZE]
            payload = self._post_batch(batch)
            rows = sorted(payload["data"], key=lambda item: item["index"])
            if len(rows) != len(batch):
                raise IntegrityError(
                    f"embeddings endpoint returned {len(rows)} vectors for {len(batch)} inputs")
            for row in rows:
                values = [float(v) for v in row["embedding"]]
                if len(values) != self.dim:
                    raise IntegrityError(
                        f"provider returned dim {len(values)}, expected {self.dim}")
                if self.unit_normalize:
                    values = _unit(values)
                out.append(EmbeddingVector(values, self.dim, self.provider_id))
        return out


def embed_texts(provider, texts):
    """One vector per text, order preserved."""
    texts = list(texts)
    for t in texts:
        if not t or not t.strip():
            raise IntegrityError("texts must be non-empty")
    vectors = provider.embed_texts(texts)
    if len(vectors) != len(texts):
        raise IntegrityError("provider broke the one-vector-per-text contract")
    return vectors


# ---------------------------------------------------------------------------
# Word-vector tables (GloVe text format: "word f1 f2 ... fd" per line)
# ---------------------------------------------------------------------------


class WordVectorTable:
    def __init__(self, vectors: dict[str, list[float]], dim: int, provider_id="word-table"):
        self.vectors = vectors
        self.dim = dim
        self.provider_id = provider_id

    def __len__(self):
        return len(self.vectors)

    def lookup(self, word):
        return self.vectors.get(word.lower())


_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


class WordTableEmbedder:
    """Provider facade over a WordVectorTable: tokenized mean vectors."""

    kind = "word_table"

    def __init__(self, table: "WordVectorTable", unit_normalize=False):
        self.table = table
        self.dim = table.dim
        self.unit_normalize = unit_normalize
        self.provider_id = table.provider_id

    def embed_texts(self, texts):
        out = []
        for text in texts:
            tokens = [t for t in _TOKEN_SPLIT.split(text.lower()) if t]
            vec = sentence_vector(self.table, tokens)
            values = _unit(vec.values) if self.unit_normalize else vec.values
            out.append(EmbeddingVector(values, self.dim, self.provider_id))
        return out


def load_word_table(path) -> WordVectorTable:
    vectors: dict[str, list[float]] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split(" ")
            word, floats = parts[0], parts[1:]
            try:
                values = [float(x) for x in floats]
            except ValueError as exc:
                raise ConfigError(f"{path}: line {lineno}: bad float: {exc}") from None
            if not values:
                raise ConfigError(f"{path}: line {lineno}: no vector components")
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise ConfigError(
                    f"{path}: line {lineno}: dimension {len(values)} != {dim}")
            vectors.setdefault(word.lower(), values)  # first occurrence wins
    if dim is None:
        raise ConfigError(f"{path}: empty word-vector file")
    return WordVectorTable(vectors, dim)


def sentence_vector(table: WordVectorTable, tokens) -> EmbeddingVector:
    """Arithmetic mean of in-vocabulary token vectors; OOV tokens are skipped."""
    acc = None
    count = 0
    for token in tokens:
        vec = table.lookup(token)
        if vec is None:
            continue
        if acc is None:
            acc = [0.0] * table.dim
        for i, v in enumerate(vec):
            acc[i] += v
        count += 1
    if count == 0:
        raise EmptyEmbeddingError("no in-vocabulary tokens")
    return EmbeddingVector([v / count for v in acc], table.dim, table.provider_id)
