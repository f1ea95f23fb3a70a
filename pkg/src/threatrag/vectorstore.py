"""Per-source-type vector stores: exact cosine top-k, RRF ensemble, persistence.

Vectors are quantized to float32 on insert (the on-disk format) and scored in
float64, so search results are bit-identical before and after a save/load
round trip. Search is an exhaustive scan by design: exactness is what lets
the test suite pin results against an independent oracle.
"""

import json
import struct
import threading
from array import array
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import kernels
from .errors import ConfigError, CorruptStoreError, IntegrityError

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
VECTORS_NAME = "vectors.bin"
RECORDS_NAME = "records.jsonl"


@dataclass
class RetrievalConfig:
    top_k: int = 3
    rrf_k: int = 60
    per_store_k: int | None = None

    def __post_init__(self):
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if self.rrf_k < 1:
            raise ConfigError("rrf_k must be >= 1")
        if self.per_store_k is None:
            self.per_store_k = self.top_k
        if self.per_store_k < 1:
            raise ConfigError("per_store_k must be >= 1")


@dataclass
class RetrievalHit:
    record_id: int
    text: str
    metadata: dict
    score: float
    rank: int
    store_id: str


def cosine(a, b) -> float:
    """Cosine similarity dot(a,b)/(|a||b|); errors on zero-norm input."""
    try:
        return kernels.cosine(list(a) if not isinstance(a, array) else a,
                              list(b) if not isinstance(b, array) else b)
    except ValueError as exc:
        raise IntegrityError(str(exc)) from None


def _quantize32(vector):
    """Round-trip through float32: the exact values that persist on disk."""
    return array("d", array("f", vector))


class VectorStore:
    """Append-only flat store of (id, vector, text, metadata) records."""

    def __init__(self, store_id: str, source_kind: str, dim: int):
        if dim <= 0:
            raise ConfigError("dim must be positive")
        self.store_id = store_id
        self.source_kind = source_kind
        self.dim = dim
        self._data = array("d")          # row-major float64 (float32-exact values)
        self._texts: list[str] = []
        self._metadata: list[dict] = []
        self._ids: list[int] = []
        self._next_id = 0
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._ids)

    @property
    def record_ids(self):
        return list(self._ids)

    def record(self, position: int):
        base = position * self.dim
        return (self._ids[position], list(self._data[base:base + self.dim]),
                self._texts[position], self._metadata[position])

    def upsert(self, items) -> int:
        """Append (vector, chunk_text, metadata) triples; all-or-nothing."""
        staged = []
        for vector, text, metadata in items:
            if len(vector) != self.dim:
                raise IntegrityError(
                    f"vector dim {len(vector)} does not match store dim {self.dim}")
            if not metadata.get("source"):
                raise IntegrityError("record metadata must carry a non-empty source name")
            quantized = _quantize32(vector)
            if kernels.norm(quantized, self.dim) == 0.0:
                raise IntegrityError("zero-norm vectors cannot be searched")
            staged.append((quantized, text, dict(metadata)))
        with self._lock:
            for quantized, text, metadata in staged:
                self._data.extend(quantized)
                self._texts.append(text)
                self._metadata.append(metadata)
                self._ids.append(self._next_id)
                self._next_id += 1
        return len(staged)

    def search(self, query_vector, k: int) -> list[RetrievalHit]:
        """The k records with highest cosine similarity, ties to smaller id."""
        if k < 1:
            raise ConfigError("k must be >= 1")
        if len(query_vector) != self.dim:
            raise IntegrityError(
                f"query dim {len(query_vector)} does not match store dim {self.dim}")
        query = array("d", query_vector)
        # the kernel exports the array buffer, which a concurrent upsert may
        # not resize; the store lock serializes the two
        with self._lock:
            n = len(self._ids)
            if n == 0:
                return []
            try:
                scores = kernels.cosine_scores(self._data, n, self.dim, query)
            except ValueError as exc:
                raise IntegrityError(str(exc)) from None
        order = sorted(range(n), key=lambda i: (-scores[i], self._ids[i]))[:k]
        return [
            RetrievalHit(
                record_id=self._ids[pos],
                text=self._texts[pos],
                metadata=dict(self._metadata[pos]),
                score=scores[pos],
                rank=rank,
                store_id=self.store_id,
            )
            for rank, pos in enumerate(order, start=1)
        ]

    # -- persistence --------------------------------------------------------

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        manifest = {
            "store_id": self.store_id,
            "source_kind": self.source_kind,
            "dim": self.dim,
            "count": len(self._ids),
            "format_version": FORMAT_VERSION,
        }
        count = len(self._ids)
        packed = struct.pack(f"<{count * self.dim}f", *self._data)
        (directory / VECTORS_NAME).write_bytes(packed)
        with open(directory / RECORDS_NAME, "w", encoding="utf-8") as fh:
            for pos in range(count):
                row = {"id": self._ids[pos], "text": self._texts[pos],
                       "metadata": self._metadata[pos]}
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
        with open(directory / MANIFEST_NAME, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, directory) -> "VectorStore":
        directory = Path(directory)
        manifest_path = directory / MANIFEST_NAME
        if not manifest_path.exists():
            raise CorruptStoreError(f"{directory}: no {MANIFEST_NAME}")
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        for key in ("store_id", "source_kind", "dim", "count", "format_version"):
            if key not in manifest:
                raise CorruptStoreError(f"{directory}: manifest missing {key!r}")
        if manifest["format_version"] != FORMAT_VERSION:
            raise CorruptStoreError(
                f"{directory}: format_version {manifest['format_version']} unsupported")
        dim = int(manifest["dim"])
        count = int(manifest["count"])

        blob = (directory / VECTORS_NAME).read_bytes()
        expected = count * dim * 4
        if len(blob) != expected:
            raise CorruptStoreError(
                f"{directory}: {VECTORS_NAME} holds {len(blob)} bytes, expected {expected}")
        values = struct.unpack(f"<{count * dim}f", blob)

        store = cls(manifest["store_id"], manifest["source_kind"], dim)
        with open(directory / RECORDS_NAME, encoding="utf-8") as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
        if len(rows) != count:
            raise CorruptStoreError(
                f"{directory}: {RECORDS_NAME} has {len(rows)} rows, manifest says {count}")
        store._data = array("d", values)
        for row in rows:
            store._ids.append(int(row["id"]))
            store._texts.append(row["text"])
            store._metadata.append(row["metadata"])
        store._next_id = max(store._ids) + 1 if store._ids else 0
        return store


def save_store(store: VectorStore, directory) -> None:
    store.save(directory)


def load_store(directory) -> VectorStore:
    return VectorStore.load(directory)


# ---------------------------------------------------------------------------
# Ensemble retrieval: Reciprocal Rank Fusion across per-kind stores
# ---------------------------------------------------------------------------


def fuse_rrf(ranked_lists: list[list[RetrievalHit]], config: RetrievalConfig) -> list[RetrievalHit]:
    """Fuse per-store ranked lists by summed 1/(rrf_k + rank).

    Cross-list identity is the chunk text; fused ties break on higher raw
    cosine, then smaller record id. Ranks are reassigned 1..top_k.
    """
    fused: dict[str, dict] = {}
    for hits in ranked_lists:
        for hit in hits:
            entry = fused.setdefault(hit.text, {"score": 0.0, "best": hit})
            entry["score"] += 1.0 / (config.rrf_k + hit.rank)
            best = entry["best"]
            if (hit.score, -hit.record_id) > (best.score, -best.record_id):
                entry["best"] = hit
    ordered = sorted(
        fused.values(),
        key=lambda e: (-e["score"], -e["best"].score, e["best"].record_id),
    )[:config.top_k]
    return [
        RetrievalHit(
            record_id=e["best"].record_id,
            text=e["best"].text,
            metadata=e["best"].metadata,
            score=e["score"],
            rank=rank,
            store_id=e["best"].store_id,
        )
        for rank, e in enumerate(ordered, start=1)
    ]


def ensemble_retrieve(stores, query_vector, config: RetrievalConfig | None = None):
    """per_store_k hits from every store, fused with RRF, truncated to top_k."""
    config = config or RetrievalConfig()
    stores = list(stores)
    if not stores:
        raise ConfigError("ensemble_retrieve needs at least one store")
    if len(stores) == 1:
        lists = [stores[0].search(query_vector, config.per_store_k)]
    else:
        with ThreadPoolExecutor(max_workers=min(8, len(stores))) as pool:
            lists = list(pool.map(lambda s: s.search(query_vector, config.per_store_k), stores))
    return fuse_rrf(lists, config)
