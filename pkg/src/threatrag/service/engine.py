"""Pipeline composition: ingest -> chunk -> embed -> per-kind stores -> chat.

The store registry is swapped atomically after a write, so readers always see
a consistent snapshot (many readers / one writer).
"""

import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .. import ingest as ingest_mod
from ..chunking import chunks_to_jsonl, split_document
from ..embeddings import (
    DeterministicEmbedder,
    RemoteEmbedder,
    WordTableEmbedder,
    embed_texts,
    load_word_table,
)
from ..errors import ConfigError, ThreatragError
from ..ingest import Deduper, IngestReport, SourceKind
from ..llm import RemoteChatClient, ScriptedChatClient
from ..orchestrator import PromptTemplate, answer_query
from ..vectorstore import RetrievalConfig, VectorStore, load_store
from .config import EngineConfig

logger = logging.getLogger(__name__)


@dataclass
class IngestSummary:
    documents: int = 0
    chunks: int = 0
    vectors_by_store: dict[str, int] = field(default_factory=dict)
    report: IngestReport = field(default_factory=IngestReport)

    def as_dict(self):
        return {
            "documents": self.documents,
            "chunks": self.chunks,
            "vectors_by_store": dict(sorted(self.vectors_by_store.items())),
            "loaded": self.report.loaded_count,
            "deduped": self.report.deduped_count,
            "skipped": self.report.skipped_count,
            "skip_reasons": self.report.skip_reasons,
            "warnings": self.report.warnings,
        }


def build_embedder(config: EngineConfig):
    emb = config.embedding
    if emb.kind == "deterministic_test":
        return DeterministicEmbedder(dim=emb.dim, unit_normalize=emb.unit_normalize)
    if emb.kind == "word_table":
        table = load_word_table(emb.table_path)
        if table.dim != emb.dim:
            raise ConfigError(f"table dim {table.dim} != configured dim {emb.dim}")
        return WordTableEmbedder(table, unit_normalize=emb.unit_normalize)
    return RemoteEmbedder(emb.base_url, emb.model, emb.dim,
                          unit_normalize=emb.unit_normalize)


def build_llm_client(config: EngineConfig):
    llm = config.llm
    if llm.kind == "scripted":
        if llm.script:
            return ScriptedChatClient.from_script_file(llm.script)
        return ScriptedChatClient()
    return RemoteChatClient(llm.base_url, llm.model, temperature=llm.temperature,
                            timeout_s=llm.timeout_s)


class Engine:
    def __init__(self, config: EngineConfig):
        self.config = config
        self.embedder = build_embedder(config)
        self.llm_client = build_llm_client(config)
        self.template = PromptTemplate()
        self._stores: dict[str, VectorStore] = {}
        self._write_lock = threading.Lock()
        self._load_existing_stores()

    # -- store registry ------------------------------------------------------

    def _store_dir(self, kind: str) -> Path:
        return Path(self.config.store_root) / kind

    def _load_existing_stores(self):
        stores = {}
        root = Path(self.config.store_root)
        if root.exists():
            for kind in ("text", "csv", "json", "html"):
                directory = root / kind
                if (directory / "manifest.json").exists():
                    stores[kind] = load_store(directory)
        self._stores = stores

    @property
    def stores(self) -> dict[str, VectorStore]:
        return self._stores

    def store_manifests(self):
        return [
            {"store_id": s.store_id, "source_kind": s.source_kind,
             "dim": s.dim, "count": len(s)}
            for _, s in sorted(self._stores.items())
        ]

    # -- ingest --------------------------------------------------------------

    def _load_source(self, source, report: IngestReport):
        kind = source.kind
        if kind == "text":
            return ingest_mod.load_text_source(source.path, source.name, report)
        if kind == "csv":
            return ingest_mod.load_csv(source.path, source.text_columns,
                                       source.metadata_columns, source_name=source.name,
                                       report=report)
        if kind == "json":
            return ingest_mod.load_json(source.path, source.record_selector,
                                        source.text_fields, source_name=source.name,
                                        report=report)
        if kind == "html":
            return ingest_mod.fetch_and_extract_html(
                source.url, max_depth=source.max_depth,
                same_host_only=source.same_host_only, source_name=source.name,
                report=report, delay_s=source.fetch_delay_s)
        raise ConfigError(f"unknown source kind: {kind!r}")

    def ingest(self, source_names=None, dump_chunks=None) -> IngestSummary:
        """Load, chunk, embed, and persist the configured sources."""
        selected = list(self.config.sources)
        if source_names:
            known = {s.name for s in self.config.sources}
            unknown = [n for n in source_names if n not in known]
            if unknown:
                raise ConfigError(f"unknown sources: {', '.join(unknown)}")
            selected = [s for s in selected if s.name in set(source_names)]

        summary = IngestSummary()
        dumped_chunks = [] if dump_chunks else None
        with self._write_lock:
            stores = dict(self._stores)
            known_doc_ids = set()
            for store in stores.values():
                for pos in range(len(store)):
                    doc_id = store.record(pos)[3].get("doc_id")
                    if doc_id:
                        known_doc_ids.add(doc_id)
            deduper = Deduper(known_doc_ids)

            # phase 1: load, chunk, and embed everything; a provider failure
            # here aborts before any store has been touched
            staged: list[tuple[str, list]] = []
            for source in selected:
                report = IngestReport()
                documents = self._load_source(source, report)
                documents = deduper.add(documents, report)
                summary.report.merge(report)
                summary.documents += len(documents)
                for document in documents:
                    chunks = split_document(document, self.config.chunker)
                    if not chunks:
                        continue
                    if dumped_chunks is not None:
                        dumped_chunks.extend(chunks)
                    summary.chunks += len(chunks)
                    vectors = embed_texts(self.embedder, [c.text for c in chunks])
                    items = []
                    for chunk, vector in zip(chunks, vectors):
                        metadata = dict(chunk.metadata)
                        metadata.update({
                            "doc_id": chunk.parent_document_id,
                            "chunk_id": chunk.id,
                            "seq_index": str(chunk.seq_index),
                        })
                        items.append((vector.values, chunk.text, metadata))
                    staged.append((document.kind.value, items))

            # phase 2: upsert and persist
            touched = set()
            for kind, items in staged:
                store = stores.get(kind)
                if store is None:
                    store = VectorStore(kind, kind, self.embedder.dim)
                    stores[kind] = store
                added = store.upsert(items)
                touched.add(kind)
                summary.vectors_by_store[kind] = (
                    summary.vectors_by_store.get(kind, 0) + added)
            for kind in sorted(touched):
                stores[kind].save(self._store_dir(kind))
            self._stores = stores
        if dumped_chunks is not None:
            Path(dump_chunks).write_text(chunks_to_jsonl(dumped_chunks), encoding="utf-8")
        return summary

    # -- query ---------------------------------------------------------------

    def query(self, query_text: str, k: int | None = None) -> dict:
        """POST /chat semantics; returns the wire-shape response dict."""
        if not query_text or not query_text.strip():
            raise ConfigError("query must be non-empty")
        stores = [s for _, s in sorted(self._stores.items())]
        if not stores:
            raise ThreatragError("no stores found: run ingest first")
        retrieval = self.config.retrieval
        if k is not None:
            retrieval = RetrievalConfig(top_k=k, rrf_k=retrieval.rrf_k,
                                        per_store_k=max(k, retrieval.per_store_k))
        answer = answer_query(query_text, stores, retrieval, self.llm_client,
                              template=self.template, embedder=self.embedder)
        return {
            "answer": answer.answer_text,
            "sources": answer.source_names,
            "contexts": [
                {"text": h.text, "score": h.score, "store_id": h.store_id}
                for h in answer.contexts_used
            ],
            "model": answer.model_name,
            "latency_ms": answer.latency_ms,
            "ungrounded": answer.ungrounded,
        }
