"""Engine configuration: one YAML file binds the whole pipeline.

Relative paths are resolved against the config file's directory. Secrets
(LLM_API_KEY, EMBED_API_KEY) come from the environment, never the file.
"""

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..chunking import ChunkerConfig
from ..errors import ConfigError
from ..vectorstore import RetrievalConfig

SOURCE_KINDS = ("text", "csv", "json", "html")


@dataclass
class SourceConfig:
    name: str
    kind: str
    path: Path | None = None
    url: str | None = None
    text_columns: list[str] = field(default_factory=list)
    metadata_columns: list[str] = field(default_factory=list)
    record_selector: str = "."
    text_fields: list[str] = field(default_factory=list)
    max_depth: int = 0
    same_host_only: bool = True
    fetch_delay_s: float = 0.5


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    admin_token: str | None = None


@dataclass
class EmbeddingConfig:
    kind: str = "deterministic_test"
    dim: int = 64
    unit_normalize: bool = True
    base_url: str | None = None
    model: str | None = None
    table_path: Path | None = None


@dataclass
class LlmConfig:
    kind: str = "scripted"
    script: Path | None = None
    base_url: str | None = None
    model: str | None = None
    temperature: float = 0.0
    timeout_s: float = 60.0


@dataclass
class EvalConfig:
    indirect_threshold: float = 0.8
    m: int = 5
    concurrency: int = 4
    replay_dir: Path | None = None
    report_dir: Path | None = None
    word_tables: dict[str, Path] = field(default_factory=dict)


@dataclass
class EngineConfig:
    store_root: Path
    sources: list[SourceConfig]
    chunker: ChunkerConfig
    embedding: EmbeddingConfig
    llm: LlmConfig
    retrieval: RetrievalConfig
    server: ServerConfig
    eval: EvalConfig
    base_dir: Path


def _resolve(base: Path, value) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def load_config(path) -> EngineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    base = path.parent.resolve()

    sources = []
    for i, entry in enumerate(raw.get("sources", [])):
        if not isinstance(entry, dict) or "name" not in entry or "kind" not in entry:
            raise ConfigError(f"source #{i}: needs name and kind")
        kind = entry["kind"]
        if kind not in SOURCE_KINDS:
            raise ConfigError(f"source {entry['name']!r}: unknown kind {kind!r}")
        src = SourceConfig(
            name=entry["name"],
            kind=kind,
            url=entry.get("url"),
            text_columns=list(entry.get("text_columns", [])),
            metadata_columns=list(entry.get("metadata_columns", [])),
            record_selector=entry.get("record_selector", "."),
            text_fields=list(entry.get("text_fields", [])),
            max_depth=int(entry.get("max_depth", 0)),
            same_host_only=bool(entry.get("same_host_only", True)),
            fetch_delay_s=float(entry.get("fetch_delay_s", 0.5)),
        )
        if kind == "html":
            if not src.url:
                raise ConfigError(f"source {src.name!r}: html sources need a url")
        else:
            if "path" not in entry:
                raise ConfigError(f"source {src.name!r}: needs a path")
            src.path = _resolve(base, entry["path"])
            if not src.path.exists():
                raise ConfigError(f"source {src.name!r}: path does not exist: {src.path}")
            if kind == "csv" and not src.text_columns:
                raise ConfigError(f"source {src.name!r}: csv sources need text_columns")
        sources.append(src)
    if len({s.name for s in sources}) != len(sources):
        raise ConfigError("source names must be unique")

    emb_raw = raw.get("embedding", {})
    embedding = EmbeddingConfig(
        kind=emb_raw.get("kind", "deterministic_test"),
        dim=int(emb_raw.get("dim", 64)),
        unit_normalize=bool(emb_raw.get("unit_normalize", True)),
        base_url=emb_raw.get("base_url"),
        model=emb_raw.get("model"),
        table_path=_resolve(base, emb_raw["table_path"]) if emb_raw.get("table_path") else None,
    )
    if embedding.kind not in ("deterministic_test", "remote", "word_table"):
        raise ConfigError(f"unknown embedding kind: {embedding.kind!r}")
    if embedding.kind == "remote" and not (embedding.base_url and embedding.model):
        raise ConfigError("remote embedding needs base_url and model")
    if embedding.kind == "word_table":
        if embedding.table_path is None:
            raise ConfigError("word_table embedding needs table_path")
        if not embedding.table_path.exists():
            raise ConfigError(f"embedding table not found: {embedding.table_path}")

    llm_raw = raw.get("llm", {})
    llm = LlmConfig(
        kind=llm_raw.get("kind", "scripted"),
        script=_resolve(base, llm_raw["script"]) if llm_raw.get("script") else None,
        base_url=llm_raw.get("base_url"),
        model=llm_raw.get("model"),
        temperature=float(llm_raw.get("temperature", 0.0)),
        timeout_s=float(llm_raw.get("timeout_s", 60.0)),
    )
    if llm.kind not in ("scripted", "remote"):
        raise ConfigError(f"unknown llm kind: {llm.kind!r}")
    if llm.kind == "remote" and not (llm.base_url and llm.model):
        raise ConfigError("remote llm needs base_url and model")
    if llm.script and not llm.script.exists():
        raise ConfigError(f"llm script not found: {llm.script}")

    try:
        chunker = ChunkerConfig(**raw.get("chunker", {}))
        retrieval = RetrievalConfig(**raw.get("retrieval", {}))
    except TypeError as exc:
        raise ConfigError(f"bad chunker/retrieval options: {exc}") from None

    server_raw = raw.get("server", {})
    server = ServerConfig(
        host=server_raw.get("host", "127.0.0.1"),
        port=int(server_raw.get("port", 8080)),
        admin_token=server_raw.get("admin_token"),
    )

    eval_raw = raw.get("eval", {})
    word_tables = {}
    for slot, table_path in (eval_raw.get("word_tables") or {}).items():
        if slot not in ("s1", "s2"):
            raise ConfigError(f"eval.word_tables keys must be s1/s2, got {slot!r}")
        resolved = _resolve(base, table_path)
        if not resolved.exists():
            raise ConfigError(f"eval word table not found: {resolved}")
        word_tables[slot] = resolved
    eval_cfg = EvalConfig(
        indirect_threshold=float(eval_raw.get("indirect_threshold", 0.8)),
        m=int(eval_raw.get("m", 5)),
        concurrency=int(eval_raw.get("concurrency", 4)),
        replay_dir=_resolve(base, eval_raw["replay_dir"]) if eval_raw.get("replay_dir") else None,
        report_dir=_resolve(base, eval_raw["report_dir"]) if eval_raw.get("report_dir") else None,
        word_tables=word_tables,
    )

    return EngineConfig(
        store_root=_resolve(base, raw.get("store_root", "stores")),
        sources=sources,
        chunker=chunker,
        embedding=embedding,
        llm=llm,
        retrieval=retrieval,
        server=server,
        eval=eval_cfg,
        base_dir=base,
    )
