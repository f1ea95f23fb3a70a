"""Recursive character splitting with overlap.

Descends an ordered separator list; pieces are merged greedily into windows
no longer than chunk_size, a new window carries up to chunk_overlap trailing
characters of its predecessor, and the final "" separator degenerates to
fixed sliding windows. Chunks are contiguous spans of the parent text, so
chunk.text == parent.text[start:end] always holds.
"""

import hashlib
import json
from dataclasses import dataclass, field

from .errors import ConfigError

DEFAULT_SEPARATORS = ("\n\n", "\n", ". ", " ", "")


@dataclass
class ChunkerConfig:
    chunk_size: int = 1000
    chunk_overlap: int = 50
    separators: tuple[str, ...] = DEFAULT_SEPARATORS

    def __post_init__(self):
        self.separators = tuple(self.separators)
        if self.chunk_size <= 0:
            raise ConfigError("chunk_size must be positive")
        if self.chunk_overlap < 0:
            raise ConfigError("chunk_overlap must be non-negative")
        if self.chunk_overlap >= self.chunk_size:
            raise ConfigError("chunk_overlap must be smaller than chunk_size")
        if not self.separators:
            raise ConfigError("separators must not be empty")
        if "" in self.separators[:-1]:
            raise ConfigError('"" must be the last separator (it shadows later ones)')


@dataclass
class Chunk:
    id: str
    parent_document_id: str
    seq_index: int
    text: str
    char_span: tuple[int, int]
    metadata: dict[str, str] = field(default_factory=dict)


def _chunk_id(parent_id: str, seq_index: int, text: str) -> str:
    h = hashlib.sha256(f"{parent_id}\x00{seq_index}\x00{text}".encode("utf-8"))
    return h.hexdigest()[:16]


def _split_spans(text: str, start: int, end: int, separator: str):
    """Spans of pieces in [start, end), separator kept at the end of each piece."""
    spans = []
    pos = start
    while pos < end:
        hit = text.find(separator, pos, end)
        if hit == -1:
            spans.append((pos, end))
            break
        cut = hit + len(separator)
        spans.append((pos, cut))
        pos = cut
    return spans


def _sliding_spans(start: int, end: int, size: int, step: int):
    spans = []
    pos = start
    while True:
        spans.append((pos, min(pos + size, end)))
        if pos + size >= end:
            break
        pos += step
    return spans


def _recurse(text, start, end, config, sep_index, out):
    size = config.chunk_size
    overlap = config.chunk_overlap
    if end - start <= size:
        out.append((start, end))
        return

    # find the first remaining separator that actually splits this range
    while sep_index < len(config.separators):
        sep = config.separators[sep_index]
        if sep == "":
            out.extend(_sliding_spans(start, end, size, size - overlap))
            return
        pieces = _split_spans(text, start, end, sep)
        if len(pieces) > 1:
            break
        sep_index += 1
    else:
        # no separator applies and "" is not configured: emit the oversize run
        out.append((start, end))
        return

    win_start = None
    win_end = None

    def flush():
        nonlocal win_start, win_end
        if win_start is not None:
            out.append((win_start, win_end))
            win_start = win_end = None

    def carry_into(p_start, p_len):
        # suffix of the previous chunk carried as prefix context, clamped so
        # the budget holds and start offsets stay strictly increasing
        prev = out[-1] if out else None
        if prev is None or prev[1] != p_start:
            return 0
        return max(0, min(overlap, prev[1] - prev[0] - 1, size - p_len))

    for p_start, p_end in pieces:
        p_len = p_end - p_start
        if p_len > size:
            flush()
            _recurse(text, p_start, p_end, config, sep_index + 1, out)
            continue
        if win_start is None:
            win_start, win_end = p_start - carry_into(p_start, p_len), p_end
        elif p_end - win_start <= size:
            win_end = p_end
        else:
            flush()
            win_start, win_end = p_start - carry_into(p_start, p_len), p_end
    flush()


def split_document(document, config: ChunkerConfig | None = None) -> list[Chunk]:
    """Split one Document into chunks; empty text yields an empty list."""
    config = config or ChunkerConfig()
    text = document.text
    if not text:
        return []
    spans: list[tuple[int, int]] = []
    _recurse(text, 0, len(text), config, 0, spans)
    chunks = []
    for seq, (start, end) in enumerate(spans):
        piece = text[start:end]
        chunks.append(Chunk(
            id=_chunk_id(document.id, seq, piece),
            parent_document_id=document.id,
            seq_index=seq,
            text=piece,
            char_span=(start, end),
            metadata=dict(document.metadata),
        ))
    return chunks


def split_batch(documents, config: ChunkerConfig | None = None) -> list[Chunk]:
    config = config or ChunkerConfig()
    out: list[Chunk] = []
    for doc in documents:
        out.extend(split_document(doc, config))
    return out


def chunks_to_jsonl(chunks) -> str:
    """One chunk object per line, for inspection dumps."""
    lines = []
    for chunk in chunks:
        lines.append(json.dumps({
            "id": chunk.id,
            "parent_document_id": chunk.parent_document_id,
            "seq_index": chunk.seq_index,
            "char_span": list(chunk.char_span),
            "text": chunk.text,
            "metadata": chunk.metadata,
        }, ensure_ascii=False, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")
