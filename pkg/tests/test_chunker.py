import random

import pytest

from threatrag.chunking import Chunk, ChunkerConfig, split_batch, split_document
from threatrag.errors import ConfigError
from threatrag.ingest import Document, SourceKind, document_id


def doc(text, name="fixture"):
    return Document(id=document_id(SourceKind.TEXT, name, text),
                    kind=SourceKind.TEXT, text=text, metadata={"source": name})


def sliding_window_oracle(text, size, overlap):
    """Independent reference for the "" fallback: width=size, step=size-overlap."""
    if not text:
        return []
    step = size - overlap
    out = []
    pos = 0
    while True:
        out.append(text[pos:pos + size])
        if pos + size >= len(text):
            break
        pos += step
    return out


def check_invariants(document, chunks, config):
    text = document.text
    covered = set()
    prev_span = None
    for i, chunk in enumerate(chunks):
        start, end = chunk.char_span
        assert 0 <= start < end <= len(text)
        assert chunk.text == text[start:end]
        assert chunk.seq_index == i
        assert len(chunk.text) <= config.chunk_size
        covered.update(range(start, end))
        if prev_span is not None:
            assert start > prev_span[0]
            overlap = max(0, prev_span[1] - start)
            assert overlap <= config.chunk_overlap
        prev_span = (start, end)
    assert covered == set(range(len(text)))


# -- explicit cases -----------------------------------------------------------

def test_short_text_single_chunk():
    d = doc("x" * 500)
    chunks = split_document(d, ChunkerConfig())
    assert len(chunks) == 1
    assert chunks[0].text == d.text
    assert chunks[0].char_span == (0, 500)


def test_character_fallback_matches_hand_oracle():
    d = doc("abcdefghij")
    config = ChunkerConfig(chunk_size=4, chunk_overlap=2, separators=("",))
    texts = [c.text for c in split_document(d, config)]
    assert texts == ["abcd", "cdef", "efgh", "ghij"]
    assert texts == sliding_window_oracle("abcdefghij", 4, 2)


def test_empty_document():
    assert split_document(doc(""), ChunkerConfig()) == []


def test_paragraphs_merge_under_budget():
    d = doc("para1\n\npara2")
    chunks = split_document(d, ChunkerConfig(chunk_size=12, chunk_overlap=3))
    assert len(chunks) == 1
    assert chunks[0].text == "para1\n\npara2"


def test_paragraph_split_with_overlap_carry():
    text = "aaaa\n\nbbbb\n\ncccc"
    d = doc(text)
    chunks = split_document(d, ChunkerConfig(chunk_size=8, chunk_overlap=2,
                                             separators=("\n\n", "")))
    check_invariants(d, chunks, ChunkerConfig(chunk_size=8, chunk_overlap=2,
                                              separators=("\n\n", "")))
    # pieces "aaaa\n\n" (6) + "bbbb\n\n" (6) exceed 8, so windows break at the
    # separator boundary and each later window carries the 2 trailing chars
    # of its predecessor (here the separator itself)
    assert [c.text for c in chunks] == ["aaaa\n\n", "\n\nbbbb\n\n", "\n\ncccc"]
    assert [c.char_span for c in chunks] == [(0, 6), (4, 12), (10, 16)]


def test_separator_kept_with_preceding_piece():
    d = doc("one. two. three.")
    chunks = split_document(d, ChunkerConfig(chunk_size=6, chunk_overlap=0,
                                             separators=(". ", "")))
    assert chunks[0].text == "one. "


def test_determinism():
    text = "".join(random.Random(5).choices("ab \n", k=400))
    d = doc(text)
    config = ChunkerConfig(chunk_size=37, chunk_overlap=9)
    first = [(c.text, c.char_span) for c in split_document(d, config)]
    second = [(c.text, c.char_span) for c in split_document(d, config)]
    assert first == second


def test_config_validation():
    with pytest.raises(ConfigError):
        ChunkerConfig(chunk_size=0)
    with pytest.raises(ConfigError):
        ChunkerConfig(chunk_size=10, chunk_overlap=10)
    with pytest.raises(ConfigError):
        ChunkerConfig(separators=("", " "))


def test_chunk_ids_unique_across_batch():
    docs = [doc("first document body", "a"), doc("second document body", "b")]
    chunks = split_batch(docs, ChunkerConfig())
    assert len(chunks) == 2
    assert len({c.id for c in chunks}) == 2
    assert chunks[0].parent_document_id != chunks[1].parent_document_id


def test_split_batch_empty():
    assert split_batch([], ChunkerConfig()) == []


def test_chunks_jsonl_round_trip():
    import json
    from threatrag.chunking import chunks_to_jsonl
    chunks = split_batch([doc("alpha beta", "a"), doc("gamma delta", "b")], ChunkerConfig())
    dump = chunks_to_jsonl(chunks)
    rows = [json.loads(line) for line in dump.splitlines()]
    assert len(rows) == 2
    assert rows[0]["text"] == "alpha beta"
    assert rows[0]["char_span"] == [0, 10]
    assert chunks_to_jsonl([]) == ""


def test_split_batch_matches_per_document():
    rng = random.Random(11)
    docs = []
    for i in range(100):
        n = rng.randint(0, 300)
        docs.append(doc("".join(rng.choices("abc \n.", k=n)), f"d{i}"))
    config = ChunkerConfig(chunk_size=50, chunk_overlap=7)
    batch = split_batch(docs, config)
    per_doc = sum(len(split_document(d, config)) for d in docs)
    assert len(batch) == per_doc


# -- randomized properties ----------------------------------------------------

def test_character_fallback_equals_oracle_randomized():
    rng = random.Random(1234)
    for _ in range(300):
        size = rng.randint(8, 64)
        overlap = rng.randint(0, size - 1)
        n = rng.randint(0, 2000)
        text = "".join(rng.choices("abcdefghij \n", k=n))
        d = doc(text)
        got = [c.text for c in split_document(
            d, ChunkerConfig(chunk_size=size, chunk_overlap=overlap, separators=("",)))]
        assert got == sliding_window_oracle(text, size, overlap)


def test_default_separator_invariants_randomized():
    rng = random.Random(99)
    alphabet = "abcd efg\nhi\n\n. "
    for _ in range(300):
        size = rng.randint(8, 64)
        overlap = rng.randint(0, min(size - 1, 16))
        n = rng.randint(0, 1500)
        text = "".join(rng.choices(alphabet, k=n))
        d = doc(text)
        config = ChunkerConfig(chunk_size=size, chunk_overlap=overlap)
        chunks = split_document(d, config)
        check_invariants(d, chunks, config)
