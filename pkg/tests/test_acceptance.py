"""Acceptance suite: one test per release criterion, at the stated tolerance.

Each test prints a PASS line with its runtime (visible with -s or -rP). The
whole module runs offline: a socket guard rejects any non-loopback connection
attempt for the duration.
"""

import json
import math
import random
import shutil
import socket
import subprocess
import sys
import time
from array import array
from pathlib import Path

import pytest

from threatrag.chunking import ChunkerConfig, split_document
from threatrag.embeddings import WordVectorTable, sentence_vector
from threatrag.evalkit import EvalCase, f1_score, greedy_match_pr, preprocess
from threatrag.evalkit.metrics import answer_relevancy, context_precision, context_recall, faithfulness
from threatrag.ingest import Document, SourceKind, document_id
from threatrag.vectorstore import (
    RetrievalConfig,
    RetrievalHit,
    VectorStore,
    cosine,
    ensemble_retrieve,
    fuse_rrf,
    load_store,
    save_store,
)

FIXTURE = Path(__file__).parent / "fixtures" / "e2e"

_real_connect = socket.socket.connect


@pytest.fixture(autouse=True, scope="module")
def no_external_network():
    """Criterion: everything here runs with no network access."""

    def guarded(self, address, *args, **kwargs):
        host = address[0] if isinstance(address, tuple) else str(address)
        if host not in ("127.0.0.1", "::1", "localhost"):
            raise AssertionError(f"external network access attempted: {address}")
        return _real_connect(self, address, *args, **kwargs)

    socket.socket.connect = guarded
    try:
        yield
    finally:
        socket.socket.connect = _real_connect


def announce(name, started):
    print(f"ACCEPTANCE PASS: {name} ({time.monotonic() - started:.2f}s)")


def make_doc(text):
    return Document(id=document_id(SourceKind.TEXT, "acc", text),
                    kind=SourceKind.TEXT, text=text, metadata={"source": "acc"})


# -- 1. chunker oracle ----------------------------------------------------------


def test_chunker_sliding_window_oracle_and_invariants():
    started = time.monotonic()
    rng = random.Random(20240801)

    def oracle(text, size, overlap):
        if not text:
            return []
        out, pos, step = [], 0, size - overlap
        while True:
            out.append(text[pos:pos + size])
            if pos + size >= len(text):
                break
            pos += step
        return out

    alphabet = "abcdefghij klmno\npq\n\nrs. tu"
    for _ in range(1000):
        size = rng.randint(8, 64)
        overlap = rng.randint(0, size - 1)
        text = "".join(rng.choices(alphabet, k=rng.randint(0, 5000)))
        config = ChunkerConfig(chunk_size=size, chunk_overlap=overlap, separators=("",))
        got = [c.text for c in split_document(make_doc(text), config)]
        assert got == oracle(text, size, overlap)

    for _ in range(1000):
        size = rng.randint(8, 64)
        overlap = rng.randint(0, min(size - 1, 20))
        text = "".join(rng.choices(alphabet, k=rng.randint(0, 3000)))
        config = ChunkerConfig(chunk_size=size, chunk_overlap=overlap)
        chunks = split_document(make_doc(text), config)
        covered = set()
        prev = None
        for i, chunk in enumerate(chunks):
            start, end = chunk.char_span
            assert chunk.text == text[start:end]
            assert chunk.seq_index == i
            assert len(chunk.text) <= size                      # budget
            covered.update(range(start, end))
            if prev is not None:
                assert start > prev[0]
                assert max(0, prev[1] - start) <= overlap       # overlap bound
            prev = (start, end)
        assert covered == set(range(len(text)))                 # coverage

    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"chunker oracle took {elapsed:.1f}s (budget 10s)"
    announce("chunker oracle (1000 sliding-window + 1000 invariant cases)", started)


# -- 2. exact search oracle -------------------------------------------------------


def test_exact_search_matches_exhaustive_scan():
    started = time.monotonic()
    rng = random.Random(424242)

    def py_cosine(a, b):
        dot = 0.0
        for x, y in zip(a, b):
            dot += x * y
        return dot / (math.sqrt(sum(x * x for x in a)) * math.sqrt(sum(y * y for y in b)))

    for trial in range(50):
        dim = rng.randint(2, 64)
        n = rng.randint(1, 500)
        store = VectorStore(f"s{trial}", "text", dim)
        items = []
        for i in range(n):
            vec = [rng.uniform(-1, 1) for _ in range(dim)]
            if all(abs(v) < 1e-12 for v in vec):
                vec[0] = 1.0
            items.append((vec, f"t{i}", {"source": "acc"}))
        store.upsert(items)

        for _ in range(20):
            query = [rng.uniform(-1, 1) for _ in range(dim)]
            if all(abs(v) < 1e-12 for v in query):
                query[0] = 1.0
            scored = []
            for pos in range(len(store)):
                record_id, vector, _, _ = store.record(pos)
                scored.append((py_cosine(vector, query), record_id))
            scored.sort(key=lambda t: (-t[0], t[1]))
            for k in (1, 3, 10):
                hits = store.search(query, k)
                assert [(h.score, h.record_id) for h in hits] == scored[:k]

    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"search oracle took {elapsed:.1f}s (budget 30s)"
    announce("exact search == exhaustive scan (50 stores x 20 queries x 3 ks)", started)


# -- 3. similarity arithmetic ------------------------------------------------------


def test_cosine_reference_value_symmetry_scale_invariance():
    started = time.monotonic()
    assert abs(cosine([1, 2, 3], [4, 5, 6]) - 0.974632) <= 1e-6

    rng = random.Random(7)
    for _ in range(10000):
        dim = rng.randint(1, 8)
        a = [rng.uniform(-10, 10) for _ in range(dim)]
        b = [rng.uniform(-10, 10) for _ in range(dim)]
        if all(abs(v) < 1e-9 for v in a):
            a[0] = 1.0
        if all(abs(v) < 1e-9 for v in b):
            b[0] = 1.0
        ab, ba = cosine(a, b), cosine(b, a)
        assert abs(ab - ba) <= 1e-9
        alpha = rng.uniform(0.01, 50.0)
        assert abs(cosine([alpha * x for x in a], b) - ab) <= 1e-9
    announce("cosine reference value + symmetry/scale invariance (10k pairs)", started)


# -- 4. reciprocal rank fusion ------------------------------------------------------


def test_rrf_reference_score_and_rank_only_ordering():
    started = time.monotonic()
    a = VectorStore("a", "text", 2)
    b = VectorStore("b", "csv", 2)
    a.upsert([([1, 0], "shared", {"source": "s"}), ([0, 1], "na", {"source": "s"})])
    b.upsert([([1, 0], "shared", {"source": "s"}), ([0, 1], "nb", {"source": "s"})])
    fused = ensemble_retrieve([a, b], [1, 0], RetrievalConfig(top_k=1, rrf_k=60))
    assert abs(fused[0].score - 2 / 61) <= 1e-12

    rng = random.Random(6060)
    for _ in range(200):
        lists = []
        for store_idx in range(rng.randint(1, 4)):
            n = rng.randint(1, 8)
            scores = sorted((rng.uniform(-1, 1) for _ in range(n)), reverse=True)
            lists.append([
                RetrievalHit(record_id=i, text=f"d{rng.randint(0, 9)}",
                             metadata={"source": "s"}, score=scores[i], rank=i + 1,
                             store_id=f"st{store_idx}")
                for i in range(n)
            ])
        config = RetrievalConfig(top_k=6)
        base = fuse_rrf(lists, config)

        scale = rng.uniform(0.5, 3.0)
        shift = rng.uniform(-1.0, 1.0)
        transformed_lists = [
            [RetrievalHit(h.record_id, h.text, h.metadata,
                          scale * h.score + shift, h.rank, h.store_id) for h in hits]
            for hits in lists
        ]
        transformed = fuse_rrf(transformed_lists, config)
        assert [h.text for h in base] == [h.text for h in transformed]
        assert [h.score for h in base] == [h.score for h in transformed]
    announce("RRF 2/61 reference + rank-only ordering under monotone transforms", started)


# -- 5. indirect evaluation arithmetic ------------------------------------------------


def test_indirect_average_reproduces_reference_rows():
    started = time.monotonic()
    from threatrag.evalkit import indirect_eval

    class OneShot:
        deterministic = True

        def __init__(self, completion):
            self.completion = completion

        def complete(self, messages):
            return self.completion

    def run(component_scores):
        questions = "\n".join(f"{i}. t{i}?" for i in range(1, 6))
        mapping = {"q0token": [1.0, 0.0]}
        for i, score in enumerate(component_scores, start=1):
            mapping[f"t{i}"] = [score, math.sqrt(1.0 - score * score)]
        embedder = lambda tokens: [mapping[t] for t in tokens]
        case = EvalCase(query="q0token", bot_answer="body", source_kind="apt_report")
        return indirect_eval(case, OneShot(questions), embedder)

    first = run([0.921, 0.878, 0.924, 0.945, 0.851])
    assert abs(first.average_score - 0.904) <= 0.0005
    second = run([0.929, 0.925, 0.907, 0.903, 0.886])
    assert abs(second.average_score - 0.910) <= 0.0005
    for result in (first, second):
        mean = sum(result.per_question_scores) / len(result.per_question_scores)
        assert abs(result.average_score - mean) <= 1e-9
    announce("indirect-eval averages 0.904 / 0.910 from component scores", started)


# -- 6. ratio metric formulas -----------------------------------------------------------


class ScriptedJudge:
    deterministic = True

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = 0

    def complete(self, messages):
        self.calls += 1
        return self.responses[self.calls - 1]


def test_ragas_formulas_and_ranges():
    started = time.monotonic()

    # F = |T|/|S| on a hand-counted fixture: 3 of 4 supported
    judge = ScriptedJudge(["1. a.\n2. b.\n3. c.\n4. d.",
                           "YES: ok", "NO: x", "YES: ok", "YES: ok"])
    f, verdicts = faithfulness("answer", ["ctx"], judge)
    assert f == 3 / 4 and len(verdicts) == 4

    # CR: 2 of 3 ground-truth statements present
    judge = ScriptedJudge(["1. g1.\n2. g2.\n3. g3.", "YES: y", "NO: n", "YES: y"])
    cr, _ = context_recall("gt", ["ctx"], judge)
    assert cr == 2 / 3

    # CP: 3 of 6 context statements relevant
    judge = ScriptedJudge(["1. c1.\n2. c2.\n3. c3.", "1. c4.\n2. c5.\n3. c6.",
                           "YES: r", "NO: i", "YES: r", "NO: i", "YES: r", "NO: i"])
    cp, _ = context_precision("gt", ["ctx a", "ctx b"], judge)
    assert cp == 3 / 6

    # AR over sims {0.8, 0.9, 1.0} is exactly 0.9
    class Provider:
        dim = 2
        provider_id = "acc"

        def embed_texts(self, texts):
            from threatrag.embeddings import EmbeddingVector
            mapping = {"q": [1.0, 0.0], "qa?": [0.8, 0.6],
                       "qb?": [0.9, math.sqrt(1 - 0.81)], "qc?": [1.0, 0.0]}
            return [EmbeddingVector(mapping[t], 2, "acc") for t in texts]

    ar = answer_relevancy("q", "answer", ScriptedJudge(["1. qa?\n2. qb?\n3. qc?"]),
                          Provider(), m=3)
    assert ar == 0.9

    # ranges on randomized verdict fixtures
    rng = random.Random(500500)
    for _ in range(500):
        n = rng.randint(1, 9)
        statements = "\n".join(f"{i + 1}. statement {i + 1}." for i in range(n))
        verdicts = ["YES: y" if rng.random() < 0.5 else "NO: n" for _ in range(n)]
        judge = ScriptedJudge([statements] + verdicts)
        f, vs = faithfulness("a", ["c"], judge)
        yes = sum(1 for v in verdicts if v.startswith("YES"))
        assert f == yes / n
        assert 0.0 <= f <= 1.0
        judge = ScriptedJudge([statements] + verdicts)
        cr, _ = context_recall("gt", ["c"], judge)
        assert cr == yes / n and 0.0 <= cr <= 1.0
        judge = ScriptedJudge([statements] + verdicts)
        cp, _ = context_precision("gt", ["c"], judge)
        assert cp == yes / n and 0.0 <= cp <= 1.0
    announce("ratio formulas F/CR/CP exact + AR mean + 500 randomized ranges", started)


# -- 7. greedy-match score properties -----------------------------------------------------


def test_bertscore_identity_swap_and_f1_definition():
    started = time.monotonic()
    rng = random.Random(1001)
    for _ in range(1000):
        dim = rng.randint(2, 8)

        def vec():
            v = [rng.uniform(-1, 1) for _ in range(dim)]
            if all(abs(x) < 1e-9 for x in v):
                v[0] = 1.0
            return v

        cand = [vec() for _ in range(rng.randint(1, 6))]
        ref = [vec() for _ in range(rng.randint(1, 6))]

        p, r = greedy_match_pr(cand, ref)
        f1 = f1_score(p, r)
        if p + r > 0:
            assert abs(f1 - 2 * p * r / (p + r)) <= 1e-12
        else:
            assert f1 == 0.0

        swapped_p, swapped_r = greedy_match_pr(ref, cand)
        assert swapped_p == r and swapped_r == p
        assert f1_score(swapped_p, swapped_r) == f1

        identity_p, identity_r = greedy_match_pr(cand, cand)
        assert abs(identity_p - 1.0) <= 1e-6
        assert abs(identity_r - 1.0) <= 1e-6
        assert abs(f1_score(identity_p, identity_r) - 1.0) <= 1e-6
    announce("greedy-match identity/swap/F1 definition (1000 fixtures)", started)


# -- 8. word-table cosine on the alias row --------------------------------------------------


def test_alias_row_scores_one_under_any_covering_table():
    started = time.monotonic()
    human = "Polazert, SolarMarker, and Yellow Cockatoo"
    bot = "Polazert, SolarMarker, and Yellow Cockatoo."
    rng = random.Random(2)
    for trial in range(20):
        dim = rng.randint(2, 8)
        vectors = {}
        for token in set(preprocess(human)):
            vec = [rng.uniform(-1, 1) for _ in range(dim)]
            if all(abs(v) < 1e-9 for v in vec):
                vec[0] = 1.0
            vectors[token] = vec
        table = WordVectorTable(vectors, dim)
        a = sentence_vector(table, preprocess(bot))
        b = sentence_vector(table, preprocess(human))
        assert abs(cosine(a.values, b.values) - 1.0) <= 1e-6
    announce("alias-row word-table similarity == 1.0 under 20 covering tables", started)


# -- 9. persistence round trip ---------------------------------------------------------------


def test_persistence_round_trip_1000_records(tmp_path):
    started = time.monotonic()
    rng = random.Random(99)
    dim = 32
    store = VectorStore("big", "text", dim)
    items = []
    for i in range(1000):
        vec = [rng.uniform(-1, 1) for _ in range(dim)]
        if all(abs(v) < 1e-12 for v in vec):
            vec[0] = 1.0
        items.append((vec, f"chunk {i}", {"source": "acc", "i": str(i)}))
    store.upsert(items)
    save_store(store, tmp_path / "big")
    loaded = load_store(tmp_path / "big")
    assert len(loaded) == 1000
    for _ in range(50):
        query = [rng.uniform(-1, 1) for _ in range(dim)]
        original = [(h.record_id, h.score, h.text) for h in store.search(query, 10)]
        reloaded = [(h.record_id, h.score, h.text) for h in loaded.search(query, 10)]
        assert original == reloaded
    announce("persistence round trip exact on 50 probes over 1000 records", started)


# -- 10. end-to-end determinism ----------------------------------------------------------------


def test_end_to_end_golden_chat_and_replay_report(tmp_path):
    started = time.monotonic()
    work = tmp_path / "e2e"
    shutil.copytree(FIXTURE, work)
    config = str(work / "config.yaml")

    subprocess.run([sys.executable, "-m", "threatrag", "ingest", "--config", config],
                   check=True, capture_output=True)
    result = subprocess.run(
        [sys.executable, "-m", "threatrag", "query", "What ransomware did FIN8 deploy?",
         "--config", config], check=True, capture_output=True)
    assert result.stdout == (FIXTURE / "golden_chat_response.json").read_bytes()
    assert "Sardonic" in json.loads(result.stdout)["answer"]

    eval_result = subprocess.run(
        [sys.executable, "-m", "threatrag", "eval", "--cases", str(work / "cases.jsonl"),
         "--mode", "replay", "--config", config, "--out", str(work / "out")],
        check=True, capture_output=True)
    assert eval_result.returncode == 0
    assert (work / "out" / "report.json").read_bytes() == \
        (FIXTURE / "golden_report.json").read_bytes()
    assert (work / "out" / "report.csv").read_bytes() == \
        (FIXTURE / "golden_report.csv").read_bytes()
    announce("end-to-end ingest/query golden + replay report byte-identical", started)
