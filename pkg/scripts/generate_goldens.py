#!/usr/bin/env python3
"""Regenerate the end-to-end golden files under tests/fixtures/e2e/.

Everything downstream is deterministic (hash embedder + scripted chat double),
so these goldens are stable across runs, machines, and working directories.
Run from the repository root after changing fixtures or wire formats:

    python3 scripts/generate_goldens.py
"""

import hashlib
import io
import json
import shutil
import sys
import tempfile
from contextlib import redirect_stdout
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
FIXTURE = REPO / "tests" / "fixtures" / "e2e"
sys.path.insert(0, str(REPO / "src"))

from threatrag.evalkit.textproc import preprocess  # noqa: E402
from threatrag.service.cli import main as cli_main  # noqa: E402

QUERY = "What ransomware did FIN8 deploy?"


def token_vector(token: str, dim: int, salt: str) -> list[float]:
    digest = hashlib.blake2b(f"{salt}:{token}".encode(), digest_size=dim).digest()
    return [round(b / 255.0 + 0.05, 6) for b in digest]


def write_word_tables():
    tokens = set()
    for line in (FIXTURE / "cases.jsonl").read_text(encoding="utf-8").splitlines():
        case = json.loads(line)
        for key in ("bot_answer", "human_answer", "query"):
            if case.get(key):
                tokens.update(preprocess(case[key]))
    for name, dim in (("s1", 6), ("s2", 8)):
        lines = [
            " ".join([token] + [f"{v:.6f}" for v in token_vector(token, dim, name)])
            for token in sorted(tokens)
        ]
        (FIXTURE / "tables" / f"{name}.txt").write_text("\n".join(lines) + "\n",
                                                        encoding="utf-8")
    print(f"word tables cover {len(tokens)} tokens")


def run_cli(argv) -> str:
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = cli_main(argv)
    if code != 0:
        sys.stderr.write(buffer.getvalue())
        raise SystemExit(f"cli {argv} exited {code}")
    return buffer.getvalue()


def chat_golden():
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp) / "e2e"
        shutil.copytree(FIXTURE, work)
        config = str(work / "config.yaml")
        run_cli(["ingest", "--config", config])
        output = run_cli(["query", QUERY, "--config", config])
    (FIXTURE / "golden_chat_response.json").write_text(output, encoding="utf-8")
    payload = json.loads(output)
    assert "Sardonic" in payload["answer"], "fixture drifted: expected a Sardonic echo"
    print(f"chat golden written; answer={payload['answer'][:60]!r}...")


def eval_golden():
    transcripts = FIXTURE / "transcripts"
    if transcripts.exists():
        shutil.rmtree(transcripts)
    with tempfile.TemporaryDirectory() as tmp:
        run_cli(["eval", "--cases", str(FIXTURE / "cases.jsonl"), "--mode", "live",
                 "--config", str(FIXTURE / "config.yaml"), "--out", tmp])
        for name in ("report.json", "report.csv"):
            shutil.copy(Path(tmp) / name, FIXTURE / f"golden_{name}")
    print(f"eval golden written; transcripts={len(list(transcripts.iterdir()))}")


if __name__ == "__main__":
    write_word_tables()
    chat_golden()
    eval_golden()
    print("goldens regenerated")
