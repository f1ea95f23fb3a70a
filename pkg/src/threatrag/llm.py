"""Chat-completion clients.

RemoteChatClient speaks the OpenAI-compatible wire shape. ScriptedChatClient
is the offline deterministic double used by fixtures, the CLI's scripted
mode, and the evaluation judges. ReplayingChatClient wraps any client with a
transcript directory so evaluations are bit-for-bit replayable.
"""

import hashlib
import json
import os
import re
import threading
import time
from pathlib import Path

import requests

from .errors import ConfigError, ProviderError, ReplayMissError

LLM_API_KEY_VAR = "LLM_API_KEY"
RETRY_ATTEMPTS = 3
RETRY_BACKOFF_S = 0.25
DEFAULT_TIMEOUT_S = 60.0

VALID_ROLES = {"system", "user", "assistant"}


def _check_messages(messages):
    if not messages:
        raise ConfigError("message list must be non-empty")
    for msg in messages:
        if msg.get("role") not in VALID_ROLES:
            raise ConfigError(f"invalid role: {msg.get('role')!r}")
        if "content" not in msg:
            raise ConfigError("message missing content")


class RemoteChatClient:
    deterministic = False

    def __init__(self, base_url, model, temperature=0.0, timeout_s=DEFAULT_TIMEOUT_S,
                 session=None, max_in_flight=4):
        if not base_url or not model:
            raise ConfigError("remote chat client needs base_url and model")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.temperature = temperature
        self.timeout_s = timeout_s
        self._session = session or requests.Session()
        self._gate = threading.Semaphore(max_in_flight)

    def _headers(self):
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(LLM_API_KEY_VAR)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, messages) -> str:
        _check_messages(messages)
        body = {"model": self.model, "messages": list(messages),
                "temperature": self.temperature}
        last_err = None
        for attempt in range(RETRY_ATTEMPTS):
            if attempt:
                time.sleep(RETRY_BACKOFF_S * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    resp = self._session.post(
                        f"{self.base_url}/v1/chat/completions",
                        json=body, headers=self._headers(), timeout=self.timeout_s,
                    )
            except requests.RequestException as exc:
                last_err = ProviderError(f"chat transport error: {exc}")
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_err = ProviderError(
                    f"chat endpoint returned {resp.status_code}", status=resp.status_code)
                continue
            if resp.status_code != 200:
                raise ProviderError(
                    f"chat endpoint returned {resp.status_code}", status=resp.status_code)
            payload = resp.json()
            try:
                return payload["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as exc:
                raise ProviderError(f"malformed chat response: {exc}") from None
        raise last_err


# ---------------------------------------------------------------------------
# Deterministic scripted double
# ---------------------------------------------------------------------------

_CONTEXT_1 = re.compile(r"\[context 1\]\n(.*?)(?:\n\n\[context \d+\]\n|\Z)", re.DOTALL)
_QUOTED_BLOCK = re.compile(r"<<<(.*?)>>>", re.DOTALL)
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_WORD = re.compile(r"[A-Za-z0-9][A-Za-z0-9'\-]*")

_FILLER = {
    "the", "a", "an", "and", "or", "of", "to", "in", "on", "for", "is", "are",
    "was", "were", "that", "this", "it", "its", "by", "with", "as", "at", "from",
}


class ScriptedChatClient:
    """Rule-driven stand-in for a chat model; a pure function of the messages.

    Built-in behaviors, checked in order:
      * explicit rules: substring match on the last user message -> fixed reply
      * question-generation prompts -> n questions derived from the answer text
      * statement-extraction prompts -> sentence split as a numbered list
      * verdict prompts -> YES/NO by normalized containment / token overlap
      * grounded chat prompts -> echo of the [context 1] block
      * fallback -> fixed default line
    """

    deterministic = True

    def __init__(self, rules=None, default=None):
        self.rules = list(rules or [])
        self.default = default or "No supporting context was retrieved."

    @classmethod
    def from_script_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
        rules = [(r["when_contains"], r["respond"]) for r in spec.get("rules", [])]
        return cls(rules=rules, default=spec.get("default"))

    def complete(self, messages) -> str:
        _check_messages(messages)
        prompt = messages[-1]["content"]
        for needle, reply in self.rules:
            if needle in prompt:
                return reply

        if "Generate exactly" in prompt and "questions" in prompt:
            return self._questions(prompt)
        if "numbered list of atomic factual statements" in prompt:
            return self._statements(prompt)
        if "Answer YES or NO" in prompt:
            return self._verdict(prompt)
        match = _CONTEXT_1.search(prompt)
        if match:
            return match.group(1).strip()
        return self.default

    # -- behaviors -----------------------------------------------------------

    @staticmethod
    def _payload(prompt):
        blocks = _QUOTED_BLOCK.findall(prompt)
        return [b.strip() for b in blocks]

    _QUESTION_FORMS = (
        "What does the response indicate about {topic}?",
        "How is {topic} characterized in the response?",
        "Why is {topic} significant here?",
        "Where does {topic} fit into the described incident?",
        "When does {topic} become relevant according to the answer?",
    )

    def _questions(self, prompt):
        m = re.search(r"Generate exactly (\d+)", prompt)
        n = int(m.group(1)) if m else 5
        blocks = self._payload(prompt)
        answer = blocks[0] if blocks else prompt
        words = [w for w in _WORD.findall(answer) if w.lower() not in _FILLER]
        if not words:
            words = ["this"]
        lines = []
        for i in range(n):
            topic = words[i % len(words)]
            form = self._QUESTION_FORMS[i % len(self._QUESTION_FORMS)]
            lines.append(f"{i + 1}. {form.format(topic=topic)}")
        return "\n".join(lines)

    def _statements(self, prompt):
        blocks = self._payload(prompt)
        text = blocks[0] if blocks else ""
        sentences = [s.strip() for s in _SENTENCE_SPLIT.split(text) if s.strip()]
        if not sentences:
            return "NONE"
        return "\n".join(f"{i + 1}. {s}" for i, s in enumerate(sentences))

    def _verdict(self, prompt):
        blocks = self._payload(prompt)
        if len(blocks) < 2:
            return "NO: malformed verdict prompt"
        statement, reference = blocks[0], blocks[1]
        norm_stmt = " ".join(statement.lower().rstrip(".").split())
        norm_ref = " ".join(reference.lower().split())
        if norm_stmt and norm_stmt in norm_ref:
            return "YES: statement appears in the reference text"
        stmt_tokens = {w.lower() for w in _WORD.findall(statement)} - _FILLER
        ref_tokens = {w.lower() for w in _WORD.findall(reference)} - _FILLER
        if stmt_tokens and len(stmt_tokens & ref_tokens) / len(stmt_tokens) >= 0.5:
            return "YES: statement tokens overlap the reference text"
        return "NO: statement is not grounded in the reference text"


# ---------------------------------------------------------------------------
# Replay wrapper
# ---------------------------------------------------------------------------


def request_key(messages) -> str:
    canonical = json.dumps(list(messages), sort_keys=True, separators=(",", ":"),
                           ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ReplayingChatClient:
    """Records transcripts in live mode; replays them bit-for-bit otherwise."""

    def __init__(self, directory, inner=None, mode="live"):
        if mode not in ("live", "replay"):
            raise ConfigError(f"unknown replay mode: {mode!r}")
        if mode == "live" and inner is None:
            raise ConfigError("live mode needs an inner client")
        self.directory = Path(directory)
        self.inner = inner
        self.mode = mode
        self.deterministic = True if mode == "replay" else getattr(inner, "deterministic", False)
        self._lock = threading.Lock()
        if mode == "live":
            self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key):
        return self.directory / f"{key}.json"

    def complete(self, messages) -> str:
        key = request_key(messages)
        path = self._path(key)
        if self.mode == "replay":
            if not path.exists():
                raise ReplayMissError(f"no transcript for request {key}")
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)["response"]
        response = self.inner.complete(messages)
        with self._lock:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump({"request": list(messages), "response": response},
                          fh, ensure_ascii=False, indent=2, sort_keys=True)
                fh.write("\n")
        return response
