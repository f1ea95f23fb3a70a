"""Query orchestration: embed, retrieve, assemble the prompt, generate.

Stateless per request. Each query is independent; there is no conversational
memory at v1.
"""

import re
import time
from dataclasses import dataclass, field

from .embeddings import embed_texts
from .errors import OrchestrationError, QuestionGenerationError
from .vectorstore import RetrievalConfig, ensemble_retrieve

DEFAULT_SYSTEM_INSTRUCTION = (
    "You are a cyber security expert. Provide the responses for the question "
    "considering the context below. Your responses should consider factors such "
    "as the relevance, accuracy, depth, creativity, and level of detail of their "
    "responses."
)

NO_CONTEXT_MARKER = "[no context available]"

QUESTION_PROMPT = (
    "Generate exactly {n} distinct questions that the following answer would "
    "correctly answer. Number them 1-{n}."
)

MAX_CONTEXTS = 3
QUESTION_RETRIES = 2

_LIST_ITEM = re.compile(r"^\s*(?:\d+[.)]\s*|-\s+)(.+?)\s*$")


@dataclass
class PromptTemplate:
    system_instruction: str = DEFAULT_SYSTEM_INSTRUCTION
    context_slot_count: int = MAX_CONTEXTS


@dataclass
class ChatAnswer:
    answer_text: str
    contexts_used: list
    source_names: list[str]
    model_name: str
    latency_ms: int
    ungrounded: bool = False
    token_usage: dict | None = None


@dataclass
class GeneratedQuestionSet:
    source_answer_text: str
    questions: list[str] = field(default_factory=list)


def render_prompt(template: PromptTemplate, query: str, contexts) -> str:
    """Deterministic prompt rendering; contexts in fused rank order."""
    contexts = list(contexts)
    if len(contexts) > template.context_slot_count:
        raise OrchestrationError(
            f"at most {template.context_slot_count} contexts, got {len(contexts)}")
    parts = [f"[System]\n{template.system_instruction}", f"[User Query]\n{query}"]
    if not contexts:
        parts.append(NO_CONTEXT_MARKER)
    else:
        for i, hit in enumerate(contexts, start=1):
            text = hit.text if hasattr(hit, "text") else str(hit)
            parts.append(f"[context {i}]\n{text}")
    return "\n\n".join(parts)


def chat_completion(llm_client, messages) -> str:
    """First choice's message content; parameter policy lives in the client."""
    return llm_client.complete(messages)


def answer_query(query, stores, retrieval_config, llm_client, template=None,
                 embedder=None) -> ChatAnswer:
    """Full pipeline: embed the query, retrieve top contexts, generate."""
    if not query or not query.strip():
        raise OrchestrationError("query must be non-empty")
    template = template or PromptTemplate()
    retrieval_config = retrieval_config or RetrievalConfig()
    if embedder is None:
        raise OrchestrationError("answer_query needs an embedding provider")

    started = time.monotonic()
    query_vector = embed_texts(embedder, [query])[0].values
    hits = ensemble_retrieve(stores, query_vector, retrieval_config)
    contexts = hits[:template.context_slot_count]
    prompt = render_prompt(template, query, contexts)
    messages = [{"role": "user", "content": prompt}]
    try:
        answer_text = chat_completion(llm_client, messages)
    except Exception as exc:
        raise OrchestrationError(
            f"generation failed after retrieval: {exc}", contexts=contexts) from exc

    deterministic = getattr(llm_client, "deterministic", False)
    latency_ms = 0 if deterministic else int((time.monotonic() - started) * 1000)
    source_names = []
    for hit in contexts:
        name = hit.metadata.get("source", "")
        if name and name not in source_names:
            source_names.append(name)
    return ChatAnswer(
        answer_text=answer_text,
        contexts_used=contexts,
        source_names=source_names,
        model_name=getattr(llm_client, "model", "scripted"),
        latency_ms=latency_ms,
        ungrounded=not contexts,
    )


def parse_question_list(completion: str) -> list[str]:
    """Items marked "1." / "1)" / "-"; anything not ending in "?" is rejected."""
    items = []
    for line in completion.splitlines():
        m = _LIST_ITEM.match(line)
        if m:
            items.append(m.group(1).strip())
    if not items:
        raise QuestionGenerationError("completion contains no list items")
    return [q for q in items if q.endswith("?")]


def generate_questions(answer_text, llm_client, n=5) -> GeneratedQuestionSet:
    """Exactly n questions or an error; re-asks the generator up to 2 times."""
    if not answer_text or not answer_text.strip():
        raise QuestionGenerationError("answer text must be non-empty")
    prompt = QUESTION_PROMPT.format(n=n) + f"\n\n<<<{answer_text}>>>"
    questions: list[str] = []
    last_error = None
    for attempt in range(1 + QUESTION_RETRIES):
        suffix = "" if attempt == 0 else (
            f"\n\n(attempt {attempt + 1}: previous output was incomplete)")
        try:
            completion = chat_completion(
                llm_client, [{"role": "user", "content": prompt + suffix}])
            parsed = parse_question_list(completion)
        except QuestionGenerationError as exc:
            last_error = exc
            continue
        for q in parsed:
            if q not in questions:
                questions.append(q)
        if len(questions) >= n:
            return GeneratedQuestionSet(answer_text, questions[:n])
    if last_error is not None and not questions:
        raise last_error
    raise QuestionGenerationError(
        f"generator produced {len(questions)} usable questions, need {n}")
