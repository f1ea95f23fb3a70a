"""Response-quality metrics.

Two-stage answer evaluation (question regeneration with greedy token
matching; cosine against human answers) plus the four retrieval/generation
ratios (faithfulness, answer relevancy, context recall, context precision)
with LLM-judged sub-steps. Judge prompts are fixed strings and every verdict
keeps its rationale for audit.
"""

import re
from dataclasses import dataclass, field

from ..errors import EmptyEmbeddingError, IntegrityError, NoStatementsError, ThreatragError
from ..embeddings import embed_texts, sentence_vector
from ..orchestrator import generate_questions
from ..vectorstore import cosine
from .bertscore import bert_score
from .textproc import preprocess

VALID_SOURCE_KINDS = ("vulnerability", "apt_report", "security_blog", "virustotal_report")

DEFAULT_INDIRECT_THRESHOLD = 0.8

STATEMENT_EXTRACTION_PROMPT = (
    "Break the following text into a numbered list of atomic factual statements. "
    "Output only the numbered list; if there are no factual statements output NONE.\n\n"
    "Text:\n<<<{text}>>>"
)

SUPPORT_VERDICT_PROMPT = (
    "Decide whether the statement is supported by the context. "
    "Answer YES or NO followed by a colon and a short rationale.\n\n"
    "Statement:\n<<<{statement}>>>\n\nContext:\n<<<{context}>>>"
)

RELEVANCE_VERDICT_PROMPT = (
    "Decide whether the statement is relevant to the ground truth answer. "
    "Answer YES or NO followed by a colon and a short rationale.\n\n"
    "Statement:\n<<<{statement}>>>\n\nGround truth:\n<<<{ground_truth}>>>"
)

JUDGE_PROMPTS = {
    "statement_extraction": STATEMENT_EXTRACTION_PROMPT,
    "support_verdict": SUPPORT_VERDICT_PROMPT,
    "relevance_verdict": RELEVANCE_VERDICT_PROMPT,
}

_LIST_ITEM = re.compile(r"^\s*(?:\d+[.)]\s*|-\s+)(.+?)\s*$")
_VERDICT = re.compile(r"^\s*(yes|no)\b[:.]?\s*(.*)$", re.IGNORECASE | re.DOTALL)


@dataclass
class EvalCase:
    query: str
    bot_answer: str
    human_answer: str | None = None
    ground_truth: str | None = None
    contexts: list[str] = field(default_factory=list)
    source_kind: str = "security_blog"
    case_id: str = ""

    def __post_init__(self):
        if not self.query or not self.bot_answer:
            raise IntegrityError("query and bot_answer must be non-empty")
        if self.source_kind not in VALID_SOURCE_KINDS:
            raise IntegrityError(f"unknown source_kind: {self.source_kind!r}")


@dataclass
class IndirectEvalResult:
    questions: list[str]
    per_question_scores: list[float]
    average_score: float
    threshold: float
    passed: bool


@dataclass
class CosineEvalResult:
    s1_word2vec_style: float | None = None
    s2_glove_style: float | None = None
    s3_contextual: float | None = None
    errors: dict[str, str] = field(default_factory=dict)


@dataclass
class StatementVerdict:
    statement: str
    supported: bool
    rationale: str


@dataclass
class RagasResult:
    faithfulness: float | None = None
    answer_relevancy: float | None = None
    context_recall: float | None = None
    context_precision: float | None = None
    statements_total: int = 0            # |S|
    statements_supported: int = 0        # |T|
    m: int = 0
    gt_statements_total: int = 0         # |G_s|
    gt_statements_in_context: int = 0    # |G_s in C|
    context_statements_total: int = 0    # |C_s|
    context_statements_relevant: int = 0
    errors: dict[str, str] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Judge plumbing
# ---------------------------------------------------------------------------


def _ask(judge_llm, prompt: str) -> str:
    return judge_llm.complete([{"role": "user", "content": prompt}])


def extract_statements(text: str, judge_llm) -> list[str]:
    completion = _ask(judge_llm, STATEMENT_EXTRACTION_PROMPT.format(text=text))
    items = []
    for line in completion.splitlines():
        m = _LIST_ITEM.match(line)
        if m:
            items.append(m.group(1).strip())
    if not items:
        raise NoStatementsError("judge extracted no statements")
    return items


def _verdict(judge_llm, prompt: str) -> tuple[bool, str]:
    completion = _ask(judge_llm, prompt)
    m = _VERDICT.match(completion.strip())
    if not m:
        raise IntegrityError(f"unparseable judge verdict: {completion[:80]!r}")
    return m.group(1).lower() == "yes", m.group(2).strip()


# ---------------------------------------------------------------------------
# Stage 1: indirect evaluation via regenerated questions
# ---------------------------------------------------------------------------


def indirect_eval(case: EvalCase, llm_client, token_embedder,
                  threshold: float = DEFAULT_INDIRECT_THRESHOLD) -> IndirectEvalResult:
    """Average greedy-match F1 between the original query and 5 regenerated
    questions; the verdict passes when the average clears the threshold."""
    question_set = generate_questions(case.bot_answer, llm_client, n=5)
    scores = []
    for question in question_set.questions:
        _, _, f1 = bert_score(question, case.query, token_embedder)
        scores.append(f1)
    average = sum(scores) / len(scores)
    return IndirectEvalResult(
        questions=question_set.questions,
        per_question_scores=scores,
        average_score=average,
        threshold=threshold,
        passed=average >= threshold,
    )


# ---------------------------------------------------------------------------
# Stage 2: cosine against the human answer
# ---------------------------------------------------------------------------


def cosine_eval(case: EvalCase, word_tables=None, contextual_provider=None,
                stopword_list=None) -> CosineEvalResult:
    """Eq.-style cosine between bot and human answers.

    word_tables: {"s1": WordVectorTable, "s2": WordVectorTable} (either may be
    absent); contextual_provider embeds the raw strings for s3.
    """
    if case.human_answer is None:
        raise IntegrityError("cosine_eval needs a human answer")
    result = CosineEvalResult()
    word_tables = word_tables or {}

    bot_tokens = preprocess(case.bot_answer, stopword_list)
    human_tokens = preprocess(case.human_answer, stopword_list)

    for slot in ("s1", "s2"):
        table = word_tables.get(slot)
        if table is None:
            continue
        try:
            bot_vec = sentence_vector(table, bot_tokens)
            human_vec = sentence_vector(table, human_tokens)
            score = cosine(bot_vec.values, human_vec.values)
        except (EmptyEmbeddingError, IntegrityError) as exc:
            result.errors[slot] = str(exc)
            continue
        if slot == "s1":
            result.s1_word2vec_style = score
        else:
            result.s2_glove_style = score

    if contextual_provider is not None:
        try:
            vectors = embed_texts(contextual_provider, [case.bot_answer, case.human_answer])
            result.s3_contextual = cosine(vectors[0].values, vectors[1].values)
        except (IntegrityError, EmptyEmbeddingError) as exc:
            result.errors["s3"] = str(exc)
    return result


# ---------------------------------------------------------------------------
# Retrieval / generation ratios
# ---------------------------------------------------------------------------


def faithfulness(answer: str, contexts, judge_llm):
    """|supported statements| / |statements|, with per-statement verdicts."""
    contexts = list(contexts)
    if not answer or not answer.strip():
        raise IntegrityError("answer must be non-empty")
    if not contexts:
        raise IntegrityError("faithfulness needs at least one context")
    statements = extract_statements(answer, judge_llm)
    joined = "\n".join(contexts)
    verdicts = []
    for statement in statements:
        supported, rationale = _verdict(
            judge_llm, SUPPORT_VERDICT_PROMPT.format(statement=statement, context=joined))
        verdicts.append(StatementVerdict(statement, supported, rationale))
    supported_count = sum(1 for v in verdicts if v.supported)
    return supported_count / len(verdicts), verdicts


def answer_relevancy(query: str, answer: str, llm_client, embedder, m: int = 5) -> float:
    """Mean cosine between the query and m questions regenerated from the answer."""
    if m < 1:
        raise IntegrityError("m must be >= 1")
    question_set = generate_questions(answer, llm_client, n=m)
    vectors = embed_texts(embedder, [query] + question_set.questions)
    query_vec = vectors[0].values
    total = 0.0
    for vec in vectors[1:]:
        total += cosine(query_vec, vec.values)
    return total / m


def context_recall(ground_truth: str, contexts, judge_llm):
    """Fraction of ground-truth statements the judge finds in the contexts."""
    if not ground_truth or not ground_truth.strip():
        raise IntegrityError("ground truth must be non-empty")
    statements = extract_statements(ground_truth, judge_llm)
    joined = "\n".join(contexts)
    verdicts = []
    for statement in statements:
        present, rationale = _verdict(
            judge_llm, SUPPORT_VERDICT_PROMPT.format(statement=statement, context=joined))
        verdicts.append(StatementVerdict(statement, present, rationale))
    present_count = sum(1 for v in verdicts if v.supported)
    return present_count / len(verdicts), verdicts


def ragas_eval(case: EvalCase, llm_client, judge_llm, embedder, m: int = 5) -> RagasResult:
    """All four ratios for one case; per-metric failures land in .errors."""
    result = RagasResult(m=m)

    def attempt(name, fn):
        try:
            return fn()
        except ThreatragError as exc:
            result.errors[name] = str(exc)
            return None

    outcome = attempt("F", lambda: faithfulness(case.bot_answer, case.contexts, judge_llm))
    if outcome is not None:
        result.faithfulness, verdicts = outcome
        result.statements_total = len(verdicts)
        result.statements_supported = sum(1 for v in verdicts if v.supported)

    ar = attempt("AR", lambda: answer_relevancy(case.query, case.bot_answer,
                                                llm_client, embedder, m))
    if ar is not None:
        result.answer_relevancy = ar

    if case.ground_truth:
        outcome = attempt("CR", lambda: context_recall(case.ground_truth,
                                                       case.contexts, judge_llm))
        if outcome is not None:
            result.context_recall, verdicts = outcome
            result.gt_statements_total = len(verdicts)
            result.gt_statements_in_context = sum(1 for v in verdicts if v.supported)
        if case.contexts:
            outcome = attempt("CP", lambda: context_precision(case.ground_truth,
                                                              case.contexts, judge_llm))
            if outcome is not None:
                result.context_precision, verdicts = outcome
                result.context_statements_total = len(verdicts)
                result.context_statements_relevant = sum(1 for v in verdicts if v.supported)
    else:
        result.errors.setdefault("CR", "no ground truth in case")
        result.errors.setdefault("CP", "no ground truth in case")
    return result


def context_precision(ground_truth: str, contexts, judge_llm):
    """Fraction of context statements the judge marks relevant to the ground truth."""
    contexts = list(contexts)
    if not contexts:
        raise IntegrityError("context_precision needs at least one context")
    if not ground_truth or not ground_truth.strip():
        raise IntegrityError("ground truth must be non-empty")
    statements = []
    for ctx in contexts:
        try:
            statements.extend(extract_statements(ctx, judge_llm))
        except NoStatementsError:
            continue
    if not statements:
        raise NoStatementsError("no statements extracted from any context")
    verdicts = []
    for statement in statements:
        relevant, rationale = _verdict(
            judge_llm, RELEVANCE_VERDICT_PROMPT.format(statement=statement,
                                                       ground_truth=ground_truth))
        verdicts.append(StatementVerdict(statement, relevant, rationale))
    relevant_count = sum(1 for v in verdicts if v.supported)
    return relevant_count / len(verdicts), verdicts
