"""Response-evaluation toolkit: indirect question-regeneration scoring,
cosine comparison against human answers, and retrieval/generation ratios."""

from .bertscore import bert_score, f1_score, greedy_match_pr, provider_token_embedder
from .metrics import (
    JUDGE_PROMPTS,
    VALID_SOURCE_KINDS,
    CosineEvalResult,
    EvalCase,
    IndirectEvalResult,
    RagasResult,
    StatementVerdict,
    answer_relevancy,
    context_precision,
    context_recall,
    cosine_eval,
    extract_statements,
    faithfulness,
    indirect_eval,
    ragas_eval,
)
from .suite import EvalSuiteConfig, load_cases, run_eval_suite, write_report
from .textproc import default_stopwords, preprocess, tokenize

__all__ = [
    "JUDGE_PROMPTS", "VALID_SOURCE_KINDS", "CosineEvalResult", "EvalCase",
    "IndirectEvalResult", "RagasResult", "StatementVerdict", "answer_relevancy",
    "bert_score", "context_precision", "context_recall", "cosine_eval",
    "default_stopwords", "extract_statements", "f1_score", "faithfulness",
    "greedy_match_pr", "indirect_eval", "load_cases", "preprocess",
    "provider_token_embedder", "ragas_eval", "run_eval_suite", "tokenize",
    "write_report", "EvalSuiteConfig",
]
