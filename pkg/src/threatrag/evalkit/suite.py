"""Evaluation suite runner: JSONL cases in, report.json + report.csv out.

Cases are independent and evaluated on a small thread pool; results join in
input order so reports are deterministic. Per-metric failures are recorded
and excluded from that metric's group mean; the suite only hard-fails a case
on an unexpected exception outside the metric implementations.
"""

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ThreatragError, IntegrityError
from .metrics import (
    JUDGE_PROMPTS,
    EvalCase,
    answer_relevancy,
    context_precision,
    context_recall,
    cosine_eval,
    faithfulness,
    indirect_eval,
)

CSV_COLUMNS = ["case_id", "source_kind", "s1", "s2", "s3", "indirect_avg",
               "F", "AR", "CR", "CP", "errors"]

GROUPED_METRICS = ["s1", "s2", "s3", "indirect_avg", "F", "AR", "CR", "CP"]

METRIC_NOTES = [
    "indirect_avg is raw greedy-match F1 without baseline rescaling",
    "AR is reported raw and may be negative (cosine is not clamped)",
    "CP follows the literal ratio of ground-truth-relevant context statements "
    "over all context statements, not rank-weighted precision",
]


@dataclass
class EvalSuiteConfig:
    llm_client: object = None
    judge_client: object = None
    token_embedder: object = None          # callable tokens -> vectors
    embedder: object = None                # provider for AR / s3
    word_tables: dict = field(default_factory=dict)
    indirect_threshold: float = 0.8
    m: int = 5
    concurrency: int = 4
    compute_indirect: bool = True
    compute_cosine: bool = True
    compute_ragas: bool = True

    def __post_init__(self):
        if self.judge_client is None:
            self.judge_client = self.llm_client


class TracingChatClient:
    """Per-case wrapper that keeps every (request, response) pair for the report."""

    def __init__(self, inner):
        self.inner = inner
        self.deterministic = getattr(inner, "deterministic", False)
        self.transcripts = []

    def complete(self, messages):
        response = self.inner.complete(messages)
        self.transcripts.append({"request": list(messages), "response": response})
        return response


def load_cases(path):
    """Parse a JSONL case file; bad lines are collected, not fatal."""
    cases = []
    errors = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                case = EvalCase(
                    query=raw["query"],
                    bot_answer=raw["bot_answer"],
                    human_answer=raw.get("human_answer"),
                    ground_truth=raw.get("ground_truth"),
                    contexts=list(raw.get("contexts", [])),
                    source_kind=raw["source_kind"],
                    case_id=raw.get("id") or f"case-{lineno}",
                )
            except (json.JSONDecodeError, KeyError, TypeError, IntegrityError) as exc:
                errors.append({"line": lineno, "error": f"{type(exc).__name__}: {exc}"})
                continue
            cases.append(case)
    return cases, errors


def _evaluate_case(case: EvalCase, config: EvalSuiteConfig):
    row = {
        "case_id": case.case_id,
        "source_kind": case.source_kind,
        "query": case.query,
        "bot_answer": case.bot_answer,
        "human_answer": case.human_answer,
        "ground_truth": case.ground_truth,
        "contexts": case.contexts,
        "metrics": {},
        "counts": {},
        "errors": {},
        "transcripts": [],
        "hard_error": None,
    }
    metrics = row["metrics"]
    errors = row["errors"]
    llm = TracingChatClient(config.llm_client) if config.llm_client else None
    judge = (TracingChatClient(config.judge_client)
             if config.judge_client is not None else llm)

    def attempt(name, fn):
        try:
            return fn()
        except ThreatragError as exc:
            errors[name] = str(exc)
            return None

    try:
        if config.compute_indirect and llm and config.token_embedder:
            indirect = attempt("indirect_avg", lambda: indirect_eval(
                case, llm, config.token_embedder, config.indirect_threshold))
            if indirect is not None:
                metrics["indirect_avg"] = indirect.average_score
                metrics["indirect_scores"] = indirect.per_question_scores
                metrics["indirect_questions"] = indirect.questions
                metrics["indirect_passed"] = indirect.passed

        if config.compute_cosine and case.human_answer is not None:
            cos = cosine_eval(case, config.word_tables, config.embedder)
            if cos.s1_word2vec_style is not None:
                metrics["s1"] = cos.s1_word2vec_style
            if cos.s2_glove_style is not None:
                metrics["s2"] = cos.s2_glove_style
            if cos.s3_contextual is not None:
                metrics["s3"] = cos.s3_contextual
            errors.update(cos.errors)

        if config.compute_ragas and judge is not None:
            if case.contexts:
                result = attempt("F", lambda: faithfulness(case.bot_answer, case.contexts, judge))
                if result is not None:
                    f_value, verdicts = result
                    metrics["F"] = f_value
                    row["counts"]["statements_total"] = len(verdicts)
                    row["counts"]["statements_supported"] = sum(
                        1 for v in verdicts if v.supported)
                    row["statement_verdicts"] = [
                        {"statement": v.statement, "supported": v.supported,
                         "rationale": v.rationale} for v in verdicts]
            if llm is not None and config.embedder is not None:
                ar = attempt("AR", lambda: answer_relevancy(
                    case.query, case.bot_answer, llm, config.embedder, config.m))
                if ar is not None:
                    metrics["AR"] = ar
                    row["counts"]["m"] = config.m
            if case.ground_truth:
                result = attempt("CR", lambda: context_recall(
                    case.ground_truth, case.contexts, judge))
                if result is not None:
                    cr_value, verdicts = result
                    metrics["CR"] = cr_value
                    row["counts"]["gt_statements_total"] = len(verdicts)
                    row["counts"]["gt_statements_in_context"] = sum(
                        1 for v in verdicts if v.supported)
                if case.contexts:
                    result = attempt("CP", lambda: context_precision(
                        case.ground_truth, case.contexts, judge))
                    if result is not None:
                        cp_value, verdicts = result
                        metrics["CP"] = cp_value
                        row["counts"]["context_statements_total"] = len(verdicts)
                        row["counts"]["context_statements_relevant"] = sum(
                            1 for v in verdicts if v.supported)
    except Exception as exc:  # unexpected: the case hard-fails, suite continues
        row["hard_error"] = f"{type(exc).__name__}: {exc}"

    transcripts = list(llm.transcripts) if llm else []
    if judge is not None and judge is not llm:
        transcripts.extend(judge.transcripts)
    row["transcripts"] = transcripts
    return row


def run_eval_suite(cases, config: EvalSuiteConfig, parse_errors=None) -> dict:
    """Evaluate every case and assemble the full report structure."""
    cases = list(cases)
    if not cases:
        raise IntegrityError("eval suite needs at least one case")
    workers = max(1, min(config.concurrency, len(cases)))
    if workers == 1:
        rows = [_evaluate_case(c, config) for c in cases]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda c: _evaluate_case(c, config), cases))

    group_means: dict[str, dict] = {}
    for kind in sorted({r["source_kind"] for r in rows}):
        group_rows = [r for r in rows if r["source_kind"] == kind]
        means = {}
        for metric in GROUPED_METRICS:
            values = [r["metrics"][metric] for r in group_rows if metric in r["metrics"]]
            means[metric] = (sum(values) / len(values)) if values else None
            means[f"{metric}_count"] = len(values)
        group_means[kind] = means

    return {
        "config": {
            "indirect_threshold": config.indirect_threshold,
            "m": config.m,
            "metric_notes": METRIC_NOTES,
        },
        "judge_prompts": JUDGE_PROMPTS,
        "parse_errors": list(parse_errors or []),
        "cases": rows,
        "group_means": group_means,
        "hard_error_count": sum(1 for r in rows if r["hard_error"]),
    }


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(report: dict, out_dir) -> tuple[Path, Path]:
    """Write report.json and report.csv; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    csv_path = out_dir / "report.csv"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in report["cases"]:
            metrics = row["metrics"]
            errors = row["errors"]
            error_text = "; ".join(f"{k}: {v}" for k, v in sorted(errors.items()))
            if row["hard_error"]:
                error_text = "; ".join(filter(None, [error_text, f"hard: {row['hard_error']}"]))
            writer.writerow([
                row["case_id"], row["source_kind"],
                _fmt(metrics.get("s1")), _fmt(metrics.get("s2")), _fmt(metrics.get("s3")),
                _fmt(metrics.get("indirect_avg")), _fmt(metrics.get("F")),
                _fmt(metrics.get("AR")), _fmt(metrics.get("CR")), _fmt(metrics.get("CP")),
                error_text,
            ])
    return json_path, csv_path
