"""Shared glue for the CLI `eval` command and POST /eval."""

from pathlib import Path

from ..embeddings import load_word_table
from ..errors import ConfigError
from ..evalkit import EvalSuiteConfig, load_cases, run_eval_suite, write_report
from ..evalkit.bertscore import provider_token_embedder
from ..llm import ReplayingChatClient
from .engine import Engine


def build_suite_config(engine: Engine, mode: str) -> EvalSuiteConfig:
    cfg = engine.config.eval
    llm_client = engine.llm_client
    if cfg.replay_dir is not None:
        llm_client = ReplayingChatClient(cfg.replay_dir, inner=engine.llm_client, mode=mode)
    elif mode == "replay":
        raise ConfigError("replay mode needs eval.replay_dir in the config")
    word_tables = {slot: load_word_table(path) for slot, path in cfg.word_tables.items()}
    return EvalSuiteConfig(
        llm_client=llm_client,
        judge_client=llm_client,
        token_embedder=provider_token_embedder(engine.embedder),
        embedder=engine.embedder,
        word_tables=word_tables,
        indirect_threshold=cfg.indirect_threshold,
        m=cfg.m,
        concurrency=cfg.concurrency,
    )


def run_eval_command(engine: Engine, case_file, mode: str, out_dir=None):
    """Returns (report_json_path, report_csv_path, hard_error_count)."""
    cases, parse_errors = load_cases(case_file)
    suite_config = build_suite_config(engine, mode)
    report = run_eval_suite(cases, suite_config, parse_errors=parse_errors)
    target = Path(out_dir) if out_dir else (
        engine.config.eval.report_dir or Path(case_file).parent / "eval_report")
    json_path, csv_path = write_report(report, target)
    return json_path, csv_path, report["hard_error_count"]
