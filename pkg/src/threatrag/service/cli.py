"""Command line: engine ingest | query | serve | eval.

Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
"""

import argparse
import json
import logging
import sys

from ..errors import ConfigError, ThreatragError
from .config import load_config
from .engine import Engine
from .eval_runner import run_eval_command

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _dump(payload) -> str:
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="engine",
        description="Cyber-threat knowledge engine: ingest sources, query them, "
                    "serve the HTTP API, and run response evaluations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="load, chunk, embed, and persist sources")
    p_ingest.add_argument("--config", required=True)
    p_ingest.add_argument("--source", action="append", default=None,
                          help="restrict to this source name (repeatable)")
    p_ingest.add_argument("--dump-chunks", default=None, metavar="PATH",
                          help="also write chunks as JSON Lines for inspection")

    p_query = sub.add_parser("query", help="answer one query against the stores")
    p_query.add_argument("text")
    p_query.add_argument("--config", required=True)
    p_query.add_argument("--k", type=int, default=None)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--config", required=True)

    p_eval = sub.add_parser("eval", help="run the response-evaluation suite")
    p_eval.add_argument("--cases", required=True)
    p_eval.add_argument("--mode", choices=["live", "replay"], default="live")
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--out", default=None, help="report output directory")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "ingest":
            engine = Engine(config)
            summary = engine.ingest(args.source, dump_chunks=args.dump_chunks)
            print(_dump(summary.as_dict()))
            return EXIT_OK

        if args.command == "query":
            if not args.text or not args.text.strip():
                print("usage error: query text must be non-empty", file=sys.stderr)
                return EXIT_USAGE
            if args.k is not None and args.k < 1:
                print("usage error: --k must be >= 1", file=sys.stderr)
                return EXIT_USAGE
            engine = Engine(config)
            response = engine.query(args.text, k=args.k)
            print(_dump(response))
            return EXIT_OK

        if args.command == "serve":
            import uvicorn

            from .api import create_app

            engine = Engine(config)
            app = create_app(engine)
            uvicorn.run(app, host=config.server.host, port=config.server.port)
            return EXIT_OK

        if args.command == "eval":
            engine = Engine(config)
            json_path, csv_path, hard_errors = run_eval_command(
                engine, args.cases, args.mode, out_dir=args.out)
            print(_dump({"report_json": str(json_path), "report_csv": str(csv_path),
                         "hard_error_count": hard_errors}))
            return EXIT_OK if hard_errors == 0 else EXIT_RUNTIME
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ThreatragError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
