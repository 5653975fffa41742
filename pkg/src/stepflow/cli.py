"""stepflow service CLI: serve the HTTP/WS API or replay a scripted session."""

from __future__ import annotations

import argparse
import json
import sys


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stepflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the session service")
    serve.add_argument("--config", help="JSON config path")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    replay = sub.add_parser("replay", help="headless scripted run")
    replay.add_argument("script", help="JSONL action script")
    replay.add_argument("--out", default="replay-out", help="output directory")
    replay.add_argument("--config", help="JSON config path (overridden by script config)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service.api import build_app
        from .service.config import AppConfig
        from .service.session import SessionManager

        config = AppConfig.load(args.config) if args.config else AppConfig()
        manager = SessionManager(config=config)
        uvicorn.run(build_app(manager), host=args.host, port=args.port)
        return 0

    if args.command == "replay":
        from .service.config import AppConfig
        from .service.replay import run_replay

        config = AppConfig.load(args.config) if args.config else None
        summary = run_replay(args.script, args.out, config=config)
        json.dump(summary, sys.stdout, indent=2)
        print()
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
