"""Operator entry point.

    interview-copilot serve --port 8710 --data-dir ./data --profiles ./profiles
    interview-copilot run-replay --profile p.json --replay r.jsonl --out out/
    interview-copilot export --session <id> --data-dir ./data --format markdown --out report.md

Exit codes: 0 success, 2 config error, 3 runtime stage failure. Every error
path prints a single line to stderr: ``error: <stage>: <message>``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from .config import EngineConfig, GatewayConfig, ProviderSettings
from .engine import SessionEngine
from .errors import EngineError
from .eventlog import EventLog, replay_log
from .ids import content_id
from .profile import load_profile
from .provider import make_provider
from .summary import render_summary
from .transcript import open_replay_source

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _fail(stage: str, message: str, code: int) -> int:
    print(f"error: {stage}: {message}", file=sys.stderr)
    return code


def _provider_settings(args) -> ProviderSettings:
    settings = ProviderSettings.from_env()
    if getattr(args, "provider", None):
        settings.kind = args.provider
    return settings


def cmd_serve(args) -> int:
    settings = _provider_settings(args)
    config = GatewayConfig(
        host=args.host,
        port=args.port,
        data_dir=args.data_dir,
        profiles_dir=args.profiles,
        replays_dir=args.replays,
        static_dir=args.static or "",
        engine=EngineConfig(provider=settings),
    )
    try:
        provider = make_provider(settings)
    except ValueError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    from .gateway import serve

    try:
        print(
            f"serving on {config.host}:{config.port} "
            f"(provider={provider.kind}, data_dir={config.data_dir})"
        )
        serve(config, provider)
    except EngineError as exc:
        return _fail("serve", str(exc), EXIT_CONFIG)
    return EXIT_OK


def cmd_run_replay(args) -> int:
    settings = _provider_settings(args)
    try:
        provider = make_provider(settings)
        profile = load_profile(args.profile)
        source = open_replay_source(args.replay, speed=args.speed)
    except (EngineError, ValueError) as exc:
        stage = "ingestion" if getattr(exc, "code", "") in (
            "malformed-line", "file-not-found") else "config"
        return _fail(stage, str(exc), EXIT_CONFIG)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    # Deterministic session id: same profile + replay bytes, same id.
    session_id = args.session_id or content_id(
        "run",
        hashlib.sha1(Path(args.profile).read_bytes()).hexdigest(),
        hashlib.sha1(Path(args.replay).read_bytes()).hexdigest(),
    )
    log_path = out_dir / f"{session_id}.events.jsonl"
    if log_path.exists():
        log_path.unlink()

    engine = SessionEngine(
        profile,
        provider,
        EventLog(log_path),
        EngineConfig(provider=settings),
        session_id=session_id,
    )
    try:
        engine.start()
        count = engine.ingest_source(source)
    except EngineError as exc:
        return _fail("ingestion", str(exc), EXIT_RUNTIME)
    try:
        engine.end()  # auto-generates the summary
        report = engine.session.summary
        assert report is not None
    except EngineError as exc:
        return _fail("summary", str(exc), EXIT_RUNTIME)

    (out_dir / "summary.json").write_bytes(render_summary(report, "json"))
    (out_dir / "graph.json").write_text(
        json.dumps(engine.session.graph.export(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    covered = report.stats.get("covered_count", 0)
    print(
        f"session {session_id}: {count} segments, "
        f"{report.stats.get('evidence_count', 0)} evidence nodes, "
        f"{covered}/{len(profile.skills)} skills covered -> {out_dir}"
    )
    return EXIT_OK


def cmd_export(args) -> int:
    log_path = Path(args.data_dir) / f"{args.session}.events.jsonl"
    if not log_path.exists():
        return _fail("export", f"unknown-session: no log at {log_path}", EXIT_RUNTIME)
    try:
        session = replay_log(log_path)
    except EngineError as exc:
        return _fail("export", str(exc), EXIT_RUNTIME)
    if session.state != "summarized" or session.summary is None:
        return _fail(
            "export",
            f"session-not-summarized: state is {session.state}",
            EXIT_RUNTIME,
        )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(render_summary(session.summary, args.format))
    print(f"wrote {args.format} report to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interview-copilot",
        description="Real-time interview copilot engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the gateway")
    p_serve.add_argument("--host", default=os.environ.get("GATEWAY_HOST", "127.0.0.1"))
    p_serve.add_argument("--port", type=int,
                         default=int(os.environ.get("GATEWAY_PORT", "8710")))
    p_serve.add_argument("--data-dir", default=os.environ.get("DATA_DIR", "./data"))
    p_serve.add_argument("--profiles", default=os.environ.get("PROFILES_DIR", "./assets/profiles"))
    p_serve.add_argument("--replays", default=os.environ.get("REPLAYS_DIR", "./assets/replays"))
    p_serve.add_argument("--static", default=os.environ.get("STATIC_DIR", "frontend/dist"))
    p_serve.add_argument("--provider", choices=["mock", "http"], default=None)
    p_serve.set_defaults(func=cmd_serve)

    p_run = sub.add_parser("run-replay", help="drive a headless session from a replay file")
    p_run.add_argument("--profile", required=True)
    p_run.add_argument("--replay", required=True)
    p_run.add_argument("--speed", type=float, default=0.0)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--session-id", default=None)
    p_run.add_argument("--provider", choices=["mock", "http"], default=None)
    p_run.set_defaults(func=cmd_run_replay)

    p_export = sub.add_parser("export", help="export a summarized session's report")
    p_export.add_argument("--session", required=True)
    p_export.add_argument("--data-dir", default=os.environ.get("DATA_DIR", "./data"))
    p_export.add_argument("--format", choices=["json", "markdown"], default="json")
    p_export.add_argument("--out", required=True)
    p_export.set_defaults(func=cmd_export)
    return parser


def run(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("LOG_LEVEL", "INFO"))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    return args.func(args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
