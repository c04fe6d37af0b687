"""Command line entry points: operate and analyze without the UI.

Exit codes: 0 ok, 1 runtime data error (corrupt log, unknown channel),
2 usage or load error. Reports write to standard output only; redirect
to keep them. ``DIALOGOS_LOG_LEVEL`` (error|warn|info|debug) controls
library logging.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import os
import random
import re
import sys
from datetime import datetime, timezone

from . import data
from .analytics import profile_report
from .errors import CorruptLog, DialogosError
from .events import EventLog, EventRecord, read_events, record_to_line
from .forum import (
    build_session_grid,
    consecutive_fraction,
    group_sessions,
    load_manifest,
)
from .grammar import ROOT, load_grammar
from .server import DialogosServer
from .world import replay

_DURATION_RE = re.compile(r"^(\d+)([smh])$")
_UNIT_MS = {"s": 1_000, "m": 60_000, "h": 3_600_000}

DEFAULT_DELTA = "60m"


def parse_duration(text: str) -> int:
    """``<int><unit>`` with unit s, m, or h; returns milliseconds."""
    m = _DURATION_RE.match(text)
    if not m or int(m.group(1)) == 0:
        raise ValueError(f"duration must be <int><s|m|h> and positive, got {text!r}")
    return int(m.group(1)) * _UNIT_MS[m.group(2)]


def _parse_window(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"window must be <seq>..<seq>, got {text!r}"
        ) from None


def _iso(ts_ms: int) -> str:
    return datetime.fromtimestamp(ts_ms / 1000, tz=timezone.utc).isoformat(
        timespec="seconds"
    )


def _setup_logging() -> None:
    level = os.environ.get("DIALOGOS_LOG_LEVEL", "warn").lower()
    mapping = {
        "error": logging.ERROR,
        "warn": logging.WARNING,
        "info": logging.INFO,
        "debug": logging.DEBUG,
    }
    logging.basicConfig(level=mapping.get(level, logging.WARNING))


# -- subcommands ----------------------------------------------------------------


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        grammar = load_grammar(args.grammar)
        manifest = load_manifest(args.manifest) if args.manifest else None
        log = EventLog(args.log)
    except DialogosError as exc:
        print(f"error: {exc.code}: {exc.detail}", file=sys.stderr)
        return 2
    host, _, port_text = args.listen.rpartition(":")
    try:
        port = int(port_text)
    except ValueError:
        print(f"error: bad listen address {args.listen!r}", file=sys.stderr)
        return 2
    server = DialogosServer(
        grammar=grammar, manifest=manifest, log=log, host=host or "127.0.0.1", port=port
    )

    async def run() -> None:
        await server.start()
        bound_host, bound_port = server.address
        print(
            f"dialogos serving protocol v1 on {bound_host}:{bound_port} "
            f"(replayed {server.engine.replayed} events, seq horizon "
            f"{server.engine.world.last_seq})",
            flush=True,
        )
        await server.serve_forever()

    try:
        asyncio.run(run())
    except KeyboardInterrupt:
        pass
    except DialogosError as exc:
        print(f"error: {exc.code}: {exc.detail}", file=sys.stderr)
        return 1
    finally:
        log.close()
    return 0


def cmd_report_profiles(args: argparse.Namespace) -> int:
    try:
        events = read_events(args.log)
    except CorruptLog as exc:
        print(
            f"error: CORRUPT_LOG: first bad seq {exc.first_bad_seq} ({exc.detail})",
            file=sys.stderr,
        )
        return 1
    except DialogosError as exc:
        print(f"error: {exc.code}: {exc.detail}", file=sys.stderr)
        return 2
    if args.window:
        lo, hi = args.window
        events = [ev for ev in events if lo <= ev.seq <= hi]
    sys.stdout.write(profile_report(events))
    return 0


def cmd_report_sessions(args: argparse.Namespace) -> int:
    try:
        delta_ms = parse_duration(args.delta)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        world = replay(args.log)
    except CorruptLog as exc:
        print(
            f"error: CORRUPT_LOG: first bad seq {exc.first_bad_seq} ({exc.detail})",
            file=sys.stderr,
        )
        return 1
    except DialogosError as exc:
        print(f"error: {exc.code}: {exc.detail}", file=sys.stderr)
        return 2
    if args.channel not in world.channels:
        print(f"error: UNKNOWN_CHANNEL: no channel {args.channel!r}", file=sys.stderr)
        return 1
    tree = world.channels[args.channel].tree
    messages = tree.messages()
    sessions = group_sessions(messages, delta_ms)
    fraction = consecutive_fraction(messages, delta_ms)
    print(
        f"channel {args.channel}: {len(messages)} messages, "
        f"{len(sessions)} sessions (delta {args.delta})"
    )
    for idx, session in enumerate(sessions, start=1):
        print(
            f"session {idx}: author={session.author} messages={len(session.members)} "
            f"[{_iso(session.start_ts)} .. {_iso(session.end_ts)}]"
        )
    print(f"consecutive fraction: {fraction:.4f}")
    if args.grid:
        grid = build_session_grid(tree, delta_ms)
        header = ["thread"] + [f"s{i + 1}" for i in range(len(grid.columns))]
        print("\t".join(header))
        for row in grid.rows:
            cells = [
                ",".join(grid.cell(row, col)) for col in range(len(grid.columns))
            ]
            print("\t".join([row] + cells))
    return 0


def cmd_gen_corpus(args: argparse.Namespace) -> int:
    if not 0.0 <= args.consecutive <= 1.0:
        print("error: --consecutive must sit in [0, 1]", file=sys.stderr)
        return 2
    if args.messages < 1 or args.users < 1:
        print("error: --messages and --users must be positive", file=sys.stderr)
        return 2
    target_runs = round(args.consecutive * args.messages)
    target_runs = max(0, min(args.messages - 1, target_runs))
    if args.users < 2 and target_runs < args.messages - 1:
        print("error: author changes need at least 2 users", file=sys.stderr)
        return 2
    for record in generate_corpus(
        users=args.users,
        messages=args.messages,
        continuations=target_runs,
        seed=args.seed,
    ):
        sys.stdout.write(record_to_line(record) + "\n")
    achieved = target_runs / args.messages
    print(f"achieved consecutive fraction: {achieved:.4f}", file=sys.stderr)
    return 0


def generate_corpus(
    users: int, messages: int, continuations: int, seed: int, channel: str = "general"
) -> list[EventRecord]:
    """Deterministic synthetic forum: grammar-valid tree, seeded authors.

    Exactly ``continuations`` messages continue their predecessor's
    author within the default session window, so the measured
    consecutive fraction is ``continuations / messages``.
    """
    rng = random.Random(seed)
    grammar = load_grammar(data.grammar_path("splach"))
    names = [f"u{i + 1:02d}" for i in range(users)]
    continue_at = set(rng.sample(range(1, messages), continuations))
    base_ts = 1_700_000_000_000
    records: list[EventRecord] = []

    def emit(kind: str, payload: dict, ts: int) -> EventRecord:
        rec = EventRecord(seq=len(records) + 1, ts=ts, kind=kind, payload=payload)
        records.append(rec)
        return rec

    emit("channel_created", {"channel": channel, "mode": "forum"}, base_ts)
    posted: list[dict] = []  # payloads with their seq, for parent picking
    prev_author: str | None = None
    ts = base_ts
    for i in range(messages):
        if i > 0 and i in continue_at:
            author = prev_author
            ts += rng.randint(1_000, 60_000)  # well inside the session window
        else:
            choices = [n for n in names if n != prev_author] or names
            author = rng.choice(choices)
            ts += rng.randint(1_000, 60_000)
        # Reply to a random earlier message half the time, else open a thread.
        parent_entry = None
        if posted and rng.random() < 0.5:
            parent_entry = rng.choice(posted)
        if parent_entry is None:
            parent_ref, parent_id, same = ROOT, None, False
        else:
            parent_ref = parent_entry["act"]
            parent_id = parent_entry["id"]
            same = parent_entry["author"] == author
        act = rng.choice(sorted(grammar.successors(parent_ref, same)))
        payload = {
            "channel": channel,
            "parent": parent_id,
            "act": act,
            "author": author,
            "body": f"message {i + 1}",
            "ts": ts,
            "mode": "global",
        }
        rec = emit("intervention_posted", payload, ts)
        posted.append({"id": f"i{rec.seq:012d}", "act": act, "author": author})
        prev_author = author
    return records


def cmd_check_grammar(args: argparse.Namespace) -> int:
    try:
        grammar = load_grammar(args.file)
    except DialogosError as exc:
        print(f"error: {exc.code}: {exc.detail}", file=sys.stderr)
        return 2
    edge_count = sum(len(s) for s in grammar.edges.values())
    print(
        f"grammar {grammar.name!r}: {len(grammar.acts)} acts, "
        f"{len(grammar.categories_in_use())} categories, "
        f"{len(grammar.root_successors)} root acts, {edge_count} edges, "
        f"{len(grammar.auto_reactive)} auto-reactive"
    )
    dead_ends = grammar.terminal_acts()
    if dead_ends:
        for act in dead_ends:
            print(f"warning: terminal act {act!r} has no successors")
    else:
        print("no terminal acts")
    return 0


# -- argument wiring --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dialogos", description="structured chat and forum suite"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="replay the log, then serve protocol v1")
    serve.add_argument("--grammar", required=True, help="grammar config JSON")
    serve.add_argument("--manifest", help="course manifest JSON")
    serve.add_argument("--log", required=True, help="event log file (*.events.jsonl)")
    serve.add_argument("--listen", default="127.0.0.1:8765", help="host:port")
    serve.set_defaults(func=cmd_serve)

    report = sub.add_parser("report", help="print analyses to stdout")
    report_sub = report.add_subparsers(dest="report_kind", required=True)

    profiles = report_sub.add_parser("profiles", help="behavior profile TSV")
    profiles.add_argument("--log", required=True)
    profiles.add_argument("--window", type=_parse_window, help="seq range a..b")
    profiles.set_defaults(func=cmd_report_profiles)

    sessions = report_sub.add_parser("sessions", help="author sessions of a channel")
    sessions.add_argument("--log", required=True)
    sessions.add_argument("--channel", required=True)
    sessions.add_argument("--delta", default=DEFAULT_DELTA, help="window, e.g. 60m")
    sessions.add_argument("--grid", action="store_true", help="emit the session grid TSV")
    sessions.set_defaults(func=cmd_report_sessions)

    gen = sub.add_parser("gen-corpus", help="emit a synthetic event log to stdout")
    gen.add_argument("--users", type=int, required=True)
    gen.add_argument("--messages", type=int, required=True)
    gen.add_argument("--consecutive", type=float, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.set_defaults(func=cmd_gen_corpus)

    check = sub.add_parser("check-grammar", help="validate a grammar config")
    check.add_argument("file")
    check.set_defaults(func=cmd_check_grammar)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
