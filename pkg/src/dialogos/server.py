"""Wire server: newline-delimited JSON frames over a full-duplex stream.

Protocol v1, one frame per line, LF terminated. Clients authenticate
with ``hello``, join channels, ask for the legal act menu before
posting, and receive sequenced ``event`` frames. Every state change
travels through the event log first; what a client sees acknowledged is
what a replay reproduces.

:func:`handle_frame` is a pure function of (frame, connection state,
world snapshot) returning the events to append plus the reply and
broadcast frames; it never raises. :class:`ServerEngine` executes those
outcomes against the log and the world, and :class:`DialogosServer`
carries the engine over asyncio TCP.
"""

from __future__ import annotations

import asyncio
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

from .conversation import Intervention, intervention_id
from .errors import BadFrame, DanglingRef, DialogosError, Unauthenticated, UnknownObject
from .events import OPEN_MODES, EventLog, now_ms
from .forum import contextual_view
from .grammar import CATEGORIES, ROOT, ActRef
from .peers import match_peers, peer_graph_model
from .world import WorldState

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1

#: Frame types a client may send; everything else is server-to-client.
CLIENT_FRAMES = (
    "hello",
    "join",
    "post",
    "act_menu",
    "context_open",
    "open",
    "peer_query",
    "offers_set",
)


@dataclass
class ConnectionState:
    conn_id: int
    user: str | None = None
    version: int | None = None
    channels: set[str] = field(default_factory=set)


@dataclass
class Outcome:
    """What one frame wants done: events to append, frames to send."""

    events: list[tuple[str, dict[str, Any]]] = field(default_factory=list)
    replies: list[dict[str, Any]] = field(default_factory=list)
    broadcasts: list[tuple[str, dict[str, Any]]] = field(default_factory=list)


def parse_frame(line: str | bytes) -> dict[str, Any]:
    """Decode one wire line; anything that is not a typed object is BAD_FRAME."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError:
            raise BadFrame("frame is not valid UTF-8") from None
    line = line.strip()
    if not line:
        raise BadFrame("empty frame")
    try:
        frame = json.loads(line)
    except ValueError:
        raise BadFrame("frame is not valid JSON") from None
    if not isinstance(frame, dict) or not isinstance(frame.get("t"), str):
        raise BadFrame("frame must be an object with a string 't'")
    return frame


def error_frame(exc: DialogosError) -> dict[str, Any]:
    frame: dict[str, Any] = {"t": "error", "code": exc.code}
    if exc.detail:
        frame["detail"] = exc.detail
    if "allowed" in exc.info:
        frame["allowed"] = list(exc.info["allowed"])
    return frame


def intervention_frame(node: Intervention) -> dict[str, Any]:
    return {
        "t": "event",
        "intervention": {
            "id": node.id,
            "channel": node.channel,
            "parent": node.parent,
            "act": node.act,
            "author": node.author,
            "body": node.body,
            "ts": node.ts,
            "seq": node.seq,
        },
    }


def _need_str(frame: Mapping[str, Any], key: str) -> str:
    value = frame.get(key)
    if not isinstance(value, str) or not value:
        raise BadFrame(f"frame field {key!r} must be a non-empty string")
    return value


def _act_sort_key(act) -> tuple[int, str]:
    return (CATEGORIES.index(act.category), act.id)


# -- per-frame handlers --------------------------------------------------------


def _handle_hello(frame, conn: ConnectionState, world: WorldState, now: int) -> Outcome:
    if conn.user is not None:
        raise BadFrame("connection is already authenticated")
    user = _need_str(frame, "user")
    version = frame.get("version")
    if version != PROTOCOL_VERSION:
        raise BadFrame(f"unsupported protocol version {version!r}")
    out = Outcome()
    profile = world.directory.profiles.get(user)
    if profile is None:
        out.events.append(("profile_upserted", {"user": user, "name": user}))
    if profile is None or profile.presence != "connected":
        out.events.append(("presence_changed", {"user": user, "state": "connected"}))
        out.broadcasts.append(("*", {"t": "presence", "user": user, "state": "connected"}))
    conn.user = user
    conn.version = version
    out.replies.append({"t": "welcome", "seq": world.last_seq + len(out.events)})
    return out


def _handle_join(frame, conn: ConnectionState, world: WorldState, now: int) -> Outcome:
    channel = world.channel(_need_str(frame, "channel"))
    conn.channels.add(channel.id)
    out = Outcome()
    # Joining doubles as the full-channel fetch; re-joining re-fetches.
    for node in channel.tree.messages():
        out.replies.append(intervention_frame(node))
    return out


def _post_context(frame) -> tuple[str | None, list[str], bool]:
    """Validate the optional ctx object; returns (activity, concepts, present)."""
    if "ctx" not in frame:
        return None, [], False
    ctx = frame["ctx"]
    if not isinstance(ctx, dict):
        raise BadFrame("frame field 'ctx' must be an object")
    activity = ctx.get("activity")
    if activity is not None and not isinstance(activity, str):
        raise BadFrame("ctx field 'activity' must be an id")
    concepts = ctx.get("concepts", [])
    if not isinstance(concepts, list) or not all(isinstance(c, str) for c in concepts):
        raise BadFrame("ctx field 'concepts' must be an array of ids")
    return activity, concepts, True


def _handle_post(frame, conn: ConnectionState, world: WorldState, now: int) -> Outcome:
    channel = world.channel(_need_str(frame, "channel"))
    act = _need_str(frame, "act")
    body = frame.get("body")
    if not isinstance(body, str):
        raise BadFrame("frame field 'body' must be a string")
    parent = frame.get("parent")
    if parent is not None and not isinstance(parent, str):
        raise BadFrame("frame field 'parent' must be an id or absent")
    activity, concepts, contextual = _post_context(frame)

    # Everything is checked here so the emitted events apply infallibly.
    channel.tree.check_insert(
        world.grammar, parent=parent, act=act, author=conn.user, body=body
    )
    if contextual and world.manifest is not None:
        if activity is not None and activity not in world.manifest.activity_ids():
            raise DanglingRef(f"no activity {activity!r} in manifest")
        missing = set(concepts) - world.manifest.concepts
        if missing:
            raise DanglingRef(f"unknown concepts {sorted(missing)}")

    seq = world.last_seq + 1
    node_id = intervention_id(seq)
    out = Outcome()
    posted = {
        "channel": channel.id,
        "parent": parent,
        "act": act,
        "author": conn.user,
        "body": body,
        "ts": now,
        "mode": "contextual" if contextual else "global",
    }
    out.events.append(("intervention_posted", posted))
    if contextual:
        out.events.append(
            (
                "context_attached",
                {
                    "channel": channel.id,
                    "intervention": node_id,
                    "activity": activity,
                    "concepts": list(concepts),
                },
            )
        )
    out.replies.append({"t": "ack", "id": node_id, "seq": seq})
    node = Intervention(
        id=node_id,
        channel=channel.id,
        parent=parent,
        act=act,
        author=conn.user,
        body=body,
        ts=posted["ts"],
        seq=seq,
    )
    out.broadcasts.append((channel.id, intervention_frame(node)))
    return out


def _handle_act_menu(frame, conn: ConnectionState, world: WorldState, now: int) -> Outcome:
    channel = world.channel(_need_str(frame, "channel"))
    parent_ref: ActRef = ROOT
    same_author = False
    node_id = frame.get("node")
    if node_id is not None:
        if not isinstance(node_id, str):
            raise BadFrame("frame field 'node' must be an id or absent")
        node = channel.tree.get(node_id)
        parent_ref = node.act
        same_author = node.author == conn.user
    if world.grammar is None:
        raise BadFrame("server has no grammar loaded")
    allowed = world.grammar.successors(parent_ref, same_author)
    acts = sorted((world.grammar.acts[a] for a in allowed), key=_act_sort_key)
    listing = []
    for act in acts:
        entry: dict[str, Any] = {
            "id": act.id,
            "label": act.label,
            "category": act.category,
        }
        if act.opener is not None:
            entry["opener"] = act.opener
        listing.append(entry)
    return Outcome(replies=[{"t": "acts", "list": listing}])


def object_views(world: WorldState, object_id: str) -> tuple[list[str], list[str]]:
    """Activity-tab and content-tab message ids across all forum channels."""
    if world.manifest is None or object_id not in world.manifest.objects:
        raise UnknownObject(f"no learning object {object_id!r}")
    activity_hits: list[tuple[int, str]] = []
    content_hits: list[tuple[int, str]] = []
    for cid in sorted(world.channels):
        chan = world.channels[cid]
        if chan.mode != "forum":
            continue
        for tab, bucket in (("activity", activity_hits), ("content", content_hits)):
            for node_id in contextual_view(
                chan.tree, chan.attachments, world.manifest, object_id, tab
            ):
                bucket.append((chan.tree.get(node_id).seq, node_id))
    return [i for _, i in sorted(activity_hits)], [i for _, i in sorted(content_hits)]


def _handle_context_open(frame, conn: ConnectionState, world: WorldState, now: int) -> Outcome:
    object_id = _need_str(frame, "object")
    activity_ids, content_ids = object_views(world, object_id)
    out = Outcome()
    out.events.append(("context_opened", {"user": conn.user, "object": object_id}))
    out.replies.append(
        {"t": "views", "activity": activity_ids, "content": content_ids}
    )
    return out


def _handle_open(frame, conn: ConnectionState, world: WorldState, now: int) -> Outcome:
    message = _need_str(frame, "message")
    mode = frame.get("mode")
    if mode not in OPEN_MODES:
        raise BadFrame("frame field 'mode' must be contextual|global")
    out = Outcome()
    out.events.append(
        ("message_opened", {"user": conn.user, "message": message, "mode": mode})
    )
    out.replies.append({"t": "ack", "id": message, "seq": world.last_seq + 1})
    return out


def _handle_peer_query(frame, conn: ConnectionState, world: WorldState, now: int) -> Outcome:
    tags = frame.get("tags")
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise BadFrame("frame field 'tags' must be an array of strings")
    k = frame.get("k", 10)
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise BadFrame("frame field 'k' must be a positive integer")
    results = match_peers(world.directory, conn.user, tags, k)
    graph = peer_graph_model(world.directory, conn.user, results)
    cards = {node.id: node.card for node in graph.nodes}
    listing = [
        {
            "entity": r.entity,
            "score": r.score,
            "display_class": r.display_class,
            "card": cards[r.entity],
        }
        for r in results
    ]
    return Outcome(replies=[{"t": "peers", "results": listing}])


def _handle_offers_set(frame, conn: ConnectionState, world: WorldState, now: int) -> Outcome:
    tags = frame.get("tags")
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise BadFrame("frame field 'tags' must be an array of strings")
    out = Outcome()
    out.events.append(("offers_set", {"user": conn.user, "offers": tags}))
    out.replies.append({"t": "ack", "id": conn.user, "seq": world.last_seq + 1})
    return out


_HANDLERS: dict[str, Callable[..., Outcome]] = {
    "hello": _handle_hello,
    "join": _handle_join,
    "post": _handle_post,
    "act_menu": _handle_act_menu,
    "context_open": _handle_context_open,
    "open": _handle_open,
    "peer_query": _handle_peer_query,
    "offers_set": _handle_offers_set,
}


def handle_frame(
    frame: Mapping[str, Any],
    conn: ConnectionState,
    world: WorldState,
    now: int | None = None,
) -> Outcome:
    """Turn one client frame into events and frames; never raises.

    Failures come back as a single ``error`` reply frame. Only ``hello``
    is accepted before authentication. ``now`` stamps posted messages;
    it defaults to the wall clock and is injectable for deterministic
    tests.
    """
    try:
        t = frame.get("t")
        if t not in CLIENT_FRAMES:
            raise BadFrame(f"unknown client frame type {t!r}")
        if t != "hello" and conn.user is None:
            raise Unauthenticated("say hello first")
        return _HANDLERS[t](frame, conn, world, now_ms() if now is None else now)
    except DialogosError as exc:
        return Outcome(replies=[error_frame(exc)])
    except Exception:  # noqa: BLE001 -- robustness contract: never crash
        logger.exception("handler failure on frame %r", frame)
        return Outcome(replies=[error_frame(BadFrame("unprocessable frame"))])


def broadcast_policy(
    mode: str, event_channel: str, connections: Iterable[ConnectionState]
) -> list[ConnectionState]:
    """Who receives a channel event.

    Chat channels push to every joined connection in real time; forum
    channels push only to connections that subscribed by joining
    (on-demand readers re-join to fetch instead). Membership is the same
    test for both; the mode names the intended usage.
    """
    assert mode in ("chat", "forum")
    return [c for c in connections if event_channel in c.channels]


class ServerEngine:
    """Sequencer: applies outcomes to the log and world, routes frames.

    One engine instance is the single writer for its log; callers must
    invoke :meth:`handle_line` serially (the asyncio layer does, since
    everything runs on one loop).
    """

    def __init__(
        self,
        grammar=None,
        manifest=None,
        log: EventLog | None = None,
        clock: Callable[[], int] = now_ms,
    ) -> None:
        self.log = log if log is not None else EventLog()
        self.world = WorldState(grammar=grammar, manifest=manifest)
        for record in self.log:
            self.world.apply(record)
        self.clock = clock
        self.connections: dict[int, ConnectionState] = {}
        self.sinks: dict[int, Callable[[dict[str, Any]], None]] = {}
        self._next_conn_id = 1

    @property
    def replayed(self) -> int:
        return len(self.log)

    def connect(self, sink: Callable[[dict[str, Any]], None]) -> ConnectionState:
        conn = ConnectionState(conn_id=self._next_conn_id)
        self._next_conn_id += 1
        self.connections[conn.conn_id] = conn
        self.sinks[conn.conn_id] = sink
        return conn

    def disconnect(self, conn_id: int) -> None:
        conn = self.connections.pop(conn_id, None)
        self.sinks.pop(conn_id, None)
        if conn is None or conn.user is None:
            return
        still_here = any(c.user == conn.user for c in self.connections.values())
        if not still_here:
            record = self.log.append(
                "presence_changed",
                {"user": conn.user, "state": "offline"},
                ts=self.clock(),
            )
            self.world.apply(record)
            self._fan_out("*", {"t": "presence", "user": conn.user, "state": "offline"})

    def handle_line(self, conn_id: int, line: str | bytes) -> None:
        conn = self.connections[conn_id]
        try:
            frame = parse_frame(line)
        except BadFrame as exc:
            self._send(conn_id, error_frame(exc))
            return
        outcome = handle_frame(frame, conn, self.world, now=self.clock())
        self.execute(conn_id, outcome)

    def execute(self, conn_id: int, outcome: Outcome) -> None:
        for kind, payload in outcome.events:
            record = self.log.append(kind, payload, ts=self.clock())
            self.world.apply(record)
        for frame in outcome.replies:
            self._send(conn_id, frame)
        for scope, frame in outcome.broadcasts:
            self._fan_out(scope, frame)

    def _send(self, conn_id: int, frame: dict[str, Any]) -> None:
        sink = self.sinks.get(conn_id)
        if sink is None:
            return
        try:
            sink(frame)
        except Exception:  # noqa: BLE001 -- a dead peer must not stop the fold
            logger.debug("send failed on connection %d", conn_id, exc_info=True)

    def _fan_out(self, scope: str, frame: dict[str, Any]) -> None:
        if scope == "*":
            recipients = [c for c in self.connections.values() if c.user is not None]
        else:
            mode = self.world.channels[scope].mode
            recipients = broadcast_policy(mode, scope, self.connections.values())
        for conn in recipients:
            self._send(conn.conn_id, frame)


class DialogosServer:
    """Asyncio TCP carrier for the engine; one frame per line."""

    def __init__(
        self,
        grammar,
        manifest=None,
        log: EventLog | None = None,
        host: str = "127.0.0.1",
        port: int = 0,
    ) -> None:
        self.engine = ServerEngine(grammar=grammar, manifest=manifest, log=log)
        self.host = host
        self.port = port
        self._server: asyncio.AbstractServer | None = None

    @property
    def address(self) -> tuple[str, int]:
        assert self._server is not None, "server not started"
        sock = self._server.sockets[0]
        return sock.getsockname()[:2]

    async def start(self) -> None:
        self._server = await asyncio.start_server(
            self._on_client, self.host, self.port, limit=256 * 1024
        )
        self.port = self.address[1]

    async def serve_forever(self) -> None:
        assert self._server is not None
        async with self._server:
            await self._server.serve_forever()

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    async def _on_client(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        def sink(frame: dict[str, Any]) -> None:
            writer.write(
                (json.dumps(frame, ensure_ascii=False, separators=(",", ":")) + "\n").encode("utf-8")
            )

        conn = self.engine.connect(sink)
        try:
            while True:
                try:
                    line = await reader.readline()
                except (asyncio.LimitOverrunError, ValueError):
                    self.engine._send(conn.conn_id, error_frame(BadFrame("frame too long")))
                    break
                if not line:
                    break
                self.engine.handle_line(conn.conn_id, line)
                await writer.drain()
        except ConnectionError:
            pass
        finally:
            self.engine.disconnect(conn.conn_id)
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass
