"""Temporal and contextual structuring of forum channels.

Two complementary views over the same conversation forest:

* *Sessions*: maximal runs of messages sent consecutively by one author
  within a time window, possibly spanning several threads. The session
  grid crosses threads (rows) with sessions (columns) so readers see the
  thread structure and the turn-taking rhythm in a single picture.

* *Context*: messages may be attached to an activity of a course plan
  and/or to concept ids. Opening a learning object then filters the forum
  down to the messages relevant to the current activity (including its
  sub-activities) or to the concepts the object covers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .conversation import ConversationTree, Intervention
from .errors import DanglingRef, MalformedDoc, UnknownNode, UnknownObject, UnsortedInput

#: Default session window; the boundary is deliberately configurable.
DEFAULT_SESSION_GAP_MS = 60 * 60 * 1000


# -- temporal sessions -----------------------------------------------------


@dataclass(frozen=True)
class ForumSession:
    """A run of messages sent consecutively by one author."""

    author: str
    members: tuple[str, ...]
    start_ts: int
    end_ts: int


def _check_sorted(messages: Sequence[Intervention]) -> None:
    for prev, cur in zip(messages, messages[1:]):
        if cur.seq <= prev.seq:
            raise UnsortedInput(
                f"messages not in ascending seq order at seq {cur.seq}"
            )


def group_sessions(
    messages: Sequence[Intervention], gap_ms: int = DEFAULT_SESSION_GAP_MS
) -> list[ForumSession]:
    """Partition channel messages into author sessions.

    A session extends while the next message (in global channel order)
    has the same author and arrives within ``gap_ms``; any author change
    or larger gap starts a new session.
    """
    if gap_ms <= 0:
        raise ValueError("gap_ms must be positive")
    _check_sorted(messages)
    sessions: list[ForumSession] = []
    run: list[Intervention] = []
    for msg in messages:
        if run and (msg.author != run[-1].author or msg.ts - run[-1].ts > gap_ms):
            sessions.append(_close_run(run))
            run = []
        run.append(msg)
    if run:
        sessions.append(_close_run(run))
    return sessions


def _close_run(run: list[Intervention]) -> ForumSession:
    return ForumSession(
        author=run[0].author,
        members=tuple(m.id for m in run),
        start_ts=run[0].ts,
        end_ts=run[-1].ts,
    )


def consecutive_fraction(
    messages: Sequence[Intervention], gap_ms: int = DEFAULT_SESSION_GAP_MS
) -> float:
    """Share of messages continuing their author's previous message.

    Counts messages whose immediate channel predecessor has the same
    author within ``gap_ms``, over the total; 0.0 for an empty channel.
    """
    if gap_ms <= 0:
        raise ValueError("gap_ms must be positive")
    _check_sorted(messages)
    if not messages:
        return 0.0
    consecutive = sum(
        1
        for prev, cur in zip(messages, messages[1:])
        if cur.author == prev.author and cur.ts - prev.ts <= gap_ms
    )
    return consecutive / len(messages)


@dataclass(frozen=True)
class SessionGrid:
    """Threads as rows, sessions as columns, messages in the crossings."""

    rows: tuple[str, ...]
    columns: tuple[ForumSession, ...]
    cells: Mapping[tuple[str, int], tuple[str, ...]]

    def cell(self, row: str, column: int) -> tuple[str, ...]:
        return self.cells.get((row, column), ())


def build_session_grid(
    tree: ConversationTree, gap_ms: int = DEFAULT_SESSION_GAP_MS
) -> SessionGrid:
    """Cross thread structure with session structure for one channel.

    Rows are thread roots ascending seq; columns are sessions ordered by
    start timestamp (ties by first seq). Every message lands in exactly
    one cell.
    """
    messages = tree.messages()
    sessions = group_sessions(messages, gap_ms)
    keyed = sorted(
        sessions, key=lambda s: (s.start_ts, tree.get(s.members[0]).seq)
    )
    columns = tuple(keyed)
    session_index: dict[str, int] = {}
    for col, session in enumerate(columns):
        for member in session.members:
            session_index[member] = col
    cells: dict[tuple[str, int], list[str]] = {}
    for msg in messages:
        key = (tree.thread_of(msg.id), session_index[msg.id])
        cells.setdefault(key, []).append(msg.id)
    return SessionGrid(
        rows=tuple(tree.roots),
        columns=columns,
        cells={key: tuple(ids) for key, ids in cells.items()},
    )


# -- course manifests --------------------------------------------------------


@dataclass(frozen=True)
class Activity:
    """A node of the course plan (a part or sub-part)."""

    id: str
    title: str
    children: tuple["Activity", ...] = ()


@dataclass(frozen=True)
class LearningObject:
    """An addressable piece of course content."""

    id: str
    activity: str
    concepts: frozenset[str]


@dataclass(frozen=True)
class CourseManifest:
    """Course plan, learning objects, and the concept vocabulary."""

    activities: Activity
    objects: Mapping[str, LearningObject]
    concepts: frozenset[str]
    concept_edges: frozenset[tuple[str, str]] = frozenset()

    def activity_ids(self) -> frozenset[str]:
        ids: list[str] = []
        stack = [self.activities]
        while stack:
            node = stack.pop()
            ids.append(node.id)
            stack.extend(node.children)
        return frozenset(ids)

    def descendants(self, activity_id: str) -> frozenset[str]:
        """The activity and everything below it in the plan."""
        start = self._find(activity_id)
        if start is None:
            raise DanglingRef(f"no activity {activity_id!r} in manifest")
        out: list[str] = []
        stack = [start]
        while stack:
            node = stack.pop()
            out.append(node.id)
            stack.extend(node.children)
        return frozenset(out)

    def _find(self, activity_id: str) -> Activity | None:
        stack = [self.activities]
        while stack:
            node = stack.pop()
            if node.id == activity_id:
                return node
            stack.extend(node.children)
        return None


def _parse_activity(node: Any, seen: set[str]) -> Activity:
    if not isinstance(node, Mapping):
        raise MalformedDoc("each activity must be an object")
    aid = node.get("id")
    title = node.get("title", "")
    if not isinstance(aid, str) or not aid:
        raise MalformedDoc("activity needs a non-empty 'id'")
    if aid in seen:
        raise MalformedDoc(f"duplicate activity id {aid!r}")
    seen.add(aid)
    if not isinstance(title, str):
        raise MalformedDoc(f"activity {aid!r} title must be a string")
    raw_children = node.get("children", [])
    if not isinstance(raw_children, list):
        raise MalformedDoc(f"activity {aid!r} children must be an array")
    children = tuple(_parse_activity(c, seen) for c in raw_children)
    return Activity(id=aid, title=title, children=children)


def parse_manifest(doc: Mapping[str, Any]) -> CourseManifest:
    """Build a :class:`CourseManifest` from a parsed document."""
    if not isinstance(doc, Mapping):
        raise MalformedDoc("manifest must be a JSON object")
    raw_activities = doc.get("activities")
    if not raw_activities:
        raise MalformedDoc("manifest needs a non-empty 'activities' tree")
    activities = _parse_activity(raw_activities, set())
    raw_concepts = doc.get("concepts", [])
    if not isinstance(raw_concepts, list) or not all(
        isinstance(c, str) for c in raw_concepts
    ):
        raise MalformedDoc("'concepts' must be an array of ids")
    concepts = frozenset(raw_concepts)
    raw_objects = doc.get("objects", {})
    if not isinstance(raw_objects, Mapping):
        raise MalformedDoc("'objects' must be an object")
    activity_ids: set[str] = set()
    stack = [activities]
    while stack:
        node = stack.pop()
        activity_ids.add(node.id)
        stack.extend(node.children)
    objects: dict[str, LearningObject] = {}
    for oid, entry in raw_objects.items():
        if not isinstance(entry, Mapping):
            raise MalformedDoc(f"object {oid!r} must be an object")
        activity = entry.get("activity")
        if activity not in activity_ids:
            raise DanglingRef(f"object {oid!r} references missing activity {activity!r}")
        obj_concepts = entry.get("concepts", [])
        if not isinstance(obj_concepts, list):
            raise MalformedDoc(f"object {oid!r} concepts must be an array")
        for cid in obj_concepts:
            if cid not in concepts:
                raise DanglingRef(f"object {oid!r} references missing concept {cid!r}")
        objects[oid] = LearningObject(
            id=oid, activity=activity, concepts=frozenset(obj_concepts)
        )
    raw_edges = doc.get("concept_edges", [])
    if not isinstance(raw_edges, list):
        raise MalformedDoc("'concept_edges' must be an array of pairs")
    edges: set[tuple[str, str]] = set()
    for pair in raw_edges:
        if not isinstance(pair, list) or len(pair) != 2:
            raise MalformedDoc("each concept edge must be a pair")
        a, b = pair
        if a not in concepts or b not in concepts:
            raise DanglingRef(f"concept edge {pair!r} references a missing concept")
        edges.add((a, b))
    return CourseManifest(
        activities=activities,
        objects=objects,
        concepts=concepts,
        concept_edges=frozenset(edges),
    )


def load_manifest(source: Mapping[str, Any] | str | Path) -> CourseManifest:
    """Load a manifest from a parsed document, or from a JSON file path."""
    if isinstance(source, Mapping):
        return parse_manifest(source)
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedDoc(f"cannot read manifest file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise MalformedDoc(f"manifest file {path} is not valid JSON: {exc}") from exc
    return parse_manifest(doc)


# -- contextual attachments and views ----------------------------------------


@dataclass(frozen=True)
class ContextAttachment:
    """Link from one message to an activity and/or a set of concepts."""

    intervention: str
    activity: str | None = None
    concepts: frozenset[str] = frozenset()


def attach_context(
    attachments: dict[str, ContextAttachment],
    tree: ConversationTree,
    manifest: CourseManifest | None,
    intervention: str,
    activity: str | None,
    concepts: Iterable[str],
) -> ContextAttachment:
    """Store (or overwrite) the context attachment of one message.

    With ``manifest=None`` reference checks are skipped; that mode exists
    for offline replay where the course config is not at hand.
    """
    if intervention not in tree:
        raise UnknownNode(f"no message {intervention!r} to attach context to")
    concepts = frozenset(concepts)
    if manifest is not None:
        if activity is not None and activity not in manifest.activity_ids():
            raise DanglingRef(f"no activity {activity!r} in manifest")
        missing = concepts - manifest.concepts
        if missing:
            raise DanglingRef(f"unknown concepts {sorted(missing)}")
    record = ContextAttachment(
        intervention=intervention, activity=activity, concepts=concepts
    )
    attachments[intervention] = record
    return record


def contextual_view(
    tree: ConversationTree,
    attachments: Mapping[str, ContextAttachment],
    manifest: CourseManifest,
    object_id: str,
    tab: str,
) -> list[str]:
    """Messages relevant to an opened learning object, ascending seq.

    ``tab="activity"`` keeps messages attached to the object's activity
    or any sub-activity of it; ``tab="content"`` keeps messages whose
    attached concepts intersect the object's concept set.
    """
    if object_id not in manifest.objects:
        raise UnknownObject(f"no learning object {object_id!r} in manifest")
    if tab not in ("activity", "content"):
        raise ValueError(f"tab must be 'activity' or 'content', got {tab!r}")
    obj = manifest.objects[object_id]
    if tab == "activity":
        scope = manifest.descendants(obj.activity)

        def keep(att: ContextAttachment) -> bool:
            return att.activity is not None and att.activity in scope

    else:

        def keep(att: ContextAttachment) -> bool:
            return bool(att.concepts & obj.concepts)

    hits = [
        tree.get(att.intervention)
        for att in attachments.values()
        if att.intervention in tree and keep(att)
    ]
    return [msg.id for msg in sorted(hits, key=lambda m: m.seq)]
