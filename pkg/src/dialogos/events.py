"""Append-only event log: the single source of truth for all state.

Every state change in the system is an :class:`EventRecord`; live state
is a fold over the log, so replaying the file reproduces the world
exactly. The storage format is newline-delimited UTF-8 JSON, one record
per line, optionally preceded by a ``log_meta`` header line naming the
format version. Sequence numbers are gapless from 1.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

from .errors import CorruptLog, SchemaViolation, StorageFailure

FORMAT_VERSION = "1"

KINDS = (
    "intervention_posted",
    "context_attached",
    "context_opened",
    "message_opened",
    "profile_upserted",
    "offers_set",
    "presence_changed",
    "channel_created",
)

CHANNEL_MODES = ("chat", "forum")
OPEN_MODES = ("contextual", "global")


@dataclass(frozen=True)
class EventRecord:
    seq: int
    ts: int
    kind: str
    payload: Mapping[str, Any]


# -- payload schemas ----------------------------------------------------------


def _req(payload: Mapping[str, Any], key: str, types: type | tuple) -> Any:
    if key not in payload:
        raise SchemaViolation(f"payload missing {key!r}")
    value = payload[key]
    if not isinstance(value, types):
        raise SchemaViolation(f"payload field {key!r} has wrong type")
    return value


def _nonempty_str(payload: Mapping[str, Any], key: str) -> str:
    value = _req(payload, key, str)
    if not value:
        raise SchemaViolation(f"payload field {key!r} is empty")
    return value


def _str_list(payload: Mapping[str, Any], key: str) -> list:
    value = payload.get(key, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaViolation(f"payload field {key!r} must be an array of strings")
    return value


def _check_intervention_posted(p: Mapping[str, Any]) -> None:
    _nonempty_str(p, "channel")
    _nonempty_str(p, "act")
    _nonempty_str(p, "author")
    _req(p, "body", str)
    _req(p, "ts", int)
    parent = p.get("parent")
    if parent is not None and not isinstance(parent, str):
        raise SchemaViolation("payload field 'parent' must be an id or null")
    if p.get("mode", "global") not in OPEN_MODES:
        raise SchemaViolation("payload field 'mode' must be contextual|global")


def _check_context_attached(p: Mapping[str, Any]) -> None:
    _nonempty_str(p, "channel")
    _nonempty_str(p, "intervention")
    activity = p.get("activity")
    if activity is not None and not isinstance(activity, str):
        raise SchemaViolation("payload field 'activity' must be an id or null")
    _str_list(p, "concepts")


def _check_context_opened(p: Mapping[str, Any]) -> None:
    _nonempty_str(p, "user")
    _nonempty_str(p, "object")


def _check_message_opened(p: Mapping[str, Any]) -> None:
    _nonempty_str(p, "user")
    _nonempty_str(p, "message")
    if p.get("mode") not in OPEN_MODES:
        raise SchemaViolation("payload field 'mode' must be contextual|global")


def _check_profile_upserted(p: Mapping[str, Any]) -> None:
    _nonempty_str(p, "user")
    name = p.get("name")
    if name is not None and not isinstance(name, str):
        raise SchemaViolation("payload field 'name' must be a string")
    _str_list(p, "competences")
    _str_list(p, "offers")
    _str_list(p, "contacts")
    progress = p.get("progress", {})
    if not isinstance(progress, Mapping):
        raise SchemaViolation("payload field 'progress' must be an object")
    for course, fraction in progress.items():
        if not isinstance(course, str) or not isinstance(fraction, (int, float)):
            raise SchemaViolation("payload field 'progress' maps course to fraction")
        if isinstance(fraction, bool) or not 0.0 <= fraction <= 1.0:
            raise SchemaViolation("progress fractions must sit in [0, 1]")


def _check_offers_set(p: Mapping[str, Any]) -> None:
    _nonempty_str(p, "user")
    _str_list(p, "offers")


def _check_presence_changed(p: Mapping[str, Any]) -> None:
    _nonempty_str(p, "user")
    if p.get("state") not in ("connected", "offline"):
        raise SchemaViolation("payload field 'state' must be connected|offline")


def _check_channel_created(p: Mapping[str, Any]) -> None:
    _nonempty_str(p, "channel")
    if p.get("mode") not in CHANNEL_MODES:
        raise SchemaViolation("payload field 'mode' must be chat|forum")


_CHECKS: dict[str, Callable[[Mapping[str, Any]], None]] = {
    "intervention_posted": _check_intervention_posted,
    "context_attached": _check_context_attached,
    "context_opened": _check_context_opened,
    "message_opened": _check_message_opened,
    "profile_upserted": _check_profile_upserted,
    "offers_set": _check_offers_set,
    "presence_changed": _check_presence_changed,
    "channel_created": _check_channel_created,
}


def validate_payload(kind: str, payload: Mapping[str, Any]) -> None:
    """Raise :class:`SchemaViolation` unless ``payload`` fits ``kind``."""
    if kind not in KINDS:
        raise SchemaViolation(f"unknown event kind {kind!r}")
    if not isinstance(payload, Mapping):
        raise SchemaViolation("payload must be an object")
    _CHECKS[kind](payload)


# -- serialization ------------------------------------------------------------


def record_to_line(record: EventRecord) -> str:
    """One canonical JSON line, no pretty-printing."""
    return json.dumps(
        {
            "seq": record.seq,
            "ts": record.ts,
            "kind": record.kind,
            "payload": dict(record.payload),
        },
        ensure_ascii=False,
        separators=(",", ":"),
        sort_keys=True,
    )


def _meta_line() -> str:
    return json.dumps(
        {"kind": "log_meta", "format": FORMAT_VERSION},
        ensure_ascii=False,
        separators=(",", ":"),
        sort_keys=True,
    )


def parse_log_lines(lines: Iterable[str]) -> list[EventRecord]:
    """Parse and fully validate a log; reports the first bad seq on failure."""
    records: list[EventRecord] = []
    expected = 1
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except ValueError:
            raise CorruptLog(
                f"line {lineno} is not valid JSON", first_bad_seq=expected
            ) from None
        if not isinstance(doc, dict):
            raise CorruptLog(f"line {lineno} is not an object", first_bad_seq=expected)
        if lineno == 1 and doc.get("kind") == "log_meta":
            if doc.get("format") != FORMAT_VERSION:
                raise CorruptLog(
                    f"unsupported log format {doc.get('format')!r}", first_bad_seq=0
                )
            continue
        seq = doc.get("seq")
        if seq != expected:
            raise CorruptLog(
                f"expected seq {expected}, found {seq!r} at line {lineno}",
                first_bad_seq=expected,
            )
        ts = doc.get("ts")
        if not isinstance(ts, int):
            raise CorruptLog(f"bad ts at seq {seq}", first_bad_seq=expected)
        kind = doc.get("kind")
        payload = doc.get("payload")
        try:
            validate_payload(kind, payload)
        except SchemaViolation as exc:
            raise CorruptLog(
                f"seq {seq}: {exc.detail}", first_bad_seq=expected
            ) from None
        records.append(EventRecord(seq=seq, ts=ts, kind=kind, payload=payload))
        expected += 1
    return records


def read_events(path: str | Path) -> list[EventRecord]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_log_lines(f)
    except OSError as exc:
        raise StorageFailure(f"cannot read log {path}: {exc}") from exc


def now_ms() -> int:
    return time.time_ns() // 1_000_000


class EventLog:
    """In-memory event sequence with optional durable file backing.

    A single writer (the global sequencer) appends; appended records are
    flushed and fsynced before the call returns, so an acknowledgment
    implies the event survives a crash.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.records: list[EventRecord] = []
        self._file = None
        if self.path is not None:
            fresh = not self.path.exists() or self.path.stat().st_size == 0
            if not fresh:
                self.records = read_events(self.path)
            try:
                self._file = open(self.path, "a", encoding="utf-8")
                if fresh:
                    self._file.write(_meta_line() + "\n")
                    self._file.flush()
            except OSError as exc:
                raise StorageFailure(f"cannot open log {self.path}: {exc}") from exc

    @property
    def last_seq(self) -> int:
        return self.records[-1].seq if self.records else 0

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def append(
        self, kind: str, payload: Mapping[str, Any], ts: int | None = None
    ) -> EventRecord:
        """Validate, sequence, and durably store one event."""
        validate_payload(kind, payload)
        record = EventRecord(
            seq=self.last_seq + 1,
            ts=now_ms() if ts is None else ts,
            kind=kind,
            payload=dict(payload),
        )
        if self._file is not None:
            try:
                self._file.write(record_to_line(record) + "\n")
                self._file.flush()
                os.fsync(self._file.fileno())
            except OSError as exc:
                raise StorageFailure(f"cannot append to log: {exc}") from exc
        self.records.append(record)
        return record

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None

    def __enter__(self) -> "EventLog":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
