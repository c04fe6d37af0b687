"""Typed errors shared by every module of the suite.

Each error carries a stable ``code`` string: the same identifier shows up
in protocol ``error`` frames, CLI messages, and tests. Extra context goes
into ``info`` (e.g. the legal successor set on a grammar rejection).
"""

from __future__ import annotations

from typing import Any, ClassVar


class DialogosError(Exception):
    """Base class for all typed errors."""

    code: ClassVar[str] = "ERROR"

    def __init__(self, detail: str = "", **info: Any) -> None:
        super().__init__(detail or self.code)
        self.detail = detail
        self.info = dict(info)


# Grammar / config loading
class MalformedDoc(DialogosError):
    code = "MALFORMED_DOC"


class UnknownActRef(DialogosError):
    code = "UNKNOWN_ACT_REF"


class EmptyRoot(DialogosError):
    code = "EMPTY_ROOT"


class UnknownAct(DialogosError):
    code = "UNKNOWN_ACT"


# Conversation trees
class UnknownParent(DialogosError):
    code = "UNKNOWN_PARENT"


class UnknownNode(DialogosError):
    code = "UNKNOWN_NODE"


class EmptyBody(DialogosError):
    code = "EMPTY_BODY"


class BodyTooLarge(DialogosError):
    code = "BODY_TOO_LARGE"


class ActForbidden(DialogosError):
    """Grammar rejection; carries the successor set that would be legal."""

    code = "ACT_FORBIDDEN"

    def __init__(self, detail: str = "", allowed: Any = ()) -> None:
        self.allowed = tuple(sorted(allowed))
        super().__init__(detail, allowed=list(self.allowed))


# Forum structuring
class UnsortedInput(DialogosError):
    code = "UNSORTED_INPUT"


class DanglingRef(DialogosError):
    code = "DANGLING_REF"


class UnknownObject(DialogosError):
    code = "UNKNOWN_OBJECT"


# Directory / analytics
class UnknownUser(DialogosError):
    code = "UNKNOWN_USER"


# Event store
class SchemaViolation(DialogosError):
    code = "SCHEMA_VIOLATION"


class StorageFailure(DialogosError):
    code = "STORAGE_FAILURE"


class CorruptLog(DialogosError):
    """Log cannot be replayed; names the first sequence number at fault."""

    code = "CORRUPT_LOG"

    def __init__(self, detail: str = "", first_bad_seq: int = 0) -> None:
        self.first_bad_seq = first_bad_seq
        super().__init__(detail, first_bad_seq=first_bad_seq)


# Wire protocol
class BadFrame(DialogosError):
    code = "BAD_FRAME"


class Unauthenticated(DialogosError):
    code = "UNAUTHENTICATED"


class UnknownChannel(DialogosError):
    code = "UNKNOWN_CHANNEL"
