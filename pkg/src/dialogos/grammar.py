"""Speech-act vocabularies and the succession rules between them.

A grammar defines which acts may open a new discussion and which act may
follow which in a reply chain. Acts flagged *auto-reactive* are the one
authorship-sensitive case: a user may attach them only to their own
message, whatever the parent act is. Grammars are plain data loaded from
JSON config files and are immutable after construction, so they can be
shared freely between threads and connections.

Two configs ship with the package (see :mod:`dialogos.data`): ``splach``,
a ten-act vocabulary in five categories with a hand-curated succession
graph, and ``cchene``, a twenty-four act task vocabulary whose succession
graph is fully connected.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import EmptyRoot, MalformedDoc, UnknownAct, UnknownActRef

#: The five act categories.
CATEGORIES = ("salutation", "initiatif", "reactif", "evaluatif", "auto_reactif")

_ID_RE = re.compile(r"^[a-z_]+$")


class _Root:
    """Start-of-discussion marker; distinct from every act id by type."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "ROOT"


#: Parent reference for a message that opens a new discussion.
ROOT = _Root()

ActRef = str | _Root


@dataclass(frozen=True)
class SpeechAct:
    """One selectable act: a stable ASCII id plus display metadata."""

    id: str
    label: str
    category: str
    opener: str | None = None
    placeholder: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not _ID_RE.match(self.id):
            raise MalformedDoc(f"act id must match [a-z_]+, got {self.id!r}")
        if not isinstance(self.label, str) or not self.label:
            raise MalformedDoc(f"act {self.id!r} needs a non-empty label")
        if self.category not in CATEGORIES:
            raise MalformedDoc(
                f"act {self.id!r} has category {self.category!r}, "
                f"expected one of {', '.join(CATEGORIES)}"
            )


@dataclass(frozen=True)
class ActGrammar:
    """An act vocabulary plus its succession graph.

    ``edges`` is normalized at construction to carry an entry for every
    act id (empty set when the config names none), which makes equality
    and the emit/load round trip exact.
    """

    name: str
    acts: Mapping[str, SpeechAct]
    root_successors: frozenset[str]
    edges: Mapping[str, frozenset[str]] = field(default_factory=dict)
    auto_reactive: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        acts = dict(self.acts)
        for aid, act in acts.items():
            if aid != act.id:
                raise MalformedDoc(f"act map key {aid!r} != act id {act.id!r}")
        root = frozenset(self.root_successors)
        auto = frozenset(self.auto_reactive)
        edges: dict[str, frozenset[str]] = {}
        for aid in acts:
            edges[aid] = frozenset(self.edges.get(aid, ()))
        for key in self.edges:
            if key not in acts:
                raise UnknownActRef(f"edge source {key!r} is not a known act")
        for aid, succ in edges.items():
            for sid in succ:
                if sid not in acts:
                    raise UnknownActRef(f"edge {aid!r} -> {sid!r} names a missing act")
        for rid in root:
            if rid not in acts:
                raise UnknownActRef(f"root act {rid!r} is not a known act")
        for xid in auto:
            if xid not in acts:
                raise UnknownActRef(f"auto-reactive act {xid!r} is not a known act")
        if not root:
            raise EmptyRoot("grammar has no root acts")
        overlap = root & auto
        if overlap:
            raise MalformedDoc(
                f"auto-reactive acts cannot open a discussion: {sorted(overlap)}"
            )
        object.__setattr__(self, "acts", acts)
        object.__setattr__(self, "root_successors", root)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "auto_reactive", auto)

    # -- queries ---------------------------------------------------------

    def successors(self, parent: ActRef, same_author: bool = False) -> frozenset[str]:
        """Acts that may follow ``parent``.

        ``parent`` is :data:`ROOT` for a new discussion, otherwise an act
        id. Auto-reactive acts are added when ``same_author`` is true and
        are never returned otherwise, regardless of the edge table.
        """
        if isinstance(parent, _Root):
            return self.root_successors
        if parent not in self.acts:
            raise UnknownAct(f"unknown parent act {parent!r}")
        base = self.edges[parent]
        if same_author:
            return base | self.auto_reactive
        return base - self.auto_reactive

    def validate_succession(
        self, parent: ActRef, act: str, same_author: bool = False
    ) -> bool:
        """True when ``act`` may follow ``parent`` under ``same_author``."""
        if act not in self.acts:
            raise UnknownAct(f"unknown act {act!r}")
        return act in self.successors(parent, same_author)

    def categories_in_use(self) -> frozenset[str]:
        return frozenset(a.category for a in self.acts.values())

    def terminal_acts(self) -> list[str]:
        """Acts with no successor even for their own author (dead ends)."""
        return sorted(a for a in self.acts if not self.successors(a, same_author=True))

    # -- serialization ---------------------------------------------------

    def to_doc(self) -> dict[str, Any]:
        """Emit the grammar as a config document; inverse of :func:`load_grammar`."""
        acts = []
        for act in sorted(self.acts.values(), key=lambda a: a.id):
            entry: dict[str, Any] = {
                "id": act.id,
                "label": act.label,
                "category": act.category,
            }
            if act.opener is not None:
                entry["opener"] = act.opener
            if act.placeholder:
                entry["placeholder"] = True
            acts.append(entry)
        return {
            "name": self.name,
            "acts": acts,
            "root": sorted(self.root_successors),
            "edges": {
                aid: sorted(succ) for aid, succ in sorted(self.edges.items()) if succ
            },
            "auto_reactive": sorted(self.auto_reactive),
        }


def _as_string_list(value: Any, what: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise MalformedDoc(f"{what} must be an array of strings")
    return value


def parse_grammar(doc: Mapping[str, Any]) -> ActGrammar:
    """Build an :class:`ActGrammar` from a parsed config document."""
    if not isinstance(doc, Mapping):
        raise MalformedDoc("grammar document must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise MalformedDoc("grammar needs a non-empty 'name'")
    raw_acts = doc.get("acts")
    if not isinstance(raw_acts, list) or not raw_acts:
        raise MalformedDoc("grammar needs a non-empty 'acts' array")
    acts: dict[str, SpeechAct] = {}
    for entry in raw_acts:
        if not isinstance(entry, Mapping):
            raise MalformedDoc("each act must be an object")
        unknown = set(entry) - {"id", "label", "category", "opener", "placeholder"}
        if unknown:
            raise MalformedDoc(f"unknown act keys: {sorted(unknown)}")
        opener = entry.get("opener")
        if opener is not None and not isinstance(opener, str):
            raise MalformedDoc("act 'opener' must be a string")
        placeholder = entry.get("placeholder", False)
        if not isinstance(placeholder, bool):
            raise MalformedDoc("act 'placeholder' must be a boolean")
        act = SpeechAct(
            id=entry.get("id", ""),
            label=entry.get("label", ""),
            category=entry.get("category", ""),
            opener=opener,
            placeholder=placeholder,
        )
        if act.id in acts:
            raise MalformedDoc(f"duplicate act id {act.id!r}")
        acts[act.id] = act
    root = _as_string_list(doc.get("root", []), "'root'")
    raw_edges = doc.get("edges", {})
    if not isinstance(raw_edges, Mapping):
        raise MalformedDoc("'edges' must be an object mapping act id to an array")
    edges = {
        key: frozenset(_as_string_list(val, f"edges[{key!r}]"))
        for key, val in raw_edges.items()
    }
    auto = _as_string_list(doc.get("auto_reactive", []), "'auto_reactive'")
    return ActGrammar(
        name=name,
        acts=acts,
        root_successors=frozenset(root),
        edges=edges,
        auto_reactive=frozenset(auto),
    )


def load_grammar(source: Mapping[str, Any] | str | Path) -> ActGrammar:
    """Load a grammar from a parsed document, or from a JSON file path."""
    if isinstance(source, Mapping):
        return parse_grammar(source)
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedDoc(f"cannot read grammar file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise MalformedDoc(f"grammar file {path} is not valid JSON: {exc}") from exc
    return parse_grammar(doc)


def emit_grammar(grammar: ActGrammar) -> dict[str, Any]:
    """Alias for :meth:`ActGrammar.to_doc`, for symmetric naming with load."""
    return grammar.to_doc()


def successors(
    grammar: ActGrammar, parent: ActRef, same_author: bool = False
) -> frozenset[str]:
    return grammar.successors(parent, same_author)


def validate_succession(
    grammar: ActGrammar, parent: ActRef, act: str, same_author: bool = False
) -> bool:
    return grammar.validate_succession(parent, act, same_author)
