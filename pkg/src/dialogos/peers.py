"""Peer-help directory: profiles, offers, similarity search, graph model.

Learners describe what they know (competences) and what they are willing
to help with (offers); documents carry flat tag sets. A query ranks both
peers and documents by tag overlap. Presence only breaks ranking ties,
it never changes a score: an offline contact is still worth listing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping

from .errors import MalformedDoc, UnknownUser

PRESENCE_STATES = ("connected", "offline")

#: How a matched entity is rendered: the requester themselves, a connected
#: user, an offline personal contact, an unrelated user, or a document.
DISPLAY_CLASSES = ("self", "connected", "contact_offline", "stranger", "document")


def normalize_tags(tags: Iterable[str]) -> frozenset[str]:
    """Lowercase and trim tags, dropping empties."""
    out = set()
    for tag in tags:
        cleaned = tag.strip().lower()
        if cleaned:
            out.add(cleaned)
    return frozenset(out)


@dataclass(frozen=True)
class PeerProfile:
    user: str
    name: str
    competences: frozenset[str] = frozenset()
    offers: frozenset[str] = frozenset()
    progress: Mapping[str, float] = field(default_factory=dict)
    presence: str = "offline"
    contacts: frozenset[str] = frozenset()

    @classmethod
    def create(
        cls,
        user: str,
        name: str | None = None,
        competences: Iterable[str] = (),
        offers: Iterable[str] = (),
        progress: Mapping[str, float] | None = None,
        presence: str = "offline",
        contacts: Iterable[str] = (),
    ) -> "PeerProfile":
        """Normalized constructor used by loaders and event transitions."""
        if not isinstance(user, str) or not user:
            raise MalformedDoc("profile needs a non-empty 'user'")
        if presence not in PRESENCE_STATES:
            raise MalformedDoc(f"presence must be one of {PRESENCE_STATES}")
        progress = dict(progress or {})
        for course, fraction in progress.items():
            if not isinstance(fraction, (int, float)) or not 0.0 <= fraction <= 1.0:
                raise MalformedDoc(
                    f"progress for {course!r} must be a fraction in [0, 1]"
                )
        return cls(
            user=user,
            name=name or user,
            competences=normalize_tags(competences),
            offers=normalize_tags(offers),
            progress={k: float(v) for k, v in progress.items()},
            presence=presence,
            contacts=frozenset(c for c in contacts if c and c != user),
        )


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    tags: frozenset[str] = frozenset()


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """Tag-set overlap in [0, 1]; two empty sets score 0 by convention."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 0.0
    return len(sa & sb) / len(union)


@dataclass(frozen=True)
class MatchResult:
    entity: str
    score: float
    display_class: str


class Directory:
    """Mutable registry of peer profiles and documents.

    Mutations are serialized through the event store; queries read a
    consistent snapshot.
    """

    def __init__(self) -> None:
        self.profiles: dict[str, PeerProfile] = {}
        self.documents: dict[str, Document] = {}

    def get(self, user: str) -> PeerProfile:
        try:
            return self.profiles[user]
        except KeyError:
            raise UnknownUser(f"no profile for user {user!r}") from None

    def upsert(self, profile: PeerProfile) -> None:
        existing = self.profiles.get(profile.user)
        if existing is not None:
            # Presence is connection-derived; an upsert never flips it.
            profile = replace(profile, presence=existing.presence)
        self.profiles[profile.user] = profile

    def set_offers(self, user: str, offers: Iterable[str]) -> PeerProfile:
        profile = replace(self.get(user), offers=normalize_tags(offers))
        self.profiles[user] = profile
        return profile

    def set_presence(self, user: str, state: str) -> PeerProfile:
        if state not in PRESENCE_STATES:
            raise MalformedDoc(f"presence must be one of {PRESENCE_STATES}")
        profile = replace(self.get(user), presence=state)
        self.profiles[user] = profile
        return profile

    def add_document(self, doc: Document) -> None:
        self.documents[doc.id] = doc

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Directory":
        if not isinstance(doc, Mapping):
            raise MalformedDoc("directory bootstrap must be a JSON object")
        directory = cls()
        for entry in doc.get("profiles", []):
            if not isinstance(entry, Mapping):
                raise MalformedDoc("each profile must be an object")
            directory.profiles[entry.get("user", "")] = PeerProfile.create(
                user=entry.get("user", ""),
                name=entry.get("name"),
                competences=entry.get("competences", []),
                offers=entry.get("offers", []),
                progress=entry.get("progress", {}),
                presence=entry.get("presence", "offline"),
                contacts=entry.get("contacts", []),
            )
        for entry in doc.get("documents", []):
            if not isinstance(entry, Mapping) or not entry.get("id"):
                raise MalformedDoc("each document needs an 'id'")
            directory.add_document(
                Document(
                    id=entry["id"],
                    title=entry.get("title", entry["id"]),
                    tags=normalize_tags(entry.get("tags", [])),
                )
            )
        return directory

    @classmethod
    def load(cls, path: str | Path) -> "Directory":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise MalformedDoc(f"cannot read directory file {path}: {exc}") from exc
        try:
            doc = json.loads(text)
        except ValueError as exc:
            raise MalformedDoc(f"directory file {path} is not valid JSON: {exc}") from exc
        return cls.from_doc(doc)


def display_class(
    directory: Directory, requester: str, entity: str, is_document: bool
) -> str:
    """Render class of one entity relative to the requesting user."""
    if is_document:
        return "document"
    if entity == requester:
        return "self"
    profile = directory.get(entity)
    if profile.presence == "connected":
        return "connected"
    if entity in directory.get(requester).contacts:
        return "contact_offline"
    return "stranger"


def match_peers(
    directory: Directory, requester: str, query_tags: Iterable[str], k: int
) -> list[MatchResult]:
    """Rank peers and documents against a tag query.

    Peers score by overlap of the query with competences plus offers,
    documents by overlap with their tags; zero scores are dropped. Order
    is score descending, then connected users before everything else
    (documents rank with the offline), then id ascending. At most ``k``
    results are returned.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    directory.get(requester)  # UNKNOWN_USER for unregistered requesters
    query = normalize_tags(query_tags)
    scored: list[tuple[float, int, str, bool]] = []
    for user, profile in directory.profiles.items():
        if user == requester:
            continue
        score = jaccard(query, profile.competences | profile.offers)
        if score > 0:
            rank = 0 if profile.presence == "connected" else 1
            scored.append((score, rank, user, False))
    for doc_id, doc in directory.documents.items():
        score = jaccard(query, doc.tags)
        if score > 0:
            scored.append((score, 1, doc_id, True))
    scored.sort(key=lambda item: (-item[0], item[1], item[2]))
    return [
        MatchResult(
            entity=entity,
            score=score,
            display_class=display_class(directory, requester, entity, is_doc),
        )
        for score, rank, entity, is_doc in scored[:k]
    ]


# -- graph display model -------------------------------------------------------


@dataclass(frozen=True)
class GraphNode:
    id: str
    display_class: str
    card: Mapping[str, Any]


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    weight: float


@dataclass(frozen=True)
class PeerGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]


def _peer_card(profile: PeerProfile) -> dict[str, Any]:
    return {
        "name": profile.name,
        "competences": sorted(profile.competences)[:5],
        "presence": profile.presence,
    }


def peer_graph_model(
    directory: Directory, requester: str, results: Iterable[MatchResult]
) -> PeerGraph:
    """Star graph for display: the requester linked to each match.

    Hovering a node shows its summary card: name, top competences, and
    presence for peers; title and tags for documents.
    """
    me = directory.get(requester)
    nodes = [GraphNode(id=requester, display_class="self", card=_peer_card(me))]
    edges = []
    for result in results:
        if result.display_class == "document":
            doc = directory.documents[result.entity]
            card: dict[str, Any] = {"title": doc.title, "tags": sorted(doc.tags)[:5]}
        else:
            card = _peer_card(directory.get(result.entity))
        nodes.append(
            GraphNode(id=result.entity, display_class=result.display_class, card=card)
        )
        edges.append(
            GraphEdge(source=requester, target=result.entity, weight=result.score)
        )
    return PeerGraph(nodes=tuple(nodes), edges=tuple(edges))
