"""World state: the fold of the event log.

The live server and offline replay share these transition functions, so
a log replayed from disk lands on exactly the state the server was in
when it wrote the last event. :func:`state_hash` fingerprints a world
through a canonical serialization, which is how the equivalence is
checked in practice.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .conversation import ConversationTree, intervention_id
from .errors import CorruptLog, DialogosError, UnknownChannel
from .events import EventRecord, read_events
from .forum import ContextAttachment, CourseManifest, attach_context
from .grammar import ActGrammar
from .peers import Directory, PeerProfile


@dataclass
class ChannelState:
    id: str
    mode: str
    tree: ConversationTree
    attachments: dict[str, ContextAttachment] = field(default_factory=dict)


class WorldState:
    """Channels, their trees and attachments, and the peer directory.

    ``grammar`` and ``manifest`` are configuration, not state: when
    present, transitions enforce them (the live server's mode); when
    absent, structural checks still run but act legality and context
    references are taken on trust (offline reports over a trusted log).
    """

    def __init__(
        self,
        grammar: ActGrammar | None = None,
        manifest: CourseManifest | None = None,
    ) -> None:
        self.grammar = grammar
        self.manifest = manifest
        self.channels: dict[str, ChannelState] = {}
        self.directory = Directory()
        self.last_seq = 0

    def channel(self, channel_id: str) -> ChannelState:
        try:
            return self.channels[channel_id]
        except KeyError:
            raise UnknownChannel(f"no channel {channel_id!r}") from None

    # -- transitions -----------------------------------------------------

    def apply(self, event: EventRecord) -> None:
        """Fold one event into the state; raises typed errors on bad refs."""
        handler = getattr(self, f"_apply_{event.kind}")
        handler(event)
        self.last_seq = event.seq

    def _apply_channel_created(self, ev: EventRecord) -> None:
        cid = ev.payload["channel"]
        if cid in self.channels:
            raise UnknownChannel(f"channel {cid!r} already exists")
        self.channels[cid] = ChannelState(
            id=cid, mode=ev.payload["mode"], tree=ConversationTree(cid)
        )

    def _apply_intervention_posted(self, ev: EventRecord) -> None:
        p = ev.payload
        chan = self.channel(p["channel"])
        chan.tree.insert(
            self.grammar,
            parent=p.get("parent"),
            act=p["act"],
            author=p["author"],
            body=p["body"],
            ts=p["ts"],
            seq=ev.seq,
        )

    def _apply_context_attached(self, ev: EventRecord) -> None:
        p = ev.payload
        chan = self.channel(p["channel"])
        attach_context(
            chan.attachments,
            chan.tree,
            self.manifest,
            intervention=p["intervention"],
            activity=p.get("activity"),
            concepts=p.get("concepts", []),
        )

    def _apply_context_opened(self, ev: EventRecord) -> None:
        pass  # pure trace, feeds analytics only

    def _apply_message_opened(self, ev: EventRecord) -> None:
        pass  # pure trace, feeds analytics only

    def _apply_profile_upserted(self, ev: EventRecord) -> None:
        p = ev.payload
        self.directory.upsert(
            PeerProfile.create(
                user=p["user"],
                name=p.get("name"),
                competences=p.get("competences", []),
                offers=p.get("offers", []),
                progress=p.get("progress", {}),
                contacts=p.get("contacts", []),
            )
        )

    def _apply_offers_set(self, ev: EventRecord) -> None:
        self.directory.set_offers(ev.payload["user"], ev.payload["offers"])

    def _apply_presence_changed(self, ev: EventRecord) -> None:
        self.directory.set_presence(ev.payload["user"], ev.payload["state"])

    # -- canonical serialization ----------------------------------------

    def canonical(self) -> dict[str, Any]:
        """JSON-ready form with every collection in a deterministic order."""
        channels = {}
        for cid in sorted(self.channels):
            chan = self.channels[cid]
            channels[cid] = {
                "mode": chan.mode,
                "interventions": [
                    {
                        "id": n.id,
                        "parent": n.parent,
                        "act": n.act,
                        "author": n.author,
                        "body": n.body,
                        "ts": n.ts,
                        "seq": n.seq,
                    }
                    for n in chan.tree.messages()
                ],
                "attachments": [
                    {
                        "intervention": att.intervention,
                        "activity": att.activity,
                        "concepts": sorted(att.concepts),
                    }
                    for _, att in sorted(chan.attachments.items())
                ],
            }
        profiles = []
        for user in sorted(self.directory.profiles):
            prof = self.directory.profiles[user]
            profiles.append(
                {
                    "user": prof.user,
                    "name": prof.name,
                    "competences": sorted(prof.competences),
                    "offers": sorted(prof.offers),
                    "progress": {k: prof.progress[k] for k in sorted(prof.progress)},
                    "presence": prof.presence,
                    "contacts": sorted(prof.contacts),
                }
            )
        documents = []
        for doc_id in sorted(self.directory.documents):
            doc = self.directory.documents[doc_id]
            documents.append(
                {"id": doc.id, "title": doc.title, "tags": sorted(doc.tags)}
            )
        return {
            "last_seq": self.last_seq,
            "channels": channels,
            "directory": {"profiles": profiles, "documents": documents},
        }


def state_hash(world: WorldState) -> str:
    """SHA-256 over the canonical serialization; equal worlds, equal digests."""
    blob = json.dumps(
        world.canonical(), ensure_ascii=False, separators=(",", ":"), sort_keys=True
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def replay(
    source: Iterable[EventRecord] | str | Path,
    grammar: ActGrammar | None = None,
    manifest: CourseManifest | None = None,
) -> WorldState:
    """Rebuild the world from a log file or an event sequence.

    Any transition failure surfaces as :class:`CorruptLog` naming the
    first sequence number that could not be applied.
    """
    if isinstance(source, (str, Path)):
        events: Iterable[EventRecord] = read_events(source)
    else:
        events = source
    world = WorldState(grammar=grammar, manifest=manifest)
    for event in events:
        if event.seq != world.last_seq + 1:
            raise CorruptLog(
                f"expected seq {world.last_seq + 1}, found {event.seq}",
                first_bad_seq=world.last_seq + 1,
            )
        try:
            world.apply(event)
        except DialogosError as exc:
            raise CorruptLog(
                f"seq {event.seq}: {exc.detail or exc.code}", first_bad_seq=event.seq
            ) from exc
    return world


__all__ = [
    "ChannelState",
    "WorldState",
    "replay",
    "state_hash",
    "intervention_id",
]
