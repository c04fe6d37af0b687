"""Per-channel forests of act-typed messages.

The same tree model backs synchronous chat and asynchronous forum
channels; only the server's push behavior differs. New discussions sit
at the roots of the forest, replies hang off the message they react to,
and the grammar is enforced at insertion time. Ordering authority is the
global sequence number: timestamps come from clients and may lag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import ActForbidden, BodyTooLarge, EmptyBody, UnknownNode, UnknownParent
from .grammar import ROOT, ActGrammar, ActRef

#: Protocol sanity bound on message bodies.
MAX_BODY_BYTES = 16 * 1024


def intervention_id(seq: int) -> str:
    """Derive the stable message id from its global sequence number."""
    return f"i{seq:012d}"


@dataclass(frozen=True)
class Intervention:
    """One typed message node."""

    id: str
    channel: str
    parent: str | None
    act: str
    author: str
    body: str
    ts: int
    seq: int


class ConversationTree:
    """Forest of interventions for one channel, mutated only by the sequencer.

    Sibling order is ascending ``seq``; inserts must arrive in strictly
    increasing ``seq`` order, which the event store guarantees.
    """

    def __init__(self, channel: str) -> None:
        self.channel = channel
        self.nodes: dict[str, Intervention] = {}
        self.roots: list[str] = []
        self.children: dict[str, list[str]] = {}
        self._last_seq = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def get(self, node_id: str) -> Intervention:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"no message {node_id!r} in channel {self.channel!r}") from None

    def messages(self) -> list[Intervention]:
        """All messages in ascending seq order (the channel's global order)."""
        return sorted(self.nodes.values(), key=lambda n: n.seq)

    # -- insertion ---------------------------------------------------------

    def check_insert(
        self,
        grammar: ActGrammar | None,
        *,
        parent: str | None,
        act: str,
        author: str,
        body: str,
    ) -> None:
        """Run every insert precondition without mutating the tree.

        Shared by :meth:`insert` and the server's frame handler so a post
        is judged by exactly one rule set. ``grammar=None`` skips act
        validation (offline replay without the grammar config).
        """
        if parent is not None and parent not in self.nodes:
            raise UnknownParent(f"no parent {parent!r} in channel {self.channel!r}")
        if not body:
            raise EmptyBody("message body is empty")
        if len(body.encode("utf-8")) > MAX_BODY_BYTES:
            raise BodyTooLarge(f"body exceeds {MAX_BODY_BYTES} bytes")
        if grammar is None:
            return
        parent_ref: ActRef = ROOT
        same_author = False
        if parent is not None:
            parent_node = self.nodes[parent]
            parent_ref = parent_node.act
            same_author = parent_node.author == author
        if not grammar.validate_succession(parent_ref, act, same_author):
            allowed = grammar.successors(parent_ref, same_author)
            raise ActForbidden(
                f"act {act!r} may not follow {parent_ref!r}", allowed=allowed
            )

    def insert(
        self,
        grammar: ActGrammar | None,
        *,
        parent: str | None,
        act: str,
        author: str,
        body: str,
        ts: int,
        seq: int,
    ) -> Intervention:
        """Append a message; ``seq`` comes from the event store."""
        if seq <= self._last_seq:
            raise ValueError(
                f"seq {seq} not after last seq {self._last_seq} in {self.channel!r}"
            )
        self.check_insert(grammar, parent=parent, act=act, author=author, body=body)
        node = Intervention(
            id=intervention_id(seq),
            channel=self.channel,
            parent=parent,
            act=act,
            author=author,
            body=body,
            ts=ts,
            seq=seq,
        )
        self.nodes[node.id] = node
        if parent is None:
            self.roots.append(node.id)
        else:
            self.children.setdefault(parent, []).append(node.id)
        self._last_seq = seq
        return node

    # -- traversal ---------------------------------------------------------

    def linearize(self) -> list[str]:
        """Depth-first pre-order: display order for clients and reports."""
        out: list[str] = []
        stack = list(reversed(self.roots))
        while stack:
            node_id = stack.pop()
            out.append(node_id)
            stack.extend(reversed(self.children.get(node_id, [])))
        return out

    def thread_of(self, node_id: str) -> str:
        """The root ancestor of ``node_id``."""
        node = self.get(node_id)
        while node.parent is not None:
            node = self.nodes[node.parent]
        return node.id

    def walk(self) -> Iterator[Intervention]:
        for node_id in self.linearize():
            yield self.nodes[node_id]
