import random

import pytest

from dialogos import data
from dialogos.conversation import ConversationTree
from dialogos.events import EventLog
from dialogos.forum import load_manifest
from dialogos.grammar import ROOT, load_grammar
from dialogos.world import WorldState


@pytest.fixture(scope="session")
def splach():
    return load_grammar(data.grammar_path("splach"))


@pytest.fixture(scope="session")
def cchene():
    return load_grammar(data.grammar_path("cchene"))


@pytest.fixture(scope="session")
def manifest():
    return load_manifest(data.manifest_path())


def random_forest(
    rng: random.Random,
    grammar,
    n: int,
    channel: str = "general",
    users=("u1", "u2", "u3"),
    reply_bias: float = 0.6,
    max_gap_ms: int = 10 * 60 * 1000,
) -> ConversationTree:
    """Grammar-valid random forest with varied authors and time gaps."""
    tree = ConversationTree(channel)
    ts = 1_700_000_000_000
    for i in range(n):
        seq = i + 1
        author = rng.choice(users)
        existing = sorted(tree.nodes)
        parent = None
        if existing and rng.random() < reply_bias:
            parent = rng.choice(existing)
        if parent is None:
            ref, same = ROOT, False
        else:
            p = tree.nodes[parent]
            ref, same = p.act, p.author == author
        act = rng.choice(sorted(grammar.successors(ref, same)))
        ts += rng.randint(1_000, max_gap_ms)
        tree.insert(
            grammar, parent=parent, act=act, author=author,
            body=f"b{i}", ts=ts, seq=seq,
        )
    return tree


def random_live_session(
    rng: random.Random, grammar, manifest, n_events: int, log: EventLog
) -> WorldState:
    """Drive a live fold: append each random event and apply it immediately.

    Produces only events that the world accepts, the way the server does,
    so the resulting log is replayable by construction.
    """
    world = WorldState(grammar=grammar, manifest=manifest)
    users = [f"u{i}" for i in range(1, 5)]
    activities = sorted(manifest.activity_ids())
    concepts = sorted(manifest.concepts)
    objects = sorted(manifest.objects)
    ts = 1_700_000_000_000

    def all_messages():
        return [
            (cid, node_id)
            for cid, chan in world.channels.items()
            for node_id in chan.tree.nodes
        ]

    def emit(kind, payload):
        nonlocal ts
        ts += rng.randint(1, 30_000)
        record = log.append(kind, payload, ts=ts)
        world.apply(record)

    while log.last_seq < n_events:
        choices = ["channel_created", "profile_upserted", "context_opened"]
        if world.directory.profiles:
            choices += ["presence_changed", "offers_set"]
        if world.channels:
            choices += ["intervention_posted"] * 6
        messages = all_messages()
        if messages:
            choices += ["context_attached", "message_opened", "message_opened"]
        kind = rng.choice(choices)
        if kind == "channel_created":
            emit(kind, {
                "channel": f"ch{len(world.channels) + 1}",
                "mode": rng.choice(["chat", "forum"]),
            })
        elif kind == "profile_upserted":
            user = rng.choice(users)
            emit(kind, {
                "user": user,
                "name": user.upper(),
                "competences": rng.sample(["a", "b", "c", "d"], rng.randint(0, 3)),
                "offers": rng.sample(["a", "b"], rng.randint(0, 2)),
                "progress": {"m1": rng.randint(0, 10) / 10},
                "contacts": rng.sample(users, rng.randint(0, 2)),
            })
        elif kind == "presence_changed":
            emit(kind, {
                "user": rng.choice(sorted(world.directory.profiles)),
                "state": rng.choice(["connected", "offline"]),
            })
        elif kind == "offers_set":
            emit(kind, {
                "user": rng.choice(sorted(world.directory.profiles)),
                "offers": rng.sample(["a", "b", "c"], rng.randint(0, 3)),
            })
        elif kind == "intervention_posted":
            cid = rng.choice(sorted(world.channels))
            tree = world.channels[cid].tree
            author = rng.choice(users)
            parent = None
            if tree.nodes and rng.random() < 0.6:
                parent = rng.choice(sorted(tree.nodes))
            if parent is None:
                ref, same = ROOT, False
            else:
                p = tree.nodes[parent]
                ref, same = p.act, p.author == author
            emit(kind, {
                "channel": cid,
                "parent": parent,
                "act": rng.choice(sorted(grammar.successors(ref, same))),
                "author": author,
                "body": f"corps {log.last_seq + 1}",
                "ts": ts,
                "mode": rng.choice(["contextual", "global"]),
            })
        elif kind == "context_attached":
            cid, node_id = rng.choice(messages)
            emit(kind, {
                "channel": cid,
                "intervention": node_id,
                "activity": rng.choice(activities) if rng.random() < 0.7 else None,
                "concepts": rng.sample(concepts, rng.randint(0, 2)),
            })
        elif kind == "message_opened":
            _, node_id = rng.choice(messages)
            emit(kind, {
                "user": rng.choice(users),
                "message": node_id,
                "mode": rng.choice(["contextual", "global"]),
            })
        else:
            emit("context_opened", {
                "user": rng.choice(users),
                "object": rng.choice(objects),
            })
    return world
