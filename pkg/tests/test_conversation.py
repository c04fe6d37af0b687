import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dialogos.conversation import MAX_BODY_BYTES, ConversationTree, intervention_id
from dialogos.errors import (
    ActForbidden,
    BodyTooLarge,
    EmptyBody,
    UnknownNode,
    UnknownParent,
)
from dialogos.grammar import ROOT

from conftest import random_forest


def test_root_insert(splach):
    tree = ConversationTree("general")
    node = tree.insert(
        splach, parent=None, act="demander", author="u1",
        body="Comment faire ?", ts=1000, seq=1,
    )
    assert node.parent is None
    assert tree.roots == [node.id]
    assert node.id == intervention_id(1)


def test_auto_reactive_rejected_for_other_author(splach):
    tree = ConversationTree("general")
    root = tree.insert(
        splach, parent=None, act="demander", author="u1", body="?", ts=1, seq=1
    )
    with pytest.raises(ActForbidden) as exc_info:
        tree.insert(
            splach, parent=root.id, act="preciser", author="u2", body="!", ts=2, seq=2
        )
    assert exc_info.value.allowed == ("repondre",)
    # same author may refine their own question
    node = tree.insert(
        splach, parent=root.id, act="preciser", author="u1", body="!", ts=3, seq=2
    )
    assert node.act == "preciser"


def test_empty_body_rejected(splach):
    tree = ConversationTree("general")
    root = tree.insert(
        splach, parent=None, act="demander", author="u1", body="?", ts=1, seq=1
    )
    with pytest.raises(EmptyBody):
        tree.insert(
            splach, parent=root.id, act="repondre", author="u2", body="", ts=2, seq=2
        )


def test_oversized_body_rejected(splach):
    tree = ConversationTree("general")
    with pytest.raises(BodyTooLarge):
        tree.insert(
            splach, parent=None, act="demander", author="u1",
            body="x" * (MAX_BODY_BYTES + 1), ts=1, seq=1,
        )


def test_unknown_parent_rejected(splach):
    tree = ConversationTree("general")
    with pytest.raises(UnknownParent):
        tree.insert(
            splach, parent="nope", act="repondre", author="u1", body="!", ts=1, seq=1
        )


def test_seq_must_increase(splach):
    tree = ConversationTree("general")
    tree.insert(splach, parent=None, act="demander", author="u1", body="?", ts=1, seq=5)
    with pytest.raises(ValueError):
        tree.insert(
            splach, parent=None, act="demander", author="u1", body="?", ts=2, seq=5
        )


def test_linearize_simple_orders(splach):
    tree = ConversationTree("general")
    assert tree.linearize() == []
    r = tree.insert(splach, parent=None, act="proposer", author="u1", body="p", ts=1, seq=1)
    c1 = tree.insert(splach, parent=r.id, act="approuver", author="u2", body="+", ts=2, seq=2)
    c2 = tree.insert(splach, parent=r.id, act="desapprouver", author="u3", body="-", ts=3, seq=3)
    assert tree.linearize() == [r.id, c1.id, c2.id]


def test_linearize_interleaved_threads(splach):
    tree = ConversationTree("general")
    r1 = tree.insert(splach, parent=None, act="demander", author="u1", body="?", ts=1, seq=1)
    r2 = tree.insert(splach, parent=None, act="proposer", author="u2", body="p", ts=2, seq=2)
    c = tree.insert(splach, parent=r1.id, act="repondre", author="u2", body="r", ts=3, seq=3)
    assert tree.linearize() == [r1.id, c.id, r2.id]


def _dfs_oracle(tree: ConversationTree) -> list[str]:
    # independent recursive walk sorting by seq at every level
    by_seq = lambda nid: tree.nodes[nid].seq
    out = []

    def visit(nid):
        out.append(nid)
        for child in sorted(tree.children.get(nid, []), key=by_seq):
            visit(child)

    for root in sorted(tree.roots, key=by_seq):
        visit(root)
    return out


def test_linearize_matches_dfs_oracle(splach):
    rng = random.Random(7)
    for _ in range(20):
        tree = random_forest(rng, splach, rng.randint(0, 120))
        order = tree.linearize()
        assert order == _dfs_oracle(tree)
        assert sorted(order) == sorted(tree.nodes)  # permutation of all ids


def test_thread_of_small(splach):
    tree = ConversationTree("general")
    r = tree.insert(splach, parent=None, act="demander", author="u1", body="?", ts=1, seq=1)
    c = tree.insert(splach, parent=r.id, act="repondre", author="u2", body="r", ts=2, seq=2)
    g = tree.insert(splach, parent=c.id, act="questionner", author="u1", body="q", ts=3, seq=3)
    assert tree.thread_of(r.id) == r.id
    assert tree.thread_of(g.id) == r.id
    with pytest.raises(UnknownNode):
        tree.thread_of("missing")


def test_thread_of_matches_parent_walk(splach):
    rng = random.Random(11)
    tree = random_forest(rng, splach, 1000)
    for nid in tree.nodes:
        node = tree.nodes[nid]
        while node.parent is not None:
            node = tree.nodes[node.parent]
        assert tree.thread_of(nid) == node.id


def test_forest_invariants_after_random_inserts(splach):
    rng = random.Random(13)
    for trial in range(10):
        tree = random_forest(rng, splach, 150)
        # single parent, acyclicity via depth-bounded walk, root reachability
        for nid, node in tree.nodes.items():
            seen = set()
            cur = node
            while cur.parent is not None:
                assert cur.id not in seen
                seen.add(cur.id)
                cur = tree.nodes[cur.parent]
            assert cur.id in tree.roots
        child_lists = [c for kids in tree.children.values() for c in kids]
        assert len(child_lists) == len(set(child_lists))
        assert len(child_lists) + len(tree.roots) == len(tree.nodes)


def test_every_stored_triple_revalidates(splach):
    rng = random.Random(17)
    tree = random_forest(rng, splach, 300)
    for node in tree.nodes.values():
        if node.parent is None:
            assert splach.validate_succession(ROOT, node.act, False)
        else:
            parent = tree.nodes[node.parent]
            assert splach.validate_succession(
                parent.act, node.act, parent.author == node.author
            )


def test_identical_insert_sequences_are_deterministic(splach):
    t1 = random_forest(random.Random(23), splach, 200)
    t2 = random_forest(random.Random(23), splach, 200)
    assert t1.linearize() == t2.linearize()
    assert t1.roots == t2.roots
    assert t1.children == t2.children
    assert t1.nodes == t2.nodes


@settings(max_examples=50, deadline=None)
@given(n=st.integers(min_value=0, max_value=60), rng=st.randoms(use_true_random=False))
def test_linearize_is_total_permutation(splach, n, rng):
    tree = random_forest(rng, splach, n)
    order = tree.linearize()
    assert len(order) == len(tree.nodes) == n
    assert set(order) == set(tree.nodes)
