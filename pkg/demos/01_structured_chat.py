"""Structured chat walkthrough: act menus, typed replies, reply trees.

A conversation here is not a flat stack of lines. Every message carries a
speech act, the act must be legal after its parent, and the whole
exchange forms a forest of discussion threads. This script drives the
grammar and the tree by hand, the same calls the server makes per frame.
"""

from dialogos import ConversationTree, ROOT, data, load_grammar

grammar = load_grammar(data.grammar_path("splach"))

print("== The shipped vocabulary ==")
for act in sorted(grammar.acts.values(), key=lambda a: (a.category, a.id)):
    print(f"  {act.category:<13} {act.id:<14} {act.label}")

# Which acts may open a brand-new discussion?
print("\nacts that may start a discussion:", sorted(grammar.successors(ROOT)))

# Build a thread. Michel asks, Anna answers, Michel questions the answer.
tree = ConversationTree("atelier")
q = tree.insert(grammar, parent=None, act="demander", author="michel",
                body="Comment calcule-t-on le rendement ?", ts=1_000, seq=1)
a = tree.insert(grammar, parent=q.id, act="repondre", author="anna",
                body="Puissance utile sur puissance fournie.", ts=2_000, seq=2)
tree.insert(grammar, parent=a.id, act="questionner", author="michel",
            body="Même pour une chaîne complète ?", ts=3_000, seq=3)

# Anna may refine her own answer (auto-reactive act)...
tree.insert(grammar, parent=a.id, act="preciser", author="anna",
            body="En régime permanent, s'entend.", ts=4_000, seq=4)

# ...but Michel cannot refine Anna's answer: the menu offered to him
# simply does not contain the auto-reactive acts.
menu_for_michel = grammar.successors(a.act, same_author=False)
menu_for_anna = grammar.successors(a.act, same_author=True)
print("\nmenu on Anna's answer, seen by michel:", sorted(menu_for_michel))
print("menu on Anna's answer, seen by anna:  ", sorted(menu_for_anna))

from dialogos.errors import ActForbidden

try:
    tree.insert(grammar, parent=a.id, act="preciser", author="michel",
                body="je précise à ta place", ts=5_000, seq=5)
except ActForbidden as exc:
    print(f"\nrefused as expected: {exc.code}, legal acts = {list(exc.allowed)}")

# Display order is a depth-first walk: threads stay together even when
# messages interleave in time.
tree.insert(grammar, parent=None, act="proposer", author="paul",
            body="On fait un schéma ?", ts=6_000, seq=5)

print("\n== Rendered forest ==")
depth = {None: -1}
for node_id in tree.linearize():
    node = tree.nodes[node_id]
    depth[node.id] = depth[node.parent] + 1
    pad = "    " * depth[node.id]
    print(f"{pad}[{grammar.acts[node.act].label}] {node.author}: {node.body}")
