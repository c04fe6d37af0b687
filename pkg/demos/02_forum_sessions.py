"""Temporal forum structure: author sessions and the thread/session grid.

Forum readers lose track of turn-taking when one person answers three
different threads in one sitting. Grouping messages into author sessions
and crossing them with the thread structure puts both on one picture:
rows follow the subjects, columns follow the people taking their turn.
"""

from dialogos import (
    ConversationTree,
    build_session_grid,
    consecutive_fraction,
    data,
    group_sessions,
    load_grammar,
)

MIN = 60_000
grammar = load_grammar(data.grammar_path("splach"))

# Two subjects evolve in parallel; bruno answers both in a single sitting.
tree = ConversationTree("forum")
t0 = 1_700_000_000_000
r1 = tree.insert(grammar, parent=None, act="demander", author="alice",
                 body="Qui a fini l'exercice 3 ?", ts=t0, seq=1)
r2 = tree.insert(grammar, parent=None, act="proposer", author="alice",
                 body="Je propose une séance d'entraide jeudi.", ts=t0 + 2 * MIN, seq=2)
tree.insert(grammar, parent=r1.id, act="repondre", author="bruno",
            body="Oui, je peux t'aider.", ts=t0 + 50 * MIN, seq=3)
tree.insert(grammar, parent=r2.id, act="approuver", author="bruno",
            body="Bonne idée, jeudi me va.", ts=t0 + 52 * MIN, seq=4)
tree.insert(grammar, parent=r2.id, act="desapprouver", author="chloe",
            body="Jeudi je ne peux pas.", ts=t0 + 3 * 60 * MIN, seq=5)

messages = tree.messages()
sessions = group_sessions(messages, gap_ms=60 * MIN)
print(f"{len(messages)} messages fall into {len(sessions)} sessions:")
for i, s in enumerate(sessions, 1):
    print(f"  session {i}: {s.author}, {len(s.members)} message(s)")

print(f"\nconsecutive fraction: {consecutive_fraction(messages):.4f}")

# The grid: one row per thread, one column per session. Bruno's sitting
# produces a single column with two non-empty cells, one per thread.
grid = build_session_grid(tree, gap_ms=60 * MIN)
label = {r1.id: "exercice 3", r2.id: "entraide jeudi"}
header = ["thread".ljust(16)] + [
    f"s{i + 1}:{col.author}".ljust(12) for i, col in enumerate(grid.columns)
]
print("\n" + "".join(header))
for row in grid.rows:
    cells = [
        ("+" * len(grid.cell(row, col))).ljust(12) for col in range(len(grid.columns))
    ]
    print(label[row].ljust(16) + "".join(cells))

print("\n(each '+' is one message; a column spanning two rows is one author")
print(" contributing to two different threads in the same sitting)")
