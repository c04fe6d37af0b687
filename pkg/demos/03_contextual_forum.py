"""Contextual forum walkthrough: course manifests, attachments, filtered views.

Discussions die when they live in a tool far away from the course. Here
messages attach to an activity of the course plan and/or to concept ids,
and opening a learning object filters the forum down to what matters
right now, on two tabs: one for the activity, one for the content.
"""

from dialogos import (
    ConversationTree,
    attach_context,
    contextual_view,
    data,
    load_grammar,
    load_manifest,
)

grammar = load_grammar(data.grammar_path("splach"))
manifest = load_manifest(data.manifest_path())

print("== Course plan ==")


def show(activity, indent=0):
    print("  " * indent + f"{activity.id}: {activity.title}")
    for child in activity.children:
        show(child, indent + 1)


show(manifest.activities)
print("\nlearning objects:")
for oid, obj in sorted(manifest.objects.items()):
    print(f"  {oid} -> activity {obj.activity}, concepts {sorted(obj.concepts)}")

# A small forum: three messages, three different kinds of anchoring.
tree = ConversationTree("forum")
m1 = tree.insert(grammar, parent=None, act="demander", author="alice",
                 body="Où trouve-t-on le barème du module ?", ts=1_000, seq=1)
m2 = tree.insert(grammar, parent=None, act="affirmer", author="bruno",
                 body="La fonction SOMME accepte des plages multiples.", ts=2_000, seq=2)
m3 = tree.insert(grammar, parent=None, act="proposer", author="chloe",
                 body="Faisons un glossaire partagé.", ts=3_000, seq=3)

attachments = {}
attach_context(attachments, tree, manifest, m1.id, "a1", set())      # about the module
attach_context(attachments, tree, manifest, m2.id, None, {"c1"})     # about a concept
# m3 stays unattached: it will never surface in a contextual view.

print("\n== Opening object o1 (sits in a1, covers c1 and c2) ==")
for tab in ("activity", "content"):
    ids = contextual_view(tree, attachments, manifest, "o1", tab)
    print(f"tab {tab!r}:")
    for node_id in ids:
        print(f"  {tree.get(node_id).author}: {tree.get(node_id).body}")

# Activity views include sub-activities: a message pinned to the session
# a2 is relevant when reading the whole module a1.
m4 = tree.insert(grammar, parent=None, act="demander", author="dora",
                 body="La séance 1 est-elle notée ?", ts=4_000, seq=4)
attach_context(attachments, tree, manifest, m4.id, "a2", set())
ids = contextual_view(tree, attachments, manifest, "o1", "activity")
print("\nactivity tab of o1 after pinning a message to the sub-activity a2:")
for node_id in ids:
    print(f"  {tree.get(node_id).author}: {tree.get(node_id).body}")
