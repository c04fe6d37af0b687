"""Peer-help directory: similarity search, offers, and the display graph.

Learners look for «someone who can help with X». Profiles carry what a
person knows (competences) and what they volunteer to help with
(offers); documents carry tags. One query ranks them all, and the result
comes with display classes mirroring the directory UI: connected peers
highlighted, offline contacts distinct, documents distinct.
"""

from dialogos import Directory, data, jaccard, match_peers, peer_graph_model

directory = Directory.load(data.directory_path())

print("== Directory ==")
for user, profile in sorted(directory.profiles.items()):
    tags = sorted(profile.competences | profile.offers)
    print(f"  {profile.name:<10} [{profile.presence:<9}] {', '.join(tags)}")
for doc in directory.documents.values():
    print(f"  {doc.title:<22} (document) {', '.join(sorted(doc.tags))}")

print("\nsimilarity is plain tag overlap:")
print("  jaccard({tableur, stats}, {tableur}) =", jaccard({"tableur", "stats"}, {"tableur"}))

print("\n== Anna searches for help on 'tableur' ==")
results = match_peers(directory, "anna", {"tableur"}, k=5)
for r in results:
    print(f"  {r.entity:<14} score={r.score:.3f}  rendered as {r.display_class}")

# Offers feed the same matching: volunteering makes you findable.
directory.set_offers("guillaume", {"tableur", "reseaux"})
print("\nafter Guillaume offers help on 'tableur':")
for r in match_peers(directory, "anna", {"tableur"}, k=5):
    print(f"  {r.entity:<14} score={r.score:.3f}  rendered as {r.display_class}")

# The graph model is what the UI draws: a star around the requester,
# edge weights are scores, every node carries its hover card.
graph = peer_graph_model(directory, "anna", results)
print("\n== Display graph ==")
for node in graph.nodes:
    print(f"  node {node.id:<14} class={node.display_class:<15} card={dict(node.card)}")
for edge in graph.edges:
    print(f"  edge {edge.source} -> {edge.target} (weight {edge.weight:.3f})")
