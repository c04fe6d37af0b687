"""Conversation analytics: participation stats and the four profiles.

Because every message is act-typed, a log slice can be scanned into
per-user counts and derived shares, and each user receives one of four
conversation roles: animateur, verificateur, queteur, independant. The
roles describe behavior inside this tool only, which is why the TSV
report leads with a disclaimer.
"""

from dialogos import EventLog, compute_profiles, participation_stats, profile_report

# Build a log slice directly: a lively proposer, an evaluator, a question
# asker, and a member who never posts.
log = EventLog()
log.append("channel_created", {"channel": "projet", "mode": "chat"}, ts=1)


def post(author, act):
    log.append(
        "intervention_posted",
        {
            "channel": "projet", "parent": None, "act": act,
            "author": author, "body": "...", "ts": 0, "mode": "global",
        },
        ts=0,
    )


for _ in range(4):
    post("nadia", "proposer")
for _ in range(2):
    post("nadia", "affirmer")
for _ in range(2):
    post("nadia", "approuver")
for _ in range(5):
    post("yves", "approuver")
for _ in range(3):
    post("lea", "demander")
log.append("profile_upserted", {"user": "sam", "name": "Sam"}, ts=0)

stats = participation_stats(log)
print("per-user shares:")
for user in sorted(stats.users):
    s = stats.users[user]
    print(
        f"  {user:<6} T={s.total:<3} init={s.init_share:.2f} "
        f"eval={s.eval_share:.2f} quest={s.quest_share:.2f}"
    )
print(f"corpus: max_T={stats.max_total}, mean_T={stats.mean_total:.2f}")

print("\nassigned profiles:")
for user, profile in sorted(compute_profiles(stats).items()):
    best = max(profile.scores.values())
    print(f"  {user:<6} {profile.profile:<13} (top score {best:.3f})")

print("\n== Full TSV report ==")
print(profile_report(log), end="")
