"""Participation statistics, behavior profiles, and usage ratios.

Everything here is a pure scan over a slice of the event log; windowing
is the caller's concern. The four behavior profiles are computed from
explicit, documented score formulas so reviewers can retune them without
touching the surrounding structure. They describe conversation behavior
inside this tool only, never the person in general; reports repeat that
disclaimer in their header.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import UnknownUser
from .events import EventRecord

#: Acts counted as initiative / evaluative / questioning when deriving shares.
INIT_ACTS = frozenset({"proposer", "affirmer"})
EVAL_ACTS = frozenset({"approuver", "desapprouver"})
QUEST_ACTS = frozenset({"demander", "questionner"})

PROFILES = ("animateur", "verificateur", "queteur", "independant")

#: On score ties the earlier profile in this order wins.
TIE_ORDER = ("queteur", "verificateur", "animateur", "independant")

#: Report header disclaimer: profiles describe tool-mediated conversation only.
REPORT_DISCLAIMER = (
    "# Profils calculés sur une conversation médiatisée par un outil ; "
    "ils ne décrivent pas le comportement général des personnes."
)

REPORT_COLUMNS = (
    "user",
    "T",
    "init",
    "eval",
    "quest",
    "s_anim",
    "s_verif",
    "s_quet",
    "s_indep",
    "profile",
)


@dataclass(frozen=True)
class UserStats:
    user: str
    total: int
    act_counts: Mapping[str, int]
    init_share: float
    eval_share: float
    quest_share: float


@dataclass(frozen=True)
class ParticipationStats:
    users: Mapping[str, UserStats]
    max_total: int
    mean_total: float


def _share(counts: Mapping[str, int], acts: frozenset[str], total: int) -> float:
    if total == 0:
        return 0.0
    return sum(counts.get(a, 0) for a in acts) / total


def participation_stats(events: Iterable[EventRecord]) -> ParticipationStats:
    """Count interventions per user and per act over a log slice.

    Users appearing in any user-bearing event are included, so a lurker
    who never posts still shows up with zero interventions. Aggregates
    run over users with at least one intervention.
    """
    counts: dict[str, dict[str, int]] = {}

    def ensure(user: str) -> dict[str, int]:
        return counts.setdefault(user, {})

    for ev in events:
        if ev.kind == "intervention_posted":
            per_act = ensure(ev.payload["author"])
            act = ev.payload["act"]
            per_act[act] = per_act.get(act, 0) + 1
        elif ev.kind in (
            "profile_upserted",
            "offers_set",
            "presence_changed",
            "message_opened",
            "context_opened",
        ):
            ensure(ev.payload["user"])
    users: dict[str, UserStats] = {}
    for user, per_act in counts.items():
        total = sum(per_act.values())
        users[user] = UserStats(
            user=user,
            total=total,
            act_counts=dict(per_act),
            init_share=_share(per_act, INIT_ACTS, total),
            eval_share=_share(per_act, EVAL_ACTS, total),
            quest_share=_share(per_act, QUEST_ACTS, total),
        )
    actives = [s.total for s in users.values() if s.total >= 1]
    return ParticipationStats(
        users=users,
        max_total=max(actives, default=0),
        mean_total=sum(actives) / len(actives) if actives else 0.0,
    )


@dataclass(frozen=True)
class BehaviorProfile:
    user: str
    profile: str
    scores: Mapping[str, float]


def compute_profile(stats: ParticipationStats, user: str) -> BehaviorProfile:
    """Assign one of the four profiles from participation and act usage.

    Scores (all in [0, 1], with T/max_T taken as 0 when max_T is 0):

    * animateur    = 0.5 * T/max_T + 0.5 * init_share
    * verificateur = eval_share
    * queteur      = quest_share
    * independant  = 1 - T/max_T

    The profile is the argmax, ties broken by :data:`TIE_ORDER`.
    """
    if user not in stats.users:
        raise UnknownUser(f"no stats for user {user!r}")
    s = stats.users[user]
    weight = s.total / stats.max_total if stats.max_total > 0 else 0.0
    scores = {
        "animateur": 0.5 * weight + 0.5 * s.init_share,
        "verificateur": s.eval_share,
        "queteur": s.quest_share,
        "independant": 1.0 - weight,
    }
    # max() keeps the first of equal keys, so iterating TIE_ORDER applies the tie-break.
    profile = max(TIE_ORDER, key=lambda p: scores[p])
    return BehaviorProfile(user=user, profile=profile, scores=scores)


def compute_profiles(stats: ParticipationStats) -> dict[str, BehaviorProfile]:
    return {user: compute_profile(stats, user) for user in stats.users}


def profile_report(events: Iterable[EventRecord]) -> str:
    """TSV report, one row per user, 4-decimal ratios, disclaimer on top."""
    stats = participation_stats(list(events))
    out = io.StringIO()
    out.write(REPORT_DISCLAIMER + "\n")
    out.write("\t".join(REPORT_COLUMNS) + "\n")
    for user in sorted(stats.users):
        s = stats.users[user]
        p = compute_profile(stats, user)
        row = [
            user,
            str(s.total),
            format(s.init_share, ".4f"),
            format(s.eval_share, ".4f"),
            format(s.quest_share, ".4f"),
            format(p.scores["animateur"], ".4f"),
            format(p.scores["verificateur"], ".4f"),
            format(p.scores["queteur"], ".4f"),
            format(p.scores["independant"], ".4f"),
            p.profile,
        ]
        out.write("\t".join(row) + "\n")
    return out.getvalue()


# -- contextual vs global usage ratios ---------------------------------------


@dataclass(frozen=True)
class ModeUsage:
    """Contextual-over-global ratios; "INF" and "NA" are sentinel strings."""

    opened_ratio: float | str
    sent_ratio: float | str


def _ratio(contextual: int, global_: int) -> float | str:
    if global_ > 0:
        return contextual / global_
    return "INF" if contextual > 0 else "NA"


def mode_usage_ratio(events: Iterable[EventRecord]) -> ModeUsage:
    """How much more the contextual mode is used than the global one."""
    opened = {"contextual": 0, "global": 0}
    sent = {"contextual": 0, "global": 0}
    for ev in events:
        if ev.kind == "message_opened":
            opened[ev.payload["mode"]] += 1
        elif ev.kind == "intervention_posted":
            sent[ev.payload.get("mode", "global")] += 1
    return ModeUsage(
        opened_ratio=_ratio(opened["contextual"], opened["global"]),
        sent_ratio=_ratio(sent["contextual"], sent["global"]),
    )
