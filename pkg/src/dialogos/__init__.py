"""dialogos: structured educational communication, replayable end to end.

The pieces: configurable speech-act grammars with succession rules,
per-channel conversation forests shared by chat and forum, temporal
session views and contextual course views over forums, behavior
analytics, a peer-help directory, and an append-only event log that
makes the whole world state reproducible. A newline-delimited JSON
protocol server and a CLI sit on top.
"""

from .analytics import (
    BehaviorProfile,
    ModeUsage,
    ParticipationStats,
    compute_profile,
    compute_profiles,
    mode_usage_ratio,
    participation_stats,
    profile_report,
)
from .conversation import (
    MAX_BODY_BYTES,
    ConversationTree,
    Intervention,
    intervention_id,
)
from .errors import DialogosError
from .events import EventLog, EventRecord, read_events, validate_payload
from .forum import (
    DEFAULT_SESSION_GAP_MS,
    Activity,
    ContextAttachment,
    CourseManifest,
    ForumSession,
    LearningObject,
    SessionGrid,
    attach_context,
    build_session_grid,
    consecutive_fraction,
    contextual_view,
    group_sessions,
    load_manifest,
)
from .grammar import (
    CATEGORIES,
    ROOT,
    ActGrammar,
    SpeechAct,
    emit_grammar,
    load_grammar,
    successors,
    validate_succession,
)
from .peers import (
    Directory,
    Document,
    MatchResult,
    PeerGraph,
    PeerProfile,
    jaccard,
    match_peers,
    peer_graph_model,
)
from .server import DialogosServer, ServerEngine, broadcast_policy, handle_frame
from .world import WorldState, replay, state_hash

__version__ = "0.1.0"
