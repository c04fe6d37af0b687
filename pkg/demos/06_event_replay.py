"""Event sourcing end to end: one log, one world, byte-stable digests.

Nothing mutates state directly; the server turns every accepted frame
into log events and folds them in. This script runs a small live session
through the engine, replays the written file from scratch, and shows the
two worlds hash identically. It ends by corrupting the file and letting
the parser name the first bad record.
"""

import tempfile
from pathlib import Path

from dialogos import EventLog, data, load_grammar, load_manifest, replay, state_hash
from dialogos.server import ServerEngine

grammar = load_grammar(data.grammar_path("splach"))
manifest = load_manifest(data.manifest_path())

log_path = Path(tempfile.mkdtemp()) / "demo.events.jsonl"
engine = ServerEngine(grammar=grammar, manifest=manifest, log=EventLog(log_path))

# A channel, two users, a tiny contextual discussion.
record = engine.log.append("channel_created", {"channel": "forum", "mode": "forum"}, ts=1)
engine.world.apply(record)

inbox: list[dict] = []
alice = engine.connect(inbox.append)
bruno = engine.connect(inbox.append)
engine.handle_line(alice.conn_id, '{"t":"hello","user":"alice","version":1}')
engine.handle_line(bruno.conn_id, '{"t":"hello","user":"bruno","version":1}')
engine.handle_line(alice.conn_id, '{"t":"join","channel":"forum"}')
engine.handle_line(
    alice.conn_id,
    '{"t":"post","channel":"forum","act":"demander","body":"Comment fusionner deux plages ?",'
    '"ctx":{"activity":"a1","concepts":["c1"]}}',
)
root_id = engine.world.channels["forum"].tree.linearize()[0]
engine.handle_line(
    bruno.conn_id,
    '{"t":"post","channel":"forum","parent":"%s","act":"repondre","body":"Avec SOMME."}' % root_id,
)
engine.handle_line(bruno.conn_id, '{"t":"open","message":"%s","mode":"contextual"}' % root_id)
engine.handle_line(alice.conn_id, '{"t":"offers_set","tags":["tableur"]}')
engine.disconnect(bruno.conn_id)

print(f"live session wrote {engine.log.last_seq} events to {log_path.name}:")
for rec in engine.log:
    print(f"  seq {rec.seq:>2}  {rec.kind}")

live_digest = state_hash(engine.world)
replayed = replay(log_path, grammar=grammar, manifest=manifest)
print("\nlive   digest:", live_digest)
print("replay digest:", state_hash(replayed))
assert live_digest == state_hash(replayed)
print("the replayed world is indistinguishable from the live one")

# Corruption does not pass silently: the first bad seq is named.
lines = log_path.read_text(encoding="utf-8").splitlines()
lines[4] = '{"seq":"not-a-record"}'
log_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
from dialogos.errors import CorruptLog

try:
    replay(log_path, grammar=grammar, manifest=manifest)
except CorruptLog as exc:
    print(f"\ntampered file rejected: {exc.code}, first bad seq = {exc.first_bad_seq}")
