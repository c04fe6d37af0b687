/**
 * Client-side temporal structuring, mirroring the server's rule: a
 * session is a maximal run of messages by one author, in global channel
 * order, with inter-message gaps within the window. The grid crosses
 * thread roots (rows) with sessions (columns).
 */

import { TreeMirror } from "./model.js";
import { Intervention } from "./protocol.js";

export const DEFAULT_SESSION_GAP_MS = 60 * 60 * 1000;

export interface Session {
  author: string;
  members: string[];
  startTs: number;
  endTs: number;
}

export interface Grid {
  rows: string[];
  columns: Session[];
  cells: Map<string, string[]>; // "rowId:colIndex" -> message ids
}

export function cellKey(row: string, column: number): string {
  return `${row}:${column}`;
}

export function groupSessions(messages: Intervention[], gapMs: number): Session[] {
  const sessions: Session[] = [];
  let run: Intervention[] = [];
  for (const msg of messages) {
    const last = run[run.length - 1];
    if (last && (last.author !== msg.author || msg.ts - last.ts > gapMs)) {
      sessions.push(closeRun(run));
      run = [];
    }
    run.push(msg);
  }
  if (run.length) sessions.push(closeRun(run));
  return sessions;
}

function closeRun(run: Intervention[]): Session {
  return {
    author: run[0].author,
    members: run.map((m) => m.id),
    startTs: run[0].ts,
    endTs: run[run.length - 1].ts,
  };
}

export function buildGrid(tree: TreeMirror, gapMs = DEFAULT_SESSION_GAP_MS): Grid {
  const messages = [...tree.nodes.values()].sort((a, b) => a.seq - b.seq);
  const sessions = groupSessions(messages, gapMs);
  const columns = [...sessions].sort((a, b) => {
    if (a.startTs !== b.startTs) return a.startTs - b.startTs;
    return tree.nodes.get(a.members[0])!.seq - tree.nodes.get(b.members[0])!.seq;
  });
  const columnOf = new Map<string, number>();
  columns.forEach((session, index) => {
    for (const id of session.members) columnOf.set(id, index);
  });
  const cells = new Map<string, string[]>();
  for (const msg of messages) {
    const key = cellKey(threadOf(tree, msg.id), columnOf.get(msg.id)!);
    const cell = cells.get(key) ?? [];
    cell.push(msg.id);
    cells.set(key, cell);
  }
  return { rows: [...tree.roots], columns, cells };
}

function threadOf(tree: TreeMirror, id: string): string {
  let node = tree.nodes.get(id)!;
  while (node.parent !== null) node = tree.nodes.get(node.parent)!;
  return node.id;
}
