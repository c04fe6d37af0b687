/**
 * Client-side view model.
 *
 * The tree mirror is fed exclusively by server `event` frames (history
 * replay on join and live broadcasts); nothing is rendered
 * optimistically. Act lists are display-only copies of the server's
 * last `acts` frame; the client never derives successor sets itself.
 */

import { ActEntry, ErrorFrame, Intervention, PeerResult } from "./protocol.js";

/** Mirror of one channel's conversation forest, ordered by seq. */
export class TreeMirror {
  readonly nodes = new Map<string, Intervention>();
  readonly roots: string[] = [];
  readonly children = new Map<string, string[]>();

  /** Insert once; duplicate deliveries (re-fetches) are ignored. */
  apply(intervention: Intervention): boolean {
    if (this.nodes.has(intervention.id)) return false;
    this.nodes.set(intervention.id, intervention);
    if (intervention.parent === null) {
      this.insertSorted(this.roots, intervention);
    } else {
      const siblings = this.children.get(intervention.parent) ?? [];
      this.insertSorted(siblings, intervention);
      this.children.set(intervention.parent, siblings);
    }
    return true;
  }

  private insertSorted(ids: string[], node: Intervention): void {
    // events arrive in seq order, so this is almost always a push
    let at = ids.length;
    while (at > 0 && this.nodes.get(ids[at - 1])!.seq > node.seq) at -= 1;
    ids.splice(at, 0, node.id);
  }

  /** Depth-first pre-order, the rendered display order. */
  linearize(): string[] {
    const out: string[] = [];
    const stack = [...this.roots].reverse();
    while (stack.length) {
      const id = stack.pop()!;
      out.push(id);
      const kids = this.children.get(id) ?? [];
      for (let i = kids.length - 1; i >= 0; i -= 1) stack.push(kids[i]);
    }
    return out;
  }

  depth(id: string): number {
    let node = this.nodes.get(id);
    let depth = 0;
    while (node && node.parent !== null) {
      node = this.nodes.get(node.parent);
      depth += 1;
    }
    return depth;
  }
}

export interface ActMenuState {
  /** null means the new-discussion affordance was clicked. */
  node: string | null;
  acts: ActEntry[];
}

export interface ComposerState {
  channel: string;
  parent: string | null;
  act: ActEntry;
}

export interface ContextState {
  object: string;
  tab: "activity" | "content";
  activity: string[];
  content: string[];
}

export class ViewModel {
  user: string | null = null;
  readonly trees = new Map<string, TreeMirror>();
  /** Act metadata learned from server `acts` frames (labels, categories). */
  readonly actInfo = new Map<string, ActEntry>();
  actMenu: ActMenuState | null = null;
  composer: ComposerState | null = null;
  context: ContextState | null = null;
  peers: PeerResult[] = [];
  offers: string[] = [];
  readonly presence = new Map<string, string>();
  lastError: ErrorFrame | null = null;

  tree(channel: string): TreeMirror {
    let tree = this.trees.get(channel);
    if (!tree) {
      tree = new TreeMirror();
      this.trees.set(channel, tree);
    }
    return tree;
  }

  applyEvent(intervention: Intervention): void {
    this.tree(intervention.channel).apply(intervention);
  }

  learnActs(list: ActEntry[]): void {
    for (const act of list) this.actInfo.set(act.id, act);
  }
}
