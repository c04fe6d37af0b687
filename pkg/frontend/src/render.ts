/**
 * Pure render functions: view model in, HTML strings out. Keeping them
 * DOM-free makes them directly assertable in tests; main.ts only glues
 * the strings into the page and wires events.
 */

import { ActMenuState, ContextState, ViewModel } from "./model.js";
import { ActEntry, PeerResult } from "./protocol.js";
import { buildGrid, cellKey, Grid } from "./sessions.js";

/** One glyph per act category (not per act). */
export const CATEGORY_GLYPHS: Record<string, string> = {
  salutation: "~",
  initiatif: "!",
  reactif: "↩", // arrow back: a reaction to something
  evaluatif: "⚖", // scales: a judgement
  auto_reactif: "✎", // pencil: touching up one's own words
};

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function glyphFor(model: ViewModel, actId: string): string {
  const info = model.actInfo.get(actId);
  return info ? (CATEGORY_GLYPHS[info.category] ?? "•") : "•";
}

function labelFor(model: ViewModel, actId: string): string {
  return model.actInfo.get(actId)?.label ?? actId;
}

/** The conversation forest in linearize order, one clickable row per node. */
export function renderTree(model: ViewModel, channel: string): string {
  const tree = model.tree(channel);
  const rows = tree.linearize().map((id) => {
    const node = tree.nodes.get(id)!;
    const depth = tree.depth(id);
    return (
      `<div class="msg" data-id="${node.id}" style="margin-left:${depth * 1.5}em">` +
      `<span class="glyph">${glyphFor(model, node.act)}</span> ` +
      `<span class="act">[${escapeHtml(labelFor(model, node.act))}]</span> ` +
      `<span class="author">${escapeHtml(node.author)}</span>: ` +
      `<span class="body">${escapeHtml(node.body)}</span>` +
      `</div>`
    );
  });
  rows.push(`<div class="msg new-discussion" data-id="">+ commencer une nouvelle discussion</div>`);
  return rows.join("\n");
}

/** The act context menu: exactly what the server offered, nothing else. */
export function renderActMenu(menu: ActMenuState): string {
  const items = menu.acts
    .map(
      (act: ActEntry) =>
        `<li class="act-choice" data-act="${act.id}">` +
        `${CATEGORY_GLYPHS[act.category] ?? "•"} ${escapeHtml(act.label)}` +
        (act.opener ? ` <em>${escapeHtml(act.opener)}</em>` : "") +
        `</li>`,
    )
    .join("");
  return `<ul class="act-menu">${items}</ul>`;
}

/** Thread-by-session grid; each cell counts its messages. */
export function renderSessionGrid(model: ViewModel, channel: string, gapMs?: number): string {
  const tree = model.tree(channel);
  const grid: Grid = gapMs === undefined ? buildGrid(tree) : buildGrid(tree, gapMs);
  if (!grid.rows.length) return `<p class="empty">aucun message</p>`;
  const head =
    `<tr><th>fil</th>` +
    grid.columns.map((s, i) => `<th>s${i + 1}<br>${escapeHtml(s.author)}</th>`).join("") +
    `</tr>`;
  const body = grid.rows
    .map((row) => {
      const root = tree.nodes.get(row)!;
      const cells = grid.columns
        .map((_, col) => {
          const ids = grid.cells.get(cellKey(row, col)) ?? [];
          return `<td class="${ids.length ? "filled" : ""}">${ids.length ? ids.length : ""}</td>`;
        })
        .join("");
      return `<tr><th>${escapeHtml(root.body.slice(0, 24))}</th>${cells}</tr>`;
    })
    .join("");
  return `<table class="grid">${head}${body}</table>`;
}

/** The two contextual tabs; only the active one lists its messages. */
export function renderContextTabs(model: ViewModel, channel: string): string {
  const context: ContextState | null = model.context;
  if (!context) return `<p class="empty">ouvrez un objet du cours</p>`;
  const tree = model.tree(channel);
  const tabs = (["activity", "content"] as const)
    .map((tab) => {
      const active = tab === context.tab ? " active" : "";
      const label = tab === "activity" ? "activité" : "contenu";
      return `<button class="tab${active}" data-tab="${tab}">${label}</button>`;
    })
    .join("");
  const ids = context.tab === "activity" ? context.activity : context.content;
  const items = ids
    .map((id) => {
      const node = tree.nodes.get(id);
      const text = node ? `${node.author}: ${node.body}` : id;
      return `<li data-id="${id}">${escapeHtml(text)}</li>`;
    })
    .join("");
  return (
    `<div class="tabs">${tabs}</div>` +
    (ids.length ? `<ul class="context-list">${items}</ul>` : `<p class="empty">aucun message lié</p>`)
  );
}

/**
 * Star graph of peer results around the requester. Node styling follows
 * the display class; the hover card rides on an SVG <title>.
 */
export function renderPeerGraph(model: ViewModel, results: PeerResult[]): string {
  const size = 360;
  const cx = size / 2;
  const cy = size / 2;
  const radius = size / 2 - 50;
  const me = model.user ?? "moi";
  const parts: string[] = [
    `<svg viewBox="0 0 ${size} ${size}" class="peer-graph">`,
  ];
  results.forEach((r, i) => {
    const angle = (2 * Math.PI * i) / Math.max(results.length, 1) - Math.PI / 2;
    const x = cx + radius * Math.cos(angle);
    const y = cy + radius * Math.sin(angle);
    parts.push(
      `<line x1="${cx}" y1="${cy}" x2="${x.toFixed(1)}" y2="${y.toFixed(1)}"` +
        ` stroke-width="${(1 + 3 * r.score).toFixed(2)}" class="edge"/>`,
    );
    const card = r.card.title
      ? `${r.card.title} | ${(r.card.tags ?? []).join(", ")}`
      : `${r.card.name ?? r.entity} | ${(r.card.competences ?? []).join(", ")} | ${r.card.presence ?? ""}`;
    parts.push(
      `<g class="node ${r.display_class}" data-entity="${r.entity}">` +
        `<title>${escapeHtml(card)} (score ${r.score.toFixed(2)})</title>` +
        `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="18"/>` +
        `<text x="${x.toFixed(1)}" y="${(y + 30).toFixed(1)}">${escapeHtml(r.entity)}</text>` +
        `</g>`,
    );
  });
  parts.push(
    `<g class="node self"><title>${escapeHtml(me)}</title>` +
      `<circle cx="${cx}" cy="${cy}" r="20"/>` +
      `<text x="${cx}" y="${cy + 34}">${escapeHtml(me)}</text></g>`,
  );
  parts.push("</svg>");
  return parts.join("");
}

/** Inline error banner; grammar refusals list the acts that were legal. */
export function renderError(model: ViewModel): string {
  const error = model.lastError;
  if (!error) return "";
  const allowed = error.allowed?.length
    ? ` Actes possibles : ${error.allowed.join(", ")}.`
    : "";
  return `<div class="error">${escapeHtml(error.code)}${
    error.detail ? ` : ${escapeHtml(error.detail)}` : ""
  }${escapeHtml(allowed)}</div>`;
}
