/**
 * Browser entry point: glue between the DOM and the client. The single
 * configuration knob is the bridge endpoint URL (?ws=... or the form
 * field); everything else arrives over the protocol.
 */

import { DialogosClient, ProtocolError } from "./client.js";
import {
  renderActMenu,
  renderContextTabs,
  renderError,
  renderPeerGraph,
  renderSessionGrid,
  renderTree,
} from "./render.js";
import { WebSocketTransport } from "./transport.js";

let client: DialogosClient | null = null;
let channel = "general";

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function redraw(): void {
  if (!client) return;
  $("tree").innerHTML = renderTree(client.model, channel);
  $("grid").innerHTML = renderSessionGrid(client.model, channel);
  $("context").innerHTML = renderContextTabs(client.model, channel);
  $("peers").innerHTML = renderPeerGraph(client.model, client.model.peers);
  $("errors").innerHTML = renderError(client.model);
  const menu = client.model.actMenu;
  $("menu").innerHTML = menu ? renderActMenu(menu) : "";
  const composer = client.model.composer;
  $("composer").style.display = composer ? "block" : "none";
  if (composer) {
    $("composer-act").textContent = composer.act.label;
    const input = $("composer-body") as HTMLInputElement;
    if (composer.act.opener && !input.value) input.value = composer.act.opener + " ";
  }
}

async function guard(action: () => Promise<unknown>): Promise<void> {
  if (!client) return;
  try {
    client.model.lastError = null;
    await action();
  } catch (error) {
    if (!(error instanceof ProtocolError)) throw error;
    // the model already holds the error frame; redraw shows it inline
  }
  redraw();
}

async function connect(): Promise<void> {
  const url =
    new URLSearchParams(location.search).get("ws") ??
    ($("endpoint") as HTMLInputElement).value;
  const user = ($("user") as HTMLInputElement).value || "invite";
  channel = ($("channel") as HTMLInputElement).value || "general";
  const transport = new WebSocketTransport(url);
  client = new DialogosClient(transport);
  await guard(async () => {
    await client!.hello(user);
    await client!.join(channel);
  });
  // broadcasts (events, presence) keep landing; refresh on a short tick
  window.setInterval(redraw, 500);
}

function wire(): void {
  $("connect").addEventListener("click", () => void connect());
  $("tree").addEventListener("click", (ev) => {
    const row = (ev.target as HTMLElement).closest<HTMLElement>(".msg");
    if (!row || !client) return;
    const node = row.dataset.id || undefined;
    void guard(() => client!.openActMenu(channel, node));
  });
  $("menu").addEventListener("click", (ev) => {
    const item = (ev.target as HTMLElement).closest<HTMLElement>(".act-choice");
    if (!item || !client) return;
    client.selectAct(channel, item.dataset.act!);
    redraw();
    ($("composer-body") as HTMLInputElement).focus();
  });
  $("composer-send").addEventListener("click", () => {
    const input = $("composer-body") as HTMLInputElement;
    const body = input.value.trim();
    if (!body) return;
    void guard(async () => {
      await client!.submitComposer(body);
      input.value = "";
    });
  });
  $("context-open").addEventListener("click", () => {
    const object = ($("object-id") as HTMLInputElement).value;
    if (object) void guard(() => client!.contextOpen(object));
  });
  $("context").addEventListener("click", (ev) => {
    const tab = (ev.target as HTMLElement).closest<HTMLElement>(".tab");
    if (!tab || !client) return;
    client.switchTab(tab.dataset.tab as "activity" | "content");
    redraw();
  });
  $("peer-search").addEventListener("click", () => {
    const tags = ($("peer-tags") as HTMLInputElement).value
      .split(",")
      .map((t) => t.trim())
      .filter(Boolean);
    void guard(() => client!.peerQuery(tags, 10));
  });
  $("offers-save").addEventListener("click", () => {
    const tags = ($("offers") as HTMLInputElement).value
      .split(",")
      .map((t) => t.trim())
      .filter(Boolean);
    void guard(() => client!.setOffers(tags));
  });
}

document.addEventListener("DOMContentLoaded", wire);
