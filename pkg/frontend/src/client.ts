/**
 * Protocol client: one ordered frame queue in, promises out.
 *
 * The server answers requests in order on a connection, so replies are
 * matched FIFO against an expectation queue; `event` and `presence`
 * frames are broadcasts and feed the view model directly. An `error`
 * frame settles the request at the head of the queue (rejecting it with
 * the typed code), which is how grammar refusals surface to the UI with
 * their allowed-act list.
 *
 * Joining doubles as the full-channel fetch. Because `join` itself has
 * no terminating reply, the client sends a root `act_menu` right after
 * it as a fence: when that `acts` frame lands, every history `event` of
 * the join is already applied.
 */

import { ViewModel } from "./model.js";
import {
  AckFrame,
  ActEntry,
  ClientFrame,
  ErrorFrame,
  PeerResult,
  PostContext,
  PROTOCOL_VERSION,
  ServerFrame,
  ViewsFrame,
  WelcomeFrame,
} from "./protocol.js";
import { Transport } from "./transport.js";

export class ProtocolError extends Error {
  constructor(readonly frame: ErrorFrame) {
    super(`${frame.code}${frame.detail ? `: ${frame.detail}` : ""}`);
  }

  get code(): string {
    return this.frame.code;
  }

  get allowed(): string[] {
    return this.frame.allowed ?? [];
  }
}

interface Pending {
  expect: ServerFrame["t"];
  resolve: (frame: ServerFrame) => void;
  reject: (error: ProtocolError) => void;
}

export class DialogosClient {
  readonly model = new ViewModel();
  private pending: Pending[] = [];

  constructor(private transport: Transport) {
    transport.onFrame((frame) => this.handleFrame(frame));
  }

  close(): void {
    this.transport.close();
  }

  // -- the single ordered ingestion point --------------------------------

  private handleFrame(frame: ServerFrame): void {
    switch (frame.t) {
      case "event":
        this.model.applyEvent(frame.intervention);
        return;
      case "presence":
        this.model.presence.set(frame.user, frame.state);
        return;
      case "error": {
        const head = this.pending.shift();
        const error = new ProtocolError(frame);
        this.model.lastError = frame;
        if (head) head.reject(error);
        return;
      }
      default: {
        const head = this.pending.shift();
        if (head && head.expect === frame.t) {
          head.resolve(frame);
        } else if (head) {
          head.reject(
            new ProtocolError({
              t: "error",
              code: "BAD_FRAME",
              detail: `expected ${head.expect}, got ${frame.t}`,
            }),
          );
        }
      }
    }
  }

  private request<T extends ServerFrame>(frame: ClientFrame, expect: T["t"]): Promise<T> {
    return new Promise<T>((resolve, reject) => {
      this.pending.push({ expect, resolve: (f) => resolve(f as T), reject });
      this.transport.send(frame);
    });
  }

  // -- session ------------------------------------------------------------

  async hello(user: string): Promise<WelcomeFrame> {
    const welcome = await this.request<WelcomeFrame>(
      { t: "hello", user, version: PROTOCOL_VERSION },
      "welcome",
    );
    this.model.user = user;
    return welcome;
  }

  /** Join a channel and wait until its full history is mirrored. */
  async join(channel: string): Promise<void> {
    this.transport.send({ t: "join", channel });
    // fence: replies are ordered, so this lands after the history replay
    const acts = await this.request<{ t: "acts"; list: ActEntry[] }>(
      { t: "act_menu", channel },
      "acts",
    );
    this.model.learnActs(acts.list);
  }

  // -- acts and posting -----------------------------------------------------

  /**
   * Click a node (or the new-discussion line with `node` omitted): ask
   * the server which acts are legal here for this user, and stage the
   * menu. The menu is exactly the returned list, never a local guess.
   */
  async openActMenu(channel: string, node?: string): Promise<ActEntry[]> {
    const frame: ClientFrame = node
      ? { t: "act_menu", channel, node }
      : { t: "act_menu", channel };
    const acts = await this.request<{ t: "acts"; list: ActEntry[] }>(frame, "acts");
    this.model.learnActs(acts.list);
    this.model.actMenu = { node: node ?? null, acts: acts.list };
    return acts.list;
  }

  /** Pick an act from the open menu; opens the free-text composer. */
  selectAct(channel: string, actId: string): void {
    const menu = this.model.actMenu;
    if (!menu) throw new Error("no act menu is open");
    const act = menu.acts.find((a) => a.id === actId);
    if (!act) throw new Error(`act ${actId} is not offered by the menu`);
    this.model.composer = { channel, parent: menu.node, act };
    this.model.actMenu = null;
  }

  /** Send the composed message; resolves on the server's ack. */
  async submitComposer(body: string, ctx?: PostContext): Promise<AckFrame> {
    const composer = this.model.composer;
    if (!composer) throw new Error("the composer is not open");
    const ack = await this.post(
      composer.channel,
      composer.parent,
      composer.act.id,
      body,
      ctx,
    );
    this.model.composer = null;
    return ack;
  }

  post(
    channel: string,
    parent: string | null,
    act: string,
    body: string,
    ctx?: PostContext,
  ): Promise<AckFrame> {
    const frame: ClientFrame = { t: "post", channel, act, body };
    if (parent !== null) frame.parent = parent;
    if (ctx) frame.ctx = ctx;
    return this.request<AckFrame>(frame, "ack");
  }

  // -- contextual forum ------------------------------------------------------

  async contextOpen(object: string): Promise<ViewsFrame> {
    const views = await this.request<ViewsFrame>({ t: "context_open", object }, "views");
    const tab = this.model.context?.object === object ? this.model.context.tab : "activity";
    this.model.context = { object, tab, activity: views.activity, content: views.content };
    return views;
  }

  switchTab(tab: "activity" | "content"): void {
    if (this.model.context) this.model.context.tab = tab;
  }

  openMessage(message: string, mode: "contextual" | "global"): Promise<AckFrame> {
    return this.request<AckFrame>({ t: "open", message, mode }, "ack");
  }

  // -- peers -------------------------------------------------------------------

  async peerQuery(tags: string[], k = 10): Promise<PeerResult[]> {
    const peers = await this.request<{ t: "peers"; results: PeerResult[] }>(
      { t: "peer_query", tags, k },
      "peers",
    );
    this.model.peers = peers.results;
    return peers.results;
  }

  async setOffers(tags: string[]): Promise<AckFrame> {
    const ack = await this.request<AckFrame>({ t: "offers_set", tags }, "ack");
    this.model.offers = [...tags];
    return ack;
  }
}
