/**
 * Protocol v1 frame types: newline-delimited JSON, one frame per line.
 * The client speaks these verbatim; transports only move text around.
 */

export interface Intervention {
  id: string;
  channel: string;
  parent: string | null;
  act: string;
  author: string;
  body: string;
  ts: number;
  seq: number;
}

/** One selectable act as the server lists it in an `acts` frame. */
export interface ActEntry {
  id: string;
  label: string;
  category: string;
  opener?: string;
}

export interface PeerCard {
  name?: string;
  competences?: string[];
  presence?: string;
  title?: string;
  tags?: string[];
}

export interface PeerResult {
  entity: string;
  score: number;
  display_class: string;
  card: PeerCard;
}

export interface PostContext {
  activity?: string;
  concepts?: string[];
}

// Client to server
export type ClientFrame =
  | { t: "hello"; user: string; version: number }
  | { t: "join"; channel: string }
  | { t: "post"; channel: string; parent?: string; act: string; body: string; ctx?: PostContext }
  | { t: "act_menu"; channel: string; node?: string }
  | { t: "context_open"; object: string }
  | { t: "open"; message: string; mode: "contextual" | "global" }
  | { t: "peer_query"; tags: string[]; k: number }
  | { t: "offers_set"; tags: string[] };

// Server to client
export interface WelcomeFrame { t: "welcome"; seq: number }
export interface AckFrame { t: "ack"; id: string; seq: number }
export interface EventFrame { t: "event"; intervention: Intervention }
export interface ActsFrame { t: "acts"; list: ActEntry[] }
export interface ViewsFrame { t: "views"; activity: string[]; content: string[] }
export interface PresenceFrame { t: "presence"; user: string; state: "connected" | "offline" }
export interface PeersFrame { t: "peers"; results: PeerResult[] }
export interface ErrorFrame { t: "error"; code: string; detail?: string; allowed?: string[] }

export type ServerFrame =
  | WelcomeFrame
  | AckFrame
  | EventFrame
  | ActsFrame
  | ViewsFrame
  | PresenceFrame
  | PeersFrame
  | ErrorFrame;

export const PROTOCOL_VERSION = 1;

export function encodeFrame(frame: ClientFrame): string {
  return JSON.stringify(frame);
}

export function decodeFrame(line: string): ServerFrame {
  const frame = JSON.parse(line);
  if (typeof frame !== "object" || frame === null || typeof frame.t !== "string") {
    throw new Error(`not a protocol frame: ${line}`);
  }
  return frame as ServerFrame;
}
