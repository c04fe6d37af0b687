/**
 * Frame transports. The client only needs an ordered duplex channel of
 * text frames; in the browser that is a WebSocket (one frame per text
 * message, carried to the server's TCP port by the bridge).
 */

import { ClientFrame, ServerFrame, decodeFrame, encodeFrame } from "./protocol.js";

export interface Transport {
  send(frame: ClientFrame): void;
  onFrame(handler: (frame: ServerFrame) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export class WebSocketTransport implements Transport {
  private ws: WebSocket;
  private frameHandler: ((frame: ServerFrame) => void) | null = null;
  private closeHandler: (() => void) | null = null;
  private queue: ClientFrame[] = [];

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => {
      for (const frame of this.queue) this.ws.send(encodeFrame(frame));
      this.queue = [];
    };
    this.ws.onmessage = (msg) => {
      if (this.frameHandler) this.frameHandler(decodeFrame(String(msg.data)));
    };
    this.ws.onclose = () => {
      if (this.closeHandler) this.closeHandler();
    };
  }

  send(frame: ClientFrame): void {
    if (this.ws.readyState === WebSocket.OPEN) this.ws.send(encodeFrame(frame));
    else this.queue.push(frame);
  }

  onFrame(handler: (frame: ServerFrame) => void): void {
    this.frameHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.ws.close();
  }
}
