/**
 * Raw TCP transport (Node only): the reference server's native carrier.
 * Used by the automated tests and usable from any Node tooling; the
 * browser goes through the WebSocket bridge instead.
 */

import * as net from "node:net";

import { ClientFrame, ServerFrame, decodeFrame, encodeFrame } from "./protocol.js";
import { Transport } from "./transport.js";

export class TcpTransport implements Transport {
  private frameHandler: ((frame: ServerFrame) => void) | null = null;
  private closeHandler: (() => void) | null = null;
  private buffer = "";

  private constructor(private socket: net.Socket) {
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => this.feed(chunk));
    socket.on("close", () => {
      if (this.closeHandler) this.closeHandler();
    });
  }

  static connect(host: string, port: number): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port }, () =>
        resolve(new TcpTransport(socket)),
      );
      socket.once("error", reject);
    });
  }

  private feed(chunk: string): void {
    this.buffer += chunk;
    let at: number;
    while ((at = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, at);
      this.buffer = this.buffer.slice(at + 1);
      if (line.trim() && this.frameHandler) this.frameHandler(decodeFrame(line));
    }
  }

  send(frame: ClientFrame): void {
    this.socket.write(encodeFrame(frame) + "\n");
  }

  onFrame(handler: (frame: ServerFrame) => void): void {
    this.frameHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }

  close(): void {
    this.socket.end();
    this.socket.destroy();
  }
}
