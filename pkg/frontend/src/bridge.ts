/**
 * WebSocket-to-TCP bridge (Node). Browsers cannot open raw TCP, so each
 * WebSocket connection gets its own socket to the server; one WebSocket
 * text message is one frame, one TCP line is one frame. No inspection,
 * no buffering beyond line reassembly.
 *
 *   BRIDGE_PORT    listening port for browsers (default 8080)
 *   DIALOGOS_ADDR  host:port of the serve process (default 127.0.0.1:8765)
 */

import * as net from "node:net";
import { WebSocketServer, WebSocket } from "ws";

const bridgePort = Number(process.env.BRIDGE_PORT ?? "8080");
const [host, portText] = (process.env.DIALOGOS_ADDR ?? "127.0.0.1:8765").split(":");
const serverPort = Number(portText);

const wss = new WebSocketServer({ port: bridgePort });
wss.on("listening", () => {
  const address = wss.address();
  const bound = typeof address === "object" && address ? address.port : bridgePort;
  console.log(`bridge listening on ws://127.0.0.1:${bound}, forwarding to ${host}:${serverPort}`);
});

wss.on("connection", (ws: WebSocket) => {
  const socket = net.createConnection({ host, port: serverPort });
  socket.setEncoding("utf-8");
  let buffer = "";

  socket.on("data", (chunk: string) => {
    buffer += chunk;
    let at: number;
    while ((at = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, at);
      buffer = buffer.slice(at + 1);
      if (line.trim()) ws.send(line);
    }
  });
  socket.on("close", () => ws.close());
  socket.on("error", () => ws.close());

  ws.on("message", (data) => {
    socket.write(data.toString() + "\n");
  });
  ws.on("close", () => socket.destroy());
  ws.on("error", () => socket.destroy());
});
