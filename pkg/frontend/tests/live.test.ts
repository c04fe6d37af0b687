/**
 * Live tests against the reference server, spawned per suite on an
 * ephemeral port with the shipped grammar and course manifest. The
 * client talks raw TCP here (the browser carries the same frames over
 * the WebSocket bridge).
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { DialogosClient, ProtocolError } from "../src/client.js";
import { TreeMirror } from "../src/model.js";
import { renderContextTabs, renderTree } from "../src/render.js";
import { TcpTransport } from "../src/tcp.js";

const repoRoot = resolve(dirname(fileURLToPath(import.meta.url)), "../..");
const dataDir = join(repoRoot, "src", "dialogos", "data");

// The ten shipped acts and their succession table, stated independently
// so the menus coming back from the wire are checked against the
// documented behavior, not against whatever the server happens to say.
const EDGES: Record<string, string[]> = {
  saluer: ["saluer", "demander", "proposer", "affirmer"],
  demander: ["repondre"],
  affirmer: ["questionner"],
  proposer: ["approuver", "desapprouver"],
  repondre: ["questionner", "approuver", "desapprouver"],
  questionner: ["repondre"],
  approuver: ["questionner"],
  desapprouver: ["questionner", "proposer"],
  preciser: ["questionner"],
  rectifier: ["questionner"],
};
const AUTO = ["preciser", "rectifier"];

let server: ChildProcess;
let port: number;
const clients: DialogosClient[] = [];

async function connectClient(user: string): Promise<DialogosClient> {
  const transport = await TcpTransport.connect("127.0.0.1", port);
  const client = new DialogosClient(transport);
  clients.push(client);
  await client.hello(user);
  return client;
}

async function waitFor(check: () => boolean, what: string, timeoutMs = 5000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!check()) {
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 10));
  }
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "dialogos-web-"));
  const logPath = join(dir, "live.events.jsonl");
  // seed one forum channel; channels are born from the log, not the wire
  writeFileSync(
    logPath,
    '{"kind":"log_meta","format":"1"}\n' +
      '{"seq":1,"ts":1700000000000,"kind":"channel_created",' +
      '"payload":{"channel":"general","mode":"forum"}}\n',
  );
  server = spawn("python3", [
    "-m",
    "dialogos.cli",
    "serve",
    "--grammar", join(dataDir, "splach.grammar.json"),
    "--manifest", join(dataDir, "course.manifest.json"),
    "--log", logPath,
    "--listen", "127.0.0.1:0",
  ]);
  const banner: string = await new Promise((resolveBanner, rejectBanner) => {
    let buffer = "";
    server.stdout!.on("data", (chunk) => {
      buffer += String(chunk);
      if (buffer.includes("\n")) resolveBanner(buffer.split("\n")[0]);
    });
    server.stderr!.on("data", (chunk) => rejectBanner(new Error(String(chunk))));
    server.on("exit", (code) => rejectBanner(new Error(`server exited ${code}`)));
  });
  const match = banner.match(/on 127\.0\.0\.1:(\d+)/);
  if (!match) throw new Error(`no port in banner: ${banner}`);
  port = Number(match[1]);
});

afterAll(() => {
  for (const client of clients) client.close();
  server.kill();
});

describe("act menu fidelity", () => {
  it("shows exactly the server-returned successors for every shipped act", async () => {
    const author1 = await connectClient("author1");
    const author2 = await connectClient("author2");
    const reader = await connectClient("reader");
    await author1.join("general");
    await author2.join("general");
    await reader.join("general");

    // one node per act, built through legal posts only
    const nodeByAct = new Map<string, { id: string; author: string }>();
    const rootPost = async (act: string) => {
      const ack = await author1.post("general", null, act, `racine ${act}`);
      nodeByAct.set(act, { id: ack.id, author: "author1" });
      return ack.id;
    };
    await rootPost("saluer");
    const demanderId = await rootPost("demander");
    const proposerId = await rootPost("proposer");
    const affirmerId = await rootPost("affirmer");
    const reply = async (client: DialogosClient, user: string, parent: string, act: string) => {
      const ack = await client.post("general", parent, act, `reponse ${act}`);
      nodeByAct.set(act, { id: ack.id, author: user });
    };
    await reply(author2, "author2", demanderId, "repondre");
    await reply(author2, "author2", affirmerId, "questionner");
    await reply(author2, "author2", proposerId, "approuver");
    await reply(author2, "author2", proposerId, "desapprouver");
    await reply(author1, "author1", demanderId, "preciser"); // own question
    await reply(author1, "author1", affirmerId, "rectifier"); // own assertion
    expect([...nodeByAct.keys()].sort()).toEqual(Object.keys(EDGES).sort());

    for (const [act, node] of nodeByAct) {
      // a stranger clicking the node: plain successors of the act
      const readerMenu = await reader.openActMenu("general", node.id);
      expect(reader.model.actMenu?.node).toBe(node.id); // menu is staged for this node
      expect([...readerMenu.map((a) => a.id)].sort()).toEqual([...EDGES[act]].sort());

      // the author clicking their own node: auto-reactive acts join in
      const owner = node.author === "author1" ? author1 : author2;
      const ownerMenu = await owner.openActMenu("general", node.id);
      expect([...ownerMenu.map((a) => a.id)].sort()).toEqual(
        [...EDGES[act], ...AUTO].sort(),
      );
    }

    // the new-discussion affordance offers the root acts
    const rootMenu = await reader.openActMenu("general");
    expect(rootMenu.map((a) => a.id).sort()).toEqual(
      ["saluer", "demander", "proposer", "affirmer"].sort(),
    );
  });

  it("surfaces grammar refusals inline with the allowed list", async () => {
    const author = await connectClient("rule-breaker-target");
    const other = await connectClient("rule-breaker");
    await author.join("general");
    await other.join("general");
    const ack = await author.post("general", null, "demander", "ma question");
    await expect(other.post("general", ack.id, "preciser", "je precise")).rejects.toSatisfy(
      (error: unknown) =>
        error instanceof ProtocolError &&
        error.code === "ACT_FORBIDDEN" &&
        error.allowed.join(",") === "repondre",
    );
    expect(other.model.lastError?.code).toBe("ACT_FORBIDDEN");
  });
});

describe("round-trip", () => {
  it("a post composed through the UI equals a fresh full fetch", async () => {
    const writer = await connectClient("writer");
    await writer.join("general");

    // the composer flow: click new-discussion, pick an act, submit
    await writer.openActMenu("general");
    writer.selectAct("general", "proposer");
    expect(writer.model.composer?.act.id).toBe("proposer");
    const ack = await writer.submitComposer("On se retrouve jeudi ?");
    await waitFor(
      () => writer.model.tree("general").nodes.has(ack.id),
      "the event echo of the new post",
    );

    const fresh = await connectClient("fresh-reader");
    await fresh.join("general");
    const mine = writer.model.tree("general");
    const theirs = fresh.model.tree("general");
    expect(theirs.linearize()).toEqual(mine.linearize());
    const strip = (tree: TreeMirror) =>
      tree.linearize().map((id) => {
        const n = tree.nodes.get(id)!;
        return [n.id, n.parent, n.act, n.author, n.body, n.seq];
      });
    expect(strip(theirs)).toEqual(strip(mine));
    expect(renderTree(writer.model, "general")).toContain("On se retrouve jeudi ?");
  });
});

describe("contextual tabs", () => {
  it("displays the fixture oracle sets per tab", async () => {
    const poster = await connectClient("ctx-poster");
    await poster.join("general");
    const m1 = await poster.post("general", null, "demander", "question sur le module", {
      activity: "a1",
    });
    const m2 = await poster.post("general", null, "affirmer", "retour sur la notion", {
      concepts: ["c1"],
    });
    await poster.post("general", null, "proposer", "hors contexte");

    // nothing else in this suite attaches context, so the oracle is exact
    const views = await poster.contextOpen("o1");
    expect(views.activity).toEqual([m1.id]);
    expect(views.content).toEqual([m2.id]);

    await waitFor(
      () => poster.model.tree("general").nodes.has(m2.id),
      "event echoes of the contextual posts",
    );
    let html = renderContextTabs(poster.model, "general");
    expect(html).toContain("question sur le module");
    expect(html).not.toContain("retour sur la notion");
    poster.switchTab("content");
    html = renderContextTabs(poster.model, "general");
    expect(html).toContain("retour sur la notion");
    expect(html).not.toContain("question sur le module");
  });
});
