/** End-to-end against the real map service process.
 *
 * Seeds two sites, three participants, one running conference and one
 * planned-but-unobserved flow over plain HTTP, then checks that the
 * rendered view and the contact round trip behave as promised.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { MapClient } from "../src/api";
import { initiateContact } from "../src/contact";
import { renderView } from "../src/render";
import type { Snapshot } from "../src/types";
import { liveView, withOverlay, withSelection } from "../src/view";

const PYTHON = process.env["FLOWKIT_PYTHON"] ?? "python3";
const RUN_CLI = "import sys; from flowkit.cli import main; sys.exit(main(sys.argv[1:]))";

let server: ChildProcess;
let dataDir: string;
let client: MapClient;
let stderr = "";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

async function waitForHealth(base: string): Promise<void> {
  const deadline = Date.now() + 20_000;
  for (;;) {
    try {
      const response = await fetch(`${base}/health`);
      if (response.ok) {
        return;
      }
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`map service did not come up; stderr so far:\n${stderr}`);
    }
    await new Promise((r) => setTimeout(r, 150));
  }
}

function minutesAgo(minutes: number): string {
  return new Date(Date.now() - minutes * 60_000).toISOString();
}

beforeAll(async () => {
  const port = await freePort();
  dataDir = mkdtempSync(join(tmpdir(), "flowkit-ui-"));
  server = spawn(
    PYTHON,
    ["-c", RUN_CLI, "serve", "--data-dir", dataDir, "--port", String(port)],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  server.stderr?.on("data", (chunk: Buffer) => {
    stderr += chunk.toString();
  });
  const base = `http://127.0.0.1:${port}`;
  await waitForHealth(base);
  client = new MapClient(base);

  await client.upsertParticipant({
    id: "alice",
    name: "Alice",
    site: "Berlin",
    timezone: "Europe/Berlin",
    contacts: [{ scheme: "chat", address: "alice" }],
  });
  await client.upsertParticipant({
    id: "bob",
    name: "Bob",
    site: "Berlin",
    timezone: "Europe/Berlin",
    contacts: [{ scheme: "mailto", address: "bob@example.org" }],
  });
  await client.upsertParticipant({
    id: "carol",
    name: "Carol",
    site: "Lund",
    timezone: "Europe/Stockholm",
    contacts: [{ scheme: "chat", address: "carol" }],
  });
  await client.putSollMap(
    "model Plan soll map\n" +
      "store Alice liquid\n" +
      "store Bob liquid\n" +
      "store Carol liquid\n" +
      "flow Alice -- Bob liquid\n" +
      "flow Alice -- Carol liquid\n",
  );
  await client.postEvent({
    id: "chat-1",
    participants: ["alice", "bob"],
    channel: "text-chat",
    start: minutesAgo(40),
    end: minutesAgo(10),
  });
  await client.postEvent({
    id: "conf-1",
    participants: ["alice", "bob", "carol"],
    channel: "video-conference",
    start: minutesAgo(20),
  });
});

afterAll(() => {
  server?.kill();
  if (dataDir !== undefined) {
    rmSync(dataDir, { recursive: true, force: true });
  }
});

describe("against a freshly seeded map service", () => {
  it("reports the seeded state over /health", async () => {
    const health = await client.health();
    expect(health.status).toBe("ok");
    expect(health.events).toBe(2);
    expect(health.participants).toBe(3);
  });

  it("renders two site regions, three nodes, one conference below the map and one diff edge", async () => {
    const snapshot = await client.snapshot(liveView());
    const container = document.createElement("div");
    document.body.replaceChildren(container);
    renderView(container, {
      snapshot,
      view: withOverlay(liveView(), "diff"),
      status: { stale: false, lastRefresh: new Date() },
    });

    expect(container.querySelectorAll(".region")).toHaveLength(2);
    expect(container.querySelectorAll(".node")).toHaveLength(3);

    const panel = container.querySelector(".conference-panel")!;
    expect(panel.querySelectorAll(".conference")).toHaveLength(1);
    expect(panel.textContent).toContain("video-conference");
    const svg = container.querySelector("svg.flow-map")!;
    expect(
      svg.compareDocumentPosition(panel) & Node.DOCUMENT_POSITION_FOLLOWING,
    ).toBeTruthy();

    const diffEdges = container.querySelectorAll(
      ".edge.missing-planned, .edge.unplanned, .edge.intensity-off",
    );
    expect(diffEdges).toHaveLength(1);
    expect(diffEdges[0]!.classList.contains("missing-planned")).toBe(true);
  });

  it("shows the yellow pages for a selected participant", async () => {
    const snapshot = await client.snapshot(liveView());
    const container = document.createElement("div");
    document.body.replaceChildren(container);
    renderView(container, {
      snapshot,
      view: withSelection(liveView(), "carol"),
      status: { stale: false, lastRefresh: new Date() },
    });
    const aside = container.querySelector<HTMLElement>(".yellow-pages")!;
    expect(aside.hidden).toBe(false);
    expect(aside.querySelector("h2")!.textContent).toBe("Carol");
    expect(aside.querySelector(".field-site")!.textContent).toBe("Lund");
    expect(
      aside.querySelector<HTMLButtonElement>(".contact-chat")!.disabled,
    ).toBe(false);
  });

  it("makes an initiated contact appear in the next live snapshot", async () => {
    const before = await client.snapshot(liveView());
    const pairs = (s: Snapshot) =>
      s.map.flows
        .filter((f) => !s.map.activities.some((a) => a.id === f.source || a.id === f.target))
        .map((f) => [f.source, f.target].sort().join("-"));
    expect(pairs(before)).not.toContain("alice-carol");

    const profiles = await client.participants();
    const carol = profiles.find((p) => p.id === "carol")!;
    const opened: string[] = [];
    await initiateContact(carol, "chat", {
      client,
      viewer: "alice",
      opener: (uri) => opened.push(uri),
    });
    expect(opened).toEqual(["chat:carol"]);

    const after = await client.snapshot(liveView());
    expect(pairs(after)).toContain("alice-carol");
  });

  it("recognizes a re-sent event instead of storing it twice", async () => {
    const payload = {
      id: "dup-1",
      participants: ["alice", "bob"],
      channel: "text-chat",
      start: minutesAgo(5),
      end: minutesAgo(4),
    };
    const first = await client.postEvent(payload);
    expect(first.stored).toBe(true);
    const again = await client.postEvent({ ...payload });
    expect(again.stored).toBe(false);
    // same id under different content is a real conflict, not a re-send
    await expect(
      client.postEvent({ ...payload, end: minutesAgo(3) }),
    ).rejects.toMatchObject({ status: 409 });
  });
});
