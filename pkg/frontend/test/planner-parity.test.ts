/** End-to-end parity: the what-if view and the CLI must show the same plan.
 *
 * A real server process is spawned and both clients talk to it over TCP.
 * Five areas are drawn from a seeded generator; for each one the planner
 * form is driven through the DOM and the resulting cell count and setup
 * estimate are compared against `plan` run from the command line.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { startApp, type AppHandle } from "../src/main.js";

const PORT = 8300 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;
const SCENARIO = path.resolve(
  path.dirname(fileURLToPath(import.meta.url)),
  "../../scenarios/default.oocran",
);

let server: ChildProcess;
let serverErr = "";
let handle: AppHandle | null = null;

async function waitReady(): Promise<void> {
  const t0 = Date.now();
  for (;;) {
    try {
      const resp = await fetch(`${BASE}/infrastructure`);
      if (resp.ok) return;
    } catch {
      // not listening yet
    }
    if (Date.now() - t0 > 30_000) {
      throw new Error(`service never came up on ${BASE}\n${serverErr}`);
    }
    await new Promise((r) => setTimeout(r, 250));
  }
}

beforeAll(async () => {
  server = spawn("oocran", ["serve", "-f", SCENARIO, "--port", String(PORT)], {
    stdio: ["ignore", "ignore", "pipe"],
  });
  server.stderr?.on("data", (chunk: Buffer) => (serverErr += chunk.toString()));
  await waitReady();
});

afterAll(() => {
  handle?.stop();
  server?.kill();
});

function cliPlan(area: number): { cells: number; setup: string } {
  const out = execFileSync(
    "oocran",
    ["--url", BASE, "plan", "--area", String(area)],
    { encoding: "utf-8" },
  );
  const cells = /cells: (\d+)/.exec(out);
  const setup = /estimated_setup_s: ([\d.]+)/.exec(out);
  if (!cells || !setup) throw new Error(`unparseable plan output:\n${out}`);
  return { cells: Number(cells[1]), setup: setup[1] };
}

async function waitFor(cond: () => boolean, what: string, ms = 10_000): Promise<void> {
  const t0 = Date.now();
  while (!cond()) {
    if (Date.now() - t0 > ms) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 20));
  }
}

function findButton(root: Element, label: string): HTMLButtonElement {
  const hit = [...root.querySelectorAll("button")].find((b) => b.textContent === label);
  if (!hit) throw new Error(`no button labelled "${label}"`);
  return hit;
}

// deterministic park-miller draw so failures are reproducible
function areaSequence(count: number): number[] {
  let seed = 20260817;
  const next = () => (seed = (seed * 48271) % 2147483647);
  return Array.from({ length: count }, () => 1000 + (next() % 89000));
}

describe("planner parity with the CLI", () => {
  it("shows the same cell count and setup estimate for five sampled areas", async () => {
    const root = document.createElement("div");
    document.body.append(root);
    handle = startApp(root, { api: new ApiClient(BASE), pollMs: 0 });
    const store = handle.store;
    await waitFor(() => store.state.connected, "event-stream connection");

    findButton(root, "Planner").click();

    for (const area of areaSequence(5)) {
      const cli = cliPlan(area);

      (root.querySelector("#plan-area") as HTMLInputElement).value = String(area);
      const before = store.state.planPreview;
      findButton(root, "preview").click();
      await waitFor(
        () => store.state.planPreview !== null && store.state.planPreview !== before,
        `preview for area ${area}`,
      );

      const cellsText = root.querySelector('dd[data-field="cells"]')?.textContent ?? "";
      const setupText =
        root.querySelector('dd[data-field="estimated_setup_s"]')?.textContent ?? "";
      expect(Number(cellsText), `n for area ${area}`).toBe(cli.cells);
      expect(setupText, `setup time for area ${area}`).toBe(`${cli.setup} s`);
    }
  });
});
