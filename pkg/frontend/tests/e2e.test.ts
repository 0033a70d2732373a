// Round trip against the real gateway: one human seat plus two scripted
// players. The app runs under jsdom and drives the genuine HTTP API of a
// live `mdp serve` process; the rendered tax must be the gateway's exact
// value, and a second submission must be refused on both sides.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, ChildProcess } from "node:child_process";
import * as path from "node:path";
import * as url from "node:url";

import { startApp, AppHandle } from "../src/main.js";

const HERE = path.dirname(url.fileURLToPath(import.meta.url));
const REPO = path.resolve(HERE, "..", "..");
const SCENARIO = path.join(REPO, "scenarios", "interactive", "interactive-vickrey.scn");
const PORT = 8941;
const BASE = `http://127.0.0.1:${PORT}`;
const SESSION = "interactive-vickrey";

let server: ChildProcess;

async function waitFor<T>(probe: () => Promise<T | null>, ms = 30000): Promise<T> {
  const deadline = Date.now() + ms;
  for (;;) {
    const value = await probe().catch(() => null);
    if (value !== null) return value;
    if (Date.now() > deadline) throw new Error("timed out waiting");
    await new Promise((r) => setTimeout(r, 100));
  }
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "mdp.cli", "serve",
                             "--scenario", SCENARIO,
                             "--port", String(PORT),
                             "--tick-rate", "3000"],
                 { cwd: REPO, stdio: "ignore" });
  await waitFor(async () => {
    const r = await fetch(`${BASE}/sessions/${SESSION}/status`);
    return r.ok ? true : null;
  });
});

afterAll(() => {
  server?.kill();
});

function mount(): void {
  document.body.innerHTML =
    '<div id="phase"></div><div id="panel"></div><div id="message"></div>';
}

describe("live gateway round trip", () => {
  it("registers, bids, and renders the exact gateway tax", async () => {
    mount();
    const app: AppHandle = startApp(document, BASE, SESSION, fetch, 3600_000);
    await app.tick();

    (document.getElementById("credentials") as HTMLInputElement).value = "human";
    (document.getElementById("register") as HTMLButtonElement).click();
    await waitFor(async () => (app.model.token ? true : null));
    const token = app.model.token as string;

    // the driver holds registration open until the seat is taken, then the
    // barrier closes and the gateway flips us to awaiting-type
    await waitFor(async () => {
      await app.tick();
      return document.getElementById("field-bid") ? true : null;
    });

    (document.getElementById("field-bid") as HTMLInputElement).value = "10";
    (document.getElementById("submit-type") as HTMLButtonElement).click();
    await waitFor(async () => (app.model.state === "computing" ? true : null));
    // client side: the one-shot form is gone
    expect(document.getElementById("submit-type")).toBeNull();

    // server side: a direct second submission is refused
    const again = await fetch(`${BASE}/sessions/${SESSION}/players/${token}/type`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ type_value: "11/1" }),
    });
    expect(again.status).toBe(409);

    await waitFor(async () => {
      await app.tick();
      return app.model.state === "done" ? true : null;
    });
    // scripted seats bid 8/1 and 5/1; our 10 wins and pays the second price
    const shown = document.getElementById("own-tax")?.textContent ?? "";
    expect(shown).toContain("-8/1");

    const poll = await fetch(`${BASE}/sessions/${SESSION}/players/${token}`)
      .then((r) => r.json());
    expect(poll.outcome.own_tax).toBe("-8/1");
    expect(shown).toContain(poll.outcome.own_tax);
    app.stop();
  });
});
