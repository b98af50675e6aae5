/** Round trip against a live server: build a case through the DOM,
 * receive candidates, open the explanation drawer, commit rank-1 and
 * watch the automatic requery — then replay every captured request with
 * plain fetch and require byte-identical responses.
 */

import { execFileSync, spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, readdirSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { Window } from "happy-dom";
import { afterAll, beforeAll, describe, expect, test } from "vitest";

import { ApiClient } from "../src/api.js";
import type { FetchFn } from "../src/api.js";
import { App } from "../src/app.js";
import { EMPTY_POOL_MESSAGE, fmt } from "../src/render.js";

interface SavedCase {
  case_id: string;
  diagnoses: { code: string; seq: number }[];
  events: { code: string; seq: number }[];
}

interface Exchange {
  url: string;
  init: RequestInit | undefined;
  status: number;
  body: string;
}

let workdir: string;
let server: ChildProcess;
let serverLog = "";
let base: string;
let win: InstanceType<typeof Window>;
let root: HTMLElement;
let app: App;
let diagCode: string; // a diagnosis from a stored case, so the query has support
let eventCode: string; // that case's first procedure

const exchanges: Exchange[] = [];
let predictsInFlight = 0;
let maxPredictsInFlight = 0;

const recordingFetch: FetchFn = async (url, init) => {
  const isPredict = url.endsWith("/v1/predict");
  if (isPredict) {
    predictsInFlight++;
    maxPredictsInFlight = Math.max(maxPredictsInFlight, predictsInFlight);
  }
  try {
    const resp = await fetch(url, init);
    exchanges.push({ url, init, status: resp.status, body: await resp.clone().text() });
    return resp;
  } finally {
    if (isPredict) predictsInFlight--;
  }
};

function q<T extends HTMLElement>(selector: string): T {
  const node = root.querySelector(selector);
  if (!node) throw new Error(`missing element ${selector}`);
  return node as T;
}

function statusText(): string {
  return q("#status").textContent ?? "";
}

function predictCount(): number {
  return exchanges.filter((e) => e.url.endsWith("/v1/predict")).length;
}

/** Set an input's value and fire the event the app listens for. */
async function enter(selector: string, text: string, type = "input"): Promise<void> {
  const input = q<HTMLInputElement>(selector);
  input.value = text;
  input.dispatchEvent(new win.Event(type) as unknown as Event);
  await app.whenIdle();
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "nextact-ui-e2e-"));
  execFileSync("nextact", [
    "synth", "--seed", "11", "--cases", "24", "--templates", "4",
    "--out", join(workdir, "data"),
  ]);
  const logFiles = readdirSync(join(workdir, "data")).filter((f) =>
    /^log_.*\.json$/.test(f),
  );
  writeFileSync(
    join(workdir, "service.json"),
    JSON.stringify({
      taxonomies: {
        "synth-diag": { format: "tsv", path: "data/diagnosis_taxonomy.tsv" },
        "synth-proc": { format: "tsv", path: "data/procedure_taxonomy.tsv" },
      },
      logs: logFiles.map((f) => `data/${f}`),
    }),
  );

  const log = JSON.parse(readFileSync(join(workdir, "data", logFiles[0]!), "utf8"));
  const donor = (log.cases as SavedCase[]).find((c) => c.events[0]!.code !== "END")!;
  diagCode = donor.diagnoses[0]!.code;
  eventCode = donor.events[0]!.code;

  const port = 18000 + Math.floor(Math.random() * 20000);
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    "nextact",
    ["serve", "--config", join(workdir, "service.json"), "--port", String(port)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stdout!.on("data", (chunk) => (serverLog += chunk));
  server.stderr!.on("data", (chunk) => (serverLog += chunk));
  for (let i = 0; ; i++) {
    if (server.exitCode !== null) throw new Error(`server exited early:\n${serverLog}`);
    try {
      const resp = await fetch(`${base}/v1/logs`);
      if (resp.ok) break;
    } catch {
      // not listening yet
    }
    if (i >= 150) throw new Error(`server never became ready:\n${serverLog}`);
    await new Promise((r) => setTimeout(r, 200));
  }

  win = new Window();
  win.document.body.innerHTML = '<div id="app"></div>';
  root = win.document.getElementById("app") as unknown as HTMLElement;
  app = new App(root, new ApiClient(base, recordingFetch));
  await app.init();
});

afterAll(() => {
  server?.kill();
  if (workdir) rmSync(workdir, { recursive: true, force: true });
});

describe("decision loop against the live service", () => {
  test("builds a case, inspects the explanation, commits rank-1", async () => {
    expect(statusText()).toBe("add at least one diagnosis and one procedure");
    expect(app.logId).not.toBe("");

    // typeahead: a category prefix yields its description plus children
    const prefix = diagCode.slice(0, -1);
    await enter("#diag-code", prefix);
    expect(q("#diag-hint").textContent).not.toBe("");
    expect(q("#diag-hint").textContent).not.toBe("no matching code");
    const options = [...q("#diag-suggest").querySelectorAll("option")];
    expect(options.length).toBeGreaterThan(0);
    for (const o of options) expect(o.getAttribute("value")!.startsWith(prefix)).toBe(true);

    // and an unresolvable prefix says so
    await enter("#diag-code", "QQQ");
    expect(q("#diag-hint").textContent).toBe("no matching code");

    // one diagnosis alone is not enough to query
    await enter("#diag-code", diagCode);
    q<HTMLButtonElement>("#diag-add").click();
    await app.whenIdle();
    expect(q("#chips").textContent).toContain(diagCode);
    expect(app.lastPrediction).toBeNull();
    expect(statusText()).toBe("add at least one diagnosis and one procedure");

    // first procedure completes the query: candidates arrive (n defaults to 5)
    await enter("#event-code", eventCode);
    q<HTMLButtonElement>("#event-add").click();
    await app.whenIdle();
    const first = app.lastPrediction;
    expect(first).not.toBeNull();
    expect(first!.candidates.length).toBeGreaterThan(0);
    expect(first!.candidates.length).toBeLessThanOrEqual(5);
    expect(root.querySelectorAll("li.candidate").length).toBe(first!.candidates.length);
    expect(statusText()).toContain(first!.query_fingerprint.slice(0, 12));

    // the drawer shows exactly the server's numbers, formatted
    const drawer = root.querySelector(".drawer")!;
    expect(drawer.classList.contains("hidden")).toBe(true);
    root.querySelector<HTMLButtonElement>("button.explain")!.click();
    expect(drawer.classList.contains("hidden")).toBe(false);
    const supporter = first!.candidates[0]!.supporters[0]!;
    const block = drawer.querySelector(".supporter")!;
    expect(block.querySelector(".sim-trace")?.textContent).toBe(fmt(supporter.sim_trace));
    expect(block.querySelector(".sim-list")?.textContent).toBe(fmt(supporter.sim_list));
    expect(block.querySelector(".sim-cf")?.textContent).toBe(fmt(supporter.sim_cf));
    expect(block.querySelector(".alpha-1")?.textContent).toBe(fmt(supporter.alpha[0]));
    expect(block.querySelector(".alpha-2")?.textContent).toBe(fmt(supporter.alpha[1]));
    for (const [pane, edges] of [
      [".list-pane", supporter.list_edges],
      [".cf-pane", supporter.cf_edges],
    ] as const) {
      const products = [...block.querySelectorAll(`${pane} .edge-product`)].map(
        (n) => n.textContent,
      );
      expect(products).toEqual(edges.map((e) => fmt(e.weight)));
    }

    // commit rank-1: the trace grows and a fresh prediction replaces the old
    const committed = first!.candidates[0]!.activity;
    expect(committed).not.toBe("END");
    const beforePredicts = predictCount();
    root.querySelector<HTMLButtonElement>("button.commit")!.click();
    await app.whenIdle();
    expect(app.model.events[app.model.events.length - 1]).toBe(committed);
    expect(q("#trace").textContent).toContain(committed);
    expect(predictCount()).toBe(beforePredicts + 1);
    const second = app.lastPrediction!;
    expect(second.query_fingerprint).not.toBe(first!.query_fingerprint);
  });

  test("variant and n controls trigger fresh predictions", async () => {
    await enter("#variant", "B", "change");
    expect(app.lastPrediction!.variant).toBe("B");
    expect(app.lastPrediction!.candidates.length).toBeGreaterThan(0);

    await enter("#n", "3");
    expect(q("#n-value").textContent).toBe("3");
    expect(app.lastPrediction!.n).toBe(3);
    expect(app.lastPrediction!.candidates.length).toBeLessThanOrEqual(3);
  });

  test("unknown codes are rejected inline with the server's message", async () => {
    const eventsBefore = app.model.events.length;
    await enter("#event-code", "NOPE");
    q<HTMLButtonElement>("#event-add").click();
    await app.whenIdle();
    expect(q("#status").className).toBe("status error");
    expect(statusText()).toBe("unknown_code: NOPE");
    expect(app.model.events.length).toBe(eventsBefore);
  });

  test("committing END closes the case; undo reopens and requeries", async () => {
    const beforePredicts = predictCount();
    await app.commit("END");
    expect(app.caseClosed).toBe(true);
    expect(predictCount()).toBe(beforePredicts); // no request for a closed case
    expect(statusText()).toContain("case complete");
    expect(root.querySelectorAll("li.candidate").length).toBe(0);

    q<HTMLButtonElement>("#undo").click();
    await app.whenIdle();
    expect(app.caseClosed).toBe(false);
    expect(predictCount()).toBe(beforePredicts + 1);
    expect(app.lastPrediction!.candidates.length).toBeGreaterThan(0);
  });

  test("a query longer than every stored trace shows the empty-pool message", async () => {
    let guard = 0;
    while (app.lastPrediction!.candidates.length > 0 && guard++ < 30) {
      await app.commit(eventCode);
    }
    expect(app.lastPrediction!.candidates.length).toBe(0);
    expect(q("#candidates").querySelector(".empty-pool")?.textContent).toBe(
      EMPTY_POOL_MESSAGE,
    );
  });

  test("concurrent requeries coalesce to at most one in-flight request", async () => {
    const before = predictCount();
    await Promise.all([app.requery(), app.requery(), app.requery()]);
    expect(predictCount()).toBe(before + 2); // one live, the burst coalesced into one
    expect(maxPredictsInFlight).toBe(1);
  });

  test("replaying every captured request returns byte-identical bodies", async () => {
    const captured = [...exchanges];
    expect(captured.length).toBeGreaterThan(10);
    for (const ex of captured) {
      const resp = await fetch(ex.url, ex.init);
      const body = await resp.text();
      expect(resp.status).toBe(ex.status);
      expect(body).toBe(ex.body);
    }
  });
});
