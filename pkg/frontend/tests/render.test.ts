import { Window } from "happy-dom";
import { beforeEach, describe, expect, test } from "vitest";

import type { Prediction } from "../src/api.js";
import {
  EMPTY_POOL_MESSAGE,
  fmt,
  renderCandidates,
  renderChips,
  renderStatus,
  renderTrace,
} from "../src/render.js";

// Raw values with enough digits that any client-side rounding or
// recomputation would disagree with fmt() of the payload field.
const prediction: Prediction = {
  query_fingerprint: "abc123",
  log_id: "log_A",
  mode: "score_sum",
  n: 5,
  variant: "T",
  candidates: [
    {
      activity: "FB1",
      score: 1.2345678,
      description: "first candidate",
      supporters: [
        {
          case_id: "case00007",
          sim_trace: 0.8765432,
          sim_list: 0.6309297,
          sim_cf: 0.9587654,
          alpha: [0.25, 0.75],
          admit_time: "2021-01-06T08:00:00",
          list_edges: [
            {
              query_code: "D001",
              query_pos: 1,
              case_code: "D002",
              case_pos: 2,
              similarity: 0.6309297,
              order_weight: 0.5,
              weight: 0.3154648,
            },
          ],
          cf_edges: [],
        },
      ],
    },
    { activity: "END", score: 0.5, description: "end of treatment", supporters: [] },
  ],
};

let container: HTMLElement;

beforeEach(() => {
  const window = new Window();
  const document = window.document;
  const div = document.createElement("div");
  document.body.appendChild(div);
  container = div as unknown as HTMLElement;
});

function text(selector: string): string {
  return container.querySelector(selector)?.textContent ?? "(missing)";
}

describe("renderCandidates", () => {
  test("one entry per candidate, ranked in payload order", () => {
    renderCandidates(container, prediction, () => {});
    const items = container.querySelectorAll("li.candidate");
    expect(items.length).toBe(2);
    const ranks = [...container.querySelectorAll(".rank")].map((n) => n.textContent);
    expect(ranks).toEqual(["1", "2"]);
    const codes = [...container.querySelectorAll(".candidate .code")].map(
      (n) => n.textContent,
    );
    expect(codes).toEqual(["FB1", "END"]);
  });

  test("every displayed number is the formatted payload field", () => {
    renderCandidates(container, prediction, () => {});
    const s = prediction.candidates[0]!.supporters[0]!;
    expect(text(".score")).toBe(fmt(prediction.candidates[0]!.score));
    expect(text(".sim-trace")).toBe(fmt(s.sim_trace));
    expect(text(".sim-list")).toBe(fmt(s.sim_list));
    expect(text(".sim-cf")).toBe(fmt(s.sim_cf));
    expect(text(".alpha-1")).toBe(fmt(s.alpha[0]));
    expect(text(".alpha-2")).toBe(fmt(s.alpha[1]));
    const edge = s.list_edges[0]!;
    expect(text(".edge-sim")).toBe(fmt(edge.similarity));
    expect(text(".edge-order")).toBe(fmt(edge.order_weight));
    expect(text(".edge-product")).toBe(fmt(edge.weight));
    expect(text(".edge-query")).toBe("D001@1");
    expect(text(".edge-case")).toBe("D002@2");
    expect(text(".supporter-head")).toBe("via case00007 (admitted 2021-01-06T08:00:00)");
  });

  test("drawer starts hidden and the explain button toggles it", () => {
    renderCandidates(container, prediction, () => {});
    const drawer = container.querySelector(".drawer")!;
    const explain = container.querySelector<HTMLButtonElement>("button.explain")!;
    expect(drawer.classList.contains("hidden")).toBe(true);
    explain.click();
    expect(drawer.classList.contains("hidden")).toBe(false);
    explain.click();
    expect(drawer.classList.contains("hidden")).toBe(true);
  });

  test("commit button reports the candidate's activity", () => {
    const committed: string[] = [];
    renderCandidates(container, prediction, (a) => committed.push(a));
    const buttons = container.querySelectorAll<HTMLButtonElement>("button.commit");
    buttons[1]!.click();
    buttons[0]!.click();
    expect(committed).toEqual(["END", "FB1"]);
  });

  test("empty candidate list shows the empty-pool message", () => {
    renderCandidates(container, { ...prediction, candidates: [] }, () => {});
    expect(text(".empty-pool")).toBe(EMPTY_POOL_MESSAGE);
    expect(container.querySelectorAll("li.candidate").length).toBe(0);
  });

  test("empty edge list and supporterless candidate get placeholders", () => {
    renderCandidates(container, prediction, () => {});
    const cfPane = container.querySelector(".cf-pane")!;
    expect(cfPane.querySelector(".pane-empty")?.textContent).toBe("no matched pairs");
    const drawers = container.querySelectorAll(".drawer");
    expect(drawers[1]!.querySelector(".pane-empty")?.textContent).toBe(
      "supporter detail not requested",
    );
  });

  test("rerender replaces previous content", () => {
    renderCandidates(container, prediction, () => {});
    renderCandidates(container, prediction, () => {});
    expect(container.querySelectorAll("li.candidate").length).toBe(2);
  });
});

describe("renderStatus", () => {
  test("plain and error styling", () => {
    renderStatus(container, "ready");
    expect(container.textContent).toBe("ready");
    expect(container.className).toBe("status");
    renderStatus(container, "unknown_code: ZZZ", true);
    expect(container.textContent).toBe("unknown_code: ZZZ");
    expect(container.className).toBe("status error");
  });
});

describe("renderChips", () => {
  test("shows seq, code, description and wires removal", () => {
    const removed: string[] = [];
    renderChips(
      container,
      [
        { code: "D001", seq: 1, description: "first" },
        { code: "D002", seq: 2, description: "" },
      ],
      (code) => removed.push(code),
    );
    expect(container.querySelectorAll(".chip").length).toBe(2);
    expect(text(".chip-seq")).toBe("1");
    expect(text(".chip-code")).toBe("D001");
    expect(text(".chip-desc")).toBe("first");
    // empty description renders no desc span
    expect(container.querySelectorAll(".chip-desc").length).toBe(1);
    container.querySelectorAll<HTMLButtonElement>(".chip-remove")[1]!.click();
    expect(removed).toEqual(["D002"]);
  });
});

describe("renderTrace", () => {
  test("ordered steps, with a placeholder when empty", () => {
    renderTrace(container, []);
    expect(text(".trace-empty")).toBe("no procedures yet");
    renderTrace(container, ["FA0", "FA1"]);
    const steps = [...container.querySelectorAll(".trace-step")].map((n) => n.textContent);
    expect(steps).toEqual(["FA0", "FA1"]);
    expect(container.querySelector(".trace-empty")).toBeNull();
  });
});
