/** DOM builders for the candidate list and explanation drawer.
 *
 * All construction goes through each node's ownerDocument, so these run
 * unchanged in a browser or a synthetic document. Every rendered number
 * is formatted from the server payload — nothing is recomputed here.
 */

import type { Candidate, MatchedEdge, Prediction, Supporter } from "./api.js";
import type { DiagnosisEntry } from "./model.js";

export const EMPTY_POOL_MESSAGE = "no comparable historical cases";

export function fmt(x: number): string {
  return x.toFixed(4);
}

export function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

function el(
  parent: Element,
  tag: string,
  className?: string,
  text?: string,
): HTMLElement {
  const node = parent.ownerDocument.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  parent.appendChild(node);
  return node;
}

export function renderStatus(container: Element, message: string, isError = false): void {
  clear(container);
  container.className = isError ? "status error" : "status";
  container.textContent = message;
}

export function renderChips(
  container: Element,
  diagnoses: readonly DiagnosisEntry[],
  onRemove: (code: string) => void,
): void {
  clear(container);
  for (const d of diagnoses) {
    const chip = el(container, "span", "chip");
    el(chip, "span", "chip-seq", String(d.seq));
    el(chip, "span", "chip-code", d.code);
    if (d.description) el(chip, "span", "chip-desc", d.description);
    const remove = el(chip, "button", "chip-remove", "×");
    remove.setAttribute("title", `remove ${d.code}`);
    remove.addEventListener("click", () => onRemove(d.code));
  }
}

export function renderTrace(container: Element, events: readonly string[]): void {
  clear(container);
  if (events.length === 0) {
    el(container, "span", "trace-empty", "no procedures yet");
    return;
  }
  const list = el(container, "ol", "trace-list");
  for (const code of events) el(list, "li", "trace-step", code);
}

function renderEdgeTable(
  pane: Element,
  title: string,
  edges: readonly MatchedEdge[],
): void {
  el(pane, "h4", "pane-title", title);
  if (edges.length === 0) {
    el(pane, "p", "pane-empty", "no matched pairs");
    return;
  }
  const table = el(pane, "table", "edges");
  const head = el(table, "tr");
  for (const label of ["query", "matched", "sim", "order", "product"])
    el(head, "th", undefined, label);
  for (const edge of edges) {
    const row = el(table, "tr", "edge");
    el(row, "td", "edge-query", `${edge.query_code}@${edge.query_pos}`);
    el(row, "td", "edge-case", `${edge.case_code}@${edge.case_pos}`);
    el(row, "td", "edge-sim", fmt(edge.similarity));
    el(row, "td", "edge-order", fmt(edge.order_weight));
    el(row, "td", "edge-product", fmt(edge.weight));
  }
}

function renderSupporter(drawer: Element, s: Supporter): void {
  const block = el(drawer, "div", "supporter");
  el(block, "div", "supporter-head", `via ${s.case_id} (admitted ${s.admit_time})`);
  const agg = el(block, "div", "aggregate");
  el(agg, "span", "label", "sim_trace ");
  el(agg, "span", "sim-trace", fmt(s.sim_trace));
  el(agg, "span", "label", " = α₁ ");
  el(agg, "span", "alpha-1", fmt(s.alpha[0]));
  el(agg, "span", "label", " × sim_list ");
  el(agg, "span", "sim-list", fmt(s.sim_list));
  el(agg, "span", "label", " + α₂ ");
  el(agg, "span", "alpha-2", fmt(s.alpha[1]));
  el(agg, "span", "label", " × sim_cf ");
  el(agg, "span", "sim-cf", fmt(s.sim_cf));
  const panes = el(block, "div", "panes");
  renderEdgeTable(el(panes, "section", "pane list-pane"), "diagnosis matching", s.list_edges);
  renderEdgeTable(el(panes, "section", "pane cf-pane"), "procedure matching", s.cf_edges);
}

function renderCandidate(
  list: Element,
  rank: number,
  candidate: Candidate,
  onCommit: (activity: string) => void,
): void {
  const item = el(list, "li", "candidate");
  const header = el(item, "div", "candidate-header");
  el(header, "span", "rank", String(rank));
  el(header, "span", "code", candidate.activity);
  el(header, "span", "desc", candidate.description);
  el(header, "span", "label", "score ");
  el(header, "span", "score", fmt(candidate.score));
  el(header, "span", "supporter-count", `${candidate.supporters.length} supporter(s)`);

  const drawer = el(item, "div", "drawer hidden");
  for (const s of candidate.supporters) renderSupporter(drawer, s);
  if (candidate.supporters.length === 0)
    el(drawer, "p", "pane-empty", "supporter detail not requested");

  const explain = el(header, "button", "explain", "explain");
  explain.addEventListener("click", () => drawer.classList.toggle("hidden"));
  const commit = el(header, "button", "commit", "commit");
  commit.addEventListener("click", () => onCommit(candidate.activity));
}

export function renderCandidates(
  container: Element,
  prediction: Prediction,
  onCommit: (activity: string) => void,
): void {
  clear(container);
  if (prediction.candidates.length === 0) {
    el(container, "p", "empty-pool", EMPTY_POOL_MESSAGE);
    return;
  }
  const list = el(container, "ol", "candidates");
  prediction.candidates.forEach((candidate, i) =>
    renderCandidate(list, i + 1, candidate, onCommit),
  );
}
