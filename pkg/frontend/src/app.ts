/** Controller: builds the page, drives the decision loop.
 *
 * The loop is build case -> request candidates -> inspect -> commit ->
 * automatic requery. At most one /predict request is in flight; commits
 * arriving meanwhile queue a single follow-up. Predictions are never
 * cached across commits.
 */

import { ApiClient, ApiError, LogInfo, Prediction } from "./api.js";
import { ModelError, WorkingCase } from "./model.js";
import {
  clear,
  renderCandidates,
  renderChips,
  renderStatus,
  renderTrace,
} from "./render.js";

const END = "END";
const SUGGESTION_LIMIT = 20;

export interface AppOptions {
  logId?: string;
  n?: number;
  variant?: "T" | "B";
}

export class App {
  model = new WorkingCase();
  lastPrediction: Prediction | null = null;
  logId = "";
  private diagTax = "";
  private procTax = "";
  private logs: LogInfo[] = [];

  private inflight = false;
  private queued = false;
  private active = 0;
  private waiters: Array<() => void> = [];
  private suggestToken = 0;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly options: AppOptions = {},
  ) {}

  // -- lifecycle ---------------------------------------------------------

  init(): Promise<void> {
    return this.track(this.start());
  }

  private async start(): Promise<void> {
    this.logs = await this.api.listLogs();
    if (this.logs.length === 0) throw new Error("service has no logs loaded");
    this.buildShell();
    this.selectLog(this.options.logId ?? this.logs[0]!.id);
    this.syncCase();
    renderStatus(this.status, "add at least one diagnosis and one procedure");
  }

  /** Resolves once no tracked operation (init, lookups, requeries) runs. */
  whenIdle(): Promise<void> {
    if (this.active === 0) return Promise.resolve();
    return new Promise((resolve) => this.waiters.push(resolve));
  }

  private track<T>(work: Promise<T>): Promise<T> {
    this.active++;
    const done = () => {
      this.active--;
      if (this.active === 0) {
        for (const w of this.waiters) w();
        this.waiters = [];
      }
    };
    work.then(done, done);
    return work;
  }

  // -- shell -------------------------------------------------------------

  private q<T extends HTMLElement>(selector: string): T {
    const node = this.root.querySelector(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node as T;
  }

  private get status(): HTMLElement {
    return this.q("#status");
  }

  private buildShell(): void {
    const doc = this.root.ownerDocument;
    this.root.innerHTML = `
      <h1>next activity explorer</h1>
      <div class="toolbar">
        <label>log <select id="log-select"></select></label>
        <label>variant
          <select id="variant">
            <option value="T">T (taxonomy)</option>
            <option value="B">B (exact match)</option>
          </select>
        </label>
        <label>n <input id="n" type="range" min="1" max="10" step="1">
          <span id="n-value"></span></label>
        <button id="undo">undo</button>
      </div>
      <section class="builder">
        <div class="half">
          <h3>diagnoses</h3>
          <input id="diag-code" list="diag-suggest" placeholder="diagnosis code">
          <datalist id="diag-suggest"></datalist>
          <input id="diag-seq" type="number" min="1" max="10" class="seq">
          <button id="diag-add">add</button>
          <div id="diag-hint" class="hint"></div>
          <div id="chips"></div>
        </div>
        <div class="half">
          <h3>procedures so far</h3>
          <input id="event-code" list="event-suggest" placeholder="procedure code">
          <datalist id="event-suggest"></datalist>
          <button id="event-add">add</button>
          <div id="event-hint" class="hint"></div>
          <div id="trace"></div>
        </div>
      </section>
      <div id="status" class="status"></div>
      <section id="candidates"></section>
    `;

    const logSelect = this.q<HTMLSelectElement>("#log-select");
    for (const log of this.logs) {
      const option = doc.createElement("option");
      option.value = log.id;
      option.textContent = `${log.id} (${log.n_cases} cases)`;
      logSelect.appendChild(option);
    }
    logSelect.addEventListener("change", () => {
      this.selectLog(logSelect.value);
      this.model = new WorkingCase();
      this.syncCase();
      void this.track(this.requery());
    });

    const variant = this.q<HTMLSelectElement>("#variant");
    variant.value = this.options.variant ?? "T";
    variant.addEventListener("change", () => void this.track(this.requery()));

    const n = this.q<HTMLInputElement>("#n");
    n.value = String(this.options.n ?? 5);
    this.q("#n-value").textContent = n.value;
    n.addEventListener("input", () => {
      this.q("#n-value").textContent = n.value;
      void this.track(this.requery());
    });

    this.q("#undo").addEventListener("click", () => void this.track(this.undo()));
    this.q("#diag-add").addEventListener("click", () =>
      void this.track(this.addDiagnosisFromForm()),
    );
    this.q("#event-add").addEventListener("click", () =>
      void this.track(this.addEventFromForm()),
    );
    this.q("#diag-code").addEventListener("input", () =>
      void this.track(this.suggest("diag")),
    );
    this.q("#event-code").addEventListener("input", () =>
      void this.track(this.suggest("event")),
    );
  }

  private selectLog(logId: string): void {
    const info = this.logs.find((l) => l.id === logId);
    if (!info) throw new Error(`unknown log ${logId}`);
    this.logId = info.id;
    this.diagTax = info.diagnosis_taxonomy;
    this.procTax = info.procedure_taxonomy;
    this.q<HTMLSelectElement>("#log-select").value = info.id;
  }

  // -- case building -----------------------------------------------------

  private syncCase(): void {
    renderChips(this.q("#chips"), this.model.diagnoses, (code) =>
      void this.track(this.removeDiagnosis(code)),
    );
    renderTrace(this.q("#trace"), this.model.events);
    this.q<HTMLInputElement>("#diag-seq").value = String(this.nextSeq());
  }

  private nextSeq(): number {
    const used = new Set(this.model.diagnoses.map((d) => d.seq));
    let seq = 1;
    while (used.has(seq)) seq++;
    return seq;
  }

  async addDiagnosisFromForm(): Promise<void> {
    const codeInput = this.q<HTMLInputElement>("#diag-code");
    const seqInput = this.q<HTMLInputElement>("#diag-seq");
    const code = codeInput.value.trim();
    const seq = Number(seqInput.value);
    try {
      const info = await this.api.codeInfo(this.diagTax, code);
      this.model.addDiagnosis(info.code, seq, info.description);
    } catch (error) {
      this.showError(error);
      return;
    }
    codeInput.value = "";
    this.syncCase();
    await this.requery();
  }

  async addEventFromForm(): Promise<void> {
    const codeInput = this.q<HTMLInputElement>("#event-code");
    const code = codeInput.value.trim();
    try {
      const info = await this.api.codeInfo(this.procTax, code);
      this.model.commitEvent(info.code);
    } catch (error) {
      this.showError(error);
      return;
    }
    codeInput.value = "";
    this.syncCase();
    await this.requery();
  }

  private async removeDiagnosis(code: string): Promise<void> {
    try {
      this.model.removeDiagnosis(code);
    } catch (error) {
      this.showError(error);
      return;
    }
    this.syncCase();
    await this.requery();
  }

  /** Append a proposed candidate and requery; committing END closes the
   * case instead of querying (the server rejects END inside a trace). */
  async commit(activity: string): Promise<void> {
    try {
      this.model.commitEvent(activity);
    } catch (error) {
      this.showError(error);
      return;
    }
    this.syncCase();
    await this.requery();
  }

  private async undo(): Promise<void> {
    if (!this.model.undo()) {
      renderStatus(this.status, "nothing to undo");
      return;
    }
    this.syncCase();
    await this.requery();
  }

  // -- typeahead ---------------------------------------------------------

  private async suggest(kind: "diag" | "event"): Promise<void> {
    const taxId = kind === "diag" ? this.diagTax : this.procTax;
    const input = this.q<HTMLInputElement>(`#${kind}-code`);
    const hint = this.q(`#${kind}-hint`);
    const datalist = this.q(`#${kind}-suggest`);
    const text = input.value.trim();
    const token = ++this.suggestToken;

    if (!text) {
      hint.textContent = "";
      clear(datalist);
      return;
    }
    for (let end = text.length; end > 0; end--) {
      let info;
      try {
        info = await this.api.codeInfo(taxId, text.slice(0, end));
      } catch (error) {
        if (error instanceof ApiError && error.status === 404) continue;
        this.showError(error);
        return;
      }
      if (token !== this.suggestToken) return; // a newer keystroke won
      hint.textContent = info.description;
      clear(datalist);
      const matching = info.children.filter((c) => c.startsWith(text));
      for (const code of (matching.length ? matching : info.children).slice(0, SUGGESTION_LIMIT)) {
        const option = datalist.ownerDocument.createElement("option");
        option.setAttribute("value", code);
        datalist.appendChild(option);
      }
      return;
    }
    if (token === this.suggestToken) {
      hint.textContent = "no matching code";
      clear(datalist);
    }
  }

  // -- prediction loop ---------------------------------------------------

  get caseClosed(): boolean {
    return this.model.events[this.model.events.length - 1] === END;
  }

  async requery(): Promise<void> {
    const candidates = this.q("#candidates");
    if (this.caseClosed) {
      clear(candidates);
      renderStatus(this.status, "end of treatment committed — case complete; undo to continue");
      return;
    }
    if (!this.model.queryReady) {
      clear(candidates);
      renderStatus(this.status, "add at least one diagnosis and one procedure");
      return;
    }
    if (this.inflight) {
      this.queued = true;
      return;
    }
    this.inflight = true;
    try {
      const prediction = await this.api.predict({
        log_id: this.logId,
        diagnoses: this.model.diagnoses.map((d) => ({ code: d.code, seq: d.seq })),
        events: [...this.model.events],
        n: Number(this.q<HTMLInputElement>("#n").value),
        variant: this.q<HTMLSelectElement>("#variant").value,
      });
      this.lastPrediction = prediction;
      renderCandidates(candidates, prediction, (activity) =>
        void this.track(this.commit(activity)),
      );
      renderStatus(
        this.status,
        `variant ${prediction.variant}, n=${prediction.n}, ` +
          `query ${prediction.query_fingerprint.slice(0, 12)}`,
      );
    } catch (error) {
      this.showError(error);
    } finally {
      this.inflight = false;
      if (this.queued) {
        this.queued = false;
        await this.requery();
      }
    }
  }

  private showError(error: unknown): void {
    const message =
      error instanceof ApiError || error instanceof ModelError
        ? error.message
        : String(error);
    renderStatus(this.status, message, true);
  }
}
