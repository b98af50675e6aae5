/** The case under construction: diagnosis list plus committed events.
 *
 * Every mutation snapshots the previous state, so undo restores the
 * working case exactly as it was — the event sequence is append-only
 * except through undo.
 */

export interface DiagnosisEntry {
  code: string;
  seq: number;
  description: string;
}

export interface CaseSnapshot {
  diagnoses: DiagnosisEntry[];
  events: string[];
}

export class ModelError extends Error {}

export const MAX_SEQ = 10;

function copy(s: CaseSnapshot): CaseSnapshot {
  return { diagnoses: s.diagnoses.map((d) => ({ ...d })), events: [...s.events] };
}

export class WorkingCase {
  private current: CaseSnapshot = { diagnoses: [], events: [] };
  private history: CaseSnapshot[] = [];

  get diagnoses(): readonly DiagnosisEntry[] {
    return this.current.diagnoses;
  }

  get events(): readonly string[] {
    return this.current.events;
  }

  /** The server rejects queries missing either side. */
  get queryReady(): boolean {
    return this.current.diagnoses.length > 0 && this.current.events.length > 0;
  }

  get canUndo(): boolean {
    return this.history.length > 0;
  }

  addDiagnosis(code: string, seq: number, description = ""): void {
    if (!code) throw new ModelError("diagnosis code must not be empty");
    if (!Number.isInteger(seq) || seq < 1 || seq > MAX_SEQ)
      throw new ModelError(`seq must be an integer in 1..${MAX_SEQ}`);
    if (this.current.diagnoses.some((d) => d.seq === seq))
      throw new ModelError(`seq ${seq} is already used`);
    if (this.current.diagnoses.some((d) => d.code === code))
      throw new ModelError(`diagnosis ${code} is already listed`);
    this.push();
    this.current.diagnoses.push({ code, seq, description });
    this.current.diagnoses.sort((a, b) => a.seq - b.seq);
  }

  removeDiagnosis(code: string): void {
    const kept = this.current.diagnoses.filter((d) => d.code !== code);
    if (kept.length === this.current.diagnoses.length)
      throw new ModelError(`diagnosis ${code} is not listed`);
    this.push();
    this.current.diagnoses = kept;
  }

  commitEvent(code: string): void {
    if (!code) throw new ModelError("event code must not be empty");
    this.push();
    this.current.events.push(code);
  }

  undo(): boolean {
    const previous = this.history.pop();
    if (!previous) return false;
    this.current = previous;
    return true;
  }

  snapshot(): CaseSnapshot {
    return copy(this.current);
  }

  private push(): void {
    this.history.push(copy(this.current));
  }
}
