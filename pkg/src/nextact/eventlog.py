"""Event logs for patient treatment processes.

A case bundles an ordered trace of procedure events with the case-level
diagnosis list (diagnoses never appear in the control flow). Traces end
with a synthetic END marker so completion is an explicit, predictable
activity. Logs are grouped by the 3-char category of the primary
diagnosis of each case.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from statistics import mean, pstdev
from typing import Iterable, Iterator, NamedTuple

from .errors import (
    EmptyLog,
    InvalidLog,
    MalformedLine,
    MissingPrimaryDiagnosis,
    TraceTooShort,
    UnknownCode,
)
from .taxonomy import Taxonomy

log = logging.getLogger(__name__)

END_ACTIVITY = "END"
END_TAXONOMY = "END"
MAX_DIAGNOSIS_SEQ = 10


class ProcedureRecord(NamedTuple):
    case_id: str
    code: str
    timestamp: datetime
    seq_num: int


class DiagnosisRecord(NamedTuple):
    case_id: str
    code: str
    seq_num: int


@dataclass(frozen=True)
class Event:
    event_id: str
    case_id: str
    activity: str
    taxonomy_id: str
    timestamp: datetime
    seq_num: int


@dataclass(frozen=True)
class Case:
    case_id: str
    admit_time: datetime
    diagnoses: tuple[tuple[str, int], ...]  # (code, seq_num), sorted by seq
    trace: tuple[Event, ...]  # ordered, last entry is the END event

    def activity_codes(self, include_end: bool = True) -> tuple[str, ...]:
        codes = tuple(e.activity for e in self.trace)
        if include_end:
            return codes
        return tuple(c for c in codes if c != END_ACTIVITY)

    def procedure_codes(self) -> tuple[str, ...]:
        return self.activity_codes(include_end=False)

    def primary_diagnosis(self) -> str:
        for code, seq in self.diagnoses:
            if seq == 1:
                return code
        raise MissingPrimaryDiagnosis(self.case_id)

    def variant(self) -> tuple[str, ...]:
        """Control-flow variant of the case (END excluded)."""
        return self.procedure_codes()


@dataclass(frozen=True)
class EventLog:
    id: str
    diagnosis_taxonomy: str
    procedure_taxonomy: str
    cases: tuple[Case, ...]  # sorted by case_id

    def get_case(self, case_id: str) -> Case | None:
        for c in self.cases:
            if c.case_id == case_id:
                return c
        return None


@dataclass(frozen=True)
class TraceQuery:
    """A running case: its diagnosis list plus the activities seen so far."""

    diagnoses: tuple[tuple[str, int], ...]
    events: tuple[str, ...]


def query_from_case(case: Case, k: int) -> TraceQuery:
    """The length-k prefix of a case, as a prediction query."""
    if not 1 <= k < len(case.trace):
        raise TraceTooShort(f"case {case.case_id}: no proper prefix of length {k}")
    return TraceQuery(case.diagnoses, tuple(e.activity for e in case.trace[:k]))


def prefixes(case: Case) -> Iterator[tuple[TraceQuery, str]]:
    """All proper nonempty prefixes of the trace with their true next activity."""
    if len(case.trace) < 2:
        raise TraceTooShort(f"case {case.case_id} has fewer than 2 events")
    codes = tuple(e.activity for e in case.trace)
    for k in range(1, len(codes)):
        yield TraceQuery(case.diagnoses, codes[:k]), codes[k]


# -- ingestion ----------------------------------------------------------------


@dataclass
class IngestReport:
    """Counters filled in by build_logs for operator-facing summaries."""

    total_cases: int = 0
    dropped_no_procedures: int = 0
    dropped_no_primary: int = 0
    dropped_unknown_code: int = 0
    diagnoses_truncated: int = 0
    small_groups: dict[str, int] = field(default_factory=dict)
    kept: dict[str, int] = field(default_factory=dict)


def build_logs(
    procedure_records: Iterable[ProcedureRecord],
    diagnosis_records: Iterable[DiagnosisRecord],
    min_cases: int = 500,
    diagnosis_taxonomy: str = "icd10cm",
    procedure_taxonomy: str = "icd10pcs",
    diag_tax: Taxonomy | None = None,
    proc_tax: Taxonomy | None = None,
    on_unknown: str = "drop",
    max_diagnosis_seq: int = MAX_DIAGNOSIS_SEQ,
    report: IngestReport | None = None,
) -> dict[str, EventLog]:
    """Assemble per-category event logs from raw records.

    Diagnoses beyond seq max_diagnosis_seq are cut, cases without any
    procedure event or without a primary diagnosis are dropped, events are
    ordered by (timestamp, seq_num, code) and closed with an END marker one
    second after the last event. Cases group by the 3-char prefix of the
    primary diagnosis; groups smaller than min_cases are discarded.

    When taxonomies are passed, codes missing from them are dropped with a
    warning, or raise UnknownCode if on_unknown is "fail".
    """
    if on_unknown not in ("drop", "fail"):
        raise ValueError(f"on_unknown must be 'drop' or 'fail', got {on_unknown!r}")
    rep = report if report is not None else IngestReport()

    diags: dict[str, list[DiagnosisRecord]] = {}
    for r in diagnosis_records:
        diags.setdefault(r.case_id, []).append(r)
    procs: dict[str, list[ProcedureRecord]] = {}
    for r in procedure_records:
        procs.setdefault(r.case_id, []).append(r)

    def known(code: str, tax: Taxonomy | None, case_id: str) -> bool:
        if tax is None or code in tax:
            return True
        if on_unknown == "fail":
            raise UnknownCode(code, case_id)
        log.warning("dropping record: unknown code %s (case %s)", code, case_id)
        rep.dropped_unknown_code += 1
        return False

    grouped: dict[str, list[Case]] = {}
    for case_id in sorted(set(diags) | set(procs)):
        rep.total_cases += 1
        dlist = sorted(diags.get(case_id, ()), key=lambda r: (r.seq_num, r.code))
        kept_d = [r for r in dlist if r.seq_num <= max_diagnosis_seq]
        rep.diagnoses_truncated += len(dlist) - len(kept_d)
        kept_d = [r for r in kept_d if known(r.code, diag_tax, case_id)]
        plist = [r for r in procs.get(case_id, ()) if known(r.code, proc_tax, case_id)]
        if not plist:
            rep.dropped_no_procedures += 1
            log.warning("dropping case %s: no procedure events", case_id)
            continue
        primary = next((r.code for r in kept_d if r.seq_num == 1), None)
        if primary is None:
            rep.dropped_no_primary += 1
            log.warning("dropping case %s: no primary diagnosis", case_id)
            continue

        plist.sort(key=lambda r: (r.timestamp, r.seq_num, r.code))
        events = [
            Event(f"{case_id}:{i}", case_id, r.code, procedure_taxonomy, r.timestamp, r.seq_num)
            for i, r in enumerate(plist, start=1)
        ]
        last = events[-1]
        events.append(
            Event(
                f"{case_id}:END",
                case_id,
                END_ACTIVITY,
                END_TAXONOMY,
                last.timestamp + timedelta(seconds=1),
                last.seq_num + 1,
            )
        )
        case = Case(
            case_id,
            events[0].timestamp,
            tuple((r.code, r.seq_num) for r in kept_d),
            tuple(events),
        )
        grouped.setdefault(primary[:3], []).append(case)

    logs: dict[str, EventLog] = {}
    for category in sorted(grouped):
        cases = sorted(grouped[category], key=lambda c: c.case_id)
        if len(cases) < min_cases:
            rep.small_groups[category] = len(cases)
            continue
        rep.kept[category] = len(cases)
        logs[category] = EventLog(
            category, diagnosis_taxonomy, procedure_taxonomy, tuple(cases)
        )
    return logs


# -- statistics ---------------------------------------------------------------


@dataclass(frozen=True)
class LogStats:
    n_traces: int
    mean_len: float
    std_len: float
    n_variants: int
    n_unique_events: int
    n_unique_diagnoses: int

    def to_dict(self) -> dict:
        return {
            "n_traces": self.n_traces,
            "mean_len": self.mean_len,
            "std_len": self.std_len,
            "n_variants": self.n_variants,
            "n_unique_events": self.n_unique_events,
            "n_unique_diagnoses": self.n_unique_diagnoses,
        }


def stats(eventlog: EventLog) -> LogStats:
    """Descriptive statistics of a log.

    Trace lengths include the END marker; the unique-event count does not,
    END being synthetic.
    """
    if not eventlog.cases:
        raise EmptyLog(f"log {eventlog.id!r} has no cases")
    lengths = [len(c.trace) for c in eventlog.cases]
    variants = {c.variant() for c in eventlog.cases}
    activities = {e.activity for c in eventlog.cases for e in c.trace}
    activities.discard(END_ACTIVITY)
    diagnoses = {code for c in eventlog.cases for code, _ in c.diagnoses}
    return LogStats(
        n_traces=len(eventlog.cases),
        mean_len=mean(lengths),
        std_len=pstdev(lengths),
        n_variants=len(variants),
        n_unique_events=len(activities),
        n_unique_diagnoses=len(diagnoses),
    )


# -- CSV interchange ----------------------------------------------------------

PROCEDURE_HEADER = ["case_id", "code", "timestamp", "seq_num"]
DIAGNOSIS_HEADER = ["case_id", "code", "seq_num"]


def _parse_ts(s: str, line_no: int) -> datetime:
    raw = s.strip()
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    try:
        return datetime.fromisoformat(raw)
    except ValueError:
        raise MalformedLine(line_no, f"bad ISO-8601 timestamp {s!r}") from None


def _parse_int(s: str, line_no: int, what: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise MalformedLine(line_no, f"bad {what} {s!r}") from None


def read_procedure_csv(path: str | Path) -> list[ProcedureRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != PROCEDURE_HEADER:
        raise MalformedLine(1, f"expected header {','.join(PROCEDURE_HEADER)}")
    out = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != 4 or not row[0] or not row[1]:
            raise MalformedLine(line_no, f"expected 4 fields, got {row!r}")
        out.append(
            ProcedureRecord(
                row[0], row[1], _parse_ts(row[2], line_no), _parse_int(row[3], line_no, "seq_num")
            )
        )
    return out


def read_diagnosis_csv(path: str | Path) -> list[DiagnosisRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != DIAGNOSIS_HEADER:
        raise MalformedLine(1, f"expected header {','.join(DIAGNOSIS_HEADER)}")
    out = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != 3 or not row[0] or not row[1]:
            raise MalformedLine(line_no, f"expected 3 fields, got {row!r}")
        out.append(DiagnosisRecord(row[0], row[1], _parse_int(row[2], line_no, "seq_num")))
    return out


def write_procedure_csv(records: Iterable[ProcedureRecord], path: str | Path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROCEDURE_HEADER)
        for r in records:
            w.writerow([r.case_id, r.code, r.timestamp.isoformat(), r.seq_num])


def write_diagnosis_csv(records: Iterable[DiagnosisRecord], path: str | Path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGNOSIS_HEADER)
        for r in records:
            w.writerow([r.case_id, r.code, r.seq_num])


# -- JSON persistence ---------------------------------------------------------


def log_to_dict(eventlog: EventLog) -> dict:
    return {
        "id": eventlog.id,
        "diagnosis_taxonomy": eventlog.diagnosis_taxonomy,
        "procedure_taxonomy": eventlog.procedure_taxonomy,
        "cases": [
            {
                "case_id": c.case_id,
                "admit_time": c.admit_time.isoformat(),
                "diagnoses": [{"code": code, "seq": seq} for code, seq in c.diagnoses],
                "events": [
                    {"code": e.activity, "ts": e.timestamp.isoformat(), "seq": e.seq_num}
                    for e in c.trace
                ],
            }
            for c in eventlog.cases
        ],
    }


def save_log_json(eventlog: EventLog, path: str | Path):
    Path(path).write_text(
        json.dumps(log_to_dict(eventlog), indent=2, sort_keys=True) + "\n"
    )


def log_from_dict(data: dict) -> EventLog:
    try:
        cases = []
        for c in data["cases"]:
            case_id = c["case_id"]
            events = []
            for i, e in enumerate(c["events"], start=1):
                code = e["code"]
                events.append(
                    Event(
                        f"{case_id}:END" if code == END_ACTIVITY else f"{case_id}:{i}",
                        case_id,
                        code,
                        END_TAXONOMY if code == END_ACTIVITY else data["procedure_taxonomy"],
                        _parse_ts(e["ts"], i),
                        int(e["seq"]),
                    )
                )
            if not events or events[-1].activity != END_ACTIVITY:
                raise InvalidLog(f"case {case_id}: trace must end with {END_ACTIVITY}")
            if any(e.activity == END_ACTIVITY for e in events[:-1]):
                raise InvalidLog(f"case {case_id}: {END_ACTIVITY} before end of trace")
            cases.append(
                Case(
                    case_id,
                    _parse_ts(c["admit_time"], 0),
                    tuple((d["code"], int(d["seq"])) for d in c["diagnoses"]),
                    tuple(events),
                )
            )
        cases.sort(key=lambda c: c.case_id)
        return EventLog(
            data["id"],
            data["diagnosis_taxonomy"],
            data["procedure_taxonomy"],
            tuple(cases),
        )
    except (KeyError, TypeError, ValueError, MalformedLine) as exc:
        raise InvalidLog(f"bad event log payload: {exc}") from exc


def load_log_json(path: str | Path) -> EventLog:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidLog(f"{path} is not valid JSON: {exc}") from exc
    return log_from_dict(data)
