"""Leave-one-out evaluation of the predictor over an event log.

Every case is held out in turn; each proper prefix of it becomes a query
against the rest of the log. A prediction is scored by the best taxonomy
similarity between the true next activity and any of the n proposed ones,
so near misses earn partial credit. The same taxonomy-based metric is
applied to every prediction variant to keep scores comparable.
"""

from __future__ import annotations

import csv
import json
import logging
import multiprocessing
import random
from dataclasses import dataclass
from pathlib import Path
from statistics import mean
from typing import Iterable, Sequence

from .errors import EmptyLog, EmptyRecords
from .eventlog import Case, EventLog, LogStats, prefixes, stats
from .predictor import predict
from .similarity import SimilarityConfig, code_similarity_fn, config_for_variant
from .stats import one_sided_paired_t_test, one_sided_welch_t_test, student_t_sf
from .taxonomy import Taxonomy

log = logging.getLogger(__name__)

__all__ = [
    "EvalRecord",
    "PrefixRow",
    "LogReport",
    "prediction_similarity",
    "loo_records",
    "average_similarity",
    "per_prefix_analysis",
    "evaluate_log",
    "write_report_csv",
    "write_prefix_csv",
    "write_report_json",
    "one_sided_paired_t_test",
    "one_sided_welch_t_test",
    "student_t_sf",
]


@dataclass(frozen=True)
class EvalRecord:
    """Outcome of one prefix query during leave-one-out evaluation."""

    log_id: str
    case_id: str
    prefix_len: int
    true_next: str
    predicted: tuple[str, ...]
    max_sim: float


def prediction_similarity(true_next: str, predicted: Sequence[str], proc_tax: Taxonomy) -> float:
    """Best taxonomy similarity between the truth and any proposal.

    1.0 whenever the true activity is among the proposals; 0.0 for an
    empty proposal list.
    """
    if not predicted:
        return 0.0
    sim = code_similarity_fn("sanchez", proc_tax)
    return max(sim(true_next, p) for p in predicted)


def _case_records(
    case: Case,
    eventlog: EventLog,
    diag_tax: Taxonomy,
    proc_tax: Taxonomy,
    config: SimilarityConfig,
    n: int,
    mode: str,
) -> list[EvalRecord]:
    out = []
    for query, true_next in prefixes(case):
        result = predict(
            query,
            eventlog,
            diag_tax,
            proc_tax,
            n=n,
            config=config,
            mode=mode,
            exclude_case=case.case_id,
        )
        out.append(
            EvalRecord(
                eventlog.id,
                case.case_id,
                len(query.events),
                true_next,
                result.activities(),
                prediction_similarity(true_next, result.activities(), proc_tax),
            )
        )
    return out


_PAR_STATE: tuple | None = None


def _par_case(case_id: str) -> list[EvalRecord]:
    eventlog, diag_tax, proc_tax, config, n, mode = _PAR_STATE
    case = eventlog.get_case(case_id)
    return _case_records(case, eventlog, diag_tax, proc_tax, config, n, mode)


def loo_records(
    eventlog: EventLog,
    diag_tax: Taxonomy,
    proc_tax: Taxonomy,
    variant: str = "T",
    n: int = 5,
    mode: str = "score_sum",
    alpha_mode: str = "dynamic",
    alpha: tuple[float, float] | None = None,
    workers: int = 1,
    case_ids: Sequence[str] | None = None,
) -> list[EvalRecord]:
    """All leave-one-out records for one variant, ordered by case then
    prefix length. workers > 1 forks the evaluation across processes on
    platforms that support it; results are identical either way."""
    if not eventlog.cases:
        raise EmptyLog(f"log {eventlog.id!r} has no cases")
    config = config_for_variant(variant, alpha_mode, alpha)
    if case_ids is None:
        cases = list(eventlog.cases)
    else:
        wanted = set(case_ids)
        cases = [c for c in eventlog.cases if c.case_id in wanted]

    if workers > 1:
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:
            ctx = None
        if ctx is not None:
            global _PAR_STATE
            _PAR_STATE = (eventlog, diag_tax, proc_tax, config, n, mode)
            try:
                with ctx.Pool(workers) as pool:
                    chunks = pool.map(_par_case, [c.case_id for c in cases])
            finally:
                _PAR_STATE = None
            return [r for chunk in chunks for r in chunk]
        log.warning("fork start method unavailable, evaluating serially")

    out: list[EvalRecord] = []
    for case in cases:
        out.extend(_case_records(case, eventlog, diag_tax, proc_tax, config, n, mode))
    return out


def average_similarity(records: Iterable[EvalRecord], per_trace: bool = False) -> float:
    """Mean max_sim over prefix instances.

    per_trace averages within each case first, so long traces stop
    dominating; the default weighs every prefix instance equally.
    """
    records = list(records)
    if not records:
        raise EmptyRecords("no evaluation records to average")
    if not per_trace:
        return mean(r.max_sim for r in records)
    by_case: dict[str, list[float]] = {}
    for r in records:
        by_case.setdefault(r.case_id, []).append(r.max_sim)
    return mean(mean(sims) for sims in by_case.values())


@dataclass(frozen=True)
class PrefixRow:
    prefix_len: int
    count: int
    avg_sim_B: float | None
    avg_sim_T: float | None
    p_value: float | None


def _paired(records_t: Sequence[EvalRecord], records_b: Sequence[EvalRecord]):
    by_key_b = {(r.case_id, r.prefix_len): r.max_sim for r in records_b}
    pairs = []
    for r in sorted(records_t, key=lambda r: (r.case_id, r.prefix_len)):
        key = (r.case_id, r.prefix_len)
        if key in by_key_b:
            pairs.append((r.max_sim, by_key_b[key]))
    return pairs


_T_TESTS = {"paired": one_sided_paired_t_test, "welch": one_sided_welch_t_test}


def _safe_p(pairs, test: str = "paired") -> float | None:
    if len(pairs) < 2:
        return None
    return _T_TESTS[test]([a for a, _ in pairs], [b for _, b in pairs])


def per_prefix_analysis(
    records_by_variant: dict[str, list[EvalRecord]], test: str = "paired"
) -> list[PrefixRow]:
    """Per-prefix-length averages, with a p-value when both variants
    were evaluated. Groups of size one get no p-value.

    test picks the significance test: "paired" (the default; the two
    variants answer the same prefix queries) or "welch" for an unpaired
    comparison."""
    lens = sorted({r.prefix_len for recs in records_by_variant.values() for r in recs})
    rows = []
    for k in lens:
        t = [r for r in records_by_variant.get("T", ()) if r.prefix_len == k]
        b = [r for r in records_by_variant.get("B", ()) if r.prefix_len == k]
        count = max(len(t), len(b))
        p = _safe_p(_paired(t, b), test) if t and b else None
        rows.append(
            PrefixRow(
                prefix_len=k,
                count=count,
                avg_sim_B=mean(r.max_sim for r in b) if b else None,
                avg_sim_T=mean(r.max_sim for r in t) if t else None,
                p_value=p,
            )
        )
    return rows


@dataclass(frozen=True)
class LogReport:
    log_id: str
    stats: LogStats
    avg_sim: dict[str, float]  # variant -> average similarity
    p_value: float | None
    prefix_rows: list[PrefixRow]
    records: dict[str, list[EvalRecord]]


def evaluate_log(
    eventlog: EventLog,
    diag_tax: Taxonomy,
    proc_tax: Taxonomy,
    n: int = 5,
    mode: str = "score_sum",
    variants: Sequence[str] = ("T", "B"),
    alpha_mode: str = "dynamic",
    alpha: tuple[float, float] | None = None,
    workers: int = 1,
    sample: int | None = None,
    seed: int = 0,
    test: str = "paired",
) -> LogReport:
    """Full evaluation of one log: leave-one-out records per variant,
    overall and per-prefix averages, and the one-sided p-value for the
    taxonomy variant improving on the baseline (paired by default,
    test="welch" for an unpaired comparison).

    sample evaluates only a seeded random subset of cases, for quick runs.
    """
    if test not in _T_TESTS:
        raise ValueError(f"unknown test {test!r}; expected one of {sorted(_T_TESTS)}")
    case_ids = None
    if sample is not None and sample < len(eventlog.cases):
        ids = [c.case_id for c in eventlog.cases]
        case_ids = sorted(random.Random(seed).sample(ids, sample))

    records: dict[str, list[EvalRecord]] = {}
    for variant in variants:
        records[variant] = loo_records(
            eventlog,
            diag_tax,
            proc_tax,
            variant=variant,
            n=n,
            mode=mode,
            alpha_mode=alpha_mode,
            alpha=alpha,
            workers=workers,
            case_ids=case_ids,
        )

    avg = {v: average_similarity(rs) for v, rs in records.items()}
    p_value = None
    if "T" in records and "B" in records:
        p_value = _safe_p(_paired(records["T"], records["B"]), test)
    return LogReport(
        log_id=eventlog.id,
        stats=stats(eventlog),
        avg_sim=avg,
        p_value=p_value,
        prefix_rows=per_prefix_analysis(records, test),
        records=records,
    )


# -- report output ------------------------------------------------------------

REPORT_COLUMNS = [
    "log_id",
    "n_traces",
    "mean_len",
    "std_len",
    "avg_sim_B",
    "avg_sim_T",
    "n_variants",
    "n_unique_events",
    "n_unique_diagnoses",
    "p_value",
]

PREFIX_COLUMNS = ["log_id", "prefix_len", "count", "avg_sim_B", "avg_sim_T", "p_value"]


def _cell(value) -> str:
    return "" if value is None else str(value)


def write_report_csv(reports: Sequence[LogReport], path: str | Path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            s = r.stats
            w.writerow(
                [
                    r.log_id,
                    s.n_traces,
                    s.mean_len,
                    s.std_len,
                    _cell(r.avg_sim.get("B")),
                    _cell(r.avg_sim.get("T")),
                    s.n_variants,
                    s.n_unique_events,
                    s.n_unique_diagnoses,
                    _cell(r.p_value),
                ]
            )


def write_prefix_csv(reports: Sequence[LogReport], path: str | Path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PREFIX_COLUMNS)
        for r in reports:
            for row in r.prefix_rows:
                w.writerow(
                    [
                        r.log_id,
                        row.prefix_len,
                        row.count,
                        _cell(row.avg_sim_B),
                        _cell(row.avg_sim_T),
                        _cell(row.p_value),
                    ]
                )


def report_to_dict(report: LogReport, include_records: bool = False) -> dict:
    data = {
        "log_id": report.log_id,
        "stats": report.stats.to_dict(),
        "avg_sim": dict(sorted(report.avg_sim.items())),
        "p_value": report.p_value,
        "per_prefix": [
            {
                "prefix_len": row.prefix_len,
                "count": row.count,
                "avg_sim_B": row.avg_sim_B,
                "avg_sim_T": row.avg_sim_T,
                "p_value": row.p_value,
            }
            for row in report.prefix_rows
        ],
    }
    if include_records:
        data["records"] = {
            v: [
                {
                    "case_id": r.case_id,
                    "prefix_len": r.prefix_len,
                    "true_next": r.true_next,
                    "predicted": list(r.predicted),
                    "max_sim": r.max_sim,
                }
                for r in rs
            ]
            for v, rs in sorted(report.records.items())
        }
    return data


def write_report_json(reports: Sequence[LogReport], path: str | Path, include_records: bool = False):
    payload = [report_to_dict(r, include_records) for r in reports]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
