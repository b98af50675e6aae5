"""Next-activity prediction by retrieval over completed cases.

Every completed case long enough to have an event after the query prefix
votes for the activity it performed at that position, weighted by its
trace similarity to the query. Two ranking modes are offered: score_sum
(default) accumulates supporter similarities per proposed activity;
dedup_first ranks activities in the order their best supporter appears,
scored by that single best similarity.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime

from .errors import EmptySequence
from .eventlog import Case, EventLog, TraceQuery
from .similarity import SimilarityBreakdown, SimilarityConfig, sim_trace
from .taxonomy import Taxonomy

MODES = ("score_sum", "dedup_first")


@dataclass(frozen=True)
class Supporter:
    """A completed case backing a proposed next activity."""

    case_id: str
    next_activity: str
    sim_trace: float
    admit_time: datetime
    breakdown: SimilarityBreakdown


@dataclass(frozen=True)
class PredictionCandidate:
    activity: str
    score: float
    supporters: tuple[Supporter, ...]  # best first


@dataclass(frozen=True)
class PredictionResult:
    query_fingerprint: str
    log_id: str
    mode: str
    n: int
    candidates: tuple[PredictionCandidate, ...]

    def activities(self) -> tuple[str, ...]:
        return tuple(c.activity for c in self.candidates)

    def to_dict(self, explain_top: int | None = None) -> dict:
        return {
            "query_fingerprint": self.query_fingerprint,
            "log_id": self.log_id,
            "mode": self.mode,
            "n": self.n,
            "candidates": [
                {
                    "activity": c.activity,
                    "score": c.score,
                    "supporters": [
                        _supporter_dict(s)
                        for s in (c.supporters if explain_top is None else c.supporters[:explain_top])
                    ],
                }
                for c in self.candidates
            ],
        }

    def to_json(self, explain_top: int | None = None) -> str:
        return json.dumps(self.to_dict(explain_top), sort_keys=True, separators=(",", ":"))


def _supporter_dict(s: Supporter) -> dict:
    bd = s.breakdown
    return {
        "case_id": s.case_id,
        "sim_trace": bd.sim_trace,
        "sim_list": bd.sim_list,
        "sim_cf": bd.sim_cf,
        "alpha": list(bd.alpha),
        "admit_time": s.admit_time.isoformat(),
        "list_edges": [_edge_dict(e) for e in bd.list_matching.edges],
        "cf_edges": [_edge_dict(e) for e in bd.cf_matching.edges],
    }


def _edge_dict(e) -> dict:
    return {
        "query_code": e.query_code,
        "query_pos": e.query_pos,
        "case_code": e.case_code,
        "case_pos": e.case_pos,
        "similarity": e.similarity,
        "order_weight": e.order_weight,
        "weight": e.weight,
    }


def candidate_pool(log: EventLog, query_len: int, exclude_case: str | None = None) -> tuple[Case, ...]:
    """Completed cases that still have an event at position query_len + 1.

    Trace lengths include the END marker, so a case exactly one event
    longer than the query proposes END.
    """
    if query_len < 1:
        raise EmptySequence("query must contain at least one event")
    return tuple(
        c
        for c in log.cases
        if len(c.trace) >= query_len + 1 and c.case_id != exclude_case
    )


def supporter_sort_key(s: Supporter):
    """Total order on supporters: more similar first, then the tie-break."""
    return (-s.sim_trace,) + tie_break_key(s)


def tie_break_key(s: Supporter):
    """Order among equally similar supporters: higher diagnosis-list
    similarity, then higher control-flow similarity, then more recent
    admission, then case id as the final deterministic key."""
    return (
        -s.breakdown.sim_list,
        -s.breakdown.sim_cf,
        -s.admit_time.timestamp(),
        s.case_id,
    )


def tie_break(a: Supporter, b: Supporter) -> int:
    """-1 if a ranks before b, 1 if after, 0 if indistinguishable."""
    ka, kb = tie_break_key(a), tie_break_key(b)
    return -1 if ka < kb else (1 if ka > kb else 0)


def predict(
    query: TraceQuery,
    log: EventLog,
    diag_tax: Taxonomy,
    proc_tax: Taxonomy,
    n: int = 5,
    config: SimilarityConfig = SimilarityConfig(),
    mode: str = "score_sum",
    exclude_case: str | None = None,
) -> PredictionResult:
    """Rank up to n next-activity candidates for a running case.

    Supporters with zero similarity are discarded, so every returned
    candidate has a positive score. Results are fully deterministic for a
    given log and query; asking for a larger n only extends the list.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not query.events:
        raise EmptySequence("query must contain at least one event")

    pool = candidate_pool(log, len(query.events), exclude_case)
    supporters: list[Supporter] = []
    for case in pool:
        bd = sim_trace(query, case, diag_tax, proc_tax, config)
        if bd.sim_trace <= 0.0:
            continue
        next_activity = case.trace[len(query.events)].activity
        supporters.append(Supporter(case.case_id, next_activity, bd.sim_trace, case.admit_time, bd))

    groups: dict[str, list[Supporter]] = {}
    for s in sorted(supporters, key=supporter_sort_key):
        groups.setdefault(s.next_activity, []).append(s)

    candidates = []
    for activity, members in groups.items():
        if mode == "score_sum":
            score = sum(m.sim_trace for m in members)
        else:
            score = members[0].sim_trace
        candidates.append(PredictionCandidate(activity, score, tuple(members)))

    if mode == "score_sum":
        candidates.sort(key=lambda c: (-c.score, supporter_sort_key(c.supporters[0]), c.activity))
    else:
        # Order of first appearance in the supporter ranking.
        candidates.sort(key=lambda c: (supporter_sort_key(c.supporters[0]), c.activity))

    return PredictionResult(
        query_fingerprint=query_fingerprint(query, log.id, n, mode, config),
        log_id=log.id,
        mode=mode,
        n=n,
        candidates=tuple(candidates[:n]),
    )


def query_fingerprint(
    query: TraceQuery, log_id: str, n: int, mode: str, config: SimilarityConfig
) -> str:
    """Stable digest of everything that determines a prediction."""
    payload = {
        "log": log_id,
        "diagnoses": [[c, s] for c, s in query.diagnoses],
        "events": list(query.events),
        "n": n,
        "mode": mode,
        "sim_kind": config.sim_kind,
        "alpha_mode": config.alpha_mode,
        "alpha": list(config.alpha) if config.alpha else None,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
