"""Similarity between running cases and completed cases.

Control-flow similarity aligns two activity sequences with an
order-damped maximum-weight matching and normalizes by the query length,
so it reads as "how much of the query is covered". Diagnosis-list
similarity does the same over the case-level diagnosis lists, positioned
by their ranking number. Trace similarity is their convex combination;
by default the weights shift toward control flow as the query grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from . import matching
from .errors import EmptyList, EmptySequence
from .eventlog import END_ACTIVITY, Case, TraceQuery
from .taxonomy import Taxonomy, sim_boolean

SIM_KINDS = ("sanchez", "boolean")
CodeSim = Callable[[str, str], float]


@dataclass(frozen=True)
class SimilarityConfig:
    """How case similarity is computed.

    sim_kind picks the code-level measure (taxonomy-based or exact match).
    alpha_mode "dynamic" derives the mixing weights from the query length;
    "static" uses the fixed alpha pair.
    """

    sim_kind: str = "sanchez"
    alpha_mode: str = "dynamic"
    alpha: tuple[float, float] | None = None

    def __post_init__(self):
        if self.sim_kind not in SIM_KINDS:
            raise ValueError(f"sim_kind must be one of {SIM_KINDS}, got {self.sim_kind!r}")
        if self.alpha_mode not in ("dynamic", "static"):
            raise ValueError(f"alpha_mode must be dynamic or static, got {self.alpha_mode!r}")
        if self.alpha_mode == "static":
            if self.alpha is None:
                raise ValueError("static alpha_mode needs an alpha pair")
            a1, a2 = self.alpha
            if not (0.0 <= a1 <= 1.0 and 0.0 <= a2 <= 1.0):
                raise ValueError(f"alpha weights must lie in [0, 1], got {self.alpha}")
            if abs(a1 + a2 - 1.0) > 1e-9:
                raise ValueError(f"alpha weights must sum to 1, got {self.alpha}")


VARIANTS = ("T", "B")


def config_for_variant(
    variant: str, alpha_mode: str = "dynamic", alpha: tuple[float, float] | None = None
) -> SimilarityConfig:
    """T is the taxonomy-similarity variant, B the exact-match baseline."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be T or B, got {variant!r}")
    kind = "sanchez" if variant == "T" else "boolean"
    return SimilarityConfig(kind, alpha_mode, alpha)


def code_similarity_fn(kind: str, tax: Taxonomy) -> CodeSim:
    """Code-level similarity extended to the END marker.

    END only matches END (similarity 1); against any real code it scores 0
    without consulting the taxonomy, which does not contain it.
    """
    if kind == "boolean":
        return sim_boolean
    if kind != "sanchez":
        raise ValueError(f"unknown similarity kind {kind!r}")

    def sanchez(c1: str, c2: str) -> float:
        if c1 == END_ACTIVITY or c2 == END_ACTIVITY:
            return 1.0 if c1 == c2 else 0.0
        return tax.sim_sanchez(c1, c2)

    return sanchez


@dataclass(frozen=True)
class MatchedEdge:
    query_code: str
    query_pos: int
    case_code: str
    case_pos: int
    similarity: float
    order_weight: float
    weight: float


@dataclass(frozen=True)
class MatchingDetail:
    edges: tuple[MatchedEdge, ...]
    total_weight: float


@dataclass(frozen=True)
class SimilarityBreakdown:
    """Full account of one query/case comparison, edge by edge."""

    sim_list: float
    sim_cf: float
    alpha: tuple[float, float]
    sim_trace: float
    list_matching: MatchingDetail
    cf_matching: MatchingDetail


def _match_detail(
    left: Sequence[tuple[str, int]], right: Sequence[tuple[str, int]], sim: CodeSim
) -> MatchingDetail:
    graph = matching.build_graph(left, right, sim)
    result = matching.max_weight_matching(graph)
    edges = []
    for i, j in result.pairs:
        cu, pu = graph.left[i]
        cv, pv = graph.right[j]
        edges.append(
            MatchedEdge(
                cu, pu, cv, pv, sim(cu, cv), matching.order_weight(pu, pv), graph.weights[i][j]
            )
        )
    return MatchingDetail(tuple(edges), result.total_weight)


def _positioned_events(codes: Sequence[str]) -> tuple[tuple[str, int], ...]:
    return tuple((c, i) for i, c in enumerate(codes, start=1))


def sim_cf(
    query_events: Sequence[str],
    case_events: Sequence[str],
    tax: Taxonomy,
    sim: str = "sanchez",
) -> float:
    """Control-flow similarity, normalized by the query length.

    Asymmetric by design: it measures how well the case covers the query.
    """
    detail = cf_matching_detail(query_events, case_events, code_similarity_fn(sim, tax))
    return detail.total_weight / len(query_events)


def cf_matching_detail(
    query_events: Sequence[str], case_events: Sequence[str], sim: CodeSim
) -> MatchingDetail:
    if not query_events or not case_events:
        raise EmptySequence("activity sequences must be nonempty")
    return _match_detail(_positioned_events(query_events), _positioned_events(case_events), sim)


def sim_list(
    query_diagnoses: Sequence[tuple[str, int]],
    case_diagnoses: Sequence[tuple[str, int]],
    tax: Taxonomy,
    sim: str = "sanchez",
) -> float:
    """Diagnosis-list similarity, positioned by ranking and normalized by
    the query list length."""
    detail = list_matching_detail(query_diagnoses, case_diagnoses, code_similarity_fn(sim, tax))
    return detail.total_weight / len(query_diagnoses)


def list_matching_detail(
    query_diagnoses: Sequence[tuple[str, int]],
    case_diagnoses: Sequence[tuple[str, int]],
    sim: CodeSim,
) -> MatchingDetail:
    if not query_diagnoses or not case_diagnoses:
        raise EmptyList("diagnosis lists must be nonempty")
    return _match_detail(tuple(query_diagnoses), tuple(case_diagnoses), sim)


def alpha_schedule(n_query_events: int) -> tuple[float, float]:
    """Mixing weights (list, control-flow) for a query with n real events.

    Control flow gains weight as evidence accumulates: one event gives
    (0.5, 0.5), three events give (0.25, 0.75).
    """
    if n_query_events < 0:
        raise ValueError("event count cannot be negative")
    return 1.0 / (n_query_events + 1), n_query_events / (n_query_events + 1)


def compose_trace_similarity(
    list_value: float, cf_value: float, alpha: tuple[float, float]
) -> float:
    return alpha[0] * list_value + alpha[1] * cf_value


def sim_trace(
    query: TraceQuery,
    case: Case,
    diag_tax: Taxonomy,
    proc_tax: Taxonomy,
    config: SimilarityConfig = SimilarityConfig(),
) -> SimilarityBreakdown:
    """Compare a running case against a completed one.

    The case side always includes its END marker; the dynamic alpha counts
    only the query's real events.
    """
    diag_sim = code_similarity_fn(config.sim_kind, diag_tax)
    proc_sim = code_similarity_fn(config.sim_kind, proc_tax)

    list_detail = list_matching_detail(query.diagnoses, case.diagnoses, diag_sim)
    case_events = case.activity_codes(include_end=True)
    cf_detail = cf_matching_detail(query.events, case_events, proc_sim)

    list_value = list_detail.total_weight / len(query.diagnoses)
    cf_value = cf_detail.total_weight / len(query.events)
    if config.alpha_mode == "dynamic":
        n_real = sum(1 for c in query.events if c != END_ACTIVITY)
        alpha = alpha_schedule(n_real)
    else:
        alpha = config.alpha  # validated in __post_init__
    return SimilarityBreakdown(
        sim_list=list_value,
        sim_cf=cf_value,
        alpha=alpha,
        sim_trace=compose_trace_similarity(list_value, cf_value, alpha),
        list_matching=list_detail,
        cf_matching=cf_detail,
    )
