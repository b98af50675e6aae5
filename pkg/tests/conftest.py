import itertools
from datetime import datetime, timedelta

import pytest

from nextact.eventlog import Case, Event
from nextact.matching import WeightedBipartiteGraph
from nextact.taxonomy import Taxonomy, taxonomy_from_edges

# Tiny 6-node taxonomy used everywhere: two branches under the root, one
# with two leaves, one with a single leaf.
T0_EDGES = [("A", "R"), ("B", "R"), ("A1", "A"), ("A2", "A"), ("B1", "B")]


@pytest.fixture
def t0() -> Taxonomy:
    return taxonomy_from_edges("t0", T0_EDGES)


def order_line(order: int, code: str, billable: int, short: str, long: str) -> str:
    """One fixed-width order-file line (order#, code, flag, short, long)."""
    return f"{order:05d} {code:<7} {billable} {short:<60} {long}"


CM_CODES = [
    # (code, billable, description)
    ("I21", 0, "Acute myocardial infarction"),
    ("I210", 0, "ST elevation (STEMI) myocardial infarction of anterior wall"),
    ("I2101", 1, "STEMI involving left main coronary artery"),
    ("I2102", 1, "STEMI involving left anterior descending coronary artery"),
    ("I2109", 1, "STEMI involving other coronary artery of anterior wall"),
    ("I211", 0, "ST elevation (STEMI) myocardial infarction of inferior wall"),
    ("I2111", 1, "STEMI involving right coronary artery"),
    ("I2119", 1, "STEMI involving other coronary artery of inferior wall"),
    ("I214", 1, "Non-ST elevation (NSTEMI) myocardial infarction"),
    ("I219", 1, "Acute myocardial infarction, unspecified"),
    ("R57", 0, "Shock, not elsewhere classified"),
    ("R570", 1, "Cardiogenic shock"),
    ("R571", 1, "Hypovolemic shock"),
    ("R578", 1, "Other shock"),
    ("R579", 1, "Shock, unspecified"),
    ("T17", 0, "Foreign body in respiratory tract"),
    ("T172", 0, "Foreign body in pharynx"),
    ("T1722", 0, "Food in pharynx"),
    ("T17220", 0, "Food in pharynx causing asphyxiation"),
    ("T17220A", 1, "Food in pharynx causing asphyxiation, initial encounter"),
    ("T17228A", 1, "Food in pharynx causing other injury, initial encounter"),
]


@pytest.fixture
def cm_order_text() -> str:
    lines = [
        order_line(i + 1, code, billable, desc[:60], desc)
        for i, (code, billable, desc) in enumerate(CM_CODES)
    ]
    return "\n".join(lines) + "\n"


PCS_CODES = [
    ("0016070", "Bypass cerebral ventricle to nasopharynx with autologous tissue"),
    ("0016071", "Bypass cerebral ventricle to nasopharynx with synthetic substitute"),
    ("0016072", "Bypass cerebral ventricle to nasopharynx"),
    ("001607A", "Bypass cerebral ventricle to nasopharynx, other device"),
    ("0W99000", "Drainage of right pleural cavity with drainage device, open"),
    ("0W9930Z", "Drainage of right pleural cavity, percutaneous"),
    ("30233N1", "Transfusion of nonautologous red blood cells into peripheral vein"),
    ("3E0234Z", "Introduction of serum into muscle, percutaneous"),
]


@pytest.fixture
def pcs_order_text() -> str:
    lines = [
        order_line(i + 1, code, 1, desc[:60], desc)
        for i, (code, desc) in enumerate(PCS_CODES)
    ]
    return "\n".join(lines) + "\n"


def mk_case(
    codes,
    diagnoses,
    case_id: str = "c1",
    admit: datetime = datetime(2021, 3, 1, 9, 0, 0),
) -> Case:
    """A completed case from activity codes and (code, seq) diagnoses,
    with the closing END event appended."""
    events = [
        Event(f"{case_id}:{i}", case_id, code, "proc", admit + timedelta(minutes=i), i)
        for i, code in enumerate(codes, start=1)
    ]
    events.append(
        Event(
            f"{case_id}:END",
            case_id,
            "END",
            "END",
            events[-1].timestamp + timedelta(seconds=1),
            len(events) + 1,
        )
    )
    return Case(case_id, admit, tuple(diagnoses), tuple(events))


def brute_force_total(graph: WeightedBipartiteGraph) -> float:
    """Maximum matching weight by trying every injective assignment."""
    n, m = len(graph.left), len(graph.right)
    best = 0.0
    if n <= m:
        for cols in itertools.permutations(range(m), n):
            best = max(best, sum(graph.weights[i][cols[i]] for i in range(n)))
    else:
        for rows in itertools.permutations(range(n), m):
            best = max(best, sum(graph.weights[rows[j]][j] for j in range(m)))
    return best
