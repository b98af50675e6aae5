"""Seeded synthetic taxonomies and event logs for tests and demos.

Two generation profiles:

- "clustered": cases are near-exact copies of a few templates, so most
  queries have literal clones in the log. Good for exercising retrieval
  ranking.
- "near_miss": every case is a template with many codes swapped for
  taxonomy siblings, so exact matching starves while taxonomy similarity
  still sees the structure. Good for contrasting the two variants.

Generation is fully determined by the seed.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta

from .eventlog import DiagnosisRecord, EventLog, IngestReport, ProcedureRecord, build_logs
from .taxonomy import Taxonomy, taxonomy_from_edges

PROFILES = ("clustered", "near_miss")

_BASE_TIME = datetime(2021, 1, 6, 8, 0, 0)


def synthetic_taxonomies(
    n_diag_categories: int = 6,
    diag_leaves: int = 8,
    n_proc_families: int = 16,
    proc_leaves: int = 10,
) -> tuple[Taxonomy, Taxonomy]:
    """Two small trees: diagnosis categories D00..D0x with 4-char leaf
    codes (3-char prefix is the category), and procedure families F0..Fx
    with 3-char leaf codes."""
    diag_edges = []
    diag_desc = {}
    for c in range(n_diag_categories):
        cat = f"D{c:02d}"
        diag_edges.append((cat, "ROOT"))
        diag_desc[cat] = f"Synthetic diagnosis category {cat}"
        for l in range(diag_leaves):
            code = f"{cat}{l}"
            diag_edges.append((code, cat))
            diag_desc[code] = f"Synthetic diagnosis {code}"
    if n_proc_families > 26:
        raise ValueError("at most 26 procedure families supported")
    proc_edges = []
    proc_desc = {}
    for f in range(n_proc_families):
        fam = "F" + chr(ord("A") + f)
        proc_edges.append((fam, "ROOT"))
        proc_desc[fam] = f"Synthetic procedure family {fam}"
        for l in range(proc_leaves):
            code = f"{fam}{l}"
            proc_edges.append((code, fam))
            proc_desc[code] = f"Synthetic procedure {code}"
    diag_tax = taxonomy_from_edges("synth-diag", diag_edges, diag_desc)
    proc_tax = taxonomy_from_edges("synth-proc", proc_edges, proc_desc)
    return diag_tax, proc_tax


def _templates(rng: random.Random, diag_tax: Taxonomy, proc_tax: Taxonomy, n_templates: int):
    categories = sorted(c for c in diag_tax.children(diag_tax.root))
    families = sorted(f for f in proc_tax.children(proc_tax.root))
    home = categories[0]
    templates = []
    for idx in range(n_templates):
        primary = rng.choice(sorted(diag_tax.children(home)))
        secondaries = []
        for seq in range(2, 5):
            cat = rng.choice(categories[1:])
            secondaries.append((rng.choice(sorted(diag_tax.children(cat))), seq))
        # Each template draws from its own pair of families so that
        # control flow discriminates templates cleanly.
        fams = (families[(2 * idx) % len(families)], families[(2 * idx + 1) % len(families)])
        length = rng.randint(3, 6)
        trace = [rng.choice(sorted(proc_tax.children(rng.choice(fams)))) for _ in range(length)]
        templates.append(((primary, 1), tuple(secondaries), tuple(trace)))
    return templates


def _sibling(rng: random.Random, tax: Taxonomy, code: str) -> str:
    siblings = sorted(tax.children(tax.parents(code)[0]))
    return rng.choice(siblings)


def synthetic_records(
    seed: int,
    n_cases: int = 200,
    profile: str = "clustered",
    n_templates: int = 8,
    diag_tax: Taxonomy | None = None,
    proc_tax: Taxonomy | None = None,
) -> tuple[list[ProcedureRecord], list[DiagnosisRecord], Taxonomy, Taxonomy]:
    """Raw ingestion records for n_cases synthetic cases."""
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}, got {profile!r}")
    if diag_tax is None or proc_tax is None:
        diag_tax, proc_tax = synthetic_taxonomies()
    rng = random.Random(seed)
    templates = _templates(rng, diag_tax, proc_tax, n_templates)

    procs: list[ProcedureRecord] = []
    diags: list[DiagnosisRecord] = []
    for i in range(n_cases):
        case_id = f"case{i:05d}"
        primary, secondaries, trace = templates[rng.randrange(len(templates))]
        diagnoses = [primary, *secondaries]
        events = list(trace)
        if profile == "clustered":
            # Mostly exact clones; occasionally one event drifts to a sibling.
            if rng.random() < 0.12:
                k = rng.randrange(len(events))
                events[k] = _sibling(rng, proc_tax, events[k])
        else:
            # Heavy sibling substitution in both views: exact matching
            # starves while the family structure stays intact.
            events = [
                _sibling(rng, proc_tax, e) if rng.random() < 0.8 else e for e in events
            ]
            diagnoses = [
                (_sibling(rng, diag_tax, code) if rng.random() < 0.7 else code, seq)
                for code, seq in diagnoses
            ]
        admit = _BASE_TIME + timedelta(hours=i)
        for code, dseq in diagnoses:
            diags.append(DiagnosisRecord(case_id, code, dseq))
        for j, code in enumerate(events):
            procs.append(
                ProcedureRecord(case_id, code, admit + timedelta(minutes=30 * j), j + 1)
            )
    return procs, diags, diag_tax, proc_tax


def synthetic_log(
    seed: int,
    n_cases: int = 200,
    profile: str = "clustered",
    n_templates: int = 8,
    report: IngestReport | None = None,
) -> tuple[EventLog, Taxonomy, Taxonomy]:
    """A single synthetic event log plus the taxonomies it refers to.

    All cases share one primary-diagnosis category, so ingestion yields
    exactly one log.
    """
    procs, diags, diag_tax, proc_tax = synthetic_records(seed, n_cases, profile, n_templates)
    logs = build_logs(
        procs,
        diags,
        min_cases=1,
        diagnosis_taxonomy=diag_tax.id,
        procedure_taxonomy=proc_tax.id,
        diag_tax=diag_tax,
        proc_tax=proc_tax,
        on_unknown="fail",
        report=report,
    )
    assert len(logs) == 1, "synthetic cases must share one category"
    (eventlog,) = logs.values()
    return eventlog, diag_tax, proc_tax
