"""Synthetic data generators used by evaluation and examples."""

import pytest

from nextact.synth import (
    PROFILES,
    synthetic_log,
    synthetic_records,
    synthetic_taxonomies,
)


def test_taxonomies_shape():
    diag_tax, proc_tax = synthetic_taxonomies()
    assert diag_tax.id == "synth-diag"
    assert proc_tax.id == "synth-proc"
    categories = diag_tax.children(diag_tax.root)
    assert len(categories) == 6
    assert all(len(diag_tax.children(c)) == 8 for c in categories)
    families = proc_tax.children(proc_tax.root)
    assert len(families) == 16
    assert all(len(proc_tax.children(f)) == 10 for f in families)
    # family ids and leaf codes never collide (2-char vs 3-char)
    assert all(len(f) == 2 for f in families)
    assert all(len(l) == 3 for f in families for l in proc_tax.children(f))
    with pytest.raises(ValueError):
        synthetic_taxonomies(n_proc_families=30)


def test_records_are_deterministic():
    a = synthetic_records(seed=42, n_cases=30)
    b = synthetic_records(seed=42, n_cases=30)
    assert a[0] == b[0]
    assert a[1] == b[1]
    assert synthetic_records(seed=43, n_cases=30)[0] != a[0]


def test_records_stay_inside_the_taxonomies():
    procs, diags, diag_tax, proc_tax = synthetic_records(seed=7, n_cases=40)
    assert all(r.code in proc_tax for r in procs)
    assert all(r.code in diag_tax for r in diags)
    # diagnosis ranking numbers are case-level unique
    seen = {}
    for r in diags:
        assert r.seq_num not in seen.get(r.case_id, set())
        seen.setdefault(r.case_id, set()).add(r.seq_num)


def test_bad_profile():
    with pytest.raises(ValueError):
        synthetic_records(seed=1, profile="chaotic")
    assert PROFILES == ("clustered", "near_miss")


def _signatures(eventlog):
    return [(c.diagnoses, c.variant()) for c in eventlog.cases]


def test_clustered_profile_is_clone_heavy():
    eventlog, _, _ = synthetic_log(seed=11, n_cases=60, profile="clustered", n_templates=4)
    assert len(eventlog.cases) == 60
    sigs = _signatures(eventlog)
    # most cases are exact copies of a template
    assert len(set(sigs)) < len(sigs) / 2


def test_near_miss_profile_spreads_out():
    clustered, _, _ = synthetic_log(seed=11, n_cases=60, profile="clustered", n_templates=4)
    near, _, _ = synthetic_log(seed=11, n_cases=60, profile="near_miss", n_templates=4)
    assert len(set(_signatures(near))) > len(set(_signatures(clustered)))


def test_single_category_log():
    eventlog, diag_tax, proc_tax = synthetic_log(seed=3, n_cases=25)
    prefixes = {c.primary_diagnosis()[:3] for c in eventlog.cases}
    assert len(prefixes) == 1
    assert eventlog.id == prefixes.pop()
    assert eventlog.diagnosis_taxonomy == diag_tax.id
    assert eventlog.procedure_taxonomy == proc_tax.id
    # every trace is closed
    assert all(c.trace[-1].activity == "END" for c in eventlog.cases)
