import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nextact.errors import (
    CodeLengthNot7,
    CycleDetected,
    EmptyFile,
    EmptyInput,
    MalformedLine,
    UnknownConcept,
)
from nextact.taxonomy import (
    Taxonomy,
    load_taxonomy_auto,
    load_taxonomy_tsv,
    parse_icd10cm,
    parse_icd10pcs,
    save_taxonomy_tsv,
    sim_boolean,
    taxonomy_from_edges,
)

from conftest import T0_EDGES, order_line


# -- hand-derived values on the toy tree ---------------------------------------


def test_t0_information_content(t0):
    assert t0.max_leaves == 3
    assert t0.ic("R") == pytest.approx(0.0, abs=1e-12)
    # two leaves over two subsumers cancels to 1, so ic is log(max+1) - log(2)
    assert t0.ic("A") == pytest.approx(math.log(2), abs=1e-12)
    assert t0.ic("A1") == pytest.approx(math.log(3), abs=1e-12)
    # B has a single leaf over two subsumers: -ln((1/2 + 1)/4) = ln(8/3)
    assert t0.ic("B") == pytest.approx(math.log(8 / 3), abs=1e-12)
    assert t0.ic("B1") == pytest.approx(math.log(3), abs=1e-12)


def test_t0_similarity(t0):
    assert t0.sim_sanchez("A1", "A2") == pytest.approx(math.log(2) / math.log(3), abs=1e-12)
    assert t0.sim_sanchez("A1", "B1") == 0.0
    assert t0.sim_sanchez("A1", "A1") == 1.0
    assert t0.sim_sanchez("R", "R") == 1.0  # 0/0 case pinned to 1
    assert t0.lcs("A1", "A2") == "A"
    assert t0.lcs("A1", "B1") == "R"
    assert t0.lcs("A", "A1") == "A"


def test_counts_and_structure(t0):
    assert t0.root == "R"
    assert t0.leaf_count("R") == 3
    assert t0.leaf_count("A") == 2
    assert t0.leaf_count("A1") == 1
    assert t0.subsumer_count("R") == 1
    assert t0.subsumer_count("A1") == 3
    assert t0.ancestors("A1") == ("A1", "A", "R")
    assert t0.children("A") == ("A1", "A2")
    assert "A1" in t0 and "ZZ" not in t0


def test_leaf_excludes_self_flag():
    tax = taxonomy_from_edges("t0x", T0_EDGES, leaf_includes_self=False)
    assert tax.leaf_count("A1") == 0
    assert tax.leaf_count("A") == 2  # internal nodes still count distinct leaves
    assert tax.ic("A1") == pytest.approx(math.log(4), abs=1e-12)


def test_log_base_rescales_ic_not_sim(t0):
    tax2 = taxonomy_from_edges("t02", T0_EDGES, log_base=2)
    assert tax2.ic("A") == pytest.approx(1.0, abs=1e-12)
    assert tax2.sim_sanchez("A1", "A2") == pytest.approx(t0.sim_sanchez("A1", "A2"), abs=1e-12)


def test_unknown_concept(t0):
    with pytest.raises(UnknownConcept):
        t0.ic("nope")
    with pytest.raises(UnknownConcept):
        t0.sim_sanchez("A1", "nope")


def test_cycle_and_empty_rejected():
    with pytest.raises(CycleDetected):
        taxonomy_from_edges("bad", [("A", "B"), ("B", "A"), ("A", "R")])
    with pytest.raises(CycleDetected):
        taxonomy_from_edges("bad", [("A", "A")])
    with pytest.raises(EmptyInput):
        taxonomy_from_edges("bad", [])


def test_virtual_root_inserted():
    tax = taxonomy_from_edges("two", [("A1", "A"), ("B1", "B")])
    assert tax.root == "ROOT"
    assert set(tax.children("ROOT")) == {"A", "B"}
    assert tax.sim_sanchez("A1", "B1") == 0.0


def test_multi_parent_counts_are_distinct():
    # Diamond: D under both B and C; its leaf must not be double counted.
    edges = [("B", "A"), ("C", "A"), ("D", "B"), ("D", "C"), ("E", "B")]
    tax = taxonomy_from_edges("dag", edges)
    assert tax.max_leaves == 2  # D and E
    assert tax.leaf_count("A") == 2
    assert tax.subsumer_count("D") == 4  # D, B, C, A
    assert tax.lcs("D", "E") == "B"


def _recount(tax: Taxonomy, code: str) -> tuple[int, int]:
    # Independent traversal: descendant leaves via DFS down, subsumers via DFS up.
    seen, stack, leaves = set(), [code], set()
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        kids = tax.children(n)
        if not kids:
            leaves.add(n)
        stack.extend(kids)
    up, stack = set(), [code]
    while stack:
        n = stack.pop()
        if n in up:
            continue
        up.add(n)
        stack.extend(tax.parents(n))
    return len(leaves), len(up)


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_counts_match_fresh_traversal(data):
    # Random small trees with occasional extra parents (DAG edges).
    n = data.draw(st.integers(min_value=2, max_value=14))
    edges = []
    for i in range(1, n):
        edges.append((f"n{i}", f"n{data.draw(st.integers(0, i - 1))}"))
        if i >= 2 and data.draw(st.booleans()):
            other = data.draw(st.integers(0, i - 1))
            edges.append((f"n{i}", f"n{other}"))
    tax = taxonomy_from_edges("rand", edges)
    for code in tax.nodes:
        leaves, subs = _recount(tax, code)
        assert tax.leaf_count(code) == leaves
        assert tax.subsumer_count(code) == subs


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_similarity_properties(data):
    n = data.draw(st.integers(min_value=2, max_value=12))
    edges = [(f"n{i}", f"n{data.draw(st.integers(0, i - 1))}") for i in range(1, n)]
    tax = taxonomy_from_edges("rand", edges)
    nodes = sorted(tax.nodes)
    a = data.draw(st.sampled_from(nodes))
    b = data.draw(st.sampled_from(nodes))
    s = tax.sim_sanchez(a, b)
    assert 0.0 <= s <= 1.0
    assert s == tax.sim_sanchez(b, a)
    assert tax.sim_sanchez(a, a) == 1.0
    # ic grows (weakly) away from the root along every edge
    for child in tax.children(a):
        assert tax.ic(child) >= tax.ic(a) - 1e-12


def test_boolean_equals_sanchez_on_flat_taxonomy():
    edges = [(f"L{i}", "R") for i in range(6)]
    tax = taxonomy_from_edges("flat", edges)
    for a in tax.nodes:
        for b in tax.nodes:
            if a == "R" or b == "R":
                continue
            assert tax.sim_sanchez(a, b) == sim_boolean(a, b)


# -- order file parsing --------------------------------------------------------


def test_parse_cm_structure(cm_order_text):
    tax = parse_icd10cm(cm_order_text.encode("latin-1"))
    assert tax.parents("I2109") == ("I210",)
    assert tax.parents("I214") == ("I21",)  # no I214x level in between
    assert tax.parents("I21") == ("ROOT",)
    assert tax.parents("T17220A") == ("T17220",)
    assert "T17" in tax.ancestors("T17220A")
    assert tax.description("R570") == "Cardiogenic shock"
    assert tax.max_leaves == 13
    assert tax.ic("ROOT") == 0.0


def test_parse_cm_prefix_skips_missing_level():
    # Without I210, I2101 must attach to the category itself.
    text = "\n".join(
        [
            order_line(1, "I21", 0, "cat", "category"),
            order_line(2, "I2101", 1, "leaf", "leaf code"),
        ]
    )
    tax = parse_icd10cm(text)
    assert tax.parents("I2101") == ("I21",)


def test_parse_cm_with_chapters(cm_order_text):
    tax = parse_icd10cm(cm_order_text.encode("latin-1"), with_chapters=True)
    assert tax.parents("I21") == ("I00-I99",)
    assert tax.parents("R57") == ("R00-R99",)
    assert tax.parents("T17") == ("S00-T88",)
    assert tax.parents("I00-I99") == ("ROOT",)
    # only chapters that actually occur are materialized
    assert "A00-B99" not in tax


def test_parse_cm_with_blocks(cm_order_text):
    blocks = [("I20", "I25", "I20-I25")]
    tax = parse_icd10cm(cm_order_text.encode("latin-1"), block_ranges=blocks)
    assert tax.parents("I21") == ("I20-I25",)
    assert tax.parents("R57") == ("ROOT",)


def test_parse_cm_malformed():
    with pytest.raises(MalformedLine) as err:
        parse_icd10cm("short")
    assert err.value.line_no == 1
    with pytest.raises(MalformedLine):
        parse_icd10cm(order_line(1, "I21", 7, "x", "y"))  # bad billable flag
    with pytest.raises(EmptyFile):
        parse_icd10cm("   \n  \n")


def test_parse_pcs_structure(pcs_order_text):
    tax = parse_icd10pcs(pcs_order_text.encode("latin-1"))
    assert tax.parents("0016070") == ("001607",)
    assert tax.parents("001607") == ("00160",)
    assert tax.parents("0") == ("ROOT",)
    assert tax.is_leaf("0016070")
    assert not tax.is_leaf("001607")
    assert tax.max_leaves == 8  # every full code is a leaf
    # full codes sit at depth 7: themselves, six prefixes, and the root
    assert tax.subsumer_count("0016070") == 8


def test_parse_pcs_rejects_short_codes():
    with pytest.raises(CodeLengthNot7) as err:
        parse_icd10pcs(order_line(1, "001607", 1, "short code", "short code"))
    assert err.value.line_no == 1


def test_pcs_sibling_more_similar_than_cross_section(pcs_order_text):
    tax = parse_icd10pcs(pcs_order_text.encode("latin-1"))
    close = tax.sim_sanchez("0016070", "0016071")
    far = tax.sim_sanchez("0016070", "30233N1")
    assert close > far >= 0.0


# -- generic TSV and sniffing --------------------------------------------------


def test_tsv_round_trip(tmp_path, t0):
    path = tmp_path / "tax.tsv"
    save_taxonomy_tsv(t0, path)
    loaded = load_taxonomy_tsv(path)
    # the saved header names the taxonomy, whatever the file is called
    assert loaded.id == "t0"
    assert sorted(loaded.nodes) == sorted(t0.nodes)
    for node in t0.nodes:
        assert loaded.parents(node) == t0.parents(node)
    # an explicit id always wins over the header
    assert load_taxonomy_tsv(path, tax_id="other").id == "other"
    # without a header the filename stem is the fallback
    headerless = tmp_path / "bare.tsv"
    headerless.write_text("A\tROOT\n")
    assert load_taxonomy_tsv(headerless).id == "bare"


def test_tsv_malformed(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("A\tB\nline-without-tab\n")
    with pytest.raises(MalformedLine) as err:
        load_taxonomy_tsv(path)
    assert err.value.line_no == 2


def test_load_taxonomy_auto(tmp_path, cm_order_text, pcs_order_text, t0):
    cm = tmp_path / "cm.txt"
    cm.write_text(cm_order_text)
    pcs = tmp_path / "pcs.txt"
    pcs.write_text(pcs_order_text)
    tsv = tmp_path / "generic.tsv"
    save_taxonomy_tsv(t0, tsv)
    assert load_taxonomy_auto(cm).parents("I214") == ("I21",)
    assert load_taxonomy_auto(pcs).parents("0016070") == ("001607",)
    assert load_taxonomy_auto(tsv).parents("A1") == ("A",)
