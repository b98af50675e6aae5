"""Concept taxonomies and information-content similarity over them.

A Taxonomy is a rooted DAG of concept codes (usually a tree). Similarity
between two codes is the Lin quotient of an intrinsic information content
computed from leaf and subsumer counts, so no external corpus is needed.

Builders are provided for the two CMS fixed-width order-file layouts
(diagnosis and procedure codes) plus a generic child/parent TSV format.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    CodeLengthNot7,
    CycleDetected,
    EmptyFile,
    EmptyInput,
    MalformedLine,
    UnknownConcept,
)

log = logging.getLogger(__name__)

VIRTUAL_ROOT = "ROOT"

# Diagnosis chapter ranges keyed by the 3-char category span they cover.
# Optional: chapter nodes are only inserted when asked for, the default
# hierarchy is root -> categories -> subcategories.
ICD10CM_CHAPTERS: tuple[tuple[str, str, str], ...] = (
    ("A00", "B99", "Certain infectious and parasitic diseases"),
    ("C00", "D49", "Neoplasms"),
    ("D50", "D89", "Diseases of the blood and blood-forming organs"),
    ("E00", "E89", "Endocrine, nutritional and metabolic diseases"),
    ("F01", "F99", "Mental, behavioral and neurodevelopmental disorders"),
    ("G00", "G99", "Diseases of the nervous system"),
    ("H00", "H59", "Diseases of the eye and adnexa"),
    ("H60", "H95", "Diseases of the ear and mastoid process"),
    ("I00", "I99", "Diseases of the circulatory system"),
    ("J00", "J99", "Diseases of the respiratory system"),
    ("K00", "K95", "Diseases of the digestive system"),
    ("L00", "L99", "Diseases of the skin and subcutaneous tissue"),
    ("M00", "M99", "Diseases of the musculoskeletal system"),
    ("N00", "N99", "Diseases of the genitourinary system"),
    ("O00", "O9A", "Pregnancy, childbirth and the puerperium"),
    ("P00", "P96", "Certain conditions originating in the perinatal period"),
    ("Q00", "Q99", "Congenital malformations and chromosomal abnormalities"),
    ("R00", "R99", "Symptoms, signs and abnormal findings, NEC"),
    ("S00", "T88", "Injury, poisoning and other consequences of external causes"),
    ("U00", "U85", "Codes for special purposes"),
    ("V00", "Y99", "External causes of morbidity"),
    ("Z00", "Z99", "Factors influencing health status"),
)


class Taxonomy:
    """Immutable rooted concept DAG with cached counts and similarities.

    parents maps each code to its parent codes. Codes that appear only on
    the parent side are included as nodes. If several nodes are parentless
    a virtual root is inserted above them so the structure always has a
    single top concept.

    leaf_includes_self controls whether a leaf counts itself as its own
    leaf descendant (the default, which keeps leaf information content at
    the maximum of the scale). Similarities are ratios of information
    contents, so log_base only matters for reported ic values.
    """

    def __init__(
        self,
        tax_id: str,
        parents: Mapping[str, Iterable[str]],
        descriptions: Mapping[str, str] | None = None,
        leaf_includes_self: bool = True,
        log_base: float | None = None,
        cache_size: int = 1 << 20,
    ):
        self.id = tax_id
        self.leaf_includes_self = leaf_includes_self
        self.log_base = log_base

        nodes: set[str] = set(parents)
        for ps in parents.values():
            nodes.update(ps)
        if not nodes:
            raise EmptyInput(f"taxonomy {tax_id!r} has no nodes")

        parent_map: dict[str, tuple[str, ...]] = {}
        for n in nodes:
            ps = tuple(dict.fromkeys(parents.get(n, ())))
            if n in ps:
                raise CycleDetected(f"{n!r} is its own parent")
            parent_map[n] = ps

        parentless = sorted(n for n, ps in parent_map.items() if not ps)
        if not parentless:
            raise CycleDetected(f"taxonomy {tax_id!r} has no root")
        if len(parentless) == 1:
            self.root = parentless[0]
        else:
            self.root = VIRTUAL_ROOT if VIRTUAL_ROOT not in nodes else "__ROOT__"
            for n in parentless:
                parent_map[n] = (self.root,)
            parent_map[self.root] = ()
            nodes.add(self.root)

        children: dict[str, list[str]] = {n: [] for n in nodes}
        for n, ps in parent_map.items():
            for p in ps:
                children[p].append(n)
        self._parents = parent_map
        self._children = {n: tuple(sorted(cs)) for n, cs in children.items()}
        self._descriptions = dict(descriptions or {})

        # Topological order, root first. Doubles as the cycle check.
        indeg = {n: len(parent_map[n]) for n in nodes}
        queue = deque([self.root])
        topo: list[str] = []
        while queue:
            n = queue.popleft()
            topo.append(n)
            for c in self._children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if len(topo) != len(nodes):
            raise CycleDetected(f"taxonomy {tax_id!r} contains a cycle")
        self._topo = topo

        self._is_tree = all(len(ps) <= 1 for ps in parent_map.values())
        leaves = sorted(n for n in nodes if not self._children[n])
        self.max_leaves = len(leaves)
        self._leaf_desc: dict[str, int] = {}
        self._subs_count: dict[str, int] = {}

        if self._is_tree:
            for n in reversed(topo):
                cs = self._children[n]
                self._leaf_desc[n] = 1 if not cs else sum(self._leaf_desc[c] for c in cs)
            depth = {self.root: 0}
            for n in topo:
                for c in self._children[n]:
                    depth[c] = depth[n] + 1
            self._subs_count = {n: d + 1 for n, d in depth.items()}
        else:
            # Distinct-descendant counting needs sets under multiple
            # inheritance. Bitsets keep this cheap for the small DAGs
            # where multi-parent edges actually occur.
            leaf_bit = {c: 1 << i for i, c in enumerate(leaves)}
            lsets: dict[str, int] = {}
            for n in reversed(topo):
                cs = self._children[n]
                acc = leaf_bit.get(n, 0)
                for c in cs:
                    acc |= lsets[c]
                lsets[n] = acc
                self._leaf_desc[n] = acc.bit_count()
            node_bit = {n: 1 << i for i, n in enumerate(topo)}
            asets: dict[str, int] = {}
            for n in topo:
                acc = node_bit[n]
                for p in parent_map[n]:
                    acc |= asets[p]
                asets[n] = acc
                self._subs_count[n] = acc.bit_count()

        self._ic: dict[str, float] = {}
        self._sim_cached = lru_cache(maxsize=cache_size)(self._sim_pair)
        self._lcs_cached = lru_cache(maxsize=cache_size)(self._lcs_pair)

    # -- structure ---------------------------------------------------------

    def __contains__(self, code: str) -> bool:
        return code in self._parents

    def __len__(self) -> int:
        return len(self._parents)

    @property
    def nodes(self) -> Iterable[str]:
        return self._parents.keys()

    def _check(self, code: str):
        if code not in self._parents:
            raise UnknownConcept(code, self.id)

    def parents(self, code: str) -> tuple[str, ...]:
        self._check(code)
        return self._parents[code]

    def children(self, code: str) -> tuple[str, ...]:
        self._check(code)
        return self._children[code]

    def is_leaf(self, code: str) -> bool:
        self._check(code)
        return not self._children[code]

    def description(self, code: str) -> str | None:
        self._check(code)
        return self._descriptions.get(code)

    def ancestors(self, code: str, include_self: bool = True) -> tuple[str, ...]:
        """All subsumers of code, ordered upward by BFS layer then code."""
        self._check(code)
        out: list[str] = [code] if include_self else []
        seen = {code}
        frontier = [code]
        while frontier:
            layer: set[str] = set()
            for n in frontier:
                for p in self._parents[n]:
                    if p not in seen:
                        seen.add(p)
                        layer.add(p)
            frontier = sorted(layer)
            out.extend(frontier)
        return tuple(out)

    # -- information content -----------------------------------------------

    def leaf_count(self, code: str) -> int:
        """Distinct leaf descendants of code, counting code itself when it
        is a leaf unless leaf_includes_self is off."""
        self._check(code)
        if not self._children[code] and not self.leaf_includes_self:
            return 0
        return self._leaf_desc[code]

    def subsumer_count(self, code: str) -> int:
        """Distinct ancestors of code, code itself included."""
        self._check(code)
        return self._subs_count[code]

    def ic(self, code: str) -> float:
        """Intrinsic information content from leaf and subsumer counts.

        Zero at the root, maximal (log of max_leaves + 1) at leaves.
        """
        self._check(code)
        got = self._ic.get(code)
        if got is None:
            ratio = self.leaf_count(code) / self.subsumer_count(code)
            got = -math.log((ratio + 1.0) / (self.max_leaves + 1.0)) + 0.0
            if self.log_base is not None:
                got /= math.log(self.log_base)
            self._ic[code] = got
        return got

    # -- similarity ----------------------------------------------------------

    def lcs(self, c1: str, c2: str) -> str:
        """Common subsumer with maximal information content.

        Ties break to the lexicographically smallest code so results do
        not depend on traversal order.
        """
        self._check(c1)
        self._check(c2)
        if c1 == c2:
            return c1
        a, b = (c1, c2) if c1 <= c2 else (c2, c1)
        return self._lcs_cached(a, b)

    def _lcs_pair(self, a: str, b: str) -> str:
        common = set(self.ancestors(a)) & set(self.ancestors(b))
        return max(common, key=lambda c: (self.ic(c), _neg_lex(c)))

    def sim_sanchez(self, c1: str, c2: str) -> float:
        """Lin-style similarity 2*ic(lcs) / (ic(c1) + ic(c2)) in [0, 1].

        Identical codes score 1.0 by definition, which also covers the
        root-with-itself case where both contents are zero.
        """
        self._check(c1)
        self._check(c2)
        if c1 == c2:
            return 1.0
        a, b = (c1, c2) if c1 <= c2 else (c2, c1)
        return self._sim_cached(a, b)

    def _sim_pair(self, a: str, b: str) -> float:
        denom = self.ic(a) + self.ic(b)
        if denom <= 0.0:
            return 1.0
        return 2.0 * self.ic(self._lcs_cached(a, b)) / denom


def _neg_lex(code: str) -> tuple[int, ...]:
    # max() key helper: higher means lexicographically smaller.
    return tuple(-ord(ch) for ch in code)


def sim_boolean(c1: str, c2: str) -> float:
    """Exact-match similarity, the baseline alternative to sim_sanchez."""
    return 1.0 if c1 == c2 else 0.0


# -- builders ----------------------------------------------------------------


def taxonomy_from_edges(
    tax_id: str,
    edges: Iterable[tuple[str, str]],
    descriptions: Mapping[str, str] | None = None,
    **flags,
) -> Taxonomy:
    """Build a taxonomy from (child, parent) pairs. Duplicates are dropped
    with a warning."""
    parents: dict[str, list[str]] = {}
    seen: set[tuple[str, str]] = set()
    count = 0
    for child, parent in edges:
        count += 1
        if (child, parent) in seen:
            log.warning("duplicate edge (%s, %s) ignored", child, parent)
            continue
        seen.add((child, parent))
        parents.setdefault(child, []).append(parent)
    if count == 0:
        raise EmptyInput("no edges given")
    return Taxonomy(tax_id, parents, descriptions, **flags)


def load_taxonomy_tsv(path: str | Path, tax_id: str | None = None, **flags) -> Taxonomy:
    """Read child<TAB>parent[<TAB>description] lines; # starts a comment.

    A "# taxonomy: <id>" comment names the taxonomy when the caller does
    not; the filename stem is the last resort.
    """
    path = Path(path)
    edges: list[tuple[str, str]] = []
    descriptions: dict[str, str] = {}
    header_id: str | None = None
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if header_id is None and body.startswith("taxonomy:"):
                header_id = body.split(":", 1)[1].strip() or None
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3) or not parts[0] or not parts[1]:
            raise MalformedLine(line_no, f"expected child<TAB>parent, got {raw!r}")
        edges.append((parts[0], parts[1]))
        if len(parts) == 3 and parts[2]:
            descriptions[parts[0]] = parts[2]
    if not edges:
        raise EmptyFile(f"{path} has no edges")
    return taxonomy_from_edges(tax_id or header_id or path.stem, edges, descriptions, **flags)


def save_taxonomy_tsv(tax: Taxonomy, path: str | Path):
    lines = [f"# taxonomy: {tax.id}"]
    for child in sorted(tax.nodes):
        for parent in tax.parents(child):
            desc = tax.description(child)
            row = f"{child}\t{parent}" + (f"\t{desc}" if desc else "")
            lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_order_rows(data: bytes | str) -> list[tuple[int, str, bool, str, str]]:
    """Split a CMS order file into (line_no, code, billable, short, long).

    Layout is fixed-width: order number, code padded to 7 chars, a 0/1
    billable flag, then the two description columns.
    """
    if isinstance(data, bytes):
        text = data.decode("latin-1")
    else:
        text = data
    rows = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if len(line) < 16:
            raise MalformedLine(line_no, f"line too short ({len(line)} chars)")
        code = line[6:13].strip()
        flag = line[14]
        if not code or not code.isalnum():
            raise MalformedLine(line_no, f"bad code field {line[6:13]!r}")
        if flag not in "01":
            raise MalformedLine(line_no, f"bad billable flag {flag!r}")
        short = line[16:76].strip()
        long = line[77:].strip() if len(line) > 77 else ""
        rows.append((line_no, code, flag == "1", short, long or short))
    if not rows:
        raise EmptyFile("order file has no rows")
    return rows


def parse_icd10cm(
    data: bytes | str,
    tax_id: str = "icd10cm",
    with_chapters: bool = False,
    block_ranges: Iterable[tuple[str, str, str]] | None = None,
    **flags,
) -> Taxonomy:
    """Build the diagnosis taxonomy from an order file.

    Hierarchy is prefix-based: each code hangs off its longest strictly
    shorter prefix that is also a code, and 3-char categories hang off the
    root. With with_chapters, categories instead hang off chapter nodes
    derived from the standard category ranges; block_ranges optionally
    inserts a block layer of (lo, hi, block_id) spans between the two.
    """
    rows = _parse_order_rows(data)
    codes: dict[str, str] = {}
    for line_no, code, _billable, _short, long in rows:
        if code in codes:
            log.warning("duplicate code %s at line %d ignored", code, line_no)
            continue
        codes[code] = long

    blocks = tuple(block_ranges or ())
    parents: dict[str, list[str]] = {}
    descriptions = dict(codes)
    used_chapters: dict[str, str] = {}
    used_blocks: set[str] = set()

    def chapter_of(cat: str) -> str | None:
        for lo, hi, title in ICD10CM_CHAPTERS:
            if lo <= cat <= hi:
                cid = f"{lo}-{hi}"
                used_chapters[cid] = title
                return cid
        return None

    def block_of(cat: str) -> str | None:
        for lo, hi, bid in blocks:
            if lo <= cat <= hi:
                used_blocks.add(bid)
                return bid
        return None

    for code in codes:
        if len(code) == 3:
            parent = None
            if blocks:
                parent = block_of(code)
            if parent is None and with_chapters:
                parent = chapter_of(code)
            parents[code] = [parent or VIRTUAL_ROOT]
        else:
            for cut in range(len(code) - 1, 2, -1):
                prefix = code[:cut]
                if prefix in codes:
                    parents[code] = [prefix]
                    break
            else:
                log.warning("code %s has no prefix ancestor, attaching to root", code)
                parents[code] = [VIRTUAL_ROOT]

    if blocks:
        for lo, hi, bid in blocks:
            if bid in used_blocks:
                parent = chapter_of(lo) if with_chapters else None
                parents[bid] = [parent or VIRTUAL_ROOT]
    for cid, title in used_chapters.items():
        parents.setdefault(cid, [VIRTUAL_ROOT])
        descriptions[cid] = title
    parents[VIRTUAL_ROOT] = []

    return Taxonomy(tax_id, parents, descriptions, **flags)


def parse_icd10pcs(data: bytes | str, tax_id: str = "icd10pcs", **flags) -> Taxonomy:
    """Build the procedure taxonomy from an order file.

    Every code is exactly 7 characters and becomes a leaf under the chain
    of its prefixes, with 1-char prefixes at the top.
    """
    rows = _parse_order_rows(data)
    parents: dict[str, list[str]] = {}
    descriptions: dict[str, str] = {}
    for line_no, code, _billable, _short, long in rows:
        if len(code) != 7:
            raise CodeLengthNot7(line_no, f"code {code!r} is not 7 chars")
        if code in descriptions:
            log.warning("duplicate code %s at line %d ignored", code, line_no)
            continue
        descriptions[code] = long
        for cut in range(len(code), 1, -1):
            child, parent = code[:cut], code[: cut - 1]
            if child in parents:
                break
            parents[child] = [parent]
        parents.setdefault(code[:1], [VIRTUAL_ROOT])
    parents[VIRTUAL_ROOT] = []
    return Taxonomy(tax_id, parents, descriptions, **flags)


def load_icd10cm_order(path: str | Path, **kwargs) -> Taxonomy:
    return parse_icd10cm(Path(path).read_bytes(), **kwargs)


def load_icd10pcs_order(path: str | Path, **kwargs) -> Taxonomy:
    return parse_icd10pcs(Path(path).read_bytes(), **kwargs)


def load_taxonomy_auto(path: str | Path, tax_id: str | None = None, **flags) -> Taxonomy:
    """Load a taxonomy file, sniffing its format.

    Tab characters mean the generic TSV edge list; otherwise the file is
    a fixed-width order file, procedure-flavored when every code is 7
    chars and diagnosis-flavored when shorter codes appear.
    """
    path = Path(path)
    data = path.read_bytes()
    head = ""
    for raw in data.splitlines():
        line = raw.decode("latin-1")
        if line.strip():
            head = line
            break
    # comments only exist in the TSV dialect; order files never start with #
    if "\t" in head or head.lstrip().startswith("#"):
        return load_taxonomy_tsv(path, tax_id=tax_id, **flags)
    rows = _parse_order_rows(data)
    tax_id = tax_id or path.stem
    if all(len(code) == 7 for _, code, _, _, _ in rows):
        return parse_icd10pcs(data, tax_id=tax_id, **flags)
    return parse_icd10cm(data, tax_id=tax_id, **flags)
