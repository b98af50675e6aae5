"""Order-aware maximum-weight bipartite matching between coded sequences.

Two positioned code sequences form a complete bipartite graph. Each edge
weight is the code similarity damped by 0.5 ** |position difference|, so
aligned occurrences dominate and far-apart ones barely count. The solver
is an exact Hungarian assignment in O(n^2 * m) with deterministic
tie-breaking (lowest left index, then lowest right index).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import EmptyInput

Positioned = tuple[str, int]  # (code, 1-based position)


@dataclass(frozen=True)
class WeightedBipartiteGraph:
    left: tuple[Positioned, ...]
    right: tuple[Positioned, ...]
    weights: tuple[tuple[float, ...], ...]  # weights[i][j], left i to right j


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]  # (left index, right index), sorted
    total_weight: float


def order_weight(pos_u: int, pos_v: int) -> float:
    """Positional damping factor 0.5 ** |pos_u - pos_v|."""
    return 0.5 ** abs(pos_u - pos_v)


def build_graph(
    left: Sequence[Positioned],
    right: Sequence[Positioned],
    sim: Callable[[str, str], float],
) -> WeightedBipartiteGraph:
    """Complete bipartite graph weighted by sim(code, code) * order factor."""
    if not left or not right:
        raise EmptyInput("both sides of the graph need at least one element")
    weights = tuple(
        tuple(sim(cu, cv) * order_weight(pu, pv) for cv, pv in right)
        for cu, pu in left
    )
    return WeightedBipartiteGraph(tuple(left), tuple(right), weights)


def max_weight_matching(graph: WeightedBipartiteGraph) -> Matching:
    """Exact maximum-weight matching of the complete bipartite graph.

    Pairs whose weight is zero are dropped from the result; they carry no
    weight, so the total is unaffected and downstream explanations stay
    free of meaningless alignments.
    """
    n, m = len(graph.left), len(graph.right)
    if n <= m:
        assign = _hungarian([[-w for w in row] for row in graph.weights], n, m)
        pairs = [(i, j) for i, j in assign]
    else:
        transposed = [[-graph.weights[i][j] for i in range(n)] for j in range(m)]
        assign = _hungarian(transposed, m, n)
        pairs = [(j, i) for i, j in assign]
    kept = sorted((i, j) for i, j in pairs if graph.weights[i][j] > 0.0)
    total = sum(graph.weights[i][j] for i, j in kept)
    return Matching(tuple(kept), total)


def _hungarian(cost: list[list[float]], n: int, m: int) -> list[tuple[int, int]]:
    """Minimum-cost assignment of n rows to m columns, n <= m.

    Classic potentials formulation: rows are inserted one at a time and
    the shortest augmenting path over reduced costs is found by scanning
    columns in index order, which fixes the tie-break deterministically.
    """
    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    way = [0] * (m + 1)
    p = [0] * (m + 1)  # p[j] = row (1-based) matched to column j
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    return [(p[j] - 1, j - 1) for j in range(1, m + 1) if p[j]]
