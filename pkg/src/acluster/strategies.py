"""Query-selection strategies over the aggregated graph.

A strategy is a pure function of the current graph (plus an RNG stream for
the randomized ones) returning the next pair to ask, or None when the graph
is resolved.  Keeping strategies stateless makes replay trivial: rebuild the
graph from a log and ask for the next query.

The safe strategies only ask pairs whose negative outcome keeps the negative
graph chordal.  For non-adjacent supervertices u, v that holds exactly when
the common negative neighborhood N(u) & N(v) separates u from v; the merge
outcome preserves chordality under the same condition.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .partition import AggregatedGraph, Partition, Query, QueryLog, new_aggregated_graph

NextQuery = Callable[[AggregatedGraph, np.random.Generator], Optional[Query]]

CORE = "core"
EXCESSIVE = "excessive"
PRODUCTIVE = "productive"


def preserves_chordality(g: AggregatedGraph, u: int, v: int) -> bool:
    """True when both outcomes of querying supervertices u, v keep chordality.

    u and v must be distinct supervertex representatives with no edge between
    them.  Criterion: every negative path from u to v passes through a common
    neighbor, checked by a BFS that avoids N(u) & N(v).
    """
    blocked = g.negative_neighbors(u) & g.negative_neighbors(v)
    seen = {u} | blocked
    frontier = deque([u])
    while frontier:
        x = frontier.popleft()
        for y in g.negative_neighbors(x):
            if y == v:
                return False
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return True


def is_chordal_adjacency(adj: dict[int, set[int]]) -> bool:
    """Maximum cardinality search plus perfect elimination order check."""
    vertices = list(adj)
    if len(vertices) <= 2:
        return True
    weight = {v: 0 for v in vertices}
    order: list[int] = []
    numbered: set[int] = set()
    for _ in range(len(vertices)):
        x = max((v for v in vertices if v not in numbered), key=lambda v: (weight[v], -v))
        order.append(x)
        numbered.add(x)
        for y in adj[x]:
            if y not in numbered:
                weight[y] += 1
    order.reverse()  # elimination order: reverse of MCS numbering
    position = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [w for w in adj[v] if position[w] > position[v]]
        if not later:
            continue
        first = min(later, key=position.get)
        rest = set(later) - {first}
        if not rest <= adj[first]:
            return False
    return True


def is_chordal(g: AggregatedGraph) -> bool:
    reps = g.supervertices()
    return is_chordal_adjacency({r: g.negative_neighbors(r) for r in reps})


def unknown_supervertex_pairs(g: AggregatedGraph) -> list[tuple[int, int]]:
    reps = g.supervertices()
    return [
        (reps[i], reps[j])
        for i in range(len(reps))
        for j in range(i + 1, len(reps))
        if not g.has_negative_edge(reps[i], reps[j])
    ]


def clique_next(g: AggregatedGraph, rng: np.random.Generator) -> Optional[Query]:
    """Insert items one by one, comparing against known blocks largest-first.

    Item i is placed once it merged below itself or is negative to every
    block formed by items 0..i-1.  Ties on block size go to the lowest
    representative.
    """
    if g.is_resolved():
        return None
    n = g.n
    for i in range(1, n):
        rep = g.find(i)
        if rep < i:
            continue  # merged with an earlier item
        block_reps = sorted({g.find(j) for j in range(i)})
        nbrs = g.negative_neighbors(rep)
        targets = [r for r in block_reps if r not in nbrs]
        if not targets:
            continue  # negative to every existing block: placed as a new block
        target = max(targets, key=lambda r: (g.size_of(r), -r))
        return Query(target, i)
    return None


def universal_next(g: AggregatedGraph, rng: np.random.Generator) -> Optional[Query]:
    """Pivot rounds: the largest unfinished label asks every remaining item.

    When the pivot knows its relation to all remaining items, its block is
    set aside and the next round starts on what is left.
    """
    if g.is_resolved():
        return None
    remaining = set(range(g.n))
    while len(remaining) > 1:
        pivot = max(remaining)
        prep = g.find(pivot)
        pivot_members = set(g.members(prep))
        nbrs = g.negative_neighbors(prep)
        for v in sorted(remaining):
            if v in pivot_members:
                continue
            if g.find(v) in nbrs:
                continue
            return Query(v, pivot)
        remaining -= pivot_members
    return None


def chordal_any_next(g: AggregatedGraph, rng: np.random.Generator) -> Optional[Query]:
    """Uniform choice among the supervertex pairs that preserve chordality."""
    if g.is_resolved():
        return None
    pairs = unknown_supervertex_pairs(g)
    safe = [p for p in pairs if preserves_chordality(g, *p)]
    if not safe:
        safe = pairs  # unreachable from a chordal state; degrade gracefully
    u, v = safe[rng.integers(len(safe))]
    return Query(u, v)


def random_next(g: AggregatedGraph, rng: np.random.Generator) -> Optional[Query]:
    """Uniform choice among unknown supervertex pairs, chordal or not."""
    if g.is_resolved():
        return None
    pairs = unknown_supervertex_pairs(g)
    u, v = pairs[rng.integers(len(pairs))]
    return Query(u, v)


STRATEGIES: dict[str, NextQuery] = {
    "clique": clique_next,
    "universal": universal_next,
    "chordal-any": chordal_any_next,
    "random": random_next,
}

CHORDAL_STRATEGIES = ("clique", "universal", "chordal-any")


def classify_query(g: AggregatedGraph, query: Query, positive: bool) -> str:
    """Taxonomy of a query given the graph state at ask time.

    Positive answers are core.  A negative answer is excessive when the two
    supervertices were already joined by an induced negative path on an even
    number of vertices (endpoints included); otherwise it is productive.
    """
    if positive:
        return CORE
    a, b = g.find(query.u), g.find(query.v)
    if _has_even_induced_path(g, a, b):
        return EXCESSIVE
    return PRODUCTIVE


def _has_even_induced_path(g: AggregatedGraph, a: int, b: int) -> bool:
    """DFS over induced paths from a to b, looking for even vertex count."""
    adj = {r: g.negative_neighbors(r) for r in g.supervertices()}

    def extend(path: list[int], on_path: set[int]) -> bool:
        tail = path[-1]
        # the next vertex may touch only the tail, else the path has a chord
        banned = on_path - {tail}
        for y in adj[tail]:
            if y in on_path:
                continue
            if adj[y] & banned:
                continue
            if y == b:
                if (len(path) + 1) % 2 == 0:
                    return True
                continue
            path.append(y)
            on_path.add(y)
            if extend(path, on_path):
                return True
            path.pop()
            on_path.remove(y)
        return False

    if b in adj[a]:
        return True  # direct edge is a two-vertex induced path
    return extend([a], {a})


@dataclass
class RunStats:
    """Outcome of one complete run against a clean oracle.

    core always equals the number of positive answers; the split of the
    negatives into productive and excessive is filled in only when the run
    was asked to classify, otherwise both stay zero.
    """

    n: int
    strategy: str
    queries: int
    core: int
    productive: int
    excessive: int
    result: Partition
    log: QueryLog | None = None


def run(
    n: int,
    strategy: str | NextQuery,
    oracle: Callable[[int, int], bool],
    rng: np.random.Generator | None = None,
    classify: bool = False,
    keep_log: bool = False,
) -> RunStats:
    """Drive a strategy to resolution and tally the query taxonomy."""
    next_query = STRATEGIES[strategy] if isinstance(strategy, str) else strategy
    name = strategy if isinstance(strategy, str) else getattr(strategy, "__name__", "custom")
    if rng is None:
        rng = np.random.default_rng()
    g = new_aggregated_graph(n)
    log = QueryLog(n, [])
    tally = {CORE: 0, PRODUCTIVE: 0, EXCESSIVE: 0}
    budget = 10 * math.comb(n, 2) + 10
    while not g.is_resolved():
        q = next_query(g, rng)
        if q is None:
            raise RuntimeError("strategy returned no query before resolution")
        positive = oracle(q.u, q.v)
        if classify:
            tally[classify_query(g, q, positive)] += 1
        elif positive:
            tally[CORE] += 1
        g.apply_answer(log.append(q, positive))
        if len(log) > budget:
            raise RuntimeError("query budget exceeded; strategy is looping")
    return RunStats(
        n=n,
        strategy=name,
        queries=len(log),
        core=tally[CORE],
        productive=tally[PRODUCTIVE],
        excessive=tally[EXCESSIVE],
        result=g.partition(),
        log=log if keep_log else None,
    )
