"""Set partitions, pairwise queries, and the aggregated knowledge graph.

The aggregated graph is the state of an active-clustering run: positive
answers merge items into super-vertices, negative answers add edges between
super-vertices.  The run is over exactly when the negative edges form a
complete graph on the super-vertices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class RedundantQueryError(ValueError):
    """The queried pair's relation is already known to the graph."""


class ContradictionError(ValueError):
    """A positive answer arrived across an existing negative edge.

    The graph is left untouched; callers working with noisy oracles hand the
    offending answer to the noise machinery instead of applying it.
    """


@dataclass(frozen=True)
class Partition:
    """A grouping of items 0..n-1 into disjoint non-empty blocks."""

    blocks: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for block in self.blocks:
            if not block:
                raise ValueError("empty block")
            if block & seen:
                raise ValueError("blocks overlap")
            seen |= block
        if seen and seen != set(range(len(seen))):
            raise ValueError("items must cover 0..n-1 without gaps")

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "Partition":
        # canonical order: by smallest member, so equality is structural
        frozen = sorted((frozenset(b) for b in blocks), key=min)
        return cls(tuple(frozen))

    @classmethod
    def from_assignment(cls, labels: Iterable[int]) -> "Partition":
        groups: dict[int, set[int]] = {}
        for item, lab in enumerate(labels):
            groups.setdefault(lab, set()).add(item)
        return cls.from_blocks(groups.values())

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def b(self) -> int:
        return len(self.blocks)

    def block_of(self, item: int) -> frozenset[int]:
        for block in self.blocks:
            if item in block:
                return block
        raise KeyError(item)

    def assignment(self) -> list[int]:
        labels = [0] * self.n
        for i, block in enumerate(self.blocks):
            for item in block:
                labels[item] = i
        return labels

    def same_block(self, u: int, v: int) -> bool:
        return self.block_of(u) is self.block_of(v)


@dataclass(frozen=True)
class Query:
    u: int
    v: int

    def __post_init__(self) -> None:
        if self.u == self.v:
            raise ValueError("query endpoints must differ")

    def pair(self) -> tuple[int, int]:
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)


@dataclass(frozen=True)
class Answer:
    query: Query
    positive: bool
    t: int


@dataclass
class QueryLog:
    """Ordered record of answers; serialized as JSON lines."""

    n: int
    answers: list[Answer] = field(default_factory=list)

    def append(self, query: Query, positive: bool) -> Answer:
        ans = Answer(query, positive, len(self.answers))
        self.answers.append(ans)
        return ans

    def __len__(self) -> int:
        return len(self.answers)

    def __iter__(self) -> Iterator[Answer]:
        return iter(self.answers)

    def dumps(self) -> str:
        lines = []
        for a in self.answers:
            lines.append(json.dumps(
                {"t": a.t, "u": a.query.u, "v": a.query.v, "positive": a.positive}
            ))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def loads(cls, text: str, n: int) -> "QueryLog":
        log = cls(n)
        last_t = -1
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec["t"] <= last_t:
                raise ValueError("timestamps must be strictly increasing")
            last_t = rec["t"]
            log.answers.append(
                Answer(Query(rec["u"], rec["v"]), bool(rec["positive"]), rec["t"])
            )
        return log


class AggregatedGraph:
    """Disjoint-set over items plus negative edges between super-vertices.

    Representative of a super-vertex is its smallest member id.  Negative
    edges are stored on current representatives and re-canonicalized when a
    merge changes a representative; duplicates collapse silently.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one item")
        self.n = n
        self._parent = list(range(n))
        self._size = [1] * n
        self._min = list(range(n))
        # rep -> set of neighbouring reps (negative edges)
        self._neg: dict[int, set[int]] = {}
        self._sv_count = n
        self._neg_count = 0

    def find(self, item: int) -> int:
        root = item
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[item] != root:
            self._parent[item], item = root, self._parent[item]
        return self._min[root]

    def _root(self, item: int) -> int:
        root = item
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[item] != root:
            self._parent[item], item = root, self._parent[item]
        return root

    @property
    def supervertex_count(self) -> int:
        return self._sv_count

    def supervertices(self) -> list[int]:
        reps = {self.find(i) for i in range(self.n)}
        return sorted(reps)

    def members(self, rep: int) -> list[int]:
        rep = self.find(rep)
        return [i for i in range(self.n) if self.find(i) == rep]

    def size_of(self, item: int) -> int:
        return self._size[self._root(item)]

    def has_negative_edge(self, u: int, v: int) -> bool:
        ru, rv = self.find(u), self.find(v)
        return rv in self._neg.get(ru, ())

    def relation_known(self, u: int, v: int) -> bool:
        ru, rv = self.find(u), self.find(v)
        return ru == rv or rv in self._neg.get(ru, ())

    def negative_edges(self) -> set[tuple[int, int]]:
        edges = set()
        for ru, nbrs in self._neg.items():
            for rv in nbrs:
                if ru < rv:
                    edges.add((ru, rv))
        return edges

    def negative_neighbors(self, u: int) -> set[int]:
        return set(self._neg.get(self.find(u), ()))

    @property
    def negative_edge_count(self) -> int:
        return self._neg_count

    def apply_answer(self, answer: Answer) -> "AggregatedGraph":
        q = answer.query
        ru, rv = self.find(q.u), self.find(q.v)
        if ru == rv:
            raise RedundantQueryError(f"{q.u} and {q.v} share a super-vertex")
        negative_known = rv in self._neg.get(ru, ())
        if answer.positive:
            if negative_known:
                raise ContradictionError(
                    f"positive answer across negative edge ({ru},{rv})"
                )
            self._merge(ru, rv)
        else:
            if negative_known:
                raise RedundantQueryError(f"negative edge ({ru},{rv}) already known")
            self._neg.setdefault(ru, set()).add(rv)
            self._neg.setdefault(rv, set()).add(ru)
            self._neg_count += 1
        return self

    def _merge(self, ru: int, rv: int) -> None:
        root_u, root_v = self._root(ru), self._root(rv)
        if self._size[root_u] < self._size[root_v]:
            root_u, root_v = root_v, root_u
        self._parent[root_v] = root_u
        self._size[root_u] += self._size[root_v]
        old_u, old_v = self._min[root_u], self._min[root_v]
        new_min = min(old_u, old_v)
        self._min[root_u] = new_min
        self._sv_count -= 1
        # re-key both old adjacency sets under the merged representative;
        # edges the two sides shared collapse into one
        nbrs_u = self._neg.pop(old_u, set())
        nbrs_v = self._neg.pop(old_v, set())
        self._neg_count -= len(nbrs_u & nbrs_v)
        for w in nbrs_u:
            self._neg[w].discard(old_u)
        for w in nbrs_v:
            self._neg[w].discard(old_v)
        merged = nbrs_u | nbrs_v
        for w in merged:
            self._neg[w].add(new_min)
        if merged:
            self._neg[new_min] = merged

    def is_resolved(self) -> bool:
        m = self._sv_count
        return self._neg_count == m * (m - 1) // 2

    def partition(self) -> Partition:
        groups: dict[int, set[int]] = {}
        for i in range(self.n):
            groups.setdefault(self.find(i), set()).add(i)
        return Partition.from_blocks(groups.values())

    def copy(self) -> "AggregatedGraph":
        g = AggregatedGraph(self.n)
        g._parent = list(self._parent)
        g._size = list(self._size)
        g._min = list(self._min)
        g._neg = {k: set(v) for k, v in self._neg.items()}
        g._sv_count = self._sv_count
        g._neg_count = self._neg_count
        return g


def new_aggregated_graph(n: int) -> AggregatedGraph:
    return AggregatedGraph(n)


def replay(log: QueryLog) -> AggregatedGraph:
    """Rebuild the unique aggregated graph a contradiction-free log encodes."""
    g = AggregatedGraph(log.n)
    for ans in log:
        g.apply_answer(ans)
    return g


def count_realizations(g: AggregatedGraph, limit: int = 12) -> int:
    """Number of partitions consistent with the graph.

    A consistent partition groups super-vertices so that no negative edge
    lies inside a block; each such grouping lifts to exactly one partition of
    the original items.  Exhaustive backtracking; the limit guards against
    accidental large inputs.
    """
    reps = g.supervertices()
    if len(reps) > limit:
        raise ValueError(f"{len(reps)} super-vertices exceeds limit {limit}")
    forbidden = {rep: g.negative_neighbors(rep) for rep in reps}

    blocks: list[set[int]] = []

    def assign(i: int) -> int:
        if i == len(reps):
            return 1
        rep = reps[i]
        total = 0
        for block in blocks:
            if not (block & forbidden[rep]):
                block.add(rep)
                total += assign(i + 1)
                block.remove(rep)
        blocks.append({rep})
        total += assign(i + 1)
        blocks.pop()
        return total

    return assign(0)


def iter_partitions(n: int) -> Iterator[Partition]:
    """All partitions of {0..n-1} in restricted-growth-string order."""
    if n == 0:
        yield Partition(())
        return
    labels = [0] * n

    def rec(i: int, used: int) -> Iterator[Partition]:
        if i == n:
            yield Partition.from_assignment(labels)
            return
        for lab in range(used + 1):
            labels[i] = lab
            yield from rec(i + 1, used + (1 if lab == used else 0))

    yield from rec(1, 1)
