"""Contradiction detection, answer repair, and redundant-query planning.

A signed graph stores raw answers, one record per query, so the same pair can
carry several records.  A contradiction is either a pair answered both ways
or a negative edge inside a positive component; repair localizes the single
wrong answer on a shortest contradictory cycle by binary search with fresh
queries.  The planner shapes each positive component during discovery as a
degree-limited tree whose finalization closes it into a two-edge-connected
graph with bounded face size, at a cost of about one extra query per 3r + 2
items plus one per block.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from math import ceil, comb, log2
from typing import Callable, Iterable, Optional, Sequence

import networkx as nx

from .oracles import NoiseModel, flaky_oracle
from .partition import Partition

Pair = tuple[int, int]
AskFn = Callable[[int, int], bool]


def _pair(u: int, v: int) -> Pair:
    if u == v:
        raise ValueError("self-pair")
    return (u, v) if u < v else (v, u)


@dataclass
class AnswerRecord:
    u: int
    v: int
    positive: bool
    t: int
    repair: bool = False

    def to_json_dict(self) -> dict:
        out = {"t": self.t, "u": self.u, "v": self.v, "positive": self.positive}
        if self.repair:
            out["repair"] = True
        return out


class SignedGraph:
    """Raw signed answers over n items, conflicts kept until repaired.

    The effective sign of a pair is its repaired sign if one was set, else
    the unanimous sign of its records.  Pairs whose records disagree are
    conflicted and excluded from both subgraphs until a repair resolves them.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.records: list[AnswerRecord] = []
        self._votes: dict[Pair, list[bool]] = {}

    @classmethod
    def from_answers(cls, n: int, answers: Iterable) -> "SignedGraph":
        g = cls(n)
        for a in answers:
            if hasattr(a, "query"):
                g.add(a.query.u, a.query.v, a.positive)
            else:
                u, v, positive = a
                g.add(u, v, positive)
        return g

    def add(self, u: int, v: int, positive: bool, repair: bool = False) -> AnswerRecord:
        pair = _pair(u, v)
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError("endpoint out of range")
        rec = AnswerRecord(u, v, bool(positive), len(self.records), repair)
        self.records.append(rec)
        # repair probes are transcript-only; the flip arrives via resolve()
        if not repair:
            self._votes.setdefault(pair, []).append(bool(positive))
        return rec

    def resolve(self, u: int, v: int, positive: bool) -> None:
        """Replace a pair's history with a repaired, double-weight sign.

        A resolution is not final: a later answer that disagrees reopens
        the pair as a conflict, so no wrong verdict can freeze in.
        """
        self._votes[_pair(u, v)] = [bool(positive), bool(positive)]

    def conflicted_pairs(self) -> list[Pair]:
        return [p for p, votes in self._votes.items() if len(set(votes)) > 1]

    def sign_map(self) -> dict[Pair, bool]:
        """Effective sign per pair; conflicted pairs are omitted."""
        return {
            p: votes[0]
            for p, votes in self._votes.items()
            if len(set(votes)) == 1
        }

    def current_sign(self, u: int, v: int) -> Optional[bool]:
        return self.sign_map().get(_pair(u, v))

    def pair_multiplicity(self) -> dict[Pair, int]:
        """Concordant record count per pair.

        Repeated same-pair answers act as parallel edges: flipping any one
        of them is detectable as a conflict, so multiplicity contributes to
        robustness the same way distinct parallel pairs do.
        """
        return {
            p: len(votes)
            for p, votes in self._votes.items()
            if len(set(votes)) == 1
        }

    def positive_components(self) -> list[list[int]]:
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (a, b), sign in self.sign_map().items():
            if sign:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
        groups = defaultdict(list)
        for x in range(self.n):
            groups[find(x)].append(x)
        return sorted(groups.values())

    def to_partition(self) -> Partition:
        return Partition.from_blocks(self.positive_components())

    def copy(self) -> "SignedGraph":
        g = SignedGraph(self.n)
        g.records = [AnswerRecord(r.u, r.v, r.positive, r.t, r.repair)
                     for r in self.records]
        g._votes = {p: list(v) for p, v in self._votes.items()}
        return g

    def with_flipped_record(self, index: int) -> "SignedGraph":
        """A copy in which one recorded answer arrived inverted."""
        g = SignedGraph(self.n)
        for i, r in enumerate(self.records):
            positive = (not r.positive) if i == index else r.positive
            g.add(r.u, r.v, positive, r.repair)
        return g


@dataclass(frozen=True)
class ContradictoryCycle:
    """All-positive path between the endpoints of one negative edge.

    vertices[0] and vertices[-1] carry the negative sign; consecutive
    vertices carry positive signs.  A two-vertex cycle is the degenerate
    case of one pair answered both ways.
    """

    vertices: tuple[int, ...]
    negative: Pair

    @property
    def length(self) -> int:
        return len(self.vertices)

    @property
    def degenerate(self) -> bool:
        return self.length == 2 and _pair(*self.vertices) == self.negative


def _shortest_cycle(n: int, signs: dict[Pair, bool]) -> Optional[ContradictoryCycle]:
    adj = defaultdict(list)
    negatives = []
    for (a, b), sign in signs.items():
        if sign:
            adj[a].append(b)
            adj[b].append(a)
        else:
            negatives.append((a, b))
    # component labels prune the negative edges worth a BFS
    comp = {}
    for start in adj:
        if start in comp:
            continue
        comp[start] = start
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in comp:
                    comp[y] = start
                    queue.append(y)
    best: Optional[tuple[int, ...]] = None
    best_neg: Optional[Pair] = None
    for a, b in negatives:
        if comp.get(a, a) != comp.get(b, b) or (a not in comp):
            continue
        # BFS shortest positive path a..b, cut off once beaten
        limit = len(best) if best is not None else n + 1
        prev = {a: a}
        queue = deque([(a, 1)])
        found = None
        while queue:
            x, depth = queue.popleft()
            if depth >= limit:
                break
            for y in adj[x]:
                if y in prev:
                    continue
                prev[y] = x
                if y == b:
                    found = depth + 1
                    queue.clear()
                    break
                queue.append((y, depth + 1))
        if found is not None and (best is None or found < len(best)):
            path = [b]
            while path[-1] != a:
                path.append(prev[path[-1]])
            best = tuple(reversed(path))
            best_neg = (a, b)
    if best is None:
        return None
    return ContradictoryCycle(best, _pair(*best_neg))


def detect_contradiction(g: SignedGraph) -> Optional[ContradictoryCycle]:
    """Shortest contradictory cycle, or None for a consistent graph.

    A conflicted pair is a length-2 cycle and always shortest; otherwise the
    length is 1 + the positive-graph BFS distance between the endpoints of
    some negative edge, minimized over negative edges.
    """
    conflicts = g.conflicted_pairs()
    if conflicts:
        pair = min(conflicts)
        return ContradictoryCycle(pair, pair)
    return _shortest_cycle(g.n, g.sign_map())


class RepairBudgetError(RuntimeError):
    """Repair exceeded its query budget; escalate to offline clustering."""


@dataclass
class RepairTranscript:
    queries: list[tuple[int, int, bool]]
    flipped: Pair
    new_sign: bool

    @property
    def cost(self) -> int:
        return len(self.queries)


def repair_budget(cycle_length: int) -> int:
    return 4 * ceil(log2(max(cycle_length, 2))) + 8


def repair(
    g: SignedGraph,
    cycle: ContradictoryCycle,
    ask: AskFn,
    budget: Optional[int] = None,
) -> RepairTranscript:
    """Localize and flip the one wrong answer on a contradictory cycle.

    Each localization decision is a best-of-three vote of fresh queries, so
    a single flaky fresh answer cannot misdirect the search; 3(1 + ceil(log2
    L)) queries always fit the default budget.  Asking the negative pair
    decides whether the error is the negative edge itself; otherwise binary
    search over path prefixes pins the wrong positive edge: a negative on
    (w0, wj) means the single error lies among the first j positive edges.
    """
    if budget is None:
        budget = repair_budget(cycle.length)
    used = 0
    transcript: list[tuple[int, int, bool]] = []

    def fresh(a: int, b: int) -> bool:
        nonlocal used
        if used >= budget:
            raise RepairBudgetError(
                f"repair exceeded {budget} queries on a cycle of length {cycle.length}"
            )
        used += 1
        ans = bool(ask(a, b))
        g.add(a, b, ans, repair=True)
        transcript.append((a, b, ans))
        return ans

    def decide(a: int, b: int) -> bool:
        first, second = fresh(a, b), fresh(a, b)
        if first == second:
            return first
        return fresh(a, b)

    if cycle.degenerate:
        u, v = cycle.vertices
        sign = decide(u, v)
        g.resolve(u, v, sign)
        return RepairTranscript(transcript, _pair(u, v), sign)

    w = cycle.vertices
    k = len(w) - 1
    if decide(w[0], w[k]):
        # the path is clean, so the recorded negative answer was the error
        g.resolve(w[0], w[k], True)
        return RepairTranscript(transcript, _pair(w[0], w[k]), True)
    lo, hi = 0, k
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if decide(w[0], w[mid]):
            lo = mid
        else:
            hi = mid
    g.resolve(w[hi - 1], w[hi], False)
    return RepairTranscript(transcript, _pair(w[hi - 1], w[hi]), False)


# ---------------------------------------------------------------------------
# robustness verification and counting


def verify_k_robust(g: SignedGraph, k: int) -> bool:
    """Whether every error set of size <= k is detectable.

    Each positive component must be (k+1)-edge-connected, checked by max
    flow from a fixed root to every other member with record multiplicity
    as capacity (singletons are exempt), and every pair of components must
    carry at least k+1 negative answers.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if detect_contradiction(g) is not None:
        raise ValueError("graph has an unrepaired contradiction")
    signs = g.sign_map()
    mult = g.pair_multiplicity()
    flow = nx.DiGraph()
    pos = nx.Graph()
    pos.add_nodes_from(range(g.n))
    for (a, b), sign in signs.items():
        if sign:
            pos.add_edge(a, b)
            flow.add_edge(a, b, capacity=mult[(a, b)])
            flow.add_edge(b, a, capacity=mult[(a, b)])
    comps = sorted(sorted(c) for c in nx.connected_components(pos))
    for comp in comps:
        if len(comp) < 2:
            continue
        root = comp[0]
        for v in comp[1:]:
            if nx.maximum_flow_value(flow, root, v) < k + 1:
                return False
    comp_of = {}
    for i, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = i
    cross: dict[tuple[int, int], int] = defaultdict(int)
    for (a, b), sign in signs.items():
        if not sign:
            ca, cb = comp_of[a], comp_of[b]
            cross[(min(ca, cb), max(ca, cb))] += mult[(a, b)]
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            if cross[(i, j)] < k + 1:
                return False
    return True


def min_queries_k_robust(n: int, b: int, k: int) -> int:
    """(k+1)(C(b,2) + n/2), ceiled.

    A degree lower bound for k-robust query graphs without size-1 blocks.
    For k = 0 it can fall below the n - 1 answers any spanning structure
    needs, so its informative regime is k >= 1; the value is returned as
    stated either way.
    """
    if n < 1 or b < 1 or k < 0:
        raise ValueError("need n >= 1, b >= 1, k >= 0")
    return ((k + 1) * (2 * comb(b, 2) + n) + 1) // 2


def c2_bound(n: int, r: int, r_prime: Optional[int] = None) -> float:
    """C(r'+1, 2) * 3n/(3r+2): pair-switch capacity of the planned layout."""
    if r < 1:
        raise ValueError("r must be positive")
    rp = r if r_prime is None else r_prime
    if rp < 1:
        raise ValueError("r' must be positive")
    return comb(rp + 1, 2) * 3.0 * n / (3 * r + 2)


def count_switchable_sets(g: SignedGraph, k: int, limit: int = 64) -> int:
    """d_k: sets of k recorded pairs whose sign flip leaves no contradiction.

    Exact enumeration, so the pair count is capped.  d_0 is 0 for a
    contradiction-free graph by convention.
    """
    if k not in (0, 1, 2):
        raise ValueError("only k <= 2 is enumerated")
    if detect_contradiction(g) is not None:
        raise ValueError("graph has an unrepaired contradiction")
    if k == 0:
        return 0
    signs = g.sign_map()
    pairs = sorted(signs)
    if len(pairs) > limit:
        raise ValueError(f"too many recorded pairs ({len(pairs)} > {limit})")

    def clean(flipped: tuple[Pair, ...]) -> bool:
        trial = dict(signs)
        for p in flipped:
            trial[p] = not trial[p]
        return _shortest_cycle(g.n, trial) is None

    if k == 1:
        return sum(clean((p,)) for p in pairs)
    total = 0
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            total += clean((pairs[i], pairs[j]))
    return total


# ---------------------------------------------------------------------------
# redundancy planning


@dataclass(frozen=True)
class RedundancyPlan:
    """Layout parameters: 2-paths near r, cycle faces capped near r_prime."""

    r: int
    r_prime: Optional[int] = None

    def __post_init__(self) -> None:
        if self.r < 2:
            raise ValueError("r must be at least 2")
        if self.r_prime is not None and self.r_prime < self.r:
            raise ValueError("r' cannot undercut r")

    @property
    def period(self) -> int:
        # items per repeating unit: branch, r rung internals, the opposite
        # rail vertex, r rail internals there, r rail internals back home
        return 3 * self.r + 2


class BlockTree:
    """One positive component grown as a subdivided-ladder spanning tree.

    Members join at the current growth tip, cycling through rail-1 stretches
    and pendant teeth (a rung plus a stretch of the second rail).  The tree
    keeps every degree at most 3; rail stretches between branch vertices
    have length r + 1 and each pendant tooth is a run of at most 2r + 1
    edges.  closure_queries() lists the positive re-asks that turn the tree
    into a 2-edge-connected graph, counting a repeated pair as parallel
    edges: each tooth tip hooks onto the next tooth's far-rail vertex and
    one master closure spans rail 1, about size/(3r+2) + 1 queries in
    total.  Closures can lift a few boundary vertices past degree 3.
    """

    def __init__(self, root: int, plan: RedundancyPlan):
        self.plan = plan
        self.members = [root]
        self.degree = {root: 0}
        self.join_pairs: list[Pair] = []
        self.rail_start = root
        self.rail_tip = root
        self.tooth_tips: list[int] = []
        self.far_rail: list[int] = []
        # phase machine: offsets within one period of 3r + 2 joins
        self._phase = 0
        self._pending_branch: Optional[int] = None
        self._tooth_tip: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.members)

    def attach_point(self) -> int:
        r = self.plan.r
        if self._phase < r + 1 or self._pending_branch is None:
            return self.rail_tip
        return self._tooth_tip if self._tooth_tip is not None else self._pending_branch

    def note_join(self, item: int) -> None:
        """Record that item answered positive against attach_point()."""
        r = self.plan.r
        tip = self.attach_point()
        self.members.append(item)
        self.join_pairs.append(_pair(tip, item))
        self.degree[item] = 1
        self.degree[tip] += 1
        phase = self._phase
        if phase < r:
            self.rail_tip = item
        elif phase == r:
            # this rail vertex branches: its tooth grows next
            self.rail_tip = item
            self._pending_branch = item
            self._tooth_tip = None
        else:
            self._tooth_tip = item
            if phase == 2 * r:
                self.far_rail.append(item)
            if phase == 3 * r + 1:
                self.tooth_tips.append(item)
                self._pending_branch = None
                self._tooth_tip = None
        self._phase = (phase + 1) % (3 * r + 2)

    def closure_queries(self) -> list[Pair]:
        if self.size < 2:
            return []
        out: list[Pair] = []
        tips = list(self.tooth_tips)
        if self._tooth_tip is not None:
            tips.append(self._tooth_tip)  # partial tooth still needs cover
        for i, tip in enumerate(tips):
            if i + 1 < len(self.far_rail):
                target = self.far_rail[i + 1]
            else:
                target = self.rail_tip if self.rail_tip != tip else self.rail_start
            out.append(_pair(tip, target))
        out.append(_pair(self.rail_start, self.rail_start)
                   if self.rail_start == self.rail_tip else
                   _pair(self.rail_start, self.rail_tip))
        return out


def plan_redundant_queries(
    trees: Sequence[BlockTree],
    cross_negative_pairs: dict[tuple[int, int], int],
    target_cross: int = 3,
) -> tuple[list[Pair], list[tuple[int, int]]]:
    """Finalization queries: in-block closures and cross top-up slots.

    Returns (closures, topups) where topups name tree index pairs that still
    need queries to reach the cross-answer target.
    """
    closures: list[Pair] = []
    for tree in trees:
        closures.extend(tree.closure_queries())
    topups: list[tuple[int, int]] = []
    for i in range(len(trees)):
        for j in range(i + 1, len(trees)):
            have = cross_negative_pairs.get((i, j), 0)
            topups.extend((i, j) for _ in range(max(0, target_cross - have)))
    return closures, topups


# ---------------------------------------------------------------------------
# end-to-end noisy pipeline


@dataclass
class NoisyRunOutcome:
    queries: int
    repairs: int
    extra_in_block: int
    extra_cross: int
    rounds: int
    recovered: bool
    consistent: bool
    partition: Partition


class NoisyRunner:
    """Discovery, redundant finalization, and repair under a flaky oracle.

    Discovery inserts items into believed blocks largest-first, recording
    every raw answer.  Finalization closes each believed block into a
    2-edge-connected layout and tops cross answers up to three per block
    pair; detection and repair then loop, with re-closure patching between
    rounds, until the record is contradiction-free or the caps run out.
    """

    def __init__(
        self,
        noise: NoiseModel,
        redundancy: int | RedundancyPlan = 5,
        max_rounds: int = 2000,
        max_patch_rounds: int = 50,
    ):
        self.noise = noise
        self.plan = (redundancy if isinstance(redundancy, RedundancyPlan)
                     else RedundancyPlan(int(redundancy)))
        self.max_rounds = max_rounds
        self.max_patch_rounds = max_patch_rounds

    def run(self, truth: Partition, rng) -> NoisyRunOutcome:
        n = truth.n
        ask = flaky_oracle(truth, self.noise.p, rng)
        g = SignedGraph(n)
        counters = {"queries": 0, "repairs": 0, "in_block": 0, "cross": 0}

        def query(u: int, v: int) -> bool:
            counters["queries"] += 1
            ans = ask(u, v)
            g.add(u, v, ans)
            return ans

        trees = self._discover(n, query)
        self._finalize(g, trees, query, counters)
        rounds = self._repair_loop(g, ask, counters)
        partition = g.to_partition()
        return NoisyRunOutcome(
            queries=counters["queries"],
            repairs=counters["repairs"],
            extra_in_block=counters["in_block"],
            extra_cross=counters["cross"],
            rounds=rounds,
            recovered=partition == truth,
            consistent=detect_contradiction(g) is None,
            partition=partition,
        )

    def _discover(self, n: int, query) -> list[BlockTree]:
        trees: list[BlockTree] = []
        for item in range(n):
            order = sorted(
                range(len(trees)),
                key=lambda i: (-trees[i].size, i),
            )
            placed = False
            for i in order:
                tip = trees[i].attach_point()
                if query(tip, item):
                    trees[i].note_join(item)
                    placed = True
                    break
            if not placed:
                trees.append(BlockTree(item, self.plan))
        return trees

    def _finalize(self, g, trees, query, counters) -> None:
        cross: dict[tuple[int, int], int] = defaultdict(int)
        signs = g.sign_map()
        member_of = {}
        for i, tree in enumerate(trees):
            for x in tree.members:
                member_of[x] = i
        for (a, b), m in g.pair_multiplicity().items():
            if not signs[(a, b)]:
                i, j = member_of[a], member_of[b]
                if i != j:
                    cross[(min(i, j), max(i, j))] += m
        closures, topups = plan_redundant_queries(trees, cross)
        for u, v in closures:
            counters["in_block"] += 1
            query(u, v)
        # sub-period trees are covered by a single short cycle, where any
        # concordant pair of flips would be invisible; triple coverage there
        # pushes an undetectable wrong sign from p^2 down to p^3
        for tree in trees:
            if 2 <= tree.size < self.plan.period:
                for u, v in tree.join_pairs + tree.closure_queries():
                    for _ in range(2):
                        counters["in_block"] += 1
                        query(u, v)
        spin = defaultdict(int)
        for i, j in topups:
            a = self._cross_endpoint(trees[i], spin[(i, j, 0)])
            b = self._cross_endpoint(trees[j], spin[(i, j, 1)])
            spin[(i, j, 0)] += 1
            spin[(i, j, 1)] += 1
            counters["cross"] += 1
            query(a, b)

    @staticmethod
    def _cross_endpoint(tree: BlockTree, spin: int) -> int:
        return tree.members[spin % len(tree.members)]

    def _repair_loop(self, g, ask, counters) -> int:
        rounds = 0
        patch_rounds = 0
        while True:
            while (cycle := detect_contradiction(g)) is not None:
                if rounds >= self.max_rounds:
                    return rounds
                rounds += 1
                try:
                    transcript = repair(g, cycle, ask)
                except RepairBudgetError:
                    return rounds
                counters["repairs"] += 1
                counters["queries"] += transcript.cost
            if patch_rounds >= self.max_patch_rounds:
                return rounds
            in_block, cross = self._patch_queries(g)
            if not in_block and not cross:
                return rounds
            patch_rounds += 1
            for u, v in in_block:
                counters["in_block"] += 1
                counters["queries"] += 1
                g.add(u, v, ask(u, v))
            for u, v in cross:
                counters["cross"] += 1
                counters["queries"] += 1
                g.add(u, v, ask(u, v))

    def _patch_queries(self, g) -> tuple[list[Pair], list[Pair]]:
        return redundancy_patches(g)


def redundancy_patches(g: SignedGraph) -> tuple[list[Pair], list[Pair]]:
    """Queries restoring 1-robust redundancy for the graph's current state.

    In-block: re-closures for components that repairs or sparse discovery
    left bridged; a pair with several concordant records counts as parallel
    edges, so only multiplicity-1 bridges need covering.  Cross: top-ups
    keeping every component pair at three negative answers, which is what
    re-attaches a subtree split off a believed block by a repaired join
    answer and what challenges a wrong verdict.  Empty lists mean the record
    is 1-robust as it stands.
    """
    signs = g.sign_map()
    mult = g.pair_multiplicity()
    pos = nx.Graph()
    pos.add_nodes_from(range(g.n))
    pos.add_edges_from(p for p, s in signs.items() if s)
    in_block: list[Pair] = []
    comps = sorted(sorted(c) for c in nx.connected_components(pos))
    for comp in comps:
        if len(comp) < 2:
            continue
        sub = pos.subgraph(comp)
        bridges = [e for e in nx.bridges(sub) if mult[_pair(*e)] < 2]
        if not bridges:
            continue
        if sub.number_of_edges() == 1:
            # a bare pair: verify by repeating the same query
            in_block.append(_pair(*next(iter(sub.edges()))))
            continue
        # contract away covered chunks and pair up the leaves of the
        # remaining bridge forest
        chunks = nx.Graph(sub)
        chunks.remove_edges_from(bridges)
        label = {}
        for ci, chunk in enumerate(nx.connected_components(chunks)):
            for v in chunk:
                label[v] = ci
        tree = nx.Graph()
        tree.add_nodes_from(set(label.values()))
        for a, b in bridges:
            tree.add_edge(label[a], label[b])
        leaves = [c for c in tree.nodes if tree.degree(c) <= 1]
        reps = {}
        for v in comp:
            c = label[v]
            if c not in reps or sub.degree(v) < sub.degree(reps[c]):
                reps[c] = v
        for i in range(0, len(leaves) - 1, 2):
            in_block.append(_pair(reps[leaves[i]], reps[leaves[i + 1]]))
        if len(leaves) % 2 and len(leaves) > 1:
            in_block.append(_pair(reps[leaves[-1]], reps[leaves[0]]))
    comp_of = {}
    for i, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = i
    cross_mult: dict[tuple[int, int], int] = defaultdict(int)
    for (a, b), m in mult.items():
        if not signs[(a, b)]:
            ca, cb = comp_of[a], comp_of[b]
            if ca != cb:
                cross_mult[(min(ca, cb), max(ca, cb))] += m
    cross: list[Pair] = []
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            need = 3 - cross_mult[(i, j)]
            for t in range(need):
                a = comps[i][t % len(comps[i])]
                b = comps[j][t % len(comps[j])]
                cross.append(_pair(a, b))
    return in_block, cross
