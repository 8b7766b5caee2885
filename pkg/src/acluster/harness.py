"""Experiment drivers and validators for the clustering strategies.

Three layers live here.  Batch samplers turn a truth model into int64 label
matrices and route them through the compiled kernels.  The exact layer holds
the optimal-policy game tree and exhaustive per-partition sweeps, both in
rational arithmetic where it matters.  Validators wrap both layers in
pass/fail reports with explicit targets and tolerances.
"""

from __future__ import annotations

import csv
import json
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Sequence

import numpy as np

from ._kernels import OK, get_kernel
from .oracles import (
    CategoricalModel,
    NoiseModel,
    make_rng,
    model_from_config,
    truth_oracle,
    urn_count_distribution,
)
from .partition import Partition, iter_partitions
from .qmath import (
    asymptotic_moments,
    bell,
    evaluate_pgf,
    exact_moments,
    pgf_closed_form_1,
    pgf_closed_form_2,
)
from .strategies import STRATEGIES, run

_SMALLN_LIMIT = 12
_STRAT_CODE = {"clique": 0, "universal": 1, "chordal-any": 2, "random": 3}


class KernelError(RuntimeError):
    """A simulation kernel reported a nonzero status."""


def _check(status: int, kernel: str) -> None:
    if status != OK:
        raise KernelError(f"kernel {kernel} returned status {status}")


# ---------------------------------------------------------------------------
# batch label sampling and kernel routing


def sample_labels(
    n: int,
    trials: int,
    seed: int,
    model: CategoricalModel | None = None,
) -> np.ndarray:
    """A (trials, n) int64 label matrix, one truth per row.

    model=None draws uniformly over all partitions of the n-set; otherwise
    each item draws its class from the model independently.
    """
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be positive")
    rng = make_rng(seed)
    if model is not None:
        p = np.asarray(model.probs)
        return rng.choice(model.k, size=(trials, n), p=p).astype(np.int64)
    out = np.empty((trials, n), dtype=np.int64)
    cdf = urn_count_distribution(n)
    ms = np.searchsorted(cdf, rng.random(trials), side="right") + 1
    for t in range(trials):
        out[t] = rng.integers(0, ms[t], size=n)
    return out


def strategy_counts(
    strategy: str,
    labels: np.ndarray,
    seed: int = 0,
    backend: str | None = None,
    check_every: int = 0,
) -> np.ndarray:
    """Per-trial query counts for one strategy over a label matrix."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    trials, n = labels.shape
    out = np.zeros(trials, dtype=np.int64)
    if strategy == "universal":
        status = get_kernel("universal_counts", backend)(labels, out)
    elif strategy == "clique":
        k = np.int64(labels.max() + 1)
        status = get_kernel("clique_counts", backend)(labels, k, out)
    elif strategy == "random":
        status = get_kernel("random_counts", backend)(
            labels, make_rng(seed), out, np.int64(check_every)
        )
    else:
        out, _, _, _ = classified_counts(strategy, labels, seed, backend)
        return out
    _check(status, strategy)
    return out


def classified_counts(
    strategy: str,
    labels: np.ndarray,
    seed: int = 0,
    backend: str | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(total, core, productive, excessive) per trial, exact classification.

    Runs the full graph simulator, so n is capped at 12 where the induced
    even-path search stays cheap.
    """
    if strategy not in _STRAT_CODE:
        raise ValueError(f"unknown strategy {strategy!r}")
    trials, n = labels.shape
    if n > _SMALLN_LIMIT:
        raise ValueError(f"classification needs n <= {_SMALLN_LIMIT}, got {n}")
    counts = np.zeros(trials, dtype=np.int64)
    core = np.zeros(trials, dtype=np.int64)
    productive = np.zeros(trials, dtype=np.int64)
    excessive = np.zeros(trials, dtype=np.int64)
    status = get_kernel("smalln_runs", backend)(
        labels, np.int64(_STRAT_CODE[strategy]), make_rng(seed),
        counts, core, productive, excessive,
    )
    _check(status, "smalln_runs")
    return counts, core, productive, excessive


# ---------------------------------------------------------------------------
# exact layer: optimal game tree and exhaustive sweeps


def _consistent_count(m: int, edges: frozenset) -> int:
    # partitions of [m] into blocks spanned by no negative edge
    adj = [0] * m
    for a, b in edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    blocks: list[int] = []

    def place(i: int) -> int:
        if i == m:
            return 1
        total = 0
        for j, mask in enumerate(blocks):
            if not adj[i] & mask:
                blocks[j] = mask | (1 << i)
                total += place(i + 1)
                blocks[j] = mask
        blocks.append(1 << i)
        total += place(i + 1)
        blocks.pop()
        return total

    return place(0)


def _canonical(m: int, edges: frozenset) -> tuple:
    if not edges:
        return (m, ())
    best = None
    for perm in permutations(range(m)):
        relabeled = tuple(sorted(
            (perm[a], perm[b]) if perm[a] < perm[b] else (perm[b], perm[a])
            for a, b in edges
        ))
        if best is None or relabeled < best:
            best = relabeled
    return (m, best)


def _contract(m: int, edges: frozenset, u: int, v: int) -> frozenset:
    # merge v into u and relabel to 0..m-2; (u, v) is unknown, so no loop
    relabel = [0] * m
    nxt = 0
    for x in range(m):
        if x != v:
            relabel[x] = nxt
            nxt += 1
    out = set()
    for a, b in edges:
        a2 = relabel[u if a == v else a]
        b2 = relabel[u if b == v else b]
        out.add((a2, b2) if a2 < b2 else (b2, a2))
    return frozenset(out)


def optimal_average_game_tree(n: int) -> Fraction:
    """Exact minimum of E[queries] over all adaptive policies, uniform prior.

    Expectimax over knowledge states.  A state is just the negative graph on
    supervertices: consistent truths biject with its edge-free-block
    partitions and stay equally likely, so supervertex sizes are irrelevant
    and values memoize per graph isomorphism class (canonical form by brute
    force over vertex permutations, fine up to six vertices).
    """
    if not 1 <= n <= 6:
        raise ValueError("exact game tree supported for 1 <= n <= 6")
    memo: dict[tuple, Fraction] = {}

    def value(m: int, edges: frozenset) -> Fraction:
        if m <= 1 or len(edges) == m * (m - 1) // 2:
            return Fraction(0)
        key = _canonical(m, edges)
        cached = memo.get(key)
        if cached is not None:
            return cached
        total = _consistent_count(m, edges)
        best: Fraction | None = None
        for u, v in combinations(range(m), 2):
            if (u, v) in edges:
                continue
            merged = _contract(m, edges, u, v)
            pos = _consistent_count(m - 1, merged)
            val = (
                1
                + Fraction(pos, total) * value(m - 1, merged)
                + Fraction(total - pos, total) * value(m, edges | {(u, v)})
            )
            if best is None or val < best:
                best = val
        assert best is not None
        memo[key] = best
        return best

    return value(n, frozenset())


def exhaustive_distribution(
    strategy: str, n: int, seed: int = 0, backend: str | None = None
) -> dict[int, int]:
    """Query-count histogram over every partition of the n-set, one run each.

    For the stochastic strategies the generator restarts from the seed on
    every partition, so the whole sweep evaluates one fixed realized decision
    tree.  That is what makes the histogram reproducibly comparable across
    strategies; a shared stream would blend a different tree per partition.
    """
    if not 1 <= n <= 8:
        raise ValueError("exhaustive sweep supported for 1 <= n <= 8")
    parts = list(iter_partitions(n))
    labels = np.array([p.assignment() for p in parts], dtype=np.int64)
    if strategy in ("clique", "universal"):
        counts, _, _, _ = classified_counts(strategy, labels, seed, backend)
        values = counts.tolist()
    else:
        values = [
            int(classified_counts(strategy, labels[t:t + 1], seed, backend)[0][0])
            for t in range(len(parts))
        ]
    return dict(sorted(Counter(values).items()))


def exhaustive_mean(
    strategy: str, n: int, seed: int = 0, backend: str | None = None
) -> Fraction:
    hist = exhaustive_distribution(strategy, n, seed, backend)
    return Fraction(sum(q * c for q, c in hist.items()), bell(n))


# ---------------------------------------------------------------------------
# validators


@dataclass(frozen=True)
class ValidationReport:
    name: str
    measured: float
    target: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"[{verdict}] {self.name}: measured={self.measured:.6g} "
            f"target={self.target:.6g} tol={self.tolerance:.3g}"
        )


def cross_pair_rate(a: float, b: float) -> float:
    """Limit of expected negative queries between two classes, per item.

    2a for equal rates, else 2ab log(a/b)/(a - b); continuous at a = b.
    """
    if a <= 0 or b <= 0:
        raise ValueError("rates must be positive")
    if abs(a - b) < 1e-12:
        return a + b
    return 2.0 * a * b * math.log(a / b) / (a - b)


def insertion_mean_target(probs: Sequence[float], n: int) -> float:
    """Asymptotic mean queries of the insertion strategy, classes sorted
    by descending probability: items of the rank-i class pay about i probes."""
    ranked = sorted(probs, reverse=True)
    return n * sum((i + 1) * p for i, p in enumerate(ranked))


def random_mean_target(probs: Sequence[float], n: int) -> float:
    """Asymptotic mean queries of the uniform-pair strategy:
    n - k positives plus the pairwise negative rates."""
    k = len(probs)
    pair_sum = sum(
        cross_pair_rate(probs[i], probs[j])
        for i in range(k) for j in range(i + 1, k)
    )
    return n - k + pair_sum * n


def validate_insertion_mean(
    probs: Sequence[float],
    n: int = 10_000,
    trials: int = 200,
    seed: int = 0,
    tol: float = 0.02,
) -> ValidationReport:
    """Mean insertion-strategy cost against its asymptotic formula."""
    model = CategoricalModel(tuple(sorted(probs, reverse=True)))
    labels = sample_labels(n, trials, seed, model)
    counts = strategy_counts("clique", labels, seed + 1)
    measured = float(counts.mean())
    target = insertion_mean_target(model.probs, n)
    rel = abs(measured - target) / target
    return ValidationReport(
        name=f"insertion-mean k={model.k} n={n}",
        measured=measured, target=target, tolerance=tol, passed=rel <= tol,
        details={"relative_error": rel, "trials": trials,
                 "std": float(counts.std(ddof=1))},
    )


def validate_random_mean(
    probs: Sequence[float],
    n: int = 10_000,
    trials: int = 200,
    seed: int = 0,
    tol: float = 0.05,
) -> ValidationReport:
    """Mean uniform-pair-strategy cost against its asymptotic formula."""
    model = CategoricalModel(tuple(sorted(probs, reverse=True)))
    labels = sample_labels(n, trials, seed, model)
    counts = strategy_counts("random", labels, seed + 1)
    measured = float(counts.mean())
    target = random_mean_target(model.probs, n)
    rel = abs(measured - target) / target
    return ValidationReport(
        name=f"random-mean k={model.k} n={n}",
        measured=measured, target=target, tolerance=tol, passed=rel <= tol,
        details={"relative_error": rel, "trials": trials,
                 "std": float(counts.std(ddof=1))},
    )


def validate_closed_forms(
    n_max: int = 20,
    qs: Sequence[float] = (0.6, 0.75, 0.9),
    tol: float = 1e-9,
) -> ValidationReport:
    """Both closed forms of E[q^X] against the exact coefficient sum."""
    worst = 0.0
    worst_at: dict = {}
    for n in range(1, n_max + 1):
        for q in qs:
            ref = evaluate_pgf(n, q)
            for form, val in (
                ("alternating", pgf_closed_form_1(n, q)),
                ("series", pgf_closed_form_2(n, q)),
            ):
                rel = abs(val - ref) / abs(ref)
                if rel > worst:
                    worst = rel
                    worst_at = {"form": form, "n": n, "q": q}
    return ValidationReport(
        name=f"closed-forms n<={n_max}",
        measured=worst, target=0.0, tolerance=tol, passed=worst <= tol,
        details=worst_at,
    )


def validate_asymptotics(
    n_small: int = 100,
    n_large: int = 600,
    trials: int = 10_000,
    seed: int = 0,
    ks_tol: float = 0.15,
) -> ValidationReport:
    """Slow convergence of the mean plus approximate normality of the law.

    Checks the relative gap between the exact and asymptotic mean shrinks
    from n_small to n_large, and that counts at n_large, normalized by the
    exact moments, pass a loose KS comparison with the standard normal.
    """
    from scipy import stats

    def rel_gap(n: int) -> float:
        exact = float(exact_moments(n)[0])
        return abs(exact - asymptotic_moments(n).mean) / exact

    gap_small, gap_large = rel_gap(n_small), rel_gap(n_large)
    labels = sample_labels(n_large, trials, seed)
    counts = strategy_counts("universal", labels)
    mean, var = exact_moments(n_large)
    z = (counts - float(mean)) / math.sqrt(float(var))
    ks = float(stats.kstest(z, "norm").statistic)
    passed = ks <= ks_tol and gap_large < gap_small
    return ValidationReport(
        name=f"asymptotic-law n={n_large}",
        measured=ks, target=0.0, tolerance=ks_tol, passed=passed,
        details={"gap_small": gap_small, "gap_large": gap_large,
                 "trials": trials},
    )


def validate_two_class_productive(
    strategy: str,
    n: int,
    trials: int = 100_000,
    seed: int = 0,
) -> ValidationReport:
    """Mean productive queries under fair two-class truths is (n - 1) / 2.

    Every strategy is expected to satisfy this; the tolerance is three
    standard errors of the empirical mean.
    """
    labels = make_rng(seed).integers(0, 2, size=(trials, n)).astype(np.int64)
    _, _, productive, _ = classified_counts(strategy, labels, seed + 1)
    measured = float(productive.mean())
    target = (n - 1) / 2
    se = float(productive.std(ddof=1)) / math.sqrt(trials)
    return ValidationReport(
        name=f"two-class-productive {strategy} n={n}",
        measured=measured, target=target, tolerance=3 * se,
        passed=abs(measured - target) <= 3 * se,
        details={"standard_error": se, "trials": trials},
    )


# ---------------------------------------------------------------------------
# config-driven experiments


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    trials: int = 100
    strategy: str = "chordal-any"
    model: str = "uniform"
    probs: tuple[float, ...] | None = None
    noise_p: float = 0.0
    redundancy: int = 5
    seed: int = 0
    classify: bool = False

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.model == "categorical" and not self.probs:
            raise ValueError("categorical model needs probs")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        name, model, noise = model_from_config(raw)
        return cls(
            n=int(raw["n"]),
            trials=int(raw.get("trials", 100)),
            strategy=raw.get("strategy", "chordal-any"),
            model=name,
            probs=model.probs if model is not None else None,
            noise_p=noise.p if noise is not None else 0.0,
            redundancy=int(raw.get("redundancy", 5)),
            seed=int(raw.get("seed", 0)),
            classify=bool(raw.get("classify", False)),
        )

    def category_model(self) -> CategoricalModel | None:
        if self.model == "categorical":
            assert self.probs is not None
            return CategoricalModel(tuple(sorted(self.probs, reverse=True)))
        return None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    counts: list[int]
    elapsed: float
    splits: dict[str, list[int]] = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.counts))

    @property
    def std(self) -> float:
        return float(np.std(self.counts, ddof=1)) if len(self.counts) > 1 else 0.0

    def summary(self) -> dict:
        out = {
            "config": asdict(self.config),
            "trials": len(self.counts),
            "mean": self.mean,
            "std": self.std,
            "min": int(min(self.counts)),
            "max": int(max(self.counts)),
            "elapsed_seconds": self.elapsed,
        }
        for key, values in self.splits.items():
            out[f"mean_{key}"] = float(np.mean(values))
        out.update(self.extras)
        return out

    def to_json(self, include_counts: bool = False) -> str:
        payload = self.summary()
        if include_counts:
            payload["counts"] = list(self.counts)
            payload.update({k: list(v) for k, v in self.splits.items()})
        return json.dumps(payload, indent=2, sort_keys=True)

    def write_csv(self, path) -> None:
        keys = sorted(self.splits)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "queries", *keys])
            for t, c in enumerate(self.counts):
                writer.writerow([t, c, *(self.splits[k][t] for k in keys)])


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Execute one batch described by a config and collect per-trial counts.

    Noiseless runs go through the kernels; noisy runs use the repair loop
    from the noise module, which works per trial on the pure path.
    """
    started = time.perf_counter()
    model = config.category_model()
    if config.noise_p > 0:
        from .noise import NoisyRunner

        runner = NoisyRunner(
            noise=NoiseModel(config.noise_p),
            redundancy=config.redundancy,
        )
        labels = sample_labels(config.n, config.trials, config.seed, model)
        counts = []
        extras_acc: Counter = Counter()
        for t in range(config.trials):
            truth = Partition.from_assignment(labels[t].tolist())
            outcome = runner.run(truth, make_rng((config.seed, 1, t)))
            counts.append(outcome.queries)
            extras_acc["recovered"] += int(outcome.recovered)
            extras_acc["repairs"] += outcome.repairs
        return ExperimentReport(
            config=config, counts=counts,
            elapsed=time.perf_counter() - started,
            extras={
                "recovered_fraction": extras_acc["recovered"] / config.trials,
                "mean_repairs": extras_acc["repairs"] / config.trials,
            },
        )
    labels = sample_labels(config.n, config.trials, config.seed, model)
    if config.classify:
        if config.n <= _SMALLN_LIMIT:
            counts, core, productive, excessive = classified_counts(
                config.strategy, labels, config.seed + 1
            )
            splits = {
                "core": core.tolist(),
                "productive": productive.tolist(),
                "excessive": excessive.tolist(),
            }
            return ExperimentReport(
                config=config, counts=counts.tolist(),
                elapsed=time.perf_counter() - started, splits=splits,
            )
        splits = {"core": [], "productive": [], "excessive": []}
        counts = []
        for t in range(config.trials):
            truth = Partition.from_assignment(labels[t].tolist())
            stats = run(
                config.n, config.strategy, truth_oracle(truth),
                rng=make_rng((config.seed, 2, t)), classify=True,
            )
            counts.append(stats.queries)
            splits["core"].append(stats.core)
            splits["productive"].append(stats.productive)
            splits["excessive"].append(stats.excessive)
        return ExperimentReport(
            config=config, counts=counts,
            elapsed=time.perf_counter() - started, splits=splits,
        )
    counts = strategy_counts(config.strategy, labels, config.seed + 1)
    return ExperimentReport(
        config=config, counts=counts.tolist(),
        elapsed=time.perf_counter() - started,
    )
