"""Ground-truth partition samplers and oracle answer functions.

Uniform sampling over all partitions of an n-set works urn-style: draw an urn
count M with P(M = m) proportional to m^n/m!, throw each item into a uniform
urn, and drop empty urns.  Marginalizing over M makes every partition equally
likely (weight sum telescopes through the falling factorial), so no rejection
loop is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .partition import Partition, Query
from .qmath import bell

TAIL_CUTOFF = 1e-18


@dataclass(frozen=True)
class CategoricalModel:
    """Fixed class probabilities p_1 >= p_2 >= ... >= p_k summing to 1."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.probs:
            raise ValueError("need at least one class")
        if any(p <= 0 for p in self.probs):
            raise ValueError("probabilities must be positive")
        if list(self.probs) != sorted(self.probs, reverse=True):
            raise ValueError("probabilities must be sorted descending")
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")

    @property
    def k(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class NoiseModel:
    """Independent answer flips with probability p."""

    p: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p < 1.0:
            raise ValueError("flip probability must lie in [0, 1)")


def make_rng(seed: int | Sequence[int] | None = None) -> np.random.Generator:
    return np.random.default_rng(seed)


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent per-trial streams from one recorded seed."""
    seq = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in seq.spawn(count)]


_urn_cdf_cache: dict[int, np.ndarray] = {}


def urn_count_distribution(n: int) -> np.ndarray:
    """CDF of the urn count M with P(M=m) = m^n/(e m! B_n), truncated.

    Truncation stops once the next weight falls below TAIL_CUTOFF times the
    accumulated mass.  Weights are built in log space; index i of the return
    array corresponds to m = i + 1 (m = 0 has zero weight for n >= 1).
    """
    cdf = _urn_cdf_cache.get(n)
    if cdf is not None:
        return cdf
    log_weights: list[float] = []
    m = 1
    shift = 0.0
    acc = 0.0
    while True:
        lw = n * math.log(m) - math.lgamma(m + 1)
        log_weights.append(lw)
        if m == 1:
            shift = lw
            acc = 1.0
        else:
            term = math.exp(lw - shift)
            if term > acc:  # still climbing toward the mode; rescale
                acc = acc * math.exp(shift - lw) + 1.0
                shift = lw
            else:
                acc += term
                if term < TAIL_CUTOFF * acc:
                    break
        m += 1
    weights = np.exp(np.array(log_weights) - shift)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    _urn_cdf_cache[n] = cdf
    return cdf


def urn_weight_normalization(n: int) -> float:
    """sum_m m^n/(e m! B_n) evaluated with the same truncation; should be 1."""
    total = 0.0
    log_bell = _log_big(bell(n))
    m = 1
    while True:
        lw = n * math.log(m) - math.lgamma(m + 1) - 1.0 - log_bell
        term = math.exp(lw)
        total += term
        if m > n and term < TAIL_CUTOFF * total:
            break
        m += 1
    return total


def _log_big(value: int) -> float:
    # math.log handles arbitrary-size ints natively
    return math.log(value)


def sample_uniform_assignment(n: int, rng: np.random.Generator) -> np.ndarray:
    """Urn labels for each item; relabeling to a Partition drops empty urns."""
    if n < 1:
        raise ValueError("n must be positive")
    cdf = urn_count_distribution(n)
    m = int(np.searchsorted(cdf, rng.random(), side="right")) + 1
    return rng.integers(0, m, size=n)


def sample_uniform_partition(n: int, rng: np.random.Generator) -> Partition:
    """A partition of {0..n-1} with probability exactly 1/B_n each."""
    return Partition.from_assignment(sample_uniform_assignment(n, rng).tolist())


def sample_categorical_assignment(
    n: int, model: CategoricalModel, rng: np.random.Generator
) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be positive")
    return rng.choice(model.k, size=n, p=np.asarray(model.probs))


def sample_categorical_partition(
    n: int, model: CategoricalModel, rng: np.random.Generator
) -> Partition:
    """Each item draws class i with probability p_i; empty classes drop out.

    The realized block count can be below model.k; callers needing the
    intended count read model.k.
    """
    return Partition.from_assignment(
        sample_categorical_assignment(n, model, rng).tolist()
    )


def oracle_answer(truth: Partition, q: Query) -> bool:
    return truth.same_block(q.u, q.v)


def noisy_answer(
    truth: Partition, q: Query, noise: NoiseModel, rng: np.random.Generator
) -> bool:
    answer = truth.same_block(q.u, q.v)
    if noise.p > 0.0 and rng.random() < noise.p:
        return not answer
    return answer


def truth_oracle(truth: Partition) -> Callable[[int, int], bool]:
    labels = truth.assignment()

    def answer(u: int, v: int) -> bool:
        return labels[u] == labels[v]

    return answer


def flaky_oracle(
    truth: Partition, p: float, rng: np.random.Generator
) -> Callable[[int, int], bool]:
    labels = truth.assignment()

    def answer(u: int, v: int) -> bool:
        same = labels[u] == labels[v]
        if p > 0.0 and rng.random() < p:
            return not same
        return same

    return answer


def model_from_config(config: dict) -> tuple[str, CategoricalModel | None, NoiseModel | None]:
    """Parse {"model": "uniform"|"categorical", "probs": [...], "noise": {"p": ...}}.

    A missing "model" key means uniform."""
    name = config.get("model", "uniform")
    if name == "uniform":
        model = None
    elif name == "categorical":
        probs = config.get("probs")
        if not isinstance(probs, Sequence) or not probs:
            raise ValueError("categorical model needs a non-empty probs list")
        ranked = sorted((float(p) for p in probs), reverse=True)
        model = CategoricalModel(tuple(ranked))
    else:
        raise ValueError(f"unknown model {name!r}")
    noise = None
    if "noise" in config:
        noise = NoiseModel(float(config["noise"]["p"]), int(config["noise"].get("seed", 0)))
    return name, model, noise
