"""Active clustering by pairwise same-class queries.

The package recovers an unknown set partition by adaptively asking an oracle
"are these two items in the same class?".  It ships the query strategies
(insertion/clique, largest-label/universal, chordality-preserving, random),
the exact complexity distribution of the chordality-preserving family, the
Lambert-W asymptotics of its mean and spread, a noise-tolerant pipeline with
contradiction repair and redundancy planning, a Monte Carlo harness, and an
HTTP session service for human annotators.
"""

from .partition import (
    AggregatedGraph,
    Answer,
    ContradictionError,
    Partition,
    Query,
    QueryLog,
    RedundantQueryError,
    count_realizations,
    iter_partitions,
    new_aggregated_graph,
    replay,
)

__version__ = "0.1.0"

__all__ = [
    "AggregatedGraph",
    "Answer",
    "ContradictionError",
    "Partition",
    "Query",
    "QueryLog",
    "RedundantQueryError",
    "count_realizations",
    "iter_partitions",
    "new_aggregated_graph",
    "replay",
    "__version__",
]
