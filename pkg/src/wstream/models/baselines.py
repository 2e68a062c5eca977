from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from src.wstream.dataloaders.edgelist import AdjacencyGraph, VertexRecord
from src.wstream.models.partitioners import (
    Partitioner,
    PartitionerConfig,
    WStreamPartitioner,
    break_ties,
)
from src.wstream.models.state import PartitionState, capacity_bound
from src.wstream.utils.callbacks import RunCallback
from src.wstream.utils.dataclasses import Decision, RunStats
from src.wstream.utils.errors import CapacityExhaustedError, ConfigurationError

MASK_64 = (1 << 64) - 1


@dataclass(frozen=True)
class LdgConfig:
    k: int
    epsilon: float = 0.0
    seed: int = 0
    order: str = "random"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigurationError(f"The number of partitions must be positive, got {self.k}.")
        if self.epsilon < 0:
            raise ConfigurationError(f"Capacity slack epsilon must be >= 0, got {self.epsilon}.")

    def capacity(self, n: int) -> int:
        """Partition capacity C for a graph of n vertices."""
        return capacity_bound(n, self.k, self.epsilon).l_max


def ldg_scores(
    state: PartitionState, record: VertexRecord, capacity: int
) -> list[Optional[Fraction]]:
    """Exact LDG scores ``|N(v) & P_i| * (1 - load_i / C)``; full partitions get None."""
    counts = state.edge_counts(record.neighbors)
    return [
        Fraction(count * (capacity - load), capacity) if load < capacity else None
        for count, load in zip(counts, state.loads)
    ]


def ldg_choose_scored(
    state: PartitionState,
    record: VertexRecord,
    capacity: int,
    rng: np.random.Generator,
) -> tuple[int, str, list[Optional[Fraction]]]:
    scores = ldg_scores(state, record, capacity)
    eligible = [i for i, score in enumerate(scores) if score is not None]
    if not eligible:
        raise CapacityExhaustedError(
            f"All {state.k} partitions reached capacity {capacity} before vertex {record.id}."
        )
    best = max(scores[i] for i in eligible)  # type: ignore
    argmax = [i for i in eligible if scores[i] == best]
    if len(argmax) == 1:
        return argmax[0], "argmax", scores
    partition, drew = break_ties(state, argmax, rng)
    prefix = "fallback" if best == 0 else "tie"
    return partition, f"{prefix}_random" if drew else f"{prefix}_min_load", scores


def ldg_choose(
    state: PartitionState,
    record: VertexRecord,
    capacity: int,
    rng: np.random.Generator,
) -> int:
    """Linear Deterministic Greedy placement of one vertex.

    Args:
        state (PartitionState): Current assignment.
        record (VertexRecord): Vertex to place.
        capacity (int): Partition capacity C; partitions at capacity are ineligible.
        rng (np.random.Generator): Generator for residual ties.

    Returns:
        int: Partition maximizing the penalized neighbor count, ties going to the
            least loaded partition and then to a uniform draw.
    """
    partition, _, _ = ldg_choose_scored(state, record, capacity, rng)
    return partition


def splitmix64(value: int) -> int:
    z = (value + 0x9E3779B97F4A7C15) & MASK_64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK_64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK_64
    return z ^ (z >> 31)


def hash_choose(vertex: int, k: int, mix: bool = True) -> int:
    if k < 1:
        raise ConfigurationError(f"The number of partitions must be positive, got {k}.")
    key = splitmix64(vertex & MASK_64) if mix else vertex
    return key % k


class LDGPartitioner(Partitioner):
    def __init__(
        self,
        k: int,
        epsilon: float = 0.0,
        seed: int = 0,
        order: str = "random",
        callbacks: Optional[Sequence[RunCallback]] = None,
    ) -> None:
        super().__init__(k=k, seed=seed, order=order, callbacks=callbacks)
        self.config = LdgConfig(k=k, epsilon=epsilon, seed=seed, order=order)

    @property
    def name(self) -> str:
        return "ldg"

    def new_state(self, graph: AdjacencyGraph) -> PartitionState:
        return PartitionState(k=self.k)

    def consume(
        self,
        stream: Iterator[VertexRecord],
        state: PartitionState,
        rng: np.random.Generator,
        stats: RunStats,
        graph: AdjacencyGraph,
    ) -> None:
        # C only depends on n, which a one-pass loader knows from the stream header
        capacity = self.config.capacity(graph.n)
        for record in stream:
            partition, reason, scores = ldg_choose_scored(state, record, capacity, rng)
            stats.random_draws += int(reason.endswith("random"))
            state.assign(record.id, partition)
            self.notify(
                state,
                Decision(
                    vertex=record.id,
                    partition=partition,
                    eligible=frozenset(i for i, s in enumerate(scores) if s is not None),
                    reason=reason,
                    scores=scores,
                ),
                stats,
            )


class HashingPartitioner(Partitioner):
    def __init__(
        self,
        k: int,
        mix: bool = True,
        seed: int = 0,
        order: str = "random",
        callbacks: Optional[Sequence[RunCallback]] = None,
    ) -> None:
        super().__init__(k=k, seed=seed, order=order, callbacks=callbacks)
        self.mix = mix

    @property
    def name(self) -> str:
        return "hashing"

    def new_state(self, graph: AdjacencyGraph) -> PartitionState:
        return PartitionState(k=self.k)

    def consume(
        self,
        stream: Iterator[VertexRecord],
        state: PartitionState,
        rng: np.random.Generator,
        stats: RunStats,
        graph: AdjacencyGraph,
    ) -> None:
        everything = frozenset(range(self.k))
        for record in stream:
            partition = hash_choose(record.id, self.k, mix=self.mix)
            state.assign(record.id, partition)
            self.notify(
                state,
                Decision(
                    vertex=record.id, partition=partition, eligible=everything, reason="hash"
                ),
                stats,
            )


ALGORITHMS = ("wstream", "ldg", "hashing")


def build_partitioner(
    algorithm: str,
    k: int,
    window: int = 100,
    slack: int = 100,
    epsilon: float = 0.0,
    seed: int = 0,
    order: str = "random",
    co_assign: bool = False,
    mix: bool = True,
    callbacks: Optional[Sequence[RunCallback]] = None,
) -> Partitioner:
    match algorithm:
        case "wstream":
            return WStreamPartitioner.from_config(
                PartitionerConfig(
                    k=k, window=window, slack=slack, seed=seed, co_assign=co_assign, order=order
                ),
                callbacks=callbacks,
            )
        case "ldg":
            return LDGPartitioner(
                k=k, epsilon=epsilon, seed=seed, order=order, callbacks=callbacks
            )
        case "hashing":
            return HashingPartitioner(
                k=k, mix=mix, seed=seed, order=order, callbacks=callbacks
            )
        case _:
            raise ConfigurationError(
                f"Unknown algorithm {algorithm!r}. Expected one of {list(ALGORITHMS)}."
            )


def run_baseline(
    graph: AdjacencyGraph,
    algorithm: str,
    config: LdgConfig | PartitionerConfig,
    mix: bool = True,
    callbacks: Optional[Sequence[RunCallback]] = None,
) -> tuple[PartitionState, RunStats]:
    if algorithm == "wstream":
        raise ConfigurationError("WStream is not a baseline; use partitioners.run.")
    return build_partitioner(
        algorithm,
        k=config.k,
        epsilon=getattr(config, "epsilon", 0.0),
        seed=config.seed,
        order=config.order,
        mix=mix,
        callbacks=callbacks,
    ).run(graph)
