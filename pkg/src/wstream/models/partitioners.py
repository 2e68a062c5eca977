import logging
import time
from abc import ABC, abstractmethod, abstractproperty
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from src.wstream.dataloaders.edgelist import (
    AdjacencyGraph,
    StreamOrder,
    VertexRecord,
    make_stream,
    uniform_index,
)
from src.wstream.models.state import PartitionState
from src.wstream.models.window import StreamWindow
from src.wstream.utils.callbacks import RunCallback
from src.wstream.utils.dataclasses import Decision, RunStats
from src.wstream.utils.errors import ConfigurationError


class Partitioner(ABC):
    def __init__(
        self,
        k: int,
        seed: int = 0,
        order: str = "random",
        callbacks: Optional[Sequence[RunCallback]] = None,
    ) -> None:
        """One-pass streaming partitioner.

        Args:
            k (int): Number of partitions.
            seed (int, optional): Seed of the stream order and of every random draw.
                Defaults to 0.
            order (str, optional): Stream order, "random" or "as_read".
                Defaults to "random".
            callbacks (Optional[Sequence[RunCallback]], optional): Hooks called
                during the run. Defaults to None.
        """
        if k < 1:
            raise ConfigurationError(f"The number of partitions must be positive, got {k}.")
        if seed < 0:
            raise ConfigurationError(f"The seed must be non-negative, got {seed}.")
        self.k = k
        self.seed = seed
        self.stream_order = StreamOrder.from_name(order, seed)
        self.callbacks = list(callbacks) if callbacks is not None else []

    @abstractproperty
    def name(self) -> str: ...

    @abstractmethod
    def new_state(self, graph: AdjacencyGraph) -> PartitionState: ...

    @abstractmethod
    def consume(
        self,
        stream: Iterator[VertexRecord],
        state: PartitionState,
        rng: np.random.Generator,
        stats: RunStats,
        graph: AdjacencyGraph,
    ) -> None:
        """Assign every record of the stream exactly once."""
        ...

    def notify(self, state: PartitionState, decision: Decision, stats: RunStats) -> None:
        stats.record(decision, state.gap)
        for callback in self.callbacks:
            callback.on_assign(state, decision)

    def run(self, graph: AdjacencyGraph) -> tuple[PartitionState, RunStats]:
        # The clock covers stream creation and consumption
        start = time.perf_counter()
        # One PCG64 generator per run: the stream permutation draws first, then placements
        rng = np.random.default_rng(self.seed)
        stream = make_stream(graph, self.stream_order, rng)
        state = self.new_state(graph)
        stats = RunStats(algorithm=self.name)
        for callback in self.callbacks:
            callback.on_run_start(graph, state)

        self.consume(stream, state, rng, stats, graph)

        stats.elapsed = time.perf_counter() - start
        assert len(state) == graph.n, (
            f"{self.name} assigned {len(state)} vertices, expected {graph.n}."
        )
        for callback in self.callbacks:
            callback.on_run_end(state, stats)
        logging.debug(
            f"{self.name} partitioned {graph} into loads {state.loads} "
            f"in {stats.elapsed:.3f}s."
        )
        return state, stats


@dataclass(frozen=True)
class PartitionerConfig:
    k: int
    window: int = 100
    slack: int = 100
    seed: int = 0
    co_assign: bool = False
    order: str = "random"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigurationError(f"The number of partitions must be positive, got {self.k}.")
        if self.window < 1:
            raise ConfigurationError(f"The window size must be positive, got {self.window}.")
        if self.slack < 0:
            raise ConfigurationError(f"The balancing slack must be >= 0, got {self.slack}.")


@dataclass(frozen=True)
class GreedyScore:
    """Per-partition edge counts; ``None`` marks a partition excluded by the gate."""

    candidate_edges: tuple[Optional[int], ...]
    buffered_edges: tuple[Optional[int], ...]

    @property
    def total(self) -> tuple[Optional[int], ...]:
        return tuple(
            None if c is None or b is None else c + b
            for c, b in zip(self.candidate_edges, self.buffered_edges)
        )

    @property
    def eligible(self) -> list[int]:
        return [i for i, c in enumerate(self.candidate_edges) if c is not None]


def greedy_score(
    state: PartitionState,
    candidate: VertexRecord,
    buffered: Iterable[VertexRecord],
    eligible: Iterable[int],
) -> GreedyScore:
    """Count the edges of the candidate and of its buffered neighbors per partition.

    Args:
        state (PartitionState): Current assignment.
        candidate (VertexRecord): Vertex to place.
        buffered (Iterable[VertexRecord]): Buffered neighbors of the candidate.
        eligible (Iterable[int]): Partitions the balance gate leaves open.

    Returns:
        GreedyScore: Candidate and buffered edge counts for every eligible partition.
    """
    eligible = set(eligible)
    if not eligible:
        raise ConfigurationError("At least one partition must be eligible.")
    assert candidate.id not in state, f"Vertex {candidate.id} is already assigned."
    candidate_counts = state.edge_counts(candidate.neighbors)
    buffered_counts = [0] * state.k
    for record in buffered:
        for i, count in enumerate(state.edge_counts(record.neighbors)):
            buffered_counts[i] += count
    return GreedyScore(
        candidate_edges=tuple(
            count if i in eligible else None for i, count in enumerate(candidate_counts)
        ),
        buffered_edges=tuple(
            count if i in eligible else None for i, count in enumerate(buffered_counts)
        ),
    )


def break_ties(
    state: PartitionState, tied: Iterable[int], rng: np.random.Generator
) -> tuple[int, bool]:
    """Pick the least loaded partition among ``tied``, uniformly at random if needed.

    Returns:
        tuple[int, bool]: Chosen partition and whether a random draw was used.
    """
    lightest = state.min_load_partitions(tied)
    if len(lightest) == 1:
        return lightest[0], False
    return lightest[uniform_index(rng, len(lightest))], True


def choose_partition(
    state: PartitionState, score: GreedyScore, rng: np.random.Generator
) -> tuple[int, str]:
    totals = score.total
    eligible = score.eligible
    best = max(totals[i] for i in eligible)  # type: ignore
    if best == 0:
        partition, drew = break_ties(state, eligible, rng)
        return partition, "fallback_random" if drew else "fallback_min_load"
    argmax = [i for i in eligible if totals[i] == best]
    if len(argmax) == 1:
        return argmax[0], "argmax"
    partition, drew = break_ties(state, argmax, rng)
    return partition, "tie_random" if drew else "tie_min_load"


def greedy_choose(
    state: PartitionState,
    candidate: VertexRecord,
    buffered: Iterable[VertexRecord],
    eligible: Iterable[int],
    rng: np.random.Generator,
) -> int:
    score = greedy_score(state, candidate, buffered, eligible)
    partition, _ = choose_partition(state, score, rng)
    return partition


def eligible_partitions(state: PartitionState) -> tuple[set[int], bool]:
    """Partitions open to the next assignment and whether the balance gate is closed."""
    everything = set(range(state.k))
    if state.imbalance_exceeded():
        return everything - state.max_load_partitions(), True
    return everything, False


class WStreamPartitioner(Partitioner):
    def __init__(
        self,
        k: int,
        window: int = 100,
        slack: int = 100,
        seed: int = 0,
        co_assign: bool = False,
        order: str = "random",
        callbacks: Optional[Sequence[RunCallback]] = None,
    ) -> None:
        super().__init__(k=k, seed=seed, order=order, callbacks=callbacks)
        self.config = PartitionerConfig(
            k=k, window=window, slack=slack, seed=seed, co_assign=co_assign, order=order
        )

    @classmethod
    def from_config(
        cls, config: PartitionerConfig, callbacks: Optional[Sequence[RunCallback]] = None
    ) -> "WStreamPartitioner":
        return cls(
            k=config.k,
            window=config.window,
            slack=config.slack,
            seed=config.seed,
            co_assign=config.co_assign,
            order=config.order,
            callbacks=callbacks,
        )

    @property
    def name(self) -> str:
        return "wstream"

    def new_state(self, graph: AdjacencyGraph) -> PartitionState:
        return PartitionState(k=self.config.k, slack=self.config.slack)

    def consume(
        self,
        stream: Iterator[VertexRecord],
        state: PartitionState,
        rng: np.random.Generator,
        stats: RunStats,
        graph: AdjacencyGraph,
    ) -> None:
        window = StreamWindow(self.config.window)
        window.fill(stream)
        while len(window) > 0:
            self.step(state, window, stream, rng, stats)

    def step(
        self,
        state: PartitionState,
        window: StreamWindow,
        stream: Iterator[VertexRecord],
        rng: np.random.Generator,
        stats: RunStats,
    ) -> None:
        """Place the candidate vertex, then slide the window by one record."""
        candidate = window.candidate()
        buffered = window.buffered_neighbors(candidate)
        buffered_ids = tuple(sorted(r.id for r in buffered))

        if state.is_empty:
            # All partitions are empty: uniform random placement
            partition = uniform_index(rng, state.k)
            stats.random_draws += 1
            decision = Decision(
                vertex=candidate.id,
                partition=partition,
                eligible=frozenset(range(state.k)),
                reason="first",
                buffered=buffered_ids,
            )
        else:
            eligible, gated = eligible_partitions(state)
            stats.gate_activations += int(gated)
            score = greedy_score(state, candidate, buffered, eligible)
            partition, reason = choose_partition(state, score, rng)
            stats.random_draws += int(reason.endswith("random"))
            decision = Decision(
                vertex=candidate.id,
                partition=partition,
                eligible=frozenset(eligible),
                reason=reason,
                scores=score.total,
                buffered=buffered_ids,
            )
        state.assign(candidate.id, partition)
        self.notify(state, decision, stats)

        if self.config.co_assign:
            self.co_assign(state, window, candidate, buffered, partition, rng, stats)

        window.pop_candidate()
        window.fill(stream)

    def co_assign(
        self,
        state: PartitionState,
        window: StreamWindow,
        candidate: VertexRecord,
        buffered: set[VertexRecord],
        partition: int,
        rng: np.random.Generator,
        stats: RunStats,
    ) -> None:
        """Send the buffered neighbors of the candidate to the candidate's partition.

        The balance gate is re-checked before every placement; a neighbor whose
        target is closed gets its own greedy choice instead.
        """
        for record in sorted(buffered, key=lambda r: r.id):
            eligible, gated = eligible_partitions(state)
            stats.gate_activations += int(gated)
            if partition in eligible:
                target, reason, scores = partition, "co_assign", None
            else:
                own_buffered = window.neighbors_of(record) - {candidate}
                score = greedy_score(state, record, own_buffered, eligible)
                target, reason = choose_partition(state, score, rng)
                stats.random_draws += int(reason.endswith("random"))
                scores = score.total
            state.assign(record.id, target)
            window.remove_by_id(record.id)
            self.notify(
                state,
                Decision(
                    vertex=record.id,
                    partition=target,
                    eligible=frozenset(eligible),
                    reason=reason,
                    scores=scores,
                    co_assigned=True,
                ),
                stats,
            )


def run(
    graph: AdjacencyGraph,
    config: PartitionerConfig,
    callbacks: Optional[Sequence[RunCallback]] = None,
) -> tuple[PartitionState, RunStats]:
    return WStreamPartitioner.from_config(config, callbacks=callbacks).run(graph)
