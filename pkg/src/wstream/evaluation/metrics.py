from abc import ABC, abstractmethod, abstractproperty
from dataclasses import asdict, dataclass
from typing import Any, Sequence

import numpy as np

from src.wstream.dataloaders.edgelist import AdjacencyGraph
from src.wstream.models.partitioners import Partitioner
from src.wstream.models.state import PartitionState
from src.wstream.utils.errors import ConfigurationError, IncompleteAssignmentError


@dataclass
class QualityReport:
    edge_cut_ratio: float
    cut_edges: int
    load_imbalance: float
    loads: list[int]
    elapsed: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def partition_array(graph: AdjacencyGraph, state: PartitionState) -> tuple[np.ndarray, np.ndarray]:
    """Sorted vertex ids of the graph and the partition of each of them."""
    vertex_ids = np.array(sorted(graph.adjacency), dtype=np.int64)
    partitions = np.empty(vertex_ids.size, dtype=np.int64)
    for i, vertex in enumerate(vertex_ids.tolist()):
        partition = state.partition_of(vertex)
        if partition is None:
            raise IncompleteAssignmentError(vertex)
        partitions[i] = partition
    return vertex_ids, partitions


def edge_cut_ratio(graph: AdjacencyGraph, state: PartitionState) -> tuple[int, float]:
    """Count the edges whose endpoints lie in different partitions.

    Args:
        graph (AdjacencyGraph): Partitioned graph.
        state (PartitionState): Assignment covering every vertex of the graph.

    Returns:
        tuple[int, float]: Number of cut edges and their fraction of all edges
            (0 for an edgeless graph).
    """
    vertex_ids, partitions = partition_array(graph, state)
    # Each undirected edge appears once in the canonical edge array
    edges = graph.edges
    if edges.shape[0] == 0:
        return 0, 0.0
    endpoint_partitions = partitions[np.searchsorted(vertex_ids, edges)]
    cut_edges = int(np.count_nonzero(endpoint_partitions[:, 0] != endpoint_partitions[:, 1]))
    return cut_edges, cut_edges / graph.m


def load_imbalance(loads: Sequence[int]) -> float:
    """Population standard deviation of the partition loads."""
    if len(loads) == 0:
        raise ConfigurationError("Load imbalance is undefined for an empty load vector.")
    return float(np.std(np.asarray(loads, dtype=np.float64)))


def quality_report(
    graph: AdjacencyGraph, state: PartitionState, elapsed: float = 0.0
) -> QualityReport:
    cut_edges, ratio = edge_cut_ratio(graph, state)
    return QualityReport(
        edge_cut_ratio=ratio,
        cut_edges=cut_edges,
        load_imbalance=load_imbalance(state.loads),
        loads=state.loads_snapshot(),
        elapsed=elapsed,
    )


def measure_run(graph: AdjacencyGraph, partitioner: Partitioner) -> QualityReport:
    """Run a partitioner and score the final assignment.

    The elapsed time spans stream creation through the last assignment; metrics
    are computed afterwards and are not timed.
    """
    state, stats = partitioner.run(graph)
    return quality_report(graph, state, elapsed=stats.elapsed)


class Metric(ABC):
    def __init__(self, graph: AdjacencyGraph) -> None:
        self.graph = graph

    @abstractmethod
    def __call__(self, state: PartitionState) -> dict[str, Any]: ...

    @abstractproperty
    def name(self) -> str: ...


class EdgeCutMetric(Metric):
    def __call__(self, state: PartitionState) -> dict[str, Any]:
        cut_edges, ratio = edge_cut_ratio(self.graph, state)
        return {"cut_edges": cut_edges, "edge_cut_ratio": ratio}

    @property
    def name(self) -> str:
        return "edge_cut"


class LoadImbalanceMetric(Metric):
    def __call__(self, state: PartitionState) -> dict[str, Any]:
        return {"load_imbalance": load_imbalance(state.loads)}

    @property
    def name(self) -> str:
        return "load_imbalance"


class LoadSpreadMetric(Metric):
    """Gap between the most and least loaded partitions, bounded by the slack."""

    def __call__(self, state: PartitionState) -> dict[str, Any]:
        return {"load_gap": state.gap, "max_load": max(state.loads), "min_load": min(state.loads)}

    @property
    def name(self) -> str:
        return "load_spread"


class MetricCollection:
    def __init__(self, graph: AdjacencyGraph, metrics: Sequence[type[Metric]]) -> None:
        self.metrics = [metric(graph) for metric in metrics]

    def __call__(self, state: PartitionState) -> dict[str, Any]:
        metric_dict: dict[str, Any] = {}
        for metric in self.metrics:
            metric_dict.update(metric(state))
        return dict(sorted(metric_dict.items(), key=lambda item: item[0]))


DEFAULT_METRICS: tuple[type[Metric], ...] = (
    EdgeCutMetric,
    LoadImbalanceMetric,
    LoadSpreadMetric,
)
