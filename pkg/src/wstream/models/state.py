import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Optional

from src.wstream.dataloaders.edgelist import MAX_VERTEX_ID
from src.wstream.utils.errors import (
    AlreadyAssignedError,
    ConfigurationError,
    MetadataFormatError,
)

METADATA_VERSION = "v1"
HEADER_PATTERN = re.compile(r"^wstream-meta (v[0-9]+) k=([0-9]+) slack=([0-9]+)$")
FIELD_PATTERN = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class CapacityBound:
    """Maximum partition load ``(1 + epsilon) * ceil(n / k)``, rounded up."""

    n: int
    k: int
    epsilon: float
    l_max: int

    @property
    def ideal(self) -> int:
        return math.ceil(self.n / self.k)


def capacity_bound(n: int, k: int, epsilon: float = 0.0) -> CapacityBound:
    if k < 1:
        raise ConfigurationError(f"The number of partitions must be positive, got {k}.")
    if epsilon < 0:
        raise ConfigurationError(f"Capacity slack epsilon must be >= 0, got {epsilon}.")
    ideal = math.ceil(n / k)
    # Round before the ceiling so that e.g. 1.1 * 10 does not become 12
    l_max = max(ideal, math.ceil(round((1 + epsilon) * ideal, 9)))
    return CapacityBound(n=n, k=k, epsilon=epsilon, l_max=l_max)


class PartitionState:
    def __init__(self, k: int, slack: int = 0) -> None:
        """Vertex to partition metadata store.

        Args:
            k (int): Number of partitions.
            slack (int, optional): Balancing parameter, the tolerated gap in vertex
                count between the most and least loaded partitions. 0 means
                strict balance. Defaults to 0.
        """
        if k < 1:
            raise ConfigurationError(f"The number of partitions must be positive, got {k}.")
        if slack < 0:
            raise ConfigurationError(f"The balancing slack must be >= 0, got {slack}.")
        self.k = k
        self.slack = slack
        self.assignment: dict[int, int] = {}
        self.loads: list[int] = [0] * k

    def __len__(self) -> int:
        return len(self.assignment)

    def __contains__(self, vertex: int) -> bool:
        return vertex in self.assignment

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartitionState):
            return NotImplemented
        return (
            self.k == other.k
            and self.slack == other.slack
            and self.assignment == other.assignment
            and self.loads == other.loads
        )

    def __repr__(self) -> str:
        return f"PartitionState(k={self.k}, slack={self.slack}, loads={self.loads})"

    @property
    def is_empty(self) -> bool:
        return not self.assignment

    def assign(self, vertex: int, partition: int) -> None:
        if not 0 <= partition < self.k:
            raise IndexError(f"Partition {partition} is out of range [0, {self.k}).")
        if vertex in self.assignment:
            raise AlreadyAssignedError(vertex, self.assignment[vertex])
        self.assignment[vertex] = partition
        self.loads[partition] += 1

    def partition_of(self, vertex: int) -> Optional[int]:
        return self.assignment.get(vertex)

    def edges_into(self, neighbors: Iterable[int], partition: int) -> int:
        """Number of ``neighbors`` already assigned to ``partition``."""
        if not 0 <= partition < self.k:
            raise IndexError(f"Partition {partition} is out of range [0, {self.k}).")
        return sum(1 for u in neighbors if self.assignment.get(u) == partition)

    def edge_counts(self, neighbors: Iterable[int]) -> list[int]:
        """``edges_into`` for every partition in a single pass."""
        counts = [0] * self.k
        for u in neighbors:
            partition = self.assignment.get(u)
            if partition is not None:
                counts[partition] += 1
        return counts

    def max_load_partitions(self) -> set[int]:
        max_load = max(self.loads)
        return {i for i, load in enumerate(self.loads) if load == max_load}

    def min_load_partitions(self, among: Optional[Iterable[int]] = None) -> list[int]:
        candidates = sorted(range(self.k) if among is None else set(among))
        assert candidates, "Cannot take the minimum load over no partition."
        min_load = min(self.loads[i] for i in candidates)
        return [i for i in candidates if self.loads[i] == min_load]

    @property
    def gap(self) -> int:
        return max(self.loads) - min(self.loads)

    @property
    def balance_threshold(self) -> int:
        # slack 0 is strict balance: the gate closes as soon as the gap reaches 1
        return max(self.slack, 1)

    def imbalance_exceeded(self) -> bool:
        return self.gap >= self.balance_threshold

    def loads_snapshot(self) -> list[int]:
        return list(self.loads)

    def to_bytes(self) -> bytes:
        lines = [f"wstream-meta {METADATA_VERSION} k={self.k} slack={self.slack}\n"]
        lines.extend(
            f"{vertex}\t{partition}\n"
            for vertex, partition in sorted(self.assignment.items())
        )
        return "".join(lines).encode("utf-8")


def persist_metadata(state: PartitionState, sink: BinaryIO) -> None:
    sink.write(state.to_bytes())


def load_metadata(source: BinaryIO) -> PartitionState:
    """Read a metadata file written by ``persist_metadata``.

    Raises:
        MetadataFormatError: On a bad header, a malformed line, a partition index
            outside the header's k or a vertex listed twice.
    """
    offset = 0
    header_bytes = source.readline()
    try:
        header = header_bytes.decode("utf-8")
    except UnicodeDecodeError:
        raise MetadataFormatError("header is not valid UTF-8", 1, 0)
    match = HEADER_PATTERN.match(header.rstrip("\n"))
    if match is None or not header.endswith("\n"):
        raise MetadataFormatError(f"invalid header {header!r}", 1, 0)
    version, k, slack = match.group(1), int(match.group(2)), int(match.group(3))
    if version != METADATA_VERSION:
        raise MetadataFormatError(f"unsupported version {version}", 1, 0)
    if k < 1:
        raise MetadataFormatError(f"invalid partition count k={k}", 1, 0)
    state = PartitionState(k=k, slack=slack)
    offset += len(header_bytes)

    for line_number, raw in enumerate(source, start=2):
        try:
            line = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise MetadataFormatError("line is not valid UTF-8", line_number, offset)
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 2 or not all(FIELD_PATTERN.fullmatch(f) for f in fields):
            raise MetadataFormatError(
                f"expected 'vertex<TAB>partition', got {line!r}", line_number, offset
            )
        vertex, partition = int(fields[0]), int(fields[1])
        if vertex > MAX_VERTEX_ID:
            raise MetadataFormatError(
                f"vertex id {vertex} exceeds {MAX_VERTEX_ID}", line_number, offset
            )
        if partition >= k:
            raise MetadataFormatError(
                f"partition {partition} does not exist for k={k}", line_number, offset
            )
        if vertex in state:
            raise MetadataFormatError(f"vertex {vertex} listed twice", line_number, offset)
        state.assign(vertex, partition)
        offset += len(raw)
    return state


def save_metadata(state: PartitionState, path: Path | str) -> None:
    with open(path, "wb") as f:
        persist_metadata(state, f)


def read_metadata(path: Path | str) -> PartitionState:
    with open(path, "rb") as f:
        return load_metadata(f)
