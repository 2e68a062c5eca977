from collections import deque
from typing import Iterator

from src.wstream.dataloaders.edgelist import VertexRecord
from src.wstream.utils.errors import ConfigurationError, EmptyWindowError, VertexNotFoundError


class StreamWindow:
    def __init__(self, capacity: int) -> None:
        """Bounded FIFO of upcoming vertex records.

        The front record is the candidate vertex; the other records that are
        neighbors of the candidate are its buffered vertices.

        Args:
            capacity (int): Window size W, at least 1.
        """
        if capacity < 1:
            raise ConfigurationError(f"Window capacity must be positive, got {capacity}.")
        self.capacity = capacity
        self.buffer: deque[VertexRecord] = deque()
        self.membership: dict[int, VertexRecord] = {}

    def __len__(self) -> int:
        return len(self.buffer)

    def __contains__(self, vertex: int) -> bool:
        return vertex in self.membership

    def __iter__(self) -> Iterator[VertexRecord]:
        return iter(self.buffer)

    @property
    def is_full(self) -> bool:
        return len(self.buffer) >= self.capacity

    def fill(self, stream: Iterator[VertexRecord]) -> int:
        """Pull records until the window is full or the stream is exhausted.

        Returns:
            int: Number of records pulled.
        """
        pulled = 0
        while len(self.buffer) < self.capacity:
            record = next(stream, None)
            if record is None:
                break
            assert record.id not in self.membership, f"Vertex {record.id} streamed twice."
            self.buffer.append(record)
            self.membership[record.id] = record
            pulled += 1
        return pulled

    def candidate(self) -> VertexRecord:
        if not self.buffer:
            raise EmptyWindowError("The stream window is empty.")
        return self.buffer[0]

    def neighbors_of(self, record: VertexRecord) -> set[VertexRecord]:
        """Window records other than ``record`` that are adjacent to it."""
        # Iterate over the smaller side of the intersection
        if len(record.neighbors) <= len(self.membership):
            return {
                self.membership[u]
                for u in record.neighbors
                if u in self.membership and u != record.id
            }
        neighbors = set(record.neighbors)
        return {r for r in self.buffer if r.id in neighbors and r.id != record.id}

    def buffered_neighbors(self, candidate: VertexRecord) -> set[VertexRecord]:
        assert (
            self.buffer and self.buffer[0].id == candidate.id
        ), f"Vertex {candidate.id} is not the current candidate."
        return self.neighbors_of(candidate)

    def pop_candidate(self) -> VertexRecord:
        if not self.buffer:
            raise EmptyWindowError("The stream window is empty.")
        record = self.buffer.popleft()
        del self.membership[record.id]
        return record

    def remove_by_id(self, vertex: int) -> VertexRecord:
        record = self.membership.pop(vertex, None)
        if record is None:
            raise VertexNotFoundError(vertex)
        self.buffer.remove(record)
        return record

    def __repr__(self) -> str:
        return f"StreamWindow(capacity={self.capacity}, ids={[r.id for r in self.buffer]})"
