import gzip
import io
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional, TextIO

import numpy as np

from src.wstream.utils.errors import ConfigurationError, EdgeListParseError

VERTEX_ID = re.compile(r"[0-9]+")
MAX_VERTEX_ID = 2**63 - 1


@dataclass(eq=False)
class EdgeList:
    """Normalized undirected edge list.

    Pairs are stored in canonical ``u < v`` orientation, without self-loops or
    duplicates, in the order in which they first appear in the source.
    ``vertex_order`` keeps the order in which vertex ids first appear.
    """

    edges: list[tuple[int, int]] = field(default_factory=list)
    vertex_order: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeList):
            return NotImplemented
        return set(self.edges) == set(other.edges)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "EdgeList":
        edges: list[tuple[int, int]] = []
        seen_edges: set[tuple[int, int]] = set()
        vertex_order: list[int] = []
        seen_vertices: set[int] = set()
        for u, v in pairs:
            # Only endpoints of kept edges become vertices
            if u == v:
                continue
            edge = (u, v) if u < v else (v, u)
            if edge in seen_edges:
                continue
            seen_edges.add(edge)
            edges.append(edge)
            for w in (u, v):
                if w not in seen_vertices:
                    seen_vertices.add(w)
                    vertex_order.append(w)
        return cls(edges=edges, vertex_order=vertex_order)


@dataclass(frozen=True)
class VertexRecord:
    """One stream tuple: a vertex and its complete neighbor list."""

    id: int
    neighbors: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.neighbors)


class AdjacencyGraph:
    def __init__(self, adjacency: dict[int, tuple[int, ...]], m: int) -> None:
        """Undirected graph stored as symmetric sorted neighbor lists.

        Args:
            adjacency (dict[int, tuple[int, ...]]): Vertex id to sorted neighbor ids.
                Iteration order is the first-appearance order of the vertices.
            m (int): Number of undirected edges.
        """
        self.adjacency = adjacency
        self.m = m

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def vertices(self) -> list[int]:
        return list(self.adjacency)

    def degree(self, vertex: int) -> int:
        return len(self.adjacency[vertex])

    def record(self, vertex: int) -> VertexRecord:
        return VertexRecord(id=vertex, neighbors=self.adjacency[vertex])

    @property
    def edges(self) -> np.ndarray:
        """Canonical (m, 2) array of edges with u < v, sorted."""
        pairs = [
            (u, v) for u, neighbors in self.adjacency.items() for v in neighbors if u < v
        ]
        if not pairs:
            return np.empty((0, 2), dtype=np.int64)
        edges = np.array(pairs, dtype=np.int64)
        return edges[np.lexsort((edges[:, 1], edges[:, 0]))]

    def __repr__(self) -> str:
        return f"AdjacencyGraph(n={self.n}, m={self.m})"


class OrderKind(str, Enum):
    AS_READ = "as_read"
    UNIFORM_RANDOM = "random"


@dataclass(frozen=True)
class StreamOrder:
    kind: OrderKind = OrderKind.UNIFORM_RANDOM
    seed: Optional[int] = None

    @classmethod
    def as_read(cls) -> "StreamOrder":
        return cls(kind=OrderKind.AS_READ)

    @classmethod
    def uniform_random(cls, seed: int) -> "StreamOrder":
        return cls(kind=OrderKind.UNIFORM_RANDOM, seed=seed)

    @classmethod
    def from_name(cls, name: str, seed: Optional[int] = None) -> "StreamOrder":
        try:
            kind = OrderKind(name)
        except ValueError:
            raise ConfigurationError(
                f"Unknown stream order {name!r}. "
                f"Expected one of {[kind.value for kind in OrderKind]}."
            )
        if kind is OrderKind.UNIFORM_RANDOM and seed is None:
            raise ConfigurationError("A random stream order requires a seed.")
        return cls(kind=kind, seed=seed if kind is OrderKind.UNIFORM_RANDOM else None)

    def __str__(self) -> str:
        return self.kind.value


def _parse_pairs(lines: Iterable[str]) -> Iterator[tuple[int, int]]:
    for line_number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 2:
            raise EdgeListParseError(
                line_number, line.rstrip("\n"), f"expected 2 tokens, got {len(tokens)}"
            )
        if not all(VERTEX_ID.fullmatch(token) for token in tokens):
            raise EdgeListParseError(
                line_number, line.rstrip("\n"), "vertex ids must be non-negative integers"
            )
        u, v = int(tokens[0]), int(tokens[1])
        if max(u, v) > MAX_VERTEX_ID:
            raise EdgeListParseError(
                line_number, line.rstrip("\n"), f"vertex id exceeds {MAX_VERTEX_ID}"
            )
        yield u, v


def parse_edge_list(text: str | TextIO) -> EdgeList:
    """Parse a SNAP-style edge list.

    Args:
        text (str | TextIO): Whitespace-separated integer pairs, one per line.
            Lines starting with '#' are comments.

    Returns:
        EdgeList: Normalized edge list; directed inputs are symmetrized.
    """
    lines = io.StringIO(text) if isinstance(text, str) else text
    return EdgeList.from_pairs(_parse_pairs(lines))


def read_edge_list(path: Path | str) -> EdgeList:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rt", encoding="utf-8") as f:
            return parse_edge_list(f)
    with open(path, "r", encoding="utf-8") as f:
        return parse_edge_list(f)


def serialize_edge_list(edge_list: EdgeList) -> str:
    return "".join(f"{u} {v}\n" for u, v in sorted(edge_list.edges))


def build_adjacency(edge_list: EdgeList) -> AdjacencyGraph:
    neighbor_sets: dict[int, set[int]] = {v: set() for v in edge_list.vertex_order}
    for u, v in edge_list.edges:
        neighbor_sets[u].add(v)
        neighbor_sets[v].add(u)
    adjacency = {v: tuple(sorted(nbrs)) for v, nbrs in neighbor_sets.items()}
    return AdjacencyGraph(adjacency=adjacency, m=len(edge_list.edges))


def uniform_index(rng: np.random.Generator, size: int) -> int:
    """Uniform index in ``[0, size)`` drawn from a single double of the generator."""
    return min(int(rng.random() * size), size - 1)


def shuffle_in_place(items: list, rng: np.random.Generator) -> None:
    """Fisher-Yates shuffle, swapping position i with a uniform j <= i from the back."""
    for i in range(len(items) - 1, 0, -1):
        j = uniform_index(rng, i + 1)
        items[i], items[j] = items[j], items[i]


def make_stream(
    graph: AdjacencyGraph, order: StreamOrder, rng: Optional[np.random.Generator] = None
) -> Iterator[VertexRecord]:
    """Replay a graph as a one-pass stream of vertex records.

    The random permutation is drawn when the stream is created, so a generator
    shared with the consumer gives the shuffle its first draws.

    Args:
        graph (AdjacencyGraph): Graph to stream.
        order (StreamOrder): Either first-appearance order or a seeded uniform
            Fisher-Yates permutation.
        rng (Optional[np.random.Generator], optional): Generator for the
            permutation. Defaults to a PCG64 generator seeded with ``order.seed``.

    Returns:
        Iterator[VertexRecord]: Every vertex exactly once with its full neighbor list.
    """
    vertices = list(graph.vertices)
    if order.kind is OrderKind.UNIFORM_RANDOM:
        assert order.seed is not None, "A random stream order requires a seed."
        if rng is None:
            rng = np.random.default_rng(order.seed)
        shuffle_in_place(vertices, rng)
    return (graph.record(vertex) for vertex in vertices)


def generate_erdos_renyi(n: int, p: float, seed: int) -> EdgeList:
    """Sample a G(n, p) graph. Vertices left without edges are not represented."""
    if n < 0 or not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"Invalid Erdos-Renyi parameters {n=}, {p=}.")
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < p
    return EdgeList.from_pairs(zip(rows[keep].tolist(), cols[keep].tolist()))
