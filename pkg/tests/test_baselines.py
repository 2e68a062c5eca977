from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from src.wstream.dataloaders.edgelist import (
    StreamOrder,
    VertexRecord,
    build_adjacency,
    generate_erdos_renyi,
    make_stream,
    parse_edge_list,
)
from src.wstream.evaluation.metrics import edge_cut_ratio
from src.wstream.models.baselines import (
    HashingPartitioner,
    LdgConfig,
    LDGPartitioner,
    build_partitioner,
    hash_choose,
    ldg_choose,
    ldg_choose_scored,
    ldg_scores,
    run_baseline,
)
from src.wstream.models.partitioners import PartitionerConfig, WStreamPartitioner
from src.wstream.models.state import PartitionState, capacity_bound
from src.wstream.utils.callbacks import DecisionRecorder
from src.wstream.utils.errors import CapacityExhaustedError, ConfigurationError

PATH = "1 2\n2 3\n3 4\n"
TRIANGLE = "1 2\n2 3\n3 1\n"
seeds = [0, 1, 7, 42]


def test_ldg_multiplicative_penalty() -> None:
    state = PartitionState(2)
    state.assign(2, 0)
    record = VertexRecord(3, (2, 4))
    assert LdgConfig(k=2).capacity(4) == 2
    assert ldg_scores(state, record, capacity=2) == [Fraction(1, 2), Fraction(0)]
    assert ldg_choose(state, record, 2, np.random.default_rng(0)) == 0


def test_ldg_no_assigned_neighbors_goes_to_min_load() -> None:
    state = PartitionState(3)
    state.assign(10, 0)
    state.assign(11, 2)
    rng = np.random.default_rng(0)
    partition, reason, _ = ldg_choose_scored(state, VertexRecord(1, (5,)), 10, rng)
    assert (partition, reason) == (1, "fallback_min_load")


def test_ldg_full_partition_is_ineligible() -> None:
    state = PartitionState(2)
    for vertex, partition in [(1, 0), (2, 0), (3, 1)]:
        state.assign(vertex, partition)
    # All neighbors sit in the full partition 0
    record = VertexRecord(4, (1, 2))
    assert ldg_scores(state, record, capacity=2)[0] is None
    assert ldg_choose(state, record, 2, np.random.default_rng(0)) == 1


def test_ldg_capacity_exhausted() -> None:
    state = PartitionState(2)
    for vertex, partition in [(1, 0), (2, 1)]:
        state.assign(vertex, partition)
    with pytest.raises(CapacityExhaustedError):
        ldg_choose(state, VertexRecord(3, (1,)), 1, np.random.default_rng(0))


@pytest.mark.parametrize("seed", seeds)
def test_ldg_path(seed: int) -> None:
    graph = build_adjacency(parse_edge_list(PATH))
    state, _ = run_baseline(graph, "ldg", LdgConfig(k=2, seed=seed, order="as_read"))
    assignment = state.assignment
    assert assignment[1] == assignment[2] != assignment[3] == assignment[4]
    assert state.loads == [2, 2]
    assert edge_cut_ratio(graph, state) == (1, 1 / 3)


def test_ldg_matches_brute_force() -> None:
    steps = 0
    for trial in range(30):
        graph = build_adjacency(generate_erdos_renyi(50, 0.1, seed=trial))
        k = 2 + trial % 4
        epsilon = [0.0, 0.1, 0.5][trial % 3]
        capacity = capacity_bound(graph.n, k, epsilon).l_max
        recorder = DecisionRecorder()
        LDGPartitioner(k=k, epsilon=epsilon, seed=trial, callbacks=[recorder]).run(graph)
        for decision, loads, assignment in zip(
            recorder.decisions, recorder.loads_before, recorder.assignment_before
        ):
            assert decision.scores is not None
            for p in range(k):
                count = sum(1 for u in graph.adjacency[decision.vertex] if assignment.get(u) == p)
                if loads[p] >= capacity:
                    assert decision.scores[p] is None
                else:
                    assert decision.scores[p] == count * (1 - Fraction(loads[p], capacity))
            assert loads[decision.partition] < capacity
            steps += 1
    assert steps >= 1000


@pytest.mark.parametrize("epsilon", [0.0, 0.05, 0.2])
def test_ldg_respects_capacity(epsilon: float) -> None:
    graph = build_adjacency(generate_erdos_renyi(400, 0.02, seed=5))
    state, _ = LDGPartitioner(k=8, epsilon=epsilon, seed=2).run(graph)
    assert max(state.loads) <= capacity_bound(graph.n, 8, epsilon).l_max
    assert sum(state.loads) == graph.n


def test_hash_choose() -> None:
    assert hash_choose(7, 4, mix=False) == 3
    assert all(hash_choose(v, 1) == 0 for v in range(100))
    assert hash_choose(123456789, 8) == hash_choose(123456789, 8)
    with pytest.raises(ConfigurationError):
        hash_choose(1, 0)


def test_hash_distribution() -> None:
    buckets = Counter(hash_choose(v, 8) for v in range(100_000))
    frequencies = np.array([buckets[p] for p in range(8)]) / 100_000
    assert np.all(np.abs(frequencies - 0.125) <= 0.01)


def test_hashing_triangle() -> None:
    graph = build_adjacency(parse_edge_list(TRIANGLE))
    state, _ = run_baseline(graph, "hashing", LdgConfig(k=3), mix=False)
    assert state.assignment == {1: 1, 2: 2, 3: 0}
    assert edge_cut_ratio(graph, state) == (3, 1.0)


@pytest.mark.parametrize("seed", seeds)
def test_hashing_ignores_stream_order(seed: int) -> None:
    graph = build_adjacency(generate_erdos_renyi(100, 0.05, seed=0))
    reference, _ = HashingPartitioner(k=4, seed=0).run(graph)
    state, _ = HashingPartitioner(k=4, seed=seed).run(graph)
    assert state == reference


def test_build_partitioner() -> None:
    assert isinstance(build_partitioner("wstream", k=2), WStreamPartitioner)
    assert isinstance(build_partitioner("ldg", k=2, epsilon=0.1), LDGPartitioner)
    hashing = build_partitioner("hashing", k=2, mix=False)
    assert isinstance(hashing, HashingPartitioner) and not hashing.mix
    with pytest.raises(ConfigurationError):
        build_partitioner("metis", k=2)


def test_run_baseline_rejects_wstream() -> None:
    graph = build_adjacency(parse_edge_list(TRIANGLE))
    with pytest.raises(ConfigurationError):
        run_baseline(graph, "wstream", PartitionerConfig(k=2))
    with pytest.raises(ConfigurationError):
        LdgConfig(k=2, epsilon=-0.1)


@pytest.mark.parametrize("seed", [0, 5, 42])
def test_run_streams_in_seeded_order(seed: int) -> None:
    graph = build_adjacency(generate_erdos_renyi(60, 0.1, seed=seed))
    recorder = DecisionRecorder()
    HashingPartitioner(k=3, seed=seed, callbacks=[recorder]).run(graph)
    expected = [r.id for r in make_stream(graph, StreamOrder.uniform_random(seed))]
    assert [d.vertex for d in recorder.decisions] == expected
