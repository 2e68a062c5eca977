import numpy as np
import pytest

from src.wstream.dataloaders.edgelist import (
    AdjacencyGraph,
    VertexRecord,
    build_adjacency,
    generate_erdos_renyi,
    parse_edge_list,
)
from src.wstream.evaluation.metrics import edge_cut_ratio
from src.wstream.models.partitioners import (
    PartitionerConfig,
    WStreamPartitioner,
    choose_partition,
    eligible_partitions,
    greedy_choose,
    greedy_score,
    run,
)
from src.wstream.models.state import PartitionState
from src.wstream.utils.callbacks import BalanceMonitor, DecisionRecorder
from src.wstream.utils.errors import ConfigurationError

TRIANGLE = "1 2\n2 3\n3 1\n"
PATH = "1 2\n2 3\n3 4\n"
seeds = [0, 1, 7, 42]


def graph_from(text: str) -> AdjacencyGraph:
    return build_adjacency(parse_edge_list(text))


def state_with_loads(loads: list[int], slack: int = 0) -> PartitionState:
    state = PartitionState(k=len(loads), slack=slack)
    vertex = 1000
    for partition, load in enumerate(loads):
        for _ in range(load):
            state.assign(vertex, partition)
            vertex += 1
    return state


def test_greedy_score_counts_candidate_and_buffered_edges() -> None:
    state = PartitionState(2)
    state.assign(2, 0)
    candidate = VertexRecord(3, (2, 4))
    buffered = {VertexRecord(4, (3,))}
    score = greedy_score(state, candidate, buffered, {0, 1})
    assert score.candidate_edges == (1, 0)
    assert score.buffered_edges == (0, 0)
    assert score.total == (1, 0)
    assert greedy_choose(state, candidate, buffered, {0, 1}, np.random.default_rng(0)) == 0


def test_greedy_score_empty_assignment() -> None:
    state = PartitionState(3)
    score = greedy_score(state, VertexRecord(1, (2, 3)), set(), range(3))
    assert score.total == (0, 0, 0)


def test_greedy_score_full_containment() -> None:
    state = PartitionState(3)
    for vertex in (2, 3, 4):
        state.assign(vertex, 1)
    score = greedy_score(state, VertexRecord(1, (2, 3, 4)), set(), range(3))
    assert score.total == (0, 3, 0)


def test_greedy_score_excludes_ineligible() -> None:
    state = PartitionState(3)
    state.assign(2, 1)
    score = greedy_score(state, VertexRecord(1, (2,)), set(), {0, 2})
    assert score.total == (0, None, 0)
    assert score.eligible == [0, 2]
    with pytest.raises(ConfigurationError):
        greedy_score(state, VertexRecord(1, (2,)), set(), set())


def test_tie_resolved_by_lower_load() -> None:
    state = state_with_loads([5, 3], slack=100)
    candidate = VertexRecord(1, (1000, 1001, 1005, 1006))
    score = greedy_score(state, candidate, set(), {0, 1})
    assert score.total == (2, 2)
    assert choose_partition(state, score, np.random.default_rng(0)) == (1, "tie_min_load")


@pytest.mark.parametrize("seed", seeds)
def test_zero_scores_draw_deterministically(seed: int) -> None:
    state = state_with_loads([4, 4], slack=100)
    score = greedy_score(state, VertexRecord(1, ()), set(), {0, 1})
    first = choose_partition(state, score, np.random.default_rng(seed))
    second = choose_partition(state, score, np.random.default_rng(seed))
    assert first == second
    assert first[0] in {0, 1}
    assert first[1] == "fallback_random"


def test_zero_scores_fall_back_to_min_load() -> None:
    state = state_with_loads([4, 2, 3], slack=100)
    score = greedy_score(state, VertexRecord(1, ()), set(), range(3))
    assert choose_partition(state, score, np.random.default_rng(0)) == (1, "fallback_min_load")


@pytest.mark.parametrize("loads, expected", [([5, 2], 1), ([3, 2], 0)])
def test_balance_gate(loads: list[int], expected: int) -> None:
    state = state_with_loads(loads, slack=3)
    candidate = VertexRecord(1, tuple(range(1000, 1000 + loads[0])))
    eligible, gated = eligible_partitions(state)
    assert gated is (loads[0] - loads[1] >= 3)
    assert greedy_choose(state, candidate, set(), eligible, np.random.default_rng(0)) == expected


def test_gate_excludes_every_tied_max() -> None:
    state = state_with_loads([3, 1, 3], slack=2)
    eligible, gated = eligible_partitions(state)
    assert gated
    assert eligible == {1}


def test_config_validation() -> None:
    with pytest.raises(ConfigurationError):
        PartitionerConfig(k=0)
    with pytest.raises(ConfigurationError):
        PartitionerConfig(k=2, window=0)
    with pytest.raises(ConfigurationError):
        PartitionerConfig(k=2, slack=-1)
    with pytest.raises(ConfigurationError):
        WStreamPartitioner(k=2, seed=-1)
    with pytest.raises(ConfigurationError):
        WStreamPartitioner(k=2, order="sorted")


def test_triangle_single_partition() -> None:
    graph = graph_from(TRIANGLE)
    state, stats = run(graph, PartitionerConfig(k=1, window=3, slack=0))
    assert state.assignment == {1: 0, 2: 0, 3: 0}
    assert edge_cut_ratio(graph, state) == (0, 0.0)
    assert state.to_bytes() == b"wstream-meta v1 k=1 slack=0\n1\t0\n2\t0\n3\t0\n"
    assert stats.steps == 3


@pytest.mark.parametrize("seed", seeds)
def test_path_strict_balance(seed: int) -> None:
    graph = graph_from(PATH)
    config = PartitionerConfig(k=2, window=4, slack=0, seed=seed, order="as_read")
    state, stats = run(graph, config)
    assignment = state.assignment
    # First vertex is drawn at random, the gate then alternates the partitions
    assert assignment[2] == assignment[3] != assignment[1]
    assert assignment[4] == assignment[1]
    assert state.loads == [2, 2]
    assert edge_cut_ratio(graph, state) == (2, 2 / 3)
    assert stats.reasons == {"first": 1, "fallback_min_load": 2, "argmax": 1}
    assert stats.gate_activations == 2



test_data_path_golden = [
    ("as_read", 0, {"first": 1, "fallback_min_load": 2, "argmax": 1}),
    ("random", 42, {"first": 1, "fallback_min_load": 2, "tie_random": 1}),
]


@pytest.mark.parametrize("order, seed, reasons", test_data_path_golden)
def test_path_golden_metadata(order: str, seed: int, reasons: dict[str, int]) -> None:
    config = PartitionerConfig(k=2, window=4, slack=0, seed=seed, order=order)
    state, stats = run(graph_from(PATH), config)
    assert state.to_bytes() == b"wstream-meta v1 k=2 slack=0\n1\t1\n2\t0\n3\t0\n4\t1\n"
    assert stats.reasons == reasons


@pytest.mark.parametrize("seed", seeds)
def test_run_is_deterministic(seed: int) -> None:
    graph = build_adjacency(generate_erdos_renyi(200, 0.03, seed=seed))
    config = PartitionerConfig(k=4, window=20, slack=5, seed=seed)
    first, _ = run(graph, config)
    second, _ = run(graph, config)
    assert first.to_bytes() == second.to_bytes()


@pytest.mark.parametrize("co_assign", [False, True])
@pytest.mark.parametrize("k, window, slack", [(2, 1, 0), (4, 10, 1), (8, 50, 5), (3, 200, 0)])
def test_conservation_and_balance(co_assign: bool, k: int, window: int, slack: int) -> None:
    graph = build_adjacency(generate_erdos_renyi(300, 0.02, seed=k + window))
    monitor = BalanceMonitor()
    partitioner = WStreamPartitioner(
        k=k, window=window, slack=slack, seed=3, co_assign=co_assign, callbacks=[monitor]
    )
    state, stats = partitioner.run(graph)
    assert sorted(state.assignment) == sorted(graph.vertices)
    assert sum(state.loads) == graph.n
    assert monitor.violations == []
    assert stats.peak_gap <= max(slack, 1)
    assert stats.steps == graph.n
    if not co_assign:
        assert stats.co_assigned == 0


def test_window_one_has_no_buffered_vertices() -> None:
    graph = build_adjacency(generate_erdos_renyi(100, 0.05, seed=1))
    recorder = DecisionRecorder()
    WStreamPartitioner(k=4, window=1, slack=10, seed=1, callbacks=[recorder]).run(graph)
    assert len(recorder.decisions) == graph.n
    assert all(decision.buffered == () for decision in recorder.decisions)


def test_co_assign_places_buffered_neighbors_together() -> None:
    # Star centered on 1: every leaf is in the window when 1 is the candidate
    graph = graph_from("1 2\n1 3\n1 4\n1 5\n")
    recorder = DecisionRecorder()
    partitioner = WStreamPartitioner(
        k=2, window=5, slack=10, seed=0, co_assign=True, order="as_read", callbacks=[recorder]
    )
    state, stats = partitioner.run(graph)
    assert len(set(state.assignment.values())) == 1
    assert stats.co_assigned == 4
    assert [d.vertex for d in recorder.decisions] == [1, 2, 3, 4, 5]
    assert all(d.reason == "co_assign" for d in recorder.decisions[1:])


def test_co_assign_respects_gate() -> None:
    graph = graph_from("1 2\n1 3\n1 4\n1 5\n")
    monitor = BalanceMonitor()
    partitioner = WStreamPartitioner(
        k=2, window=5, slack=1, seed=0, co_assign=True, order="as_read", callbacks=[monitor]
    )
    state, _ = partitioner.run(graph)
    assert monitor.violations == []
    assert sorted(state.loads) == [2, 3]


def test_decisions_match_brute_force() -> None:
    rng = np.random.default_rng(11)
    steps = 0
    for trial in range(30):
        graph = build_adjacency(generate_erdos_renyi(40, 0.15, seed=trial))
        k = int(rng.integers(2, 6))
        window = int(rng.integers(1, 12))
        slack = int(rng.integers(0, 4))
        recorder = DecisionRecorder()
        WStreamPartitioner(
            k=k, window=window, slack=slack, seed=trial, callbacks=[recorder]
        ).run(graph)
        for decision, loads, assignment in zip(
            recorder.decisions, recorder.loads_before, recorder.assignment_before
        ):
            if decision.reason == "first":
                assert not assignment
                continue
            # Gate: partitions at the maximum load are closed once the gap hits the bound
            if max(loads) - min(loads) >= max(slack, 1):
                eligible = {i for i in range(k) if loads[i] != max(loads)}
            else:
                eligible = set(range(k))
            assert decision.eligible == eligible
            totals = {}
            for p in eligible:
                total = sum(1 for u in graph.adjacency[decision.vertex] if assignment.get(u) == p)
                for b in decision.buffered:
                    total += sum(1 for u in graph.adjacency[b] if assignment.get(u) == p)
                totals[p] = total
                assert decision.scores is not None
                assert decision.scores[p] == total
            best = max(totals.values())
            if best > 0:
                winners = {p for p in eligible if totals[p] == best}
            else:
                winners = set(eligible)
            lightest = min(loads[p] for p in winners)
            assert decision.partition in winners
            assert loads[decision.partition] == lightest
            steps += 1
    assert steps >= 1000
