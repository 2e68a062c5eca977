from typing import TYPE_CHECKING, Optional

from tqdm import tqdm

from src.wstream.utils.dataclasses import Decision, RunStats

if TYPE_CHECKING:
    from src.wstream.dataloaders.edgelist import AdjacencyGraph
    from src.wstream.models.state import PartitionState


class RunCallback:
    """Hooks called by a partitioner while it consumes the vertex stream."""

    def on_run_start(self, graph: "AdjacencyGraph", state: "PartitionState") -> None: ...

    def on_assign(self, state: "PartitionState", decision: Decision) -> None: ...

    def on_run_end(self, state: "PartitionState", stats: RunStats) -> None: ...


class BalanceMonitor(RunCallback):
    def __init__(self, bound: Optional[int] = None) -> None:
        """Check the load gap after every assignment.

        Args:
            bound (Optional[int], optional): Largest tolerated max-min gap. Defaults
                to the state's balance threshold, i.e. the slack (1 for strict balance).
        """
        self.bound = bound
        self.violations: list[tuple[int, int, list[int]]] = []

    def on_run_start(self, graph: "AdjacencyGraph", state: "PartitionState") -> None:
        if self.bound is None:
            self.bound = state.balance_threshold
        self.violations = []

    def on_assign(self, state: "PartitionState", decision: Decision) -> None:
        assert self.bound is not None
        if state.gap > self.bound:
            self.violations.append((len(state), decision.vertex, state.loads_snapshot()))


class DecisionRecorder(RunCallback):
    """Keep every decision with the loads and assignment seen just before it.

    Copies the assignment at every step, so only meant for small runs.
    """

    def __init__(self) -> None:
        self.decisions: list[Decision] = []
        self.loads_before: list[list[int]] = []
        self.assignment_before: list[dict[int, int]] = []
        self._loads: list[int] = []
        self._assignment: dict[int, int] = {}

    def on_run_start(self, graph: "AdjacencyGraph", state: "PartitionState") -> None:
        self._loads = state.loads_snapshot()
        self._assignment = dict(state.assignment)

    def on_assign(self, state: "PartitionState", decision: Decision) -> None:
        self.decisions.append(decision)
        self.loads_before.append(self._loads)
        self.assignment_before.append(dict(self._assignment))
        self._loads = state.loads_snapshot()
        self._assignment[decision.vertex] = decision.partition


class ProgressCallback(RunCallback):
    def __init__(self, desc: str = "Partitioning") -> None:
        self.desc = desc
        self.bar: Optional[tqdm] = None

    def on_run_start(self, graph: "AdjacencyGraph", state: "PartitionState") -> None:
        self.bar = tqdm(
            total=graph.n, desc=self.desc, unit="vertex", leave=False, colour="blue"
        )

    def on_assign(self, state: "PartitionState", decision: Decision) -> None:
        if self.bar is not None:
            self.bar.update(1)

    def on_run_end(self, state: "PartitionState", stats: RunStats) -> None:
        if self.bar is not None:
            self.bar.close()
            self.bar = None
