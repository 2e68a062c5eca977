from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence


@dataclass
class Decision:
    """One irrevocable vertex assignment, as seen by run callbacks."""

    vertex: int
    partition: int
    eligible: frozenset[int]
    reason: str
    scores: Optional[Sequence[Optional[int | Fraction]]] = None
    buffered: tuple[int, ...] = ()
    co_assigned: bool = False


@dataclass
class RunStats:
    algorithm: str
    elapsed: float = 0.0
    steps: int = 0
    gate_activations: int = 0
    random_draws: int = 0
    co_assigned: int = 0
    peak_gap: int = 0
    reasons: dict[str, int] = field(default_factory=dict)

    def record(self, decision: Decision, gap: int) -> None:
        self.steps += 1
        self.peak_gap = max(self.peak_gap, gap)
        self.reasons[decision.reason] = self.reasons.get(decision.reason, 0) + 1
        if decision.co_assigned:
            self.co_assigned += 1
