"""Production planning over product states.

A module's functionality transforms product properties: for a given parameter
value it maps a matching partial product state to a new partial product state,
taking a fixed number of ticks.  Planning is uniform-cost search over total
product states with (functionality, parameter) as the action set and duration
as the cost; ties break on plan length, then on the per-step keys
(module id, functionality name, parameter position), so the returned plan does
not depend on the order functionalities were declared in.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping


@dataclass(frozen=True)
class TransitionEntry:
    """One row of a functionality's transition table for one parameter value."""

    param: float
    guard: dict[str, str]
    effect: dict[str, str]

    def applies(self, state: Mapping[str, str]) -> bool:
        return all(state.get(sensor) == label for sensor, label in self.guard.items())


@dataclass(frozen=True)
class Functionality:
    module: str
    name: str
    parameter_domain: tuple[float, ...]
    transitions: tuple[TransitionEntry, ...]
    duration: int

    def __post_init__(self):
        if not self.parameter_domain:
            raise ValueError(f"functionality {self.module}.{self.name}: empty parameter domain")
        if len(set(self.parameter_domain)) != len(self.parameter_domain):
            raise ValueError(f"functionality {self.module}.{self.name}: duplicate parameters")
        if self.duration < 1:
            raise ValueError(f"functionality {self.module}.{self.name}: duration must be >= 1")
        for entry in self.transitions:
            if entry.param not in self.parameter_domain:
                raise ValueError(
                    f"functionality {self.module}.{self.name}: transition parameter "
                    f"{entry.param} outside domain"
                )
        # Determinism: for one parameter, no two guards may match the same state.
        # Partial guards that agree on all shared sensors can both match.
        by_param: dict[float, list[TransitionEntry]] = {}
        for entry in self.transitions:
            by_param.setdefault(entry.param, []).append(entry)
        for param, entries in by_param.items():
            for i, a in enumerate(entries):
                for b in entries[i + 1 :]:
                    if all(a.guard[k] == b.guard[k] for k in a.guard.keys() & b.guard.keys()):
                        raise ValueError(
                            f"functionality {self.module}.{self.name}: overlapping "
                            f"transition guards for parameter {param}"
                        )


@dataclass(frozen=True)
class PlanStep:
    module: str
    functionality: str
    parameter: float


@dataclass(frozen=True)
class Plan:
    steps: tuple[PlanStep, ...]
    total_duration: int


@dataclass(frozen=True)
class PlanningProblem:
    functionalities: tuple[Functionality, ...]
    initial: dict[str, str]
    goal: dict[str, str]

    def __post_init__(self):
        unknown = set(self.goal) - set(self.initial)
        if unknown:
            raise ValueError(f"goal references sensors missing from the initial state: {sorted(unknown)}")


def apply_functionality(
    functionality: Functionality, param: float, state: Mapping[str, str]
) -> dict[str, str]:
    """Apply one functionality call to a total product state.

    The matching transition entry's effect overwrites the state; sensors it
    does not mention are unchanged, and with no matching entry the state is
    returned as-is.
    """
    if param not in functionality.parameter_domain:
        raise ValueError(
            f"parameter {param} outside domain of "
            f"{functionality.module}.{functionality.name}"
        )
    for entry in functionality.transitions:
        if entry.param == param and entry.applies(state):
            return {**state, **entry.effect}
    return dict(state)


def _goal_satisfied(state: Mapping[str, str], goal: Mapping[str, str]) -> bool:
    return all(state.get(sensor) == label for sensor, label in goal.items())


def plan(problem: PlanningProblem) -> Plan | None:
    """Minimum-total-duration plan from the initial state to the goal, or None.

    Uniform-cost search; the product state space is finite, so exhausting the
    frontier proves the goal unreachable.
    """
    actions = sorted(
        (
            ((f.module, f.name, idx), f, param)
            for f in problem.functionalities
            for idx, param in enumerate(f.parameter_domain)
        ),
        key=lambda item: item[0],
    )

    start = tuple(sorted(problem.initial.items()))
    # Heap entries are fully ordered: (duration, length, step keys) is unique
    # per action sequence, strictly increases along expansions, and equal
    # sequences produce equal states.  The first pop of a state is therefore
    # its minimum, independent of functionality declaration order.
    heap: list[tuple[int, int, tuple, tuple, tuple[PlanStep, ...]]] = [
        (0, 0, (), start, ())
    ]
    settled: set[tuple] = set()
    while heap:
        duration, length, keys, state_key, steps = heapq.heappop(heap)
        if state_key in settled:
            continue
        settled.add(state_key)
        state = dict(state_key)
        if _goal_satisfied(state, problem.goal):
            return Plan(steps=steps, total_duration=duration)
        for key, functionality, param in actions:
            successor = apply_functionality(functionality, param, state)
            new_key = tuple(sorted(successor.items()))
            if new_key == state_key or new_key in settled:
                continue
            step = PlanStep(
                module=functionality.module,
                functionality=functionality.name,
                parameter=param,
            )
            heapq.heappush(
                heap,
                (
                    duration + functionality.duration,
                    length + 1,
                    keys + (key,),
                    new_key,
                    steps + (step,),
                ),
            )
    return None


def validate_plan(the_plan: Plan | None, problem: PlanningProblem) -> bool:
    """Check a plan by folding apply_functionality from the initial state."""
    if the_plan is None:
        return False
    lookup = {(f.module, f.name): f for f in problem.functionalities}
    state = dict(problem.initial)
    total = 0
    for step in the_plan.steps:
        functionality = lookup.get((step.module, step.functionality))
        if functionality is None:
            return False
        try:
            state = apply_functionality(functionality, step.parameter, state)
        except ValueError:
            return False
        total += functionality.duration
    if total != the_plan.total_duration:
        return False
    return _goal_satisfied(state, problem.goal)
