"""
Dense and sparse rewards, and the terminal penalty for unserved services.
"""
from __future__ import annotations

from typing import TYPE_CHECKING, Iterable, List, Tuple

import numpy as np

from multivrp.models import InstanceData, ProblemType
from multivrp.rules import MoveDelta
from multivrp.validation import TOLERANCE

if TYPE_CHECKING:  # pragma: no cover
    from multivrp.env import EnvState

DEFAULT_UNSERVED_PENALTY_FACTOR = 10.0


def dense_reward(
    problem: ProblemType, delta: MoveDelta, move_distance: float
) -> Tuple[float, float]:
    """
    The (reward, penalty) of one executed move.

    Distance problems pay the negative distance, TOPTW earns the profit and
    PCVRPTW both. Only CVRPSTW charges a per-step penalty.
    """
    if problem == ProblemType.TOPTW:
        return delta.profit, 0.0
    if problem == ProblemType.PCVRPTW:
        return -move_distance + delta.profit, 0.0
    if problem == ProblemType.CVRPSTW:
        return -move_distance, delta.soft_penalty
    return -move_distance, 0.0


def unserved_services(state: EnvState) -> List[int]:
    """Services not fully served. SDVRPTW nodes count while demand remains."""
    arrays = state.arrays
    if state.instance.problem == ProblemType.SDVRPTW:
        pending = state.remaining > TOLERANCE
    else:
        pending = ~state.visited
    return np.flatnonzero(pending & ~arrays.is_depot).tolist()


def terminal_penalty(
    instance: InstanceData,
    unserved: Iterable[int],
    factor: float = DEFAULT_UNSERVED_PENALTY_FACTOR,
) -> float:
    """
    Minus `factor` times the distance from the nearest depot to every
    unserved service. Zero for the profit problems.
    """
    if not instance.problem.penalizes_unserved:
        return 0.0
    arrays = instance.arrays()
    total = 0.0
    for node in unserved:
        total += float(arrays.travel[arrays.nearest_depot[node], node])
    return -factor * total


def accumulated_totals(state: EnvState) -> Tuple[float, float]:
    """Sum of the per-agent dense rewards and penalties, in agent order."""
    reward = 0.0
    penalty = 0.0
    for agent in range(state.instance.num_agents):
        reward += float(state.agent_reward[agent])
        penalty += float(state.agent_penalty[agent])
    return reward, penalty


def sparse_reward(
    state: EnvState, factor: float = DEFAULT_UNSERVED_PENALTY_FACTOR
) -> Tuple[float, float]:
    """
    The episode's (reward, penalty): every dense component plus the terminal
    penalty, emitted at once on the final step.
    """
    reward, penalty = accumulated_totals(state)
    return reward, penalty + terminal_penalty(
        state.instance, unserved_services(state), factor
    )
