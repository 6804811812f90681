"""
Strategies choosing which active agent acts next.
"""
from __future__ import annotations

from typing import TYPE_CHECKING, Callable, Dict

import numpy as np

from multivrp.models import SelectorKind

if TYPE_CHECKING:  # pragma: no cover
    from multivrp.env import EnvState


def next_agent_round_robin(state: EnvState) -> int:
    """
    Keep the current agent until it retires, then move on to the next active
    agent in circular order.
    """
    current = state.active_agent
    num_agents = state.active.shape[0]
    for offset in range(num_agents):
        candidate = (current + offset) % num_agents
        if state.active[candidate]:
            return candidate
    raise ValueError("no active agent left to select.")


def next_agent_smallest_time(state: EnvState) -> int:
    """The active agent with the smallest clock, lowest index on ties."""
    if not state.active.any():
        raise ValueError("no active agent left to select.")
    return int(np.argmin(np.where(state.active, state.cum_time, np.inf)))


def next_agent_random(state: EnvState, rng: np.random.Generator) -> int:
    """A uniform draw over the active agents."""
    candidates = np.flatnonzero(state.active)
    if candidates.size == 0:
        raise ValueError("no active agent left to select.")
    return int(rng.choice(candidates))


SELECTORS: Dict[SelectorKind, Callable[[EnvState], int]] = {
    SelectorKind.ROUND_ROBIN: next_agent_round_robin,
    SelectorKind.SMALLEST_TIME: next_agent_smallest_time,
    SelectorKind.RANDOM: lambda state: next_agent_random(state, state.rng),
}


def select_next_agent(kind: SelectorKind, state: EnvState) -> int:
    """Dispatch to the configured selector. Random draws use the episode RNG."""
    return SELECTORS[SelectorKind(kind)](state)
