"""
Exhaustive search over the legal action sequences of tiny instances.
"""
import logging
import math
from typing import Dict, Hashable, List, Optional, Tuple

import numpy as np

from multivrp.env import EnvState, Environment
from multivrp.evaluation import evaluate_solution
from multivrp.models import (
    EnvConfig,
    InstanceData,
    OracleResult,
    ProblemType,
    RewardMode,
    SelectorKind,
)
from multivrp.rules import mask_feasible
from multivrp.validation import (
    TOLERANCE,
    OracleNoSolutionError,
    OracleTooLargeError,
    UnsupportedSelectorError,
)

logger = logging.getLogger(__name__)

MAX_ORACLE_SERVICES = 8
MAX_ORACLE_AGENTS = 3

_Memo = Dict[Hashable, Tuple[float, int]]


def episode_length_bound(instance: InstanceData) -> int:
    """
    Most steps an episode can take.

    Every step serves a service or retires an agent. A split delivery visit
    either empties its node or fills the vehicle, which happens once per agent.
    """
    bound = instance.num_services + instance.num_agents
    if instance.problem == ProblemType.SDVRPTW:
        bound += instance.num_agents
    return bound


def _quantize(values: np.ndarray) -> Tuple[int, ...]:
    return tuple(np.round(values / TOLERANCE).astype(np.int64).tolist())


def _state_key(state: EnvState, depth: int) -> Hashable:
    return (
        depth,
        state.active_agent,
        state.visited.tobytes(),
        state.active.tobytes(),
        state.picked_by.tobytes(),
        state.location.tobytes(),
        _quantize(state.cum_time),
        _quantize(state.load),
        _quantize(state.remaining),
    )


class _Search:
    def __init__(self, env: Environment) -> None:
        self.env = env
        self.memo: _Memo = {}
        self.explored = 0

    def best(self, state: EnvState, depth: int) -> float:
        """Best reward plus penalty still to come, -inf when nothing completes."""
        key = _state_key(state, depth)
        if key in self.memo:
            return self.memo[key][0]
        self.explored += 1
        best_value, best_action = -math.inf, -1
        if depth > 0:
            for action in np.flatnonzero(mask_feasible(state, state.active_agent)):
                child = state.clone()
                outcome = self.env.transition(child, int(action))
                value = outcome.reward + outcome.penalty
                if not outcome.done:
                    value += self.best(child, depth - 1)
                # strict comparison keeps the lowest action on ties
                if value > best_value:
                    best_value, best_action = value, int(action)
        self.memo[key] = (best_value, best_action)
        return best_value

    def plan(self, state: EnvState, depth: int) -> List[int]:
        """Replay the memoized best actions from a state."""
        actions = []
        while not state.done:
            action = self.memo[_state_key(state, depth)][1]
            actions.append(action)
            self.env.transition(state, action)
            depth -= 1
        return actions


def brute_force_optimum(
    instance: InstanceData,
    config: Optional[EnvConfig] = None,
    max_depth: Optional[int] = None,
) -> OracleResult:
    """
    The best episode over every mask-legal action sequence.

    Agents act in the order of the configured selector. The objective and
    penalty are those of `evaluate_solution` on the optimal routes, so
    evaluating the returned routes reproduces them exactly.
    """
    config = config or EnvConfig()
    if instance.num_services > MAX_ORACLE_SERVICES or instance.num_agents > MAX_ORACLE_AGENTS:
        raise OracleTooLargeError(
            f"instance '{instance.name}' has {instance.num_services} services and "
            f"{instance.num_agents} agents, at most {MAX_ORACLE_SERVICES} and "
            f"{MAX_ORACLE_AGENTS} are searched."
        )
    if config.selector == SelectorKind.RANDOM:
        raise UnsupportedSelectorError(
            "exhaustive search needs a deterministic selector, not 'random'."
        )

    env = Environment(
        EnvConfig(
            selector=config.selector,
            reward_mode=RewardMode.DENSE,
            unserved_penalty_factor=config.unserved_penalty_factor,
            validate_instances=config.validate_instances,
        )
    )
    depth = episode_length_bound(instance) if max_depth is None else max_depth
    search = _Search(env)
    root = env.reset_state(instance)
    if search.best(root.clone(), depth) == -math.inf:
        raise OracleNoSolutionError(
            f"no episode of '{instance.name}' completes within {depth} steps."
        )

    final = root.clone()
    actions = search.plan(final, depth)
    evaluation = evaluate_solution(
        instance, final.routes(), config.unserved_penalty_factor
    )
    logger.debug(
        "Searched %d states of '%s', best plan %s.",
        search.explored,
        instance.name,
        actions,
    )
    return OracleResult(
        objective=evaluation.objective,
        penalty=evaluation.penalty,
        routes=final.routes(),
        explored=search.explored,
    )
