"""
The agent environment cycle: reset, observe, step, and batch rollouts.
"""
from __future__ import annotations

import copy
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from multivrp.default_observations import default_observation_config
from multivrp.models import (
    EnvConfig,
    EpisodeStats,
    InstanceArrays,
    InstanceData,
    RewardMode,
    RolloutFailure,
    Route,
    Visit,
)
from multivrp.observations import ObservationBuilder, ObservationBundle
from multivrp.rewards import (
    dense_reward,
    sparse_reward,
    terminal_penalty,
    unserved_services,
)
from multivrp.rules import apply_move, commit_move, mask_feasible
from multivrp.selectors import select_next_agent
from multivrp.validation import (
    EpisodeDoneError,
    InvalidInstanceError,
    MaskViolationError,
    MultiVRPError,
    ProblemMismatchError,
    SizeMismatchError,
    validate_instance,
)

logger = logging.getLogger(__name__)

# Second entropy word of the policy RNG, so it never mirrors the episode RNG.
POLICY_STREAM = 1

TraceEntry = Tuple[int, float, float, float]
Policy = Callable[[ObservationBundle, np.random.Generator], int]


@dataclass
class EnvState:
    """
    The mutable state of one episode.

    Per-agent arrays are indexed by agent, per-node arrays by node.
    `cum_time` is the agent's absolute clock, starting at its depot's
    opening time.
    """

    instance: InstanceData
    arrays: InstanceArrays
    location: np.ndarray
    cum_time: np.ndarray
    load: np.ndarray
    active: np.ndarray
    visited: np.ndarray
    remaining: np.ndarray
    picked_by: np.ndarray
    traces: List[List[TraceEntry]]
    agent_reward: np.ndarray
    agent_penalty: np.ndarray
    agent_distance: np.ndarray
    agent_profit: np.ndarray
    rng: np.random.Generator
    active_agent: int = 0
    last_agent: int = -1
    done: bool = False
    step_count: int = 0
    observer: Optional[ObservationBuilder] = field(default=None, repr=False)

    @classmethod
    def initial(cls, instance: InstanceData, seed: int = 0) -> EnvState:
        """Every agent at its home depot with an empty vehicle."""
        arrays = instance.arrays()
        num_agents = instance.num_agents
        remaining = np.where(arrays.is_depot, 0.0, arrays.demand)
        return cls(
            instance=instance,
            arrays=arrays,
            location=arrays.home.copy(),
            cum_time=arrays.depot_open_at[arrays.home].astype(np.float64),
            load=np.zeros(num_agents),
            active=np.ones(num_agents, dtype=bool),
            visited=np.zeros(instance.num_nodes, dtype=bool),
            remaining=remaining,
            picked_by=np.full(instance.num_nodes, -1, dtype=int),
            traces=[[] for _ in range(num_agents)],
            agent_reward=np.zeros(num_agents),
            agent_penalty=np.zeros(num_agents),
            agent_distance=np.zeros(num_agents),
            agent_profit=np.zeros(num_agents),
            rng=np.random.default_rng(seed),
        )

    def clone(self) -> EnvState:
        """An independent copy sharing the immutable instance."""
        return EnvState(
            instance=self.instance,
            arrays=self.arrays,
            location=self.location.copy(),
            cum_time=self.cum_time.copy(),
            load=self.load.copy(),
            active=self.active.copy(),
            visited=self.visited.copy(),
            remaining=self.remaining.copy(),
            picked_by=self.picked_by.copy(),
            traces=[list(trace) for trace in self.traces],
            agent_reward=self.agent_reward.copy(),
            agent_penalty=self.agent_penalty.copy(),
            agent_distance=self.agent_distance.copy(),
            agent_profit=self.agent_profit.copy(),
            rng=copy.deepcopy(self.rng),
            active_agent=self.active_agent,
            last_agent=self.last_agent,
            done=self.done,
            step_count=self.step_count,
            observer=self.observer,
        )

    def routes(self) -> List[Route]:
        """The agents' traces as Route models."""
        return [
            Route(
                agent=agent,
                visits=[
                    Visit(node=node, arrival=arrival, service_start=start, quantity=quantity)
                    for node, arrival, start, quantity in trace
                ],
            )
            for agent, trace in enumerate(self.traces)
        ]


@dataclass
class StepOutcome:
    """The record of one transition."""

    reward: float
    penalty: float
    done: bool
    next_agent: int
    info: Dict[str, Any] = field(default_factory=dict)


class Environment:
    """
    A multi-agent routing environment where agents act one at a time.

    After every step the selector picks the next active agent and the
    observations are computed for that agent, on the post-move state.
    """

    def __init__(self, config: Optional[EnvConfig] = None) -> None:
        self.config = config or EnvConfig()

    def reset_state(self, instance: InstanceData, seed: int = 0) -> EnvState:
        """Start an episode without computing observations."""
        if self.config.validate_instances:
            report = validate_instance(instance)
            if not report.ok:
                raise InvalidInstanceError(
                    f"instance '{instance.name}' failed validation: {', '.join(report.codes())}",
                    report=report,
                )
        state = EnvState.initial(instance, seed)
        state.active_agent = select_next_agent(self.config.selector, state)
        return state

    def reset(
        self, instance: InstanceData, seed: int = 0
    ) -> Tuple[EnvState, ObservationBundle]:
        """Start an episode and observe for the first selected agent."""
        state = self.reset_state(instance, seed)
        logger.debug("Reset '%s' with seed %d.", instance.name, seed)
        return state, self.observe(state)

    def observe(self, state: EnvState) -> ObservationBundle:
        """Observations of the active agent."""
        if state.done:
            raise EpisodeDoneError("the episode is finished, nothing to observe.")
        if state.observer is None:
            state.observer = ObservationBuilder(
                state.instance,
                self.config.observations
                or default_observation_config(state.instance.problem),
            )
        return state.observer.observe(state)

    @staticmethod
    def feasible_actions(state: EnvState) -> np.ndarray:
        """Mask of the nodes the active agent may move to."""
        if state.done:
            raise EpisodeDoneError("the episode is finished, no action is feasible.")
        return mask_feasible(state, state.active_agent)

    def sample_action(
        self, state: EnvState, rng: Optional[np.random.Generator] = None
    ) -> int:
        """A uniform draw over the feasible actions."""
        candidates = np.flatnonzero(self.feasible_actions(state))
        return int((rng or state.rng).choice(candidates))

    def transition(self, state: EnvState, action: int) -> StepOutcome:
        """Apply an action for the active agent, without observing."""
        if state.done:
            raise EpisodeDoneError("the episode is finished, reset it first.")
        agent = state.active_agent
        action = int(action)
        if not 0 <= action < state.instance.num_nodes or not mask_feasible(
            state, agent
        )[action]:
            raise MaskViolationError(
                f"node {action} is not a feasible action for agent {agent}."
            )

        problem = state.instance.problem
        delta = apply_move(state, agent, action)
        reward, penalty = dense_reward(problem, delta, delta.distance)
        commit_move(state, agent, delta)
        state.agent_reward[agent] += reward
        state.agent_penalty[agent] += penalty
        state.step_count += 1
        state.last_agent = agent

        info: Dict[str, Any] = {"agent": agent}
        if state.active.any():
            state.active_agent = select_next_agent(self.config.selector, state)
        else:
            state.done = True
        factor = self.config.unserved_penalty_factor

        if self.config.reward_mode == RewardMode.SPARSE:
            reward, penalty = sparse_reward(state, factor) if state.done else (0.0, 0.0)
        elif state.done:
            penalty += terminal_penalty(
                state.instance, unserved_services(state), factor
            )

        if state.done:
            info["stats"] = self.stats_report(state)
        return StepOutcome(
            reward=reward,
            penalty=penalty,
            done=state.done,
            next_agent=-1 if state.done else state.active_agent,
            info=info,
        )

    def step(
        self, state: EnvState, action: int
    ) -> Tuple[EnvState, Optional[ObservationBundle], StepOutcome]:
        """
        Apply an action for the active agent.

        The returned observations belong to the newly selected agent; the
        final step returns None instead.
        """
        outcome = self.transition(state, action)
        observation = None if outcome.done else self.observe(state)
        return state, observation, outcome

    def stats_report(self, state: EnvState) -> EpisodeStats:
        """The episode's statistics and routes."""
        instance = state.instance
        arrays = state.arrays
        total_reward, total_penalty = sparse_reward(
            state, self.config.unserved_penalty_factor
        )
        services = ~arrays.is_depot
        total_demand = float(arrays.demand[services].sum())
        served_demand = total_demand - float(state.remaining[services].sum())
        num_services = arrays.num_services
        served = num_services - len(unserved_services(state))
        if total_demand > 0:
            demand_fraction = served_demand / total_demand
        else:
            demand_fraction = served / num_services if num_services else 1.0
        total_profit = float(arrays.profit.sum())
        collected = float(state.agent_profit.sum())
        distance = float(sum(state.agent_distance.tolist()))
        agents_used = sum(
            1
            for trace in state.traces
            if any(not arrays.is_depot[visit[0]] for visit in trace)
        )
        return EpisodeStats(
            instance=instance.name,
            problem=instance.problem,
            num_services=num_services,
            seed=instance.seed,
            total_reward=total_reward,
            total_penalty=total_penalty,
            objective=total_reward if instance.problem.maximizes else distance,
            total_distance=distance,
            agents_used=agents_used,
            services_served=served,
            demand_served_fraction=min(max(demand_fraction, 0.0), 1.0),
            profit_collected_fraction=min(
                max(collected / total_profit if total_profit > 0 else 0.0, 0.0), 1.0
            ),
            steps=state.step_count,
            routes=state.routes(),
        )


def run_episode(
    instance: InstanceData,
    policy: Union[str, Policy],
    config: Optional[EnvConfig] = None,
    seed: Optional[int] = None,
) -> EpisodeStats:
    """Roll one episode out to completion with a policy."""
    from multivrp.policies import get_policy

    policy_function = get_policy(policy) if isinstance(policy, str) else policy
    seed = instance.seed if seed is None else seed
    env = Environment(config)
    state, observation = env.reset(instance, seed)
    rng = np.random.default_rng([seed, POLICY_STREAM])
    while True:
        action = policy_function(observation, rng)
        state, observation, outcome = env.step(state, action)
        if outcome.done:
            stats: EpisodeStats = outcome.info["stats"]
            logger.debug(
                "Episode '%s' done in %d steps, objective %.6f.",
                instance.name,
                stats.steps,
                stats.objective,
            )
            return stats


def _rollout_job(
    job: Tuple[int, InstanceData, Union[str, Policy], EnvConfig, int]
) -> Union[EpisodeStats, RolloutFailure]:
    index, instance, policy, config, seed = job
    try:
        return run_episode(instance, policy, config, seed)
    except MultiVRPError as error:
        logger.warning("Episode %d ('%s') failed: %s", index, instance.name, error)
        return RolloutFailure(
            index=index, instance=instance.name, code=error.code, message=error.message
        )


def batch_rollout(
    instances: Sequence[InstanceData],
    policy: Union[str, Policy],
    config: Optional[EnvConfig] = None,
    seeds: Optional[Sequence[int]] = None,
    jobs: int = 1,
) -> List[Union[EpisodeStats, RolloutFailure]]:
    """
    Run every instance's episode independently, in input order.

    A failing episode is reported as a RolloutFailure without aborting the
    batch. With `jobs > 1` episodes run in a process pool; results are
    identical to a sequential run. Policies passed to a pool must be
    registered names or picklable functions.
    """
    config = config or EnvConfig()
    if len({instance.problem for instance in instances}) > 1:
        raise ProblemMismatchError("a batch must share a single problem variant.")
    if (
        not config.allow_mixed_sizes
        and len({instance.num_services for instance in instances}) > 1
    ):
        raise SizeMismatchError(
            "a batch mixes instance sizes; set allow_mixed_sizes to run it."
        )
    if seeds is None:
        seeds = [instance.seed for instance in instances]
    if len(seeds) != len(instances):
        raise SizeMismatchError(
            f"{len(seeds)} seeds given for {len(instances)} instances."
        )

    jobs_list = [
        (index, instance, policy, config, int(seed))
        for index, (instance, seed) in enumerate(zip(instances, seeds))
    ]
    logger.info("Rolling out %d episodes with %d job(s).", len(jobs_list), jobs)
    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(_rollout_job, jobs_list))
    return [_rollout_job(job) for job in jobs_list]
