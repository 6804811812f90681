"""
The five observation families computed for the active agent.

Features are registered by name per family; an ObservationConfig selects
which registered features make up each family's columns.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Tuple

import numpy as np

from multivrp.models import InstanceArrays, InstanceData, ObservationConfig
from multivrp.rules import mask_feasible
from multivrp.validation import UnknownFeatureError

if TYPE_CHECKING:  # pragma: no cover
    from multivrp.env import EnvState

NODES_STATIC = "nodes_static"
NODES_DYNAMIC = "nodes_dynamic"
AGENT = "agent"
OTHER_AGENTS = "other_agents"
GLOBAL = "global"
FAMILIES = (NODES_STATIC, NODES_DYNAMIC, AGENT, OTHER_AGENTS, GLOBAL)


@dataclass
class ObservationBundle:
    """Everything the active agent observes before choosing a node."""

    agent_index: int
    nodes_static: np.ndarray
    nodes_dynamic: np.ndarray
    agent: np.ndarray
    other_agents: np.ndarray
    global_: np.ndarray
    action_mask: np.ndarray
    agents_mask: np.ndarray
    home_depot: int
    travel: np.ndarray
    wait: np.ndarray
    service_time: np.ndarray
    profit: np.ndarray
    feature_names: Dict[str, List[str]] = field(default_factory=dict)

    def column(self, family: str, name: str) -> np.ndarray:
        """The column(s) of a named feature."""
        start, stop = _column_span(self.feature_names[family], family, name)
        matrix = {
            NODES_STATIC: self.nodes_static,
            NODES_DYNAMIC: self.nodes_dynamic,
            AGENT: self.agent,
            OTHER_AGENTS: self.other_agents,
            GLOBAL: self.global_,
        }[family]
        if matrix.ndim == 1:
            return matrix[start:stop]
        return matrix[:, start:stop]


class ObservationContext:
    """Quantities shared by the features of one observation."""

    def __init__(self, state: EnvState, agent: int) -> None:
        self.state = state
        self.agent = agent
        self.arrays: InstanceArrays = state.arrays
        self.horizon = self.arrays.horizon
        self.clock = float(state.cum_time[agent])
        self.location = int(state.location[agent])
        self.home = int(self.arrays.home[agent])
        self.arrival = self.clock + self.arrays.travel[self.location]
        self._masks: Dict[int, np.ndarray] = {}

    def mask(self, agent: int) -> np.ndarray:
        """Feasibility mask of any agent, computed once."""
        if agent not in self._masks:
            self._masks[agent] = mask_feasible(self.state, agent)
        return self._masks[agent]

    @property
    def post_clock(self) -> np.ndarray:
        """The active agent's clock after serving each node."""
        return self.service_start + self.arrays.service_time

    @property
    def service_start(self) -> np.ndarray:
        """When service would start at each node."""
        soft = self.state.instance.soft_params
        earliest = self.arrays.tw_open - (soft.p_max if soft is not None else 0.0)
        return np.maximum(self.arrival, earliest)


@dataclass(frozen=True)
class Feature:
    """A registered observation feature."""

    name: str
    family: str
    width: int
    compute: Callable


FEATURE_REGISTRY: Dict[str, Dict[str, Feature]] = {family: {} for family in FAMILIES}


def register_feature(
    name: str, *families: str, width: int = 1
) -> Callable[[Callable], Callable]:
    """Register a feature function under one or more families."""

    def decorator(function: Callable) -> Callable:
        for family in families:
            FEATURE_REGISTRY[family][name] = Feature(name, family, width, function)
        return function

    return decorator


def _column_span(names: List[str], family: str, name: str) -> Tuple[int, int]:
    start = 0
    for feature_name in names:
        width = FEATURE_REGISTRY[family][feature_name].width
        if feature_name == name:
            return start, start + width
        start += width
    raise UnknownFeatureError(f"'{name}' is not part of the {family} observation.")


def check_observation_config(config: ObservationConfig) -> ObservationConfig:
    """Reject features that are not registered for their family."""
    for family, names in config.families().items():
        unknown = [name for name in names if name not in FEATURE_REGISTRY[family]]
        if unknown:
            raise UnknownFeatureError(
                f"unknown {family} features: {', '.join(unknown)}."
            )
    return config


def _safe_ratio(numerator: np.ndarray, denominator: float) -> np.ndarray:
    if denominator <= 0:
        return np.zeros_like(np.asarray(numerator, dtype=np.float64))
    return np.asarray(numerator, dtype=np.float64) / denominator


def _fraction(values: np.ndarray) -> np.ndarray:
    return np.clip(values, 0.0, 1.0)


# Nodes static


@register_feature("coords", NODES_STATIC, width=2)
def _static_coords(arrays: InstanceArrays, instance: InstanceData) -> np.ndarray:
    return arrays.coords


@register_feature("time_window", NODES_STATIC, width=2)
def _static_window(arrays: InstanceArrays, instance: InstanceData) -> np.ndarray:
    return np.stack([arrays.tw_open, arrays.tw_close], axis=1) / arrays.horizon


@register_feature("window_width", NODES_STATIC)
def _static_width(arrays: InstanceArrays, instance: InstanceData) -> np.ndarray:
    return (arrays.tw_close - arrays.tw_open) / arrays.horizon


@register_feature("demand", NODES_STATIC)
def _static_demand(arrays: InstanceArrays, instance: InstanceData) -> np.ndarray:
    return arrays.demand / instance.capacity


@register_feature("profit", NODES_STATIC)
def _static_profit(arrays: InstanceArrays, instance: InstanceData) -> np.ndarray:
    return _safe_ratio(arrays.profit, float(arrays.profit.max(initial=0.0)))


@register_feature("service_time", NODES_STATIC)
def _static_service(arrays: InstanceArrays, instance: InstanceData) -> np.ndarray:
    return arrays.service_time / arrays.horizon


@register_feature("is_depot", NODES_STATIC)
def _static_is_depot(arrays: InstanceArrays, instance: InstanceData) -> np.ndarray:
    return arrays.is_depot.astype(np.float64)


@register_feature("is_pickup", NODES_STATIC)
def _static_is_pickup(arrays: InstanceArrays, instance: InstanceData) -> np.ndarray:
    return arrays.is_pickup.astype(np.float64)


@register_feature("is_delivery", NODES_STATIC)
def _static_is_delivery(arrays: InstanceArrays, instance: InstanceData) -> np.ndarray:
    return arrays.is_delivery.astype(np.float64)


# Nodes dynamic, relative to the active agent. Times are signed, not clamped.


@register_feature("time_to_open", NODES_DYNAMIC)
def _time_to_open(context: ObservationContext) -> np.ndarray:
    return (context.arrays.tw_open - context.clock) / context.horizon


@register_feature("time_to_close", NODES_DYNAMIC)
def _time_to_close(context: ObservationContext) -> np.ndarray:
    return (context.arrays.tw_close - context.clock) / context.horizon


@register_feature("arrival_time", NODES_DYNAMIC)
def _arrival_time(context: ObservationContext) -> np.ndarray:
    return context.arrival / context.horizon


@register_feature("time_to_open_after_step", NODES_DYNAMIC)
def _time_to_open_after(context: ObservationContext) -> np.ndarray:
    return (context.arrays.tw_open - context.post_clock) / context.horizon


@register_feature("time_to_close_after_step", NODES_DYNAMIC)
def _time_to_close_after(context: ObservationContext) -> np.ndarray:
    return (context.arrays.tw_close - context.post_clock) / context.horizon


@register_feature("time_to_end_tour_after_step", NODES_DYNAMIC)
def _time_to_end_after(context: ObservationContext) -> np.ndarray:
    """
    Time left before the home depot closes, scaled by the global horizon
    like every other time feature.
    """
    close = context.arrays.depot_close_at[context.home]
    return (close - context.post_clock) / context.horizon


@register_feature("time_elapsed_after_step", NODES_DYNAMIC)
def _elapsed_after(context: ObservationContext) -> np.ndarray:
    close = float(context.arrays.depot_close_at[context.home])
    return _fraction(_safe_ratio(context.post_clock, close))


# Agent rows, shared by the active agent and the other agents.


@register_feature("location", AGENT, OTHER_AGENTS, width=2)
def _agent_location(context: ObservationContext, agents: np.ndarray) -> np.ndarray:
    return context.arrays.coords[context.state.location[agents]]


@register_feature("time_elapsed", AGENT, OTHER_AGENTS)
def _agent_elapsed(context: ObservationContext, agents: np.ndarray) -> np.ndarray:
    close = context.arrays.depot_close_at[context.arrays.home[agents]]
    return _fraction(context.state.cum_time[agents] / np.where(close > 0, close, 1.0))


@register_feature("load_fraction", AGENT, OTHER_AGENTS)
def _agent_load(context: ObservationContext, agents: np.ndarray) -> np.ndarray:
    return _fraction(context.state.load[agents] / context.state.instance.capacity)


@register_feature("time_to_depot", AGENT, OTHER_AGENTS)
def _agent_time_to_depot(
    context: ObservationContext, agents: np.ndarray
) -> np.ndarray:
    travel = context.arrays.travel
    homes = context.arrays.home[agents]
    return travel[context.state.location[agents], homes] / context.horizon


@register_feature("feasible_fraction", AGENT, OTHER_AGENTS)
def _agent_feasible(context: ObservationContext, agents: np.ndarray) -> np.ndarray:
    services = ~context.arrays.is_depot
    counts = [
        int(np.count_nonzero(context.mask(int(agent)) & services))
        if context.state.active[agent]
        else 0
        for agent in agents
    ]
    return _fraction(_safe_ratio(np.asarray(counts), context.arrays.num_services))


@register_feature("visited_fraction", AGENT, OTHER_AGENTS)
def _agent_visited(context: ObservationContext, agents: np.ndarray) -> np.ndarray:
    is_depot = context.arrays.is_depot
    counts = [
        len(
            {
                visit[0]
                for visit in context.state.traces[agent]
                if not is_depot[visit[0]]
            }
        )
        for agent in agents
    ]
    return _fraction(_safe_ratio(np.asarray(counts), context.arrays.num_services))


@register_feature("distance_to_active", OTHER_AGENTS)
def _distance_to_active(
    context: ObservationContext, agents: np.ndarray
) -> np.ndarray:
    locations = context.state.location[agents]
    return context.arrays.travel[locations, context.location] / context.horizon


@register_feature("time_difference_to_active", OTHER_AGENTS)
def _time_difference(context: ObservationContext, agents: np.ndarray) -> np.ndarray:
    return (context.state.cum_time[agents] - context.clock) / context.horizon


@register_feature("was_last_active", OTHER_AGENTS)
def _was_last_active(context: ObservationContext, agents: np.ndarray) -> np.ndarray:
    return (agents == context.state.last_agent).astype(np.float64)


# Global


@register_feature("served_demand_fraction", GLOBAL)
def _served_demand(context: ObservationContext) -> np.ndarray:
    services = ~context.arrays.is_depot
    total = float(context.arrays.demand[services].sum())
    served = total - float(context.state.remaining[services].sum())
    return _fraction(_safe_ratio(np.asarray([served]), total))


@register_feature("profit_collected_fraction", GLOBAL)
def _profit_collected(context: ObservationContext) -> np.ndarray:
    total = float(context.arrays.profit.sum())
    collected = float(context.state.agent_profit.sum())
    return _fraction(_safe_ratio(np.asarray([collected]), total))


@register_feature("fleet_capacity_fraction", GLOBAL)
def _fleet_capacity(context: ObservationContext) -> np.ndarray:
    state = context.state
    capacity = state.instance.capacity
    available = float(np.sum((capacity - state.load)[state.active]))
    return _fraction(
        _safe_ratio(np.asarray([available]), state.instance.num_agents * capacity)
    )


@register_feature("done_agents_fraction", GLOBAL)
def _done_agents(context: ObservationContext) -> np.ndarray:
    active = context.state.active
    return np.asarray([np.count_nonzero(~active) / active.shape[0]], dtype=np.float64)


def _stack(columns: List[np.ndarray], rows: int) -> np.ndarray:
    if not columns:
        return np.zeros((rows, 0))
    return np.concatenate([column.reshape(rows, -1) for column in columns], axis=1)


def nodes_static_features(instance: InstanceData, names: List[str]) -> np.ndarray:
    """The instance's intrinsic node features, one row per node."""
    arrays = instance.arrays()
    features = FEATURE_REGISTRY[NODES_STATIC]
    return _stack(
        [features[name].compute(arrays, instance) for name in names],
        instance.num_nodes,
    )


def nodes_dynamic_features(context: ObservationContext, names: List[str]) -> np.ndarray:
    """Node features relative to the active agent, one row per node."""
    features = FEATURE_REGISTRY[NODES_DYNAMIC]
    return _stack(
        [features[name].compute(context) for name in names],
        context.state.instance.num_nodes,
    )


def agent_features(context: ObservationContext, names: List[str]) -> np.ndarray:
    """The active agent's own features."""
    agents = np.asarray([context.agent])
    features = FEATURE_REGISTRY[AGENT]
    return _stack([features[name].compute(context, agents) for name in names], 1)[0]


def other_agents_features(
    context: ObservationContext, names: List[str]
) -> np.ndarray:
    """One row per agent; rows of retired agents are zero."""
    num_agents = context.state.instance.num_agents
    agents = np.arange(num_agents)
    features = FEATURE_REGISTRY[OTHER_AGENTS]
    matrix = _stack(
        [features[name].compute(context, agents) for name in names], num_agents
    )
    matrix[~context.state.active] = 0.0
    return matrix


def global_features(context: ObservationContext, names: List[str]) -> np.ndarray:
    """Features of the whole episode."""
    features = FEATURE_REGISTRY[GLOBAL]
    return _stack([features[name].compute(context) for name in names], 1)[0]


class ObservationBuilder:
    """
    Builds observation bundles for one episode.

    Static node features are computed once, on construction.
    """

    def __init__(self, instance: InstanceData, config: ObservationConfig) -> None:
        self.config = check_observation_config(config)
        self.names = config.families()
        self.nodes_static = nodes_static_features(instance, self.names[NODES_STATIC])
        self.nodes_static.setflags(write=False)

    def observe(
        self, state: EnvState, agent: Optional[int] = None
    ) -> ObservationBundle:
        """Observations of `agent` (the active agent by default)."""
        agent = state.active_agent if agent is None else agent
        context = ObservationContext(state, agent)
        arrays = context.arrays
        start = context.service_start
        return ObservationBundle(
            agent_index=agent,
            nodes_static=self.nodes_static,
            nodes_dynamic=nodes_dynamic_features(context, self.names[NODES_DYNAMIC]),
            agent=agent_features(context, self.names[AGENT]),
            other_agents=other_agents_features(context, self.names[OTHER_AGENTS]),
            global_=global_features(context, self.names[GLOBAL]),
            action_mask=context.mask(agent),
            agents_mask=state.active.copy(),
            home_depot=context.home,
            travel=arrays.travel[context.location],
            wait=start - context.arrival,
            service_time=arrays.service_time,
            profit=arrays.profit,
            feature_names=self.names,
        )
