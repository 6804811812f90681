"""
Feasibility masks and transition deltas for the seven routing problems.

Every function works on an EnvState snapshot and the numpy views of its
instance; none of them select agents or compute rewards.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional

import numpy as np

from multivrp.models import PenaltyAnchor, ProblemType
from multivrp.validation import TOLERANCE

if TYPE_CHECKING:  # pragma: no cover
    from multivrp.env import EnvState

# Reasons a move is rejected, in the order they are checked.
FOREIGN_DEPOT = "FOREIGN_DEPOT"
ALREADY_SERVED = "ALREADY_SERVED"
CAPACITY = "CAPACITY"
PRECEDENCE = "PRECEDENCE"
TIME_WINDOW = "TIME_WINDOW"
RETURN_TIME = "RETURN_TIME"


@dataclass
class MoveDelta:
    """The effect of moving an agent to a node, before it is committed."""

    node: int
    distance: float
    arrival: float
    service_start: float
    depart: float
    quantity: float
    load_delta: float
    node_visited_after: bool
    soft_penalty: float
    profit: float
    returns_home: bool


@dataclass
class _Timing:
    arrival: np.ndarray
    start: np.ndarray
    time_ok: np.ndarray


def _timing(state: EnvState, agent: int) -> _Timing:
    """Arrival, service start and window admissibility for every node."""
    arrays = state.arrays
    arrival = state.cum_time[agent] + arrays.travel[state.location[agent]]
    soft = state.instance.soft_params
    if soft is None:
        start = np.maximum(arrival, arrays.tw_open)
        time_ok = start <= arrays.tw_close + TOLERANCE
    else:
        start = np.maximum(arrival, arrays.tw_open - soft.p_max)
        time_ok = (arrival >= arrays.tw_open - soft.p_max - soft.w_max - TOLERANCE) & (
            arrival <= arrays.tw_close + soft.p_max + TOLERANCE
        )
    return _Timing(arrival=arrival, start=start, time_ok=time_ok)


def post_move_clock(state: EnvState, agent: int) -> np.ndarray:
    """The agent's clock after serving each node, if it moved there now."""
    return _timing(state, agent).start + state.arrays.service_time


def _unserved(state: EnvState) -> np.ndarray:
    if state.instance.problem == ProblemType.SDVRPTW:
        return state.remaining > TOLERANCE
    return ~state.visited


def _capacity_ok(state: EnvState, agent: int) -> np.ndarray:
    arrays = state.arrays
    problem = state.instance.problem
    residual = state.instance.capacity - state.load[agent]
    if problem == ProblemType.TOPTW:
        return np.ones(state.instance.num_nodes, dtype=bool)
    if problem == ProblemType.SDVRPTW:
        return np.full(state.instance.num_nodes, residual > TOLERANCE)
    if problem == ProblemType.PDPTW:
        # deliveries always free room; their precedence is checked separately
        return arrays.is_delivery | (arrays.demand <= residual + TOLERANCE)
    return arrays.demand <= residual + TOLERANCE


def _precedence_ok(state: EnvState, agent: int) -> np.ndarray:
    arrays = state.arrays
    if state.instance.problem != ProblemType.PDPTW:
        return np.ones(state.instance.num_nodes, dtype=bool)
    carried = np.zeros(state.instance.num_nodes, dtype=bool)
    deliveries = np.flatnonzero(arrays.is_delivery)
    carried[deliveries] = state.picked_by[arrays.pickup_of[deliveries]] == agent
    return ~arrays.is_delivery | carried


def _return_ok(state: EnvState, agent: int, timing: _Timing) -> np.ndarray:
    arrays = state.arrays
    home = arrays.home[agent]
    depart = timing.start + arrays.service_time
    return depart + arrays.travel[:, home] <= arrays.depot_close_at[home] + TOLERANCE


def mask_feasible(state: EnvState, agent: int) -> np.ndarray:
    """
    Boolean mask of the nodes `agent` may move to next.

    A service is feasible when it is not fully served, fits the agent's
    capacity (or, for a PDPTW delivery, its pickup is onboard this agent),
    can be started within its window and still allows the return home in
    time. The home depot is always feasible, foreign depots never are.
    """
    arrays = state.arrays
    timing = _timing(state, agent)
    mask = (
        ~arrays.is_depot
        & _unserved(state)
        & _capacity_ok(state, agent)
        & _precedence_ok(state, agent)
        & timing.time_ok
        & _return_ok(state, agent, timing)
    )
    mask[arrays.home[agent]] = True
    return mask


def infeasibility_reasons(state: EnvState, agent: int, node: int) -> List[str]:
    """Every mask clause that rejects moving `agent` to `node`."""
    arrays = state.arrays
    if arrays.is_depot[node]:
        return [] if node == arrays.home[agent] else [FOREIGN_DEPOT]
    timing = _timing(state, agent)
    checks = (
        (ALREADY_SERVED, _unserved(state)),
        (CAPACITY, _capacity_ok(state, agent)),
        (PRECEDENCE, _precedence_ok(state, agent)),
        (TIME_WINDOW, timing.time_ok),
        (RETURN_TIME, _return_ok(state, agent, timing)),
    )
    return [reason for reason, ok in checks if not ok[node]]


def _soft_penalty(state: EnvState, node: int, arrival: float, start: float) -> float:
    soft = state.instance.soft_params
    if soft is None:
        return 0.0
    anchor = start if soft.penalty_anchor == PenaltyAnchor.SERVICE_START else arrival
    early = max(float(state.arrays.tw_open[node]) - anchor, 0.0)
    late = max(anchor - float(state.arrays.tw_close[node]), 0.0)
    return -(soft.p_e * early + soft.p_l * late)


def _served_quantity(
    state: EnvState, agent: int, node: int, quantity: Optional[float]
) -> float:
    problem = state.instance.problem
    if problem == ProblemType.SDVRPTW:
        greedy = min(
            float(state.remaining[node]),
            state.instance.capacity - float(state.load[agent]),
        )
        return greedy if quantity is None else float(quantity)
    return float(state.arrays.demand[node])


def apply_move(
    state: EnvState, agent: int, node: int, quantity: Optional[float] = None
) -> MoveDelta:
    """
    Compute the effect of moving `agent` to `node` without changing the state.

    Service starts at max(arrival, o) for hard windows and at
    max(arrival, o - p_max) for soft ones. SDVRPTW serves the greedy
    min(remaining demand, residual capacity) unless `quantity` overrides it.
    """
    arrays = state.arrays
    origin = int(state.location[agent])
    distance = float(arrays.travel[origin, node])
    arrival = float(state.cum_time[agent]) + distance

    if arrays.is_depot[node]:
        return MoveDelta(
            node=node,
            distance=distance,
            arrival=arrival,
            service_start=arrival,
            depart=arrival,
            quantity=0.0,
            load_delta=0.0,
            node_visited_after=False,
            soft_penalty=0.0,
            profit=0.0,
            returns_home=node == arrays.home[agent],
        )

    soft = state.instance.soft_params
    open_ = float(arrays.tw_open[node])
    start = max(arrival, open_ - soft.p_max if soft is not None else open_)
    served = _served_quantity(state, agent, node, quantity)
    problem = state.instance.problem
    if problem == ProblemType.PDPTW and arrays.is_delivery[node]:
        load_delta = -served
    else:
        load_delta = served
    visited_after = True
    if problem == ProblemType.SDVRPTW:
        visited_after = float(state.remaining[node]) - served <= TOLERANCE
    return MoveDelta(
        node=node,
        distance=distance,
        arrival=arrival,
        service_start=start,
        depart=start + float(arrays.service_time[node]),
        quantity=served,
        load_delta=load_delta,
        node_visited_after=visited_after,
        soft_penalty=_soft_penalty(state, node, arrival, start),
        profit=float(arrays.profit[node]) if problem.collects_profit else 0.0,
        returns_home=False,
    )


def commit_move(state: EnvState, agent: int, delta: MoveDelta) -> None:
    """
    Write a move into the state: location, clock, load, node flags, trace and
    the agent's distance and profit. Returning home retires the agent.
    """
    node = delta.node
    state.location[agent] = node
    state.cum_time[agent] = delta.depart
    state.load[agent] += delta.load_delta
    state.agent_distance[agent] += delta.distance
    state.agent_profit[agent] += delta.profit
    state.traces[agent].append(
        (node, delta.arrival, delta.service_start, delta.quantity)
    )
    if state.arrays.is_depot[node]:
        if delta.returns_home:
            state.active[agent] = False
        return
    state.remaining[node] = max(float(state.remaining[node]) - delta.quantity, 0.0)
    if delta.node_visited_after:
        state.visited[node] = True
        state.remaining[node] = 0.0
    if state.arrays.is_pickup[node]:
        state.picked_by[node] = agent
