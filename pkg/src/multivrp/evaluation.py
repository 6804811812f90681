"""
Offline evaluation of a route set against an instance.
"""
from typing import List, Optional, Sequence

from multivrp.env import EnvState
from multivrp.models import (
    InstanceData,
    ProblemType,
    Route,
    SolutionEvaluation,
    Violation,
)
from multivrp.rewards import (
    DEFAULT_UNSERVED_PENALTY_FACTOR,
    dense_reward,
    sparse_reward,
)
from multivrp.rules import apply_move, commit_move, infeasibility_reasons
from multivrp.validation import SolutionInputError, TOLERANCE


def _check_routes(instance: InstanceData, routes: Sequence[Route]) -> None:
    agents = [route.agent for route in routes]
    if len(set(agents)) != len(agents):
        raise SolutionInputError("every agent may drive at most one route.")
    for route in routes:
        if route.agent >= instance.num_agents:
            raise SolutionInputError(
                f"unknown agent {route.agent}, the fleet has {instance.num_agents}."
            )
        for visit in route.visits:
            if visit.node >= instance.num_nodes:
                raise SolutionInputError(
                    f"agent {route.agent} visits unknown node {visit.node}."
                )


def _split_quantity(
    state: EnvState, agent: int, node: int, recorded: float
) -> Optional[Violation]:
    """A recorded split delivery must fit the remaining demand and the vehicle."""
    limit = min(
        float(state.remaining[node]),
        state.instance.capacity - float(state.load[agent]),
    )
    if recorded <= 0 or recorded > limit + TOLERANCE:
        return Violation(
            code="SPLIT_QUANTITY",
            index=node,
            message=f"agent {agent} delivers {recorded} at node {node}, at most {limit} is possible.",
        )
    return None


def _replay_route(state: EnvState, route: Route, violations: List[Violation]) -> None:
    agent = route.agent
    home = int(state.arrays.home[agent])
    problem = state.instance.problem
    visits = list(route.visits)
    for position, visit in enumerate(visits):
        node = visit.node
        reasons = infeasibility_reasons(state, agent, node)
        violations.extend(
            Violation(
                code=reason,
                index=node,
                message=f"agent {agent} can not visit node {node} at position {position}.",
            )
            for reason in reasons
        )
        quantity = None
        if problem == ProblemType.SDVRPTW and not state.arrays.is_depot[node]:
            quantity = visit.quantity
            violation = _split_quantity(state, agent, node, quantity)
            if violation is not None:
                violations.append(violation)
        delta = apply_move(state, agent, node, quantity)
        reward, penalty = dense_reward(problem, delta, delta.distance)
        commit_move(state, agent, delta)
        state.agent_reward[agent] += reward
        state.agent_penalty[agent] += penalty
        if delta.returns_home:
            if position != len(visits) - 1:
                violations.append(
                    Violation(
                        code="VISIT_AFTER_RETURN",
                        index=agent,
                        message=f"agent {agent} keeps driving after returning home.",
                    )
                )
            return

    if visits:
        violations.append(
            Violation(
                code="ROUTE_NOT_CLOSED",
                index=agent,
                message=f"the route of agent {agent} does not end at depot {home}.",
            )
        )
        delta = apply_move(state, agent, home)
        reward, penalty = dense_reward(problem, delta, delta.distance)
        commit_move(state, agent, delta)
        state.agent_reward[agent] += reward
        state.agent_penalty[agent] += penalty


def evaluate_solution(
    instance: InstanceData,
    routes: Sequence[Route],
    unserved_penalty_factor: float = DEFAULT_UNSERVED_PENALTY_FACTOR,
) -> SolutionEvaluation:
    """
    Replay every route with the environment's move semantics.

    Routes are replayed in agent order; agents without a route stay home.
    The objective is the sparse reward, the penalty adds soft window
    charges and the terminal penalty for unserved services. Hard violations
    mark the solution infeasible and are reported, the replay continues.
    """
    _check_routes(instance, routes)
    state = EnvState.initial(instance)
    violations: List[Violation] = []
    for route in sorted(routes, key=lambda route: route.agent):
        _replay_route(state, route, violations)
    state.active[:] = False
    state.done = True
    objective, penalty = sparse_reward(state, unserved_penalty_factor)
    return SolutionEvaluation(
        objective=objective,
        penalty=penalty,
        feasible=not violations,
        violations=violations,
        total_distance=float(sum(state.agent_distance.tolist())),
        profit_collected=float(sum(state.agent_profit.tolist())),
    )
