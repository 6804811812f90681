"""
The default observation configuration of every problem.
"""
from typing import Dict, List

from multivrp.models import ObservationConfig, ProblemType

NODES_DYNAMIC_DEFAULT = [
    "time_to_open",
    "time_to_close",
    "arrival_time",
    "time_to_open_after_step",
    "time_to_close_after_step",
    "time_to_end_tour_after_step",
    "time_elapsed_after_step",
]
AGENT_DEFAULT = [
    "location",
    "time_elapsed",
    "load_fraction",
    "time_to_depot",
    "feasible_fraction",
    "visited_fraction",
]
RELATIVE_DEFAULT = ["distance_to_active", "time_difference_to_active", "was_last_active"]


def _capacitated(nodes_static: List[str], global_: List[str]) -> ObservationConfig:
    return ObservationConfig(
        nodes_static=nodes_static,
        nodes_dynamic=NODES_DYNAMIC_DEFAULT,
        agent=AGENT_DEFAULT,
        other_agents=AGENT_DEFAULT + RELATIVE_DEFAULT,
        global_=global_,
    )


_CAPACITATED_STATIC = ["coords", "time_window", "demand", "service_time", "is_depot"]
_CAPACITATED_GLOBAL = [
    "served_demand_fraction",
    "fleet_capacity_fraction",
    "done_agents_fraction",
]

DEFAULT_OBSERVATIONS: Dict[ProblemType, ObservationConfig] = {
    ProblemType.CVRPTW: _capacitated(_CAPACITATED_STATIC, _CAPACITATED_GLOBAL),
    ProblemType.CVRPSTW: _capacitated(_CAPACITATED_STATIC, _CAPACITATED_GLOBAL),
    ProblemType.SDVRPTW: _capacitated(_CAPACITATED_STATIC, _CAPACITATED_GLOBAL),
    ProblemType.MDVRPTW: _capacitated(_CAPACITATED_STATIC, _CAPACITATED_GLOBAL),
    ProblemType.PDPTW: _capacitated(
        _CAPACITATED_STATIC + ["is_pickup", "is_delivery"], _CAPACITATED_GLOBAL
    ),
    ProblemType.PCVRPTW: _capacitated(
        ["coords", "time_window", "demand", "profit", "service_time", "is_depot"],
        [
            "served_demand_fraction",
            "profit_collected_fraction",
            "fleet_capacity_fraction",
            "done_agents_fraction",
        ],
    ),
    # no capacity, so no load features
    ProblemType.TOPTW: ObservationConfig(
        nodes_static=["coords", "time_window", "profit", "service_time", "is_depot"],
        nodes_dynamic=NODES_DYNAMIC_DEFAULT,
        agent=["location", "time_elapsed", "time_to_depot"],
        other_agents=[
            "location",
            "time_elapsed",
            "time_to_depot",
            "feasible_fraction",
            "visited_fraction",
        ]
        + RELATIVE_DEFAULT,
        global_=["profit_collected_fraction", "done_agents_fraction"],
    ),
}


def default_observation_config(problem: ProblemType) -> ObservationConfig:
    """The observation configuration used when an EnvConfig names none."""
    return DEFAULT_OBSERVATIONS[ProblemType(problem)]
