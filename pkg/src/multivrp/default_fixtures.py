"""
Hard-coded toy instances for environment testing and debugging.

Every problem shares the same layout: a depot at the centre of the unit
square and six services on a hexagon of radius 0.2 around it.
"""
import math
from typing import List, Tuple

from multivrp.models import InstanceData, ProblemType, SoftTimeWindowParams

TOY_CENTER = (0.5, 0.5)
TOY_RADIUS = 0.2
TOY_HORIZON = 3.0
TOY_SERVICE_TIME = 0.1
TOY_CAPACITY = 10.0
TOY_NUM_AGENTS = 2
TOY_EARLY_WINDOW = (0.3, 1.5)
TOY_LATE_WINDOW = (1.0, 2.5)
TOY_MULTI_DEPOTS = ((0.25, 0.5), (0.75, 0.5))
TOY_SOFT_PARAMS = SoftTimeWindowParams(p_max=0.2, w_max=0.5, p_e=1.0, p_l=2.0)


def hexagon(center: Tuple[float, float], radius: float) -> List[Tuple[float, float]]:
    """The six vertices of a regular hexagon, counter-clockwise from angle 0."""
    return [
        (
            center[0] + radius * math.cos(math.pi * k / 3),
            center[1] + radius * math.sin(math.pi * k / 3),
        )
        for k in range(6)
    ]


def generate_toy(problem: ProblemType) -> InstanceData:
    """
    Build the fixed toy instance of a problem. No randomness is involved.

    Windows alternate between [0.3, 1.5] and [1.0, 2.5]; demands are 1..6.
    PDPTW pairs opposite vertices (pickups 1-3 with early windows,
    deliveries 4-6 with late ones), MDVRPTW uses two depots with one agent each.
    """
    problem = ProblemType(problem)
    depots = list(TOY_MULTI_DEPOTS) if problem == ProblemType.MDVRPTW else [TOY_CENTER]
    num_depots = len(depots)
    services = hexagon(TOY_CENTER, TOY_RADIUS)

    windows = [TOY_EARLY_WINDOW if k % 2 == 0 else TOY_LATE_WINDOW for k in range(6)]
    demands = [float(k + 1) for k in range(6)]
    pickup_of = [-1] * 6
    if problem == ProblemType.PDPTW:
        windows = [TOY_EARLY_WINDOW] * 3 + [TOY_LATE_WINDOW] * 3
        demands = [1.0, 2.0, 3.0, 1.0, 2.0, 3.0]
        pickup_of = [-1, -1, -1, num_depots, num_depots + 1, num_depots + 2]
    profits = [float(k + 1) for k in range(6)] if problem.collects_profit else [0.0] * 6
    if problem == ProblemType.TOPTW:
        demands = [0.0] * 6

    depot_window = (0.0, TOY_HORIZON)
    return InstanceData(
        name=f"toy_{problem.value.lower()}",
        problem=problem,
        seed=0,
        num_nodes=num_depots + 6,
        num_agents=TOY_NUM_AGENTS,
        coords=depots + services,
        is_depot=[True] * num_depots + [False] * 6,
        demand=[0.0] * num_depots + demands,
        profit=[0.0] * num_depots + profits,
        service_time=[0.0] * num_depots + [TOY_SERVICE_TIME] * 6,
        tw_open=[depot_window[0]] * num_depots + [window[0] for window in windows],
        tw_close=[depot_window[1]] * num_depots + [window[1] for window in windows],
        capacity=TOY_CAPACITY,
        depot_open=[depot_window[0]] * num_depots,
        depot_close=[depot_window[1]] * num_depots,
        agent_home_depot=[agent % num_depots for agent in range(TOY_NUM_AGENTS)],
        pickup_of=[-1] * num_depots + pickup_of,
        soft_params=TOY_SOFT_PARAMS if problem.soft_windows else None,
    )
