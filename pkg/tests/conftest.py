"""Common fixtures to be used across tests."""
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import pytest

from multivrp.default_fixtures import generate_toy
from multivrp.models import InstanceData, ProblemType, SoftTimeWindowParams

ServiceRow = Tuple[float, float, float, float, float, float, float]


@pytest.fixture(scope="session")
def toy_instances() -> Dict[ProblemType, InstanceData]:
    """
    Yields the hard-coded toy instance of every problem.
    """
    yield {problem: generate_toy(problem) for problem in ProblemType}


@pytest.fixture(scope="session")
def make_instance() -> Callable[..., InstanceData]:
    """
    Returns a builder for small single-depot instances.

    Every service is given as (x, y, demand, profit, open, close, service_time);
    the depot sits at the origin and is open on [0, horizon].
    """

    def build(
        services: Sequence[ServiceRow],
        problem: ProblemType = ProblemType.CVRPTW,
        num_agents: int = 1,
        capacity: float = 10.0,
        horizon: float = 3.0,
        soft_params: Optional[SoftTimeWindowParams] = None,
        pickup_of: Optional[List[int]] = None,
        travel_time: Optional[List[List[float]]] = None,
        name: str = "tiny",
    ) -> InstanceData:
        num_nodes = len(services) + 1
        return InstanceData(
            name=name,
            problem=problem,
            num_nodes=num_nodes,
            num_agents=num_agents,
            coords=[(0.0, 0.0)] + [(row[0], row[1]) for row in services],
            is_depot=[True] + [False] * len(services),
            demand=[0.0] + [row[2] for row in services],
            profit=[0.0] + [row[3] for row in services],
            service_time=[0.0] + [row[6] for row in services],
            tw_open=[0.0] + [row[4] for row in services],
            tw_close=[horizon] + [row[5] for row in services],
            capacity=capacity,
            depot_open=[0.0],
            depot_close=[horizon],
            agent_home_depot=[0] * num_agents,
            pickup_of=pickup_of or [-1] * num_nodes,
            soft_params=soft_params,
            travel_time=travel_time,
        )

    return build


@pytest.fixture(scope="session")
def solomon_text() -> str:
    with open("tests/data/solomon_small.txt", "r") as solomon_file:
        yield solomon_file.read()
