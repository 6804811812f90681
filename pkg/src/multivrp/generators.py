"""
Seeded random instance generation and symmetry augmentation.
"""
import logging
from typing import Dict, List, Tuple

import numpy as np

from multivrp.models import GenerationSpec, InstanceData, ProblemType, ProfitMode
from multivrp.utils import build_travel_matrix
from multivrp.validation import AugmentationError, InfeasibleSpecError, TOLERANCE

logger = logging.getLogger(__name__)

MAX_WINDOW_ATTEMPTS = 100
NUM_TRANSFORMS = 8

_ROTATION = np.array([[0, -1], [1, 0]], dtype=int)
_REFLECTION = np.array([[1, 0], [0, -1]], dtype=int)


def _transform_matrix(transform_id: int) -> np.ndarray:
    rotation = np.linalg.matrix_power(_ROTATION, transform_id % 4)
    reflection = np.linalg.matrix_power(_REFLECTION, transform_id // 4)
    return rotation @ reflection


# Element k maps (x, y), centred on (0.5, 0.5), through rotation^(k % 4) after an
# optional reflection y -> 1 - y when k >= 4.
TRANSFORM_MATRICES: Tuple[np.ndarray, ...] = tuple(
    _transform_matrix(transform_id) for transform_id in range(NUM_TRANSFORMS)
)


def _check_transform_id(transform_id: int) -> int:
    if not isinstance(transform_id, (int, np.integer)) or not (
        0 <= transform_id < NUM_TRANSFORMS
    ):
        raise AugmentationError(
            f"transform_id must be an integer in 0..{NUM_TRANSFORMS - 1}, got {transform_id!r}."
        )
    return int(transform_id)


def _lookup_transform(matrix: np.ndarray) -> int:
    for transform_id, candidate in enumerate(TRANSFORM_MATRICES):
        if np.array_equal(candidate, matrix):
            return transform_id
    raise AugmentationError("matrix is not a symmetry of the square.")


def compose_transforms(first: int, second: int) -> int:
    """The single transform equivalent to applying `first` and then `second`."""
    first, second = _check_transform_id(first), _check_transform_id(second)
    return _lookup_transform(TRANSFORM_MATRICES[second] @ TRANSFORM_MATRICES[first])


def inverse_transform(transform_id: int) -> int:
    """The transform undoing `transform_id`."""
    transform_id = _check_transform_id(transform_id)
    return _lookup_transform(TRANSFORM_MATRICES[transform_id].T)


def transform_coords(coords: np.ndarray, transform_id: int) -> np.ndarray:
    """Apply a symmetry of the unit square to an array of points."""
    matrix = TRANSFORM_MATRICES[_check_transform_id(transform_id)]
    centred = np.asarray(coords, dtype=np.float64).reshape(-1, 2) - 0.5
    return centred @ matrix.T + 0.5


def augment_instance(instance: InstanceData, transform_id: int) -> InstanceData:
    """
    Apply one of the eight symmetries of the unit square to the coordinates.

    Everything else (windows, demands, fleet, name) is carried over unchanged.
    """
    transform_id = _check_transform_id(transform_id)
    coords = np.asarray(instance.coords, dtype=np.float64).reshape(-1, 2)
    if np.any(coords < -TOLERANCE) or np.any(coords > 1 + TOLERANCE):
        raise AugmentationError(
            f"instance '{instance.name}' has coordinates outside the unit square."
        )
    if transform_id == 0:
        return instance
    transformed = transform_coords(coords, transform_id)
    return InstanceData(
        **{
            **instance.dict(),
            "coords": [tuple(point) for point in transformed.tolist()],
        }
    )


def _assign_homes(num_agents: int, depots: List[int]) -> List[int]:
    """Agents are spread over the depots in contiguous blocks."""
    return [depots[agent * len(depots) // num_agents] for agent in range(num_agents)]


def _sample_window(
    rng: np.random.Generator,
    spec: GenerationSpec,
    node: int,
    reach: float,
    latest_close: float,
    earliest_close: float = -np.inf,
) -> Tuple[float, float]:
    """
    Draw a window with max(reach, earliest_close) <= close <= latest_close.

    The window opens no earlier than `reach`, the earliest possible arrival,
    unless even the narrowest width would then overrun `latest_close`. In that
    case it may open earlier (never before 0) so the node stays servable.
    Widths that cannot fit are not drawn; the rest are redrawn until the
    centre interval is non-empty.
    """
    width_low, width_high = spec.tw_width_range
    if reach + width_low <= latest_close:
        earliest_open = reach
    else:
        earliest_open = max(0.0, latest_close - width_low)
    width_high = max(width_low, min(width_high, latest_close - earliest_open))
    earliest_close = max(earliest_close, reach)
    for _ in range(MAX_WINDOW_ATTEMPTS):
        width = float(rng.uniform(width_low, width_high))
        centre_low = max(earliest_open + width / 2, earliest_close - width / 2)
        centre_high = latest_close - width / 2
        if centre_low <= centre_high:
            centre = float(rng.uniform(centre_low, centre_high))
            return centre - width / 2, centre + width / 2
    raise InfeasibleSpecError(
        f"no feasible time window for node {node} after {MAX_WINDOW_ATTEMPTS} attempts."
    )


def _sample_profits(
    rng: np.random.Generator, spec: GenerationSpec, demands: np.ndarray
) -> np.ndarray:
    if not spec.problem.collects_profit or spec.profit_mode == ProfitMode.NONE:
        return np.zeros(spec.num_services)
    if spec.profit_mode == ProfitMode.DEMAND_PROPORTIONAL:
        return demands.astype(np.float64)
    low, high = spec.profit_range
    return rng.integers(low, high + 1, size=spec.num_services).astype(np.float64)


def _sample_demands(rng: np.random.Generator, spec: GenerationSpec) -> np.ndarray:
    low, high = spec.demand_range
    if spec.problem == ProblemType.PDPTW:
        half = rng.integers(low, high + 1, size=spec.num_services // 2)
        return np.concatenate([half, half]).astype(np.float64)
    return rng.integers(low, high + 1, size=spec.num_services).astype(np.float64)


def generate_random(spec: GenerationSpec, seed: int) -> InstanceData:
    """
    Sample an instance from the spec's sample space.

    The result is a pure function of (spec, seed). Every service window is
    sampled so that the nearest depot with a vehicle can reach the node and
    get back before closing.
    """
    rng = np.random.default_rng(seed)
    num_depots = spec.num_depots
    num_nodes = num_depots + spec.num_services
    horizon = float(spec.horizon)
    service = float(spec.service_time)

    coords = rng.uniform(0.0, 1.0, size=(num_nodes, 2))
    travel = build_travel_matrix(coords)
    depots = list(range(num_depots))
    homes = _assign_homes(spec.num_agents, depots)
    admissible = np.asarray(sorted(set(homes)), dtype=int)
    nearest = admissible[np.argmin(travel[admissible, :], axis=0)]

    demands = _sample_demands(rng, spec)
    profits = _sample_profits(rng, spec, demands)
    if not spec.problem.uses_capacity:
        demands = np.zeros(spec.num_services)

    pickup_of = [-1] * num_nodes
    if spec.problem == ProblemType.PDPTW:
        half = spec.num_services // 2
        for offset in range(half):
            pickup_of[num_depots + half + offset] = num_depots + offset

    tw_open = [0.0] * num_depots
    tw_close = [horizon] * num_depots
    windows: Dict[int, Tuple[float, float]] = {}
    delivery_of = {pickup: node for node, pickup in enumerate(pickup_of) if pickup >= 0}
    for node in range(num_depots, num_nodes):
        depot = int(nearest[node])
        reach = float(travel[depot, node])
        latest_close = horizon - float(travel[node, depot]) - service
        earliest_close = -np.inf
        pickup = pickup_of[node]
        if pickup >= 0:
            # still open when reached straight from its own pickup
            pickup_start = max(
                windows[pickup][0], float(travel[nearest[pickup], pickup])
            )
            earliest_close = pickup_start + service + float(travel[pickup, node])
        delivery = delivery_of.get(node)
        if delivery is not None:
            # leaves room to carry the load to its delivery and still return
            latest_close = min(
                latest_close,
                horizon
                - 2 * service
                - float(travel[node, delivery])
                - float(travel[delivery, nearest[delivery]]),
            )
        windows[node] = _sample_window(
            rng,
            spec,
            node,
            reach=reach,
            latest_close=latest_close,
            earliest_close=earliest_close,
        )
        tw_open.append(windows[node][0])
        tw_close.append(windows[node][1])

    logger.debug(
        "Generated %s instance with %d services from seed %d.",
        spec.problem.value,
        spec.num_services,
        seed,
    )
    return InstanceData(
        name=f"{spec.problem.value.lower()}_{spec.num_services}_{seed}",
        problem=spec.problem,
        seed=seed,
        num_nodes=num_nodes,
        num_agents=spec.num_agents,
        coords=[tuple(point) for point in coords.tolist()],
        is_depot=[True] * num_depots + [False] * spec.num_services,
        demand=[0.0] * num_depots + demands.tolist(),
        profit=[0.0] * num_depots + profits.tolist(),
        service_time=[0.0] * num_depots + [service] * spec.num_services,
        tw_open=tw_open,
        tw_close=tw_close,
        capacity=spec.capacity,
        depot_open=[0.0] * num_depots,
        depot_close=[horizon] * num_depots,
        agent_home_depot=homes,
        pickup_of=pickup_of,
        soft_params=spec.soft_params,
    )
