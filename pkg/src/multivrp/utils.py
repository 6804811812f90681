"""
Utils for use within various multivrp modules.
"""

from typing import Sequence, Tuple

import numpy as np

from multivrp.validation import InvalidInstanceError


def build_travel_matrix(coords: Sequence[Tuple[float, float]]) -> np.ndarray:
    """
    Euclidean travel time between every pair of points (unit speed).

    The result is symmetric with an exact zero diagonal.
    """
    points = np.asarray(coords, dtype=np.float64).reshape(-1, 2)
    if points.shape[0] < 1:
        raise InvalidInstanceError("At least one coordinate is required.")
    if not np.all(np.isfinite(points)):
        raise InvalidInstanceError("Coordinates must be finite.")
    deltas = points[:, None, :] - points[None, :, :]
    matrix = np.hypot(deltas[..., 0], deltas[..., 1])
    np.fill_diagonal(matrix, 0.0)
    return matrix


def nearest_depot(travel: np.ndarray, depots: Sequence[int]) -> np.ndarray:
    """For every node, the index of the closest depot (lowest index on ties)."""
    depot_array = np.asarray(depots, dtype=int)
    closest = np.argmin(travel[depot_array, :], axis=0)
    return depot_array[closest]
