"""
Contains the error hierarchy, the reusable field validators for the models,
and the semantic instance validator.
"""
from __future__ import annotations

from typing import TYPE_CHECKING, Dict, List, Optional, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from multivrp.models import InstanceData, ValidationReport, Violation

TOLERANCE = 1e-9


class MultiVRPError(ValueError):
    """Base error for everything raised by multivrp."""

    code = "MULTIVRP_ERROR"

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class InvalidInstanceError(MultiVRPError):
    """Raised when an instance can not be used, e.g. it failed validation."""

    code = "INVALID_INSTANCE"

    def __init__(self, message: str, report: Optional[ValidationReport] = None) -> None:
        super().__init__(message)
        self.report = report


class InfeasibleSpecError(MultiVRPError):
    """The generation spec admits no feasible time window for some node."""

    code = "INFEASIBLE_SPEC"


class BenchmarkParseError(MultiVRPError):
    """A benchmark file does not follow its grammar."""

    code = "PARSE_ERROR"

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class BenchmarkValidationError(BenchmarkParseError):
    """A benchmark file is well formed but carries invalid values."""

    code = "VALIDATION_ERROR"


class DecodeError(MultiVRPError):
    """An instance document or manifest can not be decoded."""

    code = "DECODE_ERROR"


class AugmentationError(MultiVRPError):
    """Invalid augmentation request."""

    code = "AUGMENTATION_ERROR"


class MaskViolationError(MultiVRPError):
    """An action outside the feasibility mask was sent to the environment."""

    code = "MASK_VIOLATION"


class EpisodeDoneError(MultiVRPError):
    """The episode is already finished."""

    code = "EPISODE_DONE"


class SizeMismatchError(MultiVRPError):
    """A batch mixes instance sizes and the config does not allow it."""

    code = "SIZE_MISMATCH"


class ProblemMismatchError(MultiVRPError):
    """A batch mixes problem variants."""

    code = "PROBLEM_MISMATCH"


class SolutionInputError(MultiVRPError):
    """A solution references unknown nodes or agents."""

    code = "SOLUTION_INPUT_ERROR"


class GapError(MultiVRPError):
    """The gap is undefined for a zero reference score."""

    code = "GAP_ERROR"


class OracleTooLargeError(MultiVRPError):
    """The instance exceeds the exhaustive search bound."""

    code = "ORACLE_TOO_LARGE"


class OracleNoSolutionError(MultiVRPError):
    """No episode completed within the depth bound."""

    code = "ORACLE_NO_SOLUTION"


class UnsupportedSelectorError(MultiVRPError):
    """The exhaustive search needs a deterministic selector."""

    code = "UNSUPPORTED_SELECTOR"


class UnknownFeatureError(MultiVRPError):
    """An observation config names a feature that is not registered."""

    code = "UNKNOWN_FEATURE"


class UnknownPolicyError(MultiVRPError):
    """A policy name that is not in the registry."""

    code = "UNKNOWN_POLICY"


# Reusable validators


def consistent_node_lengths(cls: type, values: Dict) -> Dict:
    """
    Check that every per-node list has one entry per node, and that
    `num_nodes` agrees with the coordinates.
    """
    coords = values.get("coords")
    if coords is None:
        return values
    num_nodes = len(coords)
    if values.get("num_nodes") is not None and values["num_nodes"] != num_nodes:
        raise ValueError(
            f"num_nodes ({values['num_nodes']}) does not match the {num_nodes} coordinates."
        )
    for field_name in (
        "is_depot",
        "demand",
        "profit",
        "service_time",
        "tw_open",
        "tw_close",
        "pickup_of",
    ):
        field_value = values.get(field_name)
        if field_value is not None and len(field_value) != num_nodes:
            raise ValueError(
                f"'{field_name}' has {len(field_value)} entries, expected {num_nodes}."
            )
    travel_time = values.get("travel_time")
    if travel_time is not None and (
        len(travel_time) != num_nodes
        or any(len(row) != num_nodes for row in travel_time)
    ):
        raise ValueError(f"travel_time must be a {num_nodes}x{num_nodes} matrix.")
    return values


def consistent_fleet(cls: type, values: Dict) -> Dict:
    """Check the fleet description against the depot flags."""
    homes = values.get("agent_home_depot")
    num_agents = values.get("num_agents")
    if homes is not None and num_agents is not None and len(homes) != num_agents:
        raise ValueError(
            f"agent_home_depot has {len(homes)} entries, expected {num_agents}."
        )
    is_depot = values.get("is_depot")
    if is_depot is None:
        return values
    num_depots = sum(bool(flag) for flag in is_depot)
    for field_name in ("depot_open", "depot_close"):
        field_value = values.get(field_name)
        if field_value is not None and len(field_value) != num_depots:
            raise ValueError(
                f"'{field_name}' has {len(field_value)} entries, expected one per depot ({num_depots})."
            )
    return values


def no_negative_entries(values: List[float]) -> List[float]:
    """Demands, profits and service times are non-negative."""
    for index, value in enumerate(values):
        if value < 0:
            raise ValueError(f"entry {index} is negative ({value}).")
    return values


def distinct_seeds(seeds: List[int]) -> List[int]:
    """Seeds of an instance set must be pairwise distinct."""
    if len(set(seeds)) != len(seeds):
        raise ValueError("Seeds of an instance set must be pairwise distinct.")
    return seeds


def _violation(code: str, index: int, message: str) -> Violation:
    from multivrp.models import Violation

    return Violation(code=code, index=index, message=message)


def _check_windows(instance: InstanceData) -> List[Violation]:
    violations = []
    for node, (open_, close) in enumerate(zip(instance.tw_open, instance.tw_close)):
        if open_ > close:
            violations.append(
                _violation(
                    "WINDOW_INVERTED",
                    node,
                    f"time window [{open_}, {close}] opens after it closes.",
                )
            )
    for position, (open_, close) in enumerate(
        zip(instance.depot_open, instance.depot_close)
    ):
        if open_ > close:
            violations.append(
                _violation(
                    "DEPOT_WINDOW_INVERTED",
                    instance.depot_indices[position],
                    f"depot window [{open_}, {close}] opens after it closes.",
                )
            )
    return violations


def _check_depots_and_fleet(instance: InstanceData) -> List[Violation]:
    from multivrp.models import ProblemType

    violations = []
    depots = instance.depot_indices
    if not depots or (instance.problem != ProblemType.MDVRPTW and len(depots) != 1):
        violations.append(
            _violation(
                "DEPOT_COUNT",
                -1,
                f"{instance.problem.value} needs exactly one depot, found {len(depots)}."
                if instance.problem != ProblemType.MDVRPTW
                else "MDVRPTW needs at least one depot.",
            )
        )
    for node in depots:
        if instance.demand[node] != 0 or instance.service_time[node] != 0:
            violations.append(
                _violation(
                    "DEPOT_HAS_DEMAND",
                    node,
                    "depots carry no demand and no service time.",
                )
            )
    for agent, home in enumerate(instance.agent_home_depot):
        if not 0 <= home < instance.num_nodes or not instance.is_depot[home]:
            violations.append(
                _violation(
                    "HOME_NOT_DEPOT",
                    agent,
                    f"agent {agent} is homed at node {home}, which is not a depot.",
                )
            )
    return violations


def _check_capacity(instance: InstanceData) -> List[Violation]:
    from multivrp.models import ProblemType

    if instance.problem in (ProblemType.TOPTW, ProblemType.SDVRPTW):
        # split deliveries may exceed a single vehicle's capacity
        return []
    return [
        _violation(
            "DEMAND_EXCEEDS_CAPACITY",
            node,
            f"demand {instance.demand[node]} exceeds the capacity {instance.capacity}.",
        )
        for node in instance.service_indices
        if instance.demand[node] > instance.capacity + TOLERANCE
    ]


def _check_pairing(instance: InstanceData) -> List[Violation]:
    from multivrp.models import ProblemType

    if instance.problem != ProblemType.PDPTW:
        return [
            _violation("INVALID_PAIRING", node, "only PDPTW nodes may be paired.")
            for node, pickup in enumerate(instance.pickup_of)
            if pickup != -1
        ]

    violations = []
    referenced: Dict[int, int] = {}
    for node in instance.service_indices:
        pickup = instance.pickup_of[node]
        if pickup == -1:
            continue
        if (
            not 0 <= pickup < instance.num_nodes
            or instance.is_depot[pickup]
            or instance.pickup_of[pickup] != -1
        ):
            violations.append(
                _violation(
                    "INVALID_PAIRING",
                    node,
                    f"delivery {node} references {pickup}, which is not a pickup.",
                )
            )
            continue
        if pickup in referenced:
            violations.append(
                _violation(
                    "DUPLICATE_PAIRING",
                    node,
                    f"pickup {pickup} is already paired with delivery {referenced[pickup]}.",
                )
            )
            continue
        referenced[pickup] = node
        if abs(instance.demand[pickup] - instance.demand[node]) > TOLERANCE:
            violations.append(
                _violation(
                    "PAIR_DEMAND_MISMATCH",
                    node,
                    f"delivery {node} unloads {instance.demand[node]} but pickup {pickup} loads {instance.demand[pickup]}.",
                )
            )
    for node in instance.service_indices:
        if instance.pickup_of[node] == -1 and node not in referenced:
            violations.append(
                _violation(
                    "UNPAIRED_DELIVERY",
                    node,
                    f"node {node} neither references a pickup nor is referenced by a delivery.",
                )
            )
    return violations


def _check_travel(instance: InstanceData) -> List[Violation]:
    if instance.travel_time is None:
        return []
    matrix = np.asarray(instance.travel_time, dtype=float)
    violations = []
    if not np.all(np.isfinite(matrix)):
        violations.append(
            _violation("NON_FINITE", -1, "travel_time has non-finite entries.")
        )
        return violations
    for node in np.flatnonzero(np.abs(np.diag(matrix)) > TOLERANCE):
        violations.append(
            _violation("TRAVEL_DIAGONAL", int(node), "travel_time diagonal is not 0.")
        )
    rows, cols = np.nonzero(np.abs(matrix - matrix.T) > TOLERANCE)
    for row, col in zip(rows, cols):
        if row < col:
            violations.append(
                _violation(
                    "TRAVEL_ASYMMETRIC",
                    int(row),
                    f"travel_time[{row}][{col}] differs from travel_time[{col}][{row}].",
                )
            )
    return violations


def _admissible_depots(instance: InstanceData) -> Sequence[int]:
    homes = set(instance.agent_home_depot)
    depots = [node for node in instance.depot_indices if node in homes]
    return depots or instance.depot_indices


def _check_reachability(instance: InstanceData) -> List[Violation]:
    if not np.all(np.isfinite(np.asarray(instance.coords, dtype=float))):
        return [_violation("NON_FINITE", -1, "coordinates must be finite.")]
    travel = instance.travel_matrix()
    depots = list(_admissible_depots(instance))
    if not depots:
        return []
    slack = instance.soft_params.p_max if instance.soft_params else 0.0
    violations = []
    for node in instance.service_indices:
        if instance.demand[node] <= 0 and instance.profit[node] <= 0:
            continue
        depot = min(depots, key=lambda candidate: travel[candidate][node])
        position = instance.depot_indices.index(depot)
        arrival = instance.depot_open[position] + travel[depot][node]
        start = max(arrival, instance.tw_open[node])
        back = start + instance.service_time[node] + travel[node][depot]
        if arrival > instance.tw_close[node] + slack + TOLERANCE:
            violations.append(
                _violation(
                    "UNREACHABLE",
                    node,
                    f"earliest arrival {arrival:.6g} is after the closing time {instance.tw_close[node]}.",
                )
            )
        elif back > instance.depot_close[position] + TOLERANCE:
            violations.append(
                _violation(
                    "UNREACHABLE",
                    node,
                    f"earliest return {back:.6g} to depot {depot} is after its closing time {instance.depot_close[position]}.",
                )
            )
    return violations


def validate_instance(instance: InstanceData) -> ValidationReport:
    """
    Check every semantic invariant of an instance and report all violations.

    Violations are data, never raised.
    """
    from multivrp.models import ValidationReport

    violations: List[Violation] = []
    violations += _check_windows(instance)
    violations += _check_depots_and_fleet(instance)
    violations += _check_capacity(instance)
    violations += _check_pairing(instance)
    violations += _check_travel(instance)
    if not any(violation.code == "NON_FINITE" for violation in violations):
        violations += _check_reachability(instance)
    return ValidationReport.from_violations(violations)
