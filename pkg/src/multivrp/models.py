"""
Contains the multivrp domain records modeled as Pydantic models.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    PrivateAttr,
    root_validator,
    validator,
)

from multivrp.utils import build_travel_matrix, nearest_depot
from multivrp.validation import (
    consistent_fleet,
    consistent_node_lengths,
    distinct_seeds,
    no_negative_entries,
)

# Reusable Validators
non_negative_validator = validator(
    "demand", "profit", "service_time", allow_reuse=True
)(no_negative_entries)
distinct_seeds_validator = validator("seeds", allow_reuse=True)(distinct_seeds)

# Reusable Fields
name_field = Field(description="Human-Readable name for this instance.")
objective_field = Field(
    description="Objective in the reporting convention: total distance for problems that minimize distance, collected score for problems that maximize it."
)


class ProblemType(str, Enum):
    """The seven routing problems with time windows."""

    CVRPTW = "CVRPTW"
    CVRPSTW = "CVRPSTW"
    TOPTW = "TOPTW"
    PDPTW = "PDPTW"
    SDVRPTW = "SDVRPTW"
    PCVRPTW = "PCVRPTW"
    MDVRPTW = "MDVRPTW"

    @property
    def soft_windows(self) -> bool:
        """Time windows may be violated at a penalty."""
        return self is ProblemType.CVRPSTW

    @property
    def collects_profit(self) -> bool:
        """Serving a node collects its profit."""
        return self in (ProblemType.TOPTW, ProblemType.PCVRPTW)

    @property
    def maximizes(self) -> bool:
        """Reported objective is a score to maximize (otherwise a distance)."""
        return self.collects_profit

    @property
    def penalizes_unserved(self) -> bool:
        """Unserved services are charged a terminal penalty."""
        return not self.collects_profit

    @property
    def uses_capacity(self) -> bool:
        """Vehicle capacity constrains the service."""
        return self is not ProblemType.TOPTW


class Split(str, Enum):
    """Dataset split of an instance set."""

    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


# Seed ranges are disjoint so splits never share an instance.
SPLIT_SEED_OFFSETS: Dict[Split, int] = {
    Split.TRAIN: 0,
    Split.VALIDATION: 100000,
    Split.TEST: 200000,
}
SPLIT_SEED_RANGE = 100000


class ProfitMode(str, Enum):
    """How node profits (or prizes) are drawn."""

    NONE = "none"
    UNIFORM = "uniform"
    DEMAND_PROPORTIONAL = "demand_proportional"


class SelectorKind(str, Enum):
    """Strategies for choosing the next agent to act."""

    ROUND_ROBIN = "round_robin"
    SMALLEST_TIME = "smallest_time"
    RANDOM = "random"


class RewardMode(str, Enum):
    """Dense rewards are emitted every step, sparse ones at the last step."""

    DENSE = "dense"
    SPARSE = "sparse"


class BenchmarkFormat(str, Enum):
    """Supported benchmark file grammars."""

    SOLOMON = "solomon"
    LI_LIM = "li_lim"
    CORDEAU = "cordeau"


class PenaltyAnchor(str, Enum):
    """The time soft window penalties are measured at."""

    SERVICE_START = "service_start"
    ARRIVAL = "arrival"


class SoftTimeWindowParams(BaseModel):
    """
    Soft time window parameters.

    Service may start within [o - p_max, c + p_max]; early and late starts
    are charged at rates p_e and p_l, and a vehicle may not arrive more than
    w_max before the enlarged window opens.
    """

    p_max: NonNegativeFloat = Field(
        description="Maximum allowed violation of a time window."
    )
    w_max: NonNegativeFloat = Field(description="Maximum waiting time at a node.")
    p_e: NonNegativeFloat = Field(description="Early service penalty rate.")
    p_l: NonNegativeFloat = Field(description="Late service penalty rate.")
    penalty_anchor: PenaltyAnchor = Field(
        default=PenaltyAnchor.SERVICE_START,
        description="Whether penalties are measured at service start or at arrival.",
    )

    class Config:
        "Config for the SoftTimeWindowParams"
        allow_mutation = False


@dataclass(frozen=True)
class InstanceArrays:
    """Read-only numpy views of an instance, shared by the simulation modules."""

    travel: np.ndarray
    demand: np.ndarray
    profit: np.ndarray
    service_time: np.ndarray
    tw_open: np.ndarray
    tw_close: np.ndarray
    is_depot: np.ndarray
    is_pickup: np.ndarray
    is_delivery: np.ndarray
    pickup_of: np.ndarray
    depot_open_at: np.ndarray
    depot_close_at: np.ndarray
    home: np.ndarray
    nearest_depot: np.ndarray
    coords: np.ndarray
    horizon: float
    num_services: int


class InstanceData(BaseModel):
    """
    The InstanceData model.

    An immutable problem instance: nodes, coordinates, time windows,
    demands and profits, the fleet and the problem-variant parameters.
    """

    name: str = name_field
    problem: ProblemType = Field(description="The routing problem variant.")
    seed: NonNegativeInt = Field(
        default=0, description="Seed the instance was generated from."
    )
    num_nodes: PositiveInt = Field(description="Number of depots plus services.")
    num_agents: PositiveInt = Field(description="Number of vehicles in the fleet.")
    coords: List[Tuple[float, float]] = Field(description="Node coordinates.")
    is_depot: List[bool] = Field(description="Marks the depot nodes.")
    demand: List[float] = Field(description="Demand per node, 0 at depots.")
    profit: List[float] = Field(
        description="Profit (TOPTW) or prize (PCVRPTW) per node, 0 where unused."
    )
    service_time: List[float] = Field(description="Service duration per node.")
    tw_open: List[float] = Field(description="Time window opening per node.")
    tw_close: List[float] = Field(description="Time window closing per node.")
    capacity: PositiveFloat = Field(description="Vehicle capacity.")
    depot_open: List[float] = Field(
        description="Start of the working day per depot, in depot order."
    )
    depot_close: List[float] = Field(
        description="End of the working day per depot, in depot order."
    )
    agent_home_depot: List[int] = Field(description="Home depot node of each agent.")
    pickup_of: List[int] = Field(
        description="PDPTW: for a delivery node the index of its pickup, -1 elsewhere."
    )
    soft_params: Optional[SoftTimeWindowParams] = Field(
        default=None, description=SoftTimeWindowParams.__doc__
    )
    travel_time: Optional[List[List[float]]] = Field(
        default=None,
        description="Explicit travel time matrix. Derived from the coordinates when absent.",
    )

    _arrays: Optional[InstanceArrays] = PrivateAttr(default=None)

    _non_negative: classmethod = non_negative_validator
    _node_lengths: classmethod = root_validator(allow_reuse=True, skip_on_failure=True)(
        consistent_node_lengths
    )
    _fleet: classmethod = root_validator(allow_reuse=True, skip_on_failure=True)(
        consistent_fleet
    )

    class Config:
        "Config for the InstanceData"
        allow_mutation = False
        extra = "forbid"

    @property
    def depot_indices(self) -> List[int]:
        """Depot nodes in index order."""
        return [node for node, flag in enumerate(self.is_depot) if flag]

    @property
    def service_indices(self) -> List[int]:
        """Service (non-depot) nodes in index order."""
        return [node for node, flag in enumerate(self.is_depot) if not flag]

    @property
    def num_services(self) -> int:
        """Number of service nodes."""
        return self.num_nodes - len(self.depot_indices)

    @property
    def horizon(self) -> float:
        """Latest depot closing time."""
        return max(self.depot_close)

    def travel_matrix(self) -> np.ndarray:
        """The explicit travel matrix, or the Euclidean one derived from coords."""
        return self.arrays().travel

    def arrays(self) -> InstanceArrays:
        """Numpy views of the instance, built once and cached."""
        if self._arrays is None:
            self._arrays = self._build_arrays()
        return self._arrays

    def _build_arrays(self) -> InstanceArrays:
        if self.travel_time is not None:
            travel = np.asarray(self.travel_time, dtype=np.float64)
        else:
            travel = build_travel_matrix(self.coords)
        is_depot = np.asarray(self.is_depot, dtype=bool)
        pickup_of = np.asarray(self.pickup_of, dtype=int)
        is_delivery = pickup_of >= 0
        is_pickup = np.zeros(self.num_nodes, dtype=bool)
        # out-of-range pairings are left to validate_instance
        paired = is_delivery & (pickup_of < self.num_nodes)
        is_pickup[pickup_of[paired]] = True
        depot_open_at = np.full(self.num_nodes, np.nan)
        depot_close_at = np.full(self.num_nodes, np.nan)
        depots = np.flatnonzero(is_depot)
        depot_open_at[depots] = self.depot_open
        depot_close_at[depots] = self.depot_close
        arrays = InstanceArrays(
            travel=travel,
            demand=np.asarray(self.demand, dtype=np.float64),
            profit=np.asarray(self.profit, dtype=np.float64),
            service_time=np.asarray(self.service_time, dtype=np.float64),
            tw_open=np.asarray(self.tw_open, dtype=np.float64),
            tw_close=np.asarray(self.tw_close, dtype=np.float64),
            is_depot=is_depot,
            is_pickup=is_pickup,
            is_delivery=is_delivery,
            pickup_of=pickup_of,
            depot_open_at=depot_open_at,
            depot_close_at=depot_close_at,
            home=np.asarray(self.agent_home_depot, dtype=int),
            nearest_depot=nearest_depot(travel, depots)
            if depots.size
            else np.zeros(0, dtype=int),
            coords=np.asarray(self.coords, dtype=np.float64).reshape(-1, 2),
            horizon=float(self.horizon),
            num_services=self.num_services,
        )
        for array in vars(arrays).values():
            if isinstance(array, np.ndarray):
                array.setflags(write=False)
        return arrays


class Visit(BaseModel):
    """One stop of a route."""

    node: NonNegativeInt = Field(description="Visited node.")
    arrival: float = Field(description="Arrival time at the node.")
    service_start: float = Field(description="Time service started.")
    quantity: NonNegativeFloat = Field(
        default=0.0,
        description="Quantity served, picked up or delivered. 0 at depots.",
    )

    @validator("service_start")
    @classmethod
    def not_before_arrival(cls, value: float, values: Dict) -> float:
        """Service can not start before the vehicle arrives."""
        arrival = values.get("arrival")
        if arrival is not None and value < arrival - 1e-9:
            raise ValueError(
                f"service_start ({value}) is before the arrival ({arrival})."
            )
        return value

    class Config:
        "Config for the Visit"
        allow_mutation = False


class Route(BaseModel):
    """
    The Route model.

    The visits of one agent in order. The origin is the agent's home depot
    and the last visit returns to it.
    """

    agent: NonNegativeInt = Field(description="Agent driving the route.")
    visits: List[Visit] = Field(default=[], description="Ordered visits.")

    class Config:
        "Config for the Route"
        allow_mutation = False

    @property
    def nodes(self) -> List[int]:
        """The visited nodes in order."""
        return [visit.node for visit in self.visits]


class Violation(BaseModel):
    "The model for a violated instance or solution rule."

    code: str = Field(description="Stable upper-case violation code.")
    index: int = Field(description="Node or agent index the violation refers to.")
    message: str = Field(description="A human-readable description.")


class ValidationReport(BaseModel):
    """
    The ValidationReport model.

    `ok` holds exactly when no violation was found.
    """

    ok: bool
    violations: List[Violation] = Field(default=[])

    @root_validator(skip_on_failure=True)
    @classmethod
    def ok_iff_no_violations(cls, values: Dict) -> Dict:
        """Validate that `ok` agrees with the violation list."""
        assert values["ok"] == (
            not values["violations"]
        ), "ok must be true exactly when there are no violations."
        return values

    @classmethod
    def from_violations(cls, violations: List[Violation]) -> ValidationReport:
        """Build a report from a list of violations."""
        return cls(ok=not violations, violations=violations)

    def codes(self) -> List[str]:
        """Violation codes in report order."""
        return [violation.code for violation in self.violations]


class SolutionEvaluation(BaseModel):
    """Result of replaying a route set against an instance."""

    objective: float = Field(
        description="The sparse reward of the solution (negative distance, collected profit, or both)."
    )
    penalty: float = Field(description="Soft window and unserved-service penalties.")
    feasible: bool = Field(description="No hard constraint was violated.")
    violations: List[Violation] = Field(default=[])
    total_distance: float = Field(default=0.0)
    profit_collected: float = Field(default=0.0)

    @property
    def total(self) -> float:
        """Reward plus penalty."""
        return self.objective + self.penalty


class GenerationSpec(BaseModel):
    """
    The GenerationSpec model.

    The sample space of the random instance generator.
    """

    problem: ProblemType
    num_services: PositiveInt
    num_agents: PositiveInt
    num_depots: PositiveInt = 1
    capacity: PositiveFloat
    horizon: PositiveFloat
    tw_width_range: Tuple[NonNegativeFloat, NonNegativeFloat]
    service_time: NonNegativeFloat
    demand_range: Tuple[NonNegativeInt, NonNegativeInt]
    profit_mode: ProfitMode = ProfitMode.NONE
    profit_range: Tuple[NonNegativeInt, NonNegativeInt] = (1, 10)
    soft_params: Optional[SoftTimeWindowParams] = None

    class Config:
        "Config for the GenerationSpec"
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    @classmethod
    def consistent_sample_space(cls, values: Dict) -> Dict:
        """Validate that the sample space can hold feasible instances."""
        low, high = values["tw_width_range"]
        assert low <= high, "tw_width_range must be ordered (min, max)."
        assert high <= values["horizon"], "tw_width_range max exceeds the horizon."
        demand_low, demand_high = values["demand_range"]
        assert demand_low <= demand_high, "demand_range must be ordered (min, max)."
        assert (
            demand_high <= values["capacity"]
        ), "demand_range max exceeds the capacity."
        profit_low, profit_high = values["profit_range"]
        assert profit_low <= profit_high, "profit_range must be ordered (min, max)."
        problem = values["problem"]
        if problem != ProblemType.MDVRPTW:
            assert values["num_depots"] == 1, f"{problem.value} has a single depot."
        if problem == ProblemType.PDPTW:
            assert (
                values["num_services"] % 2 == 0
            ), "PDPTW needs an even number of services (pickup/delivery pairs)."
        if problem.soft_windows:
            assert values["soft_params"] is not None, "CVRPSTW needs soft_params."
        return values

    @classmethod
    def default(cls, problem: ProblemType, num_services: int = 50) -> GenerationSpec:
        """
        The default sample space: horizon 3, service time 0.02, window widths
        in [0.2, 0.6], demands 1..9, capacity 40 up to 50 services and 50 above,
        profits uniform integers 1..10.
        """
        problem = ProblemType(problem)
        num_agents = 5 if problem.collects_profit else 25
        return cls(
            problem=problem,
            num_services=num_services,
            num_agents=num_agents,
            num_depots=5 if problem == ProblemType.MDVRPTW else 1,
            capacity=40.0 if num_services <= 50 else 50.0,
            horizon=3.0,
            tw_width_range=(0.2, 0.6),
            service_time=0.02,
            demand_range=(1, 9),
            profit_mode=ProfitMode.UNIFORM
            if problem.collects_profit
            else ProfitMode.NONE,
            soft_params=SoftTimeWindowParams(p_max=0.1, w_max=0.2, p_e=1.0, p_l=1.0)
            if problem.soft_windows
            else None,
        )


class InstanceSet(BaseModel):
    """
    The InstanceSet model.

    A reproducible train, validation or test set: a generation spec and the
    seeds drawn from the split's own seed range.
    """

    split: Split
    seeds: List[NonNegativeInt]
    spec: GenerationSpec

    _distinct_seeds: classmethod = distinct_seeds_validator

    @validator("seeds")
    @classmethod
    def seeds_within_split(cls, seeds: List[int], values: Dict) -> List[int]:
        """Validate that every seed comes from the split's own range."""
        split = values.get("split")
        if split is None:
            return seeds
        low = SPLIT_SEED_OFFSETS[split]
        for seed in seeds:
            if not low <= seed < low + SPLIT_SEED_RANGE:
                raise ValueError(
                    f"seed {seed} is outside the {split.value} range [{low}, {low + SPLIT_SEED_RANGE})."
                )
        return seeds

    @classmethod
    def for_split(cls, split: Split, spec: GenerationSpec, count: int) -> InstanceSet:
        """The first `count` seeds of the split's range."""
        offset = SPLIT_SEED_OFFSETS[Split(split)]
        return cls(split=split, seeds=list(range(offset, offset + count)), spec=spec)


class EpisodeStats(BaseModel):
    """
    The EpisodeStats model.

    End-of-episode report, integrated in the last step's info.
    """

    instance: str = Field(default="", description="Name of the instance.")
    problem: ProblemType
    num_services: NonNegativeInt = 0
    seed: NonNegativeInt = 0
    total_reward: float
    total_penalty: float
    objective: float = objective_field
    total_distance: NonNegativeFloat = 0.0
    agents_used: NonNegativeInt = Field(
        description="Agents with at least one non-depot visit."
    )
    services_served: NonNegativeInt
    demand_served_fraction: float = Field(ge=0, le=1)
    profit_collected_fraction: float = Field(ge=0, le=1)
    steps: NonNegativeInt = 0
    routes: List[Route] = Field(default=[])


class RolloutFailure(BaseModel):
    """An episode of a batch that raised instead of completing."""

    index: NonNegativeInt
    instance: str
    code: str
    message: str


class RolloutSummary(BaseModel):
    """Aggregate statistics of a batch of episodes."""

    problem: Optional[ProblemType] = None
    num_services: Optional[int] = None
    policy: Optional[str] = None
    selector: Optional[SelectorKind] = None
    episodes: NonNegativeInt
    av_obj: float
    std_obj: float
    av_agents_used: float
    std_agents_used: float
    av_served_fraction: float
    std_served_fraction: float
    av_total_reward: float
    av_total_penalty: float


class ObservationConfig(BaseModel):
    """
    The ObservationConfig model.

    Selected feature names per observation family, in column order.
    """

    nodes_static: List[str] = []
    nodes_dynamic: List[str] = []
    agent: List[str] = []
    other_agents: List[str] = []
    global_: List[str] = Field(default=[], alias="global")

    class Config:
        "Config for the ObservationConfig"
        allow_population_by_field_name = True
        allow_mutation = False

    @validator("*")
    @classmethod
    def no_duplicates(cls, value: List[str]) -> List[str]:
        """A feature appears at most once per family."""
        duplicated = sorted({name for name in value if value.count(name) > 1})
        if duplicated:
            raise ValueError(f"duplicated features: {', '.join(duplicated)}")
        return value

    def families(self) -> Dict[str, List[str]]:
        """Feature names keyed by family."""
        return {
            "nodes_static": self.nodes_static,
            "nodes_dynamic": self.nodes_dynamic,
            "agent": self.agent,
            "other_agents": self.other_agents,
            "global": self.global_,
        }


class EnvConfig(BaseModel):
    """The environment configuration."""

    selector: SelectorKind = Field(
        default=SelectorKind.ROUND_ROBIN,
        description="Strategy used to select the next agent.",
    )
    reward_mode: RewardMode = Field(
        default=RewardMode.DENSE,
        description="Emit rewards at every step or only at the end.",
    )
    observations: Optional[ObservationConfig] = Field(
        default=None,
        description="Observation features. The problem's default set when absent.",
    )
    unserved_penalty_factor: NonNegativeFloat = Field(
        default=10.0,
        description="Multiplier of the depot distance charged per unserved service.",
    )
    allow_mixed_sizes: bool = Field(
        default=False,
        description="Whether a batch may mix instance sizes.",
    )
    validate_instances: bool = Field(
        default=True, description="Validate every instance on reset."
    )

    class Config:
        "Config for the EnvConfig"
        allow_mutation = False


class OracleResult(BaseModel):
    """Best episode found by exhaustive search."""

    objective: float = Field(description="Sparse reward of the optimal episode.")
    penalty: float
    routes: List[Route]
    explored: NonNegativeInt = Field(
        default=0, description="Number of search nodes expanded."
    )

    @property
    def total(self) -> float:
        """Reward plus penalty."""
        return self.objective + self.penalty


class ReferenceScore(BaseModel):
    """A published reference score for a problem and size."""

    problem: ProblemType
    num_services: PositiveInt
    score: float
    agents: Optional[float] = None
    method: str = "reference"
