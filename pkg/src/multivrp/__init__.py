"""
Exports the multivrp environments, models and helpers for easier use elsewhere.
"""

from multivrp._version import __version__
from multivrp.default_fixtures import generate_toy
from multivrp.default_observations import DEFAULT_OBSERVATIONS
from multivrp.default_references import REFERENCE_SCORES
from multivrp.env import EnvState, Environment, StepOutcome, batch_rollout, run_episode
from multivrp.evaluation import evaluate_solution
from multivrp.generators import augment_instance, generate_random

# Export the Models
from multivrp.models import (
    BenchmarkFormat,
    EnvConfig,
    EpisodeStats,
    GenerationSpec,
    InstanceData,
    InstanceSet,
    ObservationConfig,
    OracleResult,
    ProblemType,
    ReferenceScore,
    RewardMode,
    RolloutFailure,
    RolloutSummary,
    Route,
    SelectorKind,
    SoftTimeWindowParams,
    SolutionEvaluation,
    Split,
    ValidationReport,
    Visit,
)
from multivrp.oracle import brute_force_optimum
from multivrp.parse import parse_benchmark
from multivrp.policies import POLICIES, aggregate_stats, gap
from multivrp.validation import MultiVRPError, validate_instance
