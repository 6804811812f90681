"""
Scripted baseline policies, the score gap, batch statistics and the
results file format.
"""
import json
import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import yaml

from multivrp.default_references import REFERENCE_SCORES
from multivrp.models import (
    EpisodeStats,
    ProblemType,
    ReferenceScore,
    RolloutFailure,
    RolloutSummary,
    SelectorKind,
)
from multivrp.observations import ObservationBundle
from multivrp.validation import DecodeError, GapError, MultiVRPError, UnknownPolicyError

logger = logging.getLogger(__name__)


def _services(obs: ObservationBundle) -> np.ndarray:
    candidates = obs.action_mask.copy()
    candidates[obs.home_depot] = False
    return np.flatnonzero(candidates)


def policy_random(
    obs: ObservationBundle, rng: Optional[np.random.Generator] = None
) -> int:
    """A uniform draw over the feasible nodes, depot included."""
    rng = rng if rng is not None else np.random.default_rng()
    return int(rng.choice(np.flatnonzero(obs.action_mask)))


def policy_greedy_nearest(
    obs: ObservationBundle, rng: Optional[np.random.Generator] = None
) -> int:
    """The closest feasible service, or the depot when none is feasible."""
    services = _services(obs)
    if services.size == 0:
        return obs.home_depot
    # argmin keeps the lowest index on ties
    return int(services[np.argmin(obs.travel[services])])


def policy_greedy_ratio(
    obs: ObservationBundle, rng: Optional[np.random.Generator] = None
) -> int:
    """
    The feasible service with the best profit per unit of time spent
    (travel, wait and service), or the depot when no service pays.
    """
    services = _services(obs)
    services = services[obs.profit[services] > 0]
    if services.size == 0:
        return obs.home_depot
    cost = obs.travel[services] + obs.wait[services] + obs.service_time[services]
    ratio = obs.profit[services] / np.maximum(cost, 1e-12)
    return int(services[np.argmax(ratio)])


POLICIES: Dict[str, Callable] = {
    "random": policy_random,
    "greedy_nearest": policy_greedy_nearest,
    "greedy_ratio": policy_greedy_ratio,
}


def get_policy(name: str) -> Callable:
    """Look a policy up by its registered name."""
    try:
        return POLICIES[name]
    except KeyError as error:
        raise UnknownPolicyError(
            f"unknown policy '{name}', expected one of {', '.join(POLICIES)}."
        ) from error


def gap(score_model: float, score_ref: float) -> float:
    """
    Signed percentage gap of a score to a reference score.

    Not made absolute: for distance problems a negative gap means the model
    beats the reference, for profit problems a positive one does.
    """
    if score_ref == 0:
        raise GapError("the gap to a zero reference score is undefined.")
    return (score_model - score_ref) / score_ref * 100


def aggregate_stats(
    stats: Sequence[EpisodeStats],
    policy: Optional[str] = None,
    selector: Optional[SelectorKind] = None,
) -> RolloutSummary:
    """
    Means and standard deviations over a batch of episodes.

    Distance objectives are reported as positive numbers.
    """
    if not stats:
        raise MultiVRPError("can not aggregate an empty batch.")
    problems = {episode.problem for episode in stats}
    sizes = {episode.num_services for episode in stats}
    objectives = np.asarray(
        [
            episode.objective if episode.problem.maximizes else abs(episode.objective)
            for episode in stats
        ]
    )
    agents = np.asarray([episode.agents_used for episode in stats], dtype=np.float64)
    served = np.asarray([episode.demand_served_fraction for episode in stats])
    return RolloutSummary(
        problem=problems.pop() if len(problems) == 1 else None,
        num_services=sizes.pop() if len(sizes) == 1 else None,
        policy=policy,
        selector=selector,
        episodes=len(stats),
        av_obj=float(objectives.mean()),
        std_obj=float(objectives.std()),
        av_agents_used=float(agents.mean()),
        std_agents_used=float(agents.std()),
        av_served_fraction=float(served.mean()),
        std_served_fraction=float(served.std()),
        av_total_reward=float(np.mean([episode.total_reward for episode in stats])),
        av_total_penalty=float(np.mean([episode.total_penalty for episode in stats])),
    )


ResultRecord = Union[EpisodeStats, RolloutFailure, RolloutSummary]
_RECORD_TYPES = {
    "episode": EpisodeStats,
    "failure": RolloutFailure,
    "summary": RolloutSummary,
}


def _record_type(record: ResultRecord) -> str:
    for name, model in _RECORD_TYPES.items():
        if isinstance(record, model):
            return name
    raise TypeError(f"not a result record: {type(record).__name__}")


def dump_results(records: Iterable[ResultRecord]) -> str:
    """One JSON object per line, tagged with its record type."""
    lines = [
        json.dumps({"record": _record_type(record), **json.loads(record.json())})
        for record in records
    ]
    return "".join(f"{line}\n" for line in lines)


def write_results(file_name: str, records: Iterable[ResultRecord]) -> None:
    """Write result records to a JSON-lines file."""
    with open(file_name, "w", encoding="utf-8") as results_file:
        results_file.write(dump_results(records))


def read_results(file_name: str) -> List[ResultRecord]:
    """Read a JSON-lines results file."""
    records: List[ResultRecord] = []
    with open(file_name, "r", encoding="utf-8") as results_file:
        for number, line in enumerate(results_file, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
                model = _RECORD_TYPES[payload.pop("record")]
                records.append(model.parse_obj(payload))
            except (ValueError, KeyError) as error:
                raise DecodeError(
                    f"{file_name}:{number} is not a result record: {error}"
                ) from error
    return records


def load_reference_scores(file_name: Optional[str] = None) -> List[ReferenceScore]:
    """Load reference scores from a YAML file, or the published ones."""
    if file_name is None:
        return list(REFERENCE_SCORES)
    with open(file_name, "r", encoding="utf-8") as scores_file:
        document = yaml.safe_load(scores_file) or {}
    return [
        ReferenceScore.parse_obj(entry)
        for entry in document.get("reference_scores", [])
    ]


def find_reference(
    references: Sequence[ReferenceScore], problem: ProblemType, num_services: int
) -> Optional[ReferenceScore]:
    """The reference score of a problem and size, if published."""
    for reference in references:
        if reference.problem == problem and reference.num_services == num_services:
            return reference
    return None
