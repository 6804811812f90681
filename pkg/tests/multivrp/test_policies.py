from collections import Counter

import numpy as np
import pytest
import yaml

from multivrp.env import Environment
from multivrp.models import (
    EpisodeStats,
    ProblemType,
    RolloutFailure,
    SelectorKind,
)
from multivrp.policies import (
    POLICIES,
    aggregate_stats,
    find_reference,
    gap,
    get_policy,
    load_reference_scores,
    policy_greedy_nearest,
    policy_greedy_ratio,
    policy_random,
    read_results,
    write_results,
)
from multivrp.validation import DecodeError, GapError, MultiVRPError, UnknownPolicyError

# (problem, size, model score, printed gap %)
PUBLISHED_GAPS = [
    (ProblemType.CVRPTW, 50, 16.499, 14.0),
    (ProblemType.CVRPTW, 100, 29.828, 21.8),
    (ProblemType.CVRPTW, 50, 16.020, 10.7),
    (ProblemType.CVRPTW, 100, 27.413, 11.9),
    (ProblemType.CVRPTW, 50, 18.787, 29.8),
    (ProblemType.CVRPTW, 100, 36.993, 51.0),
    (ProblemType.CVRPTW, 50, 18.450, 27.4),
    (ProblemType.CVRPTW, 100, 31.827, 29.9),
    (ProblemType.TOPTW, 50, 31.870, -4.1),
    (ProblemType.TOPTW, 100, 39.251, -1.8),
    (ProblemType.TOPTW, 50, 32.159, -3.3),
    (ProblemType.TOPTW, 100, 39.710, -0.7),
    (ProblemType.TOPTW, 50, 31.833, -4.2),
    (ProblemType.TOPTW, 100, 39.026, -2.4),
    (ProblemType.TOPTW, 50, 31.927, -4.0),
    (ProblemType.TOPTW, 100, 39.407, -1.4),
    (ProblemType.PCVRPTW, 50, 24.226, -9.1),
    (ProblemType.PCVRPTW, 100, 32.325, -9.0),
    (ProblemType.PCVRPTW, 50, 24.618, -7.6),
    (ProblemType.PCVRPTW, 100, 32.907, -7.4),
    (ProblemType.PCVRPTW, 50, 23.593, -11.5),
    (ProblemType.PCVRPTW, 100, 31.309, -11.9),
    (ProblemType.PCVRPTW, 50, 24.388, -8.5),
    (ProblemType.PCVRPTW, 100, 32.706, -8.0),
    (ProblemType.MDVRPTW, 50, 14.534, 62.8),
    (ProblemType.MDVRPTW, 100, 34.869, 129.0),
    (ProblemType.MDVRPTW, 50, 10.312, 15.5),
    (ProblemType.MDVRPTW, 100, 17.530, 15.1),
    (ProblemType.MDVRPTW, 50, 16.196, 81.4),
    (ProblemType.MDVRPTW, 100, 26.824, 76.2),
    (ProblemType.MDVRPTW, 50, 11.538, 29.2),
    (ProblemType.MDVRPTW, 100, 19.720, 29.5),
]


def episode(objective: float, agents_used: int = 2, served: float = 1.0, **kwargs):
    fields = dict(
        problem=ProblemType.CVRPTW,
        num_services=50,
        total_reward=-objective,
        total_penalty=0.0,
        objective=objective,
        agents_used=agents_used,
        services_served=50,
        demand_served_fraction=served,
        profit_collected_fraction=0.0,
    )
    fields.update(kwargs)
    return EpisodeStats(**fields)


@pytest.mark.unit
class TestGap:
    @pytest.mark.parametrize("problem, size, score, printed", PUBLISHED_GAPS)
    def test_published_gaps(self, problem, size, score, printed):
        reference = find_reference(load_reference_scores(), problem, size)
        assert gap(score, reference.score) == pytest.approx(printed, abs=0.05)

    def test_zero_reference(self):
        with pytest.raises(GapError) as error:
            gap(1.0, 0.0)
        assert error.value.code == "GAP_ERROR"

    def test_scale_invariance(self):
        assert gap(30.0, 20.0) == pytest.approx(gap(3.0, 2.0))
        assert gap(30.0, 20.0) == pytest.approx(50.0)
        assert gap(20.0, 20.0) == 0.0

    def test_signed(self):
        assert gap(15.0, 20.0) == pytest.approx(-25.0)


@pytest.mark.unit
class TestAggregateStats:
    def test_means_and_deviations(self):
        summary = aggregate_stats(
            [episode(10.0, agents_used=2), episode(20.0, agents_used=4)],
            policy="greedy_nearest",
            selector=SelectorKind.SMALLEST_TIME,
        )
        assert summary.problem == ProblemType.CVRPTW
        assert summary.num_services == 50
        assert summary.episodes == 2
        assert summary.av_obj == 15.0
        assert summary.std_obj == 5.0
        assert summary.av_agents_used == 3.0
        assert summary.av_total_reward == -15.0
        assert summary.selector == SelectorKind.SMALLEST_TIME

    def test_distance_objectives_are_positive(self):
        summary = aggregate_stats([episode(-10.0), episode(-20.0)])
        assert summary.av_obj == 15.0

    def test_profit_objectives_keep_their_sign(self):
        summary = aggregate_stats(
            [
                episode(4.0, problem=ProblemType.TOPTW, total_reward=4.0),
                episode(6.0, problem=ProblemType.TOPTW, total_reward=6.0),
            ]
        )
        assert summary.av_obj == 5.0

    def test_mixed_sizes(self):
        summary = aggregate_stats([episode(10.0), episode(20.0, num_services=100)])
        assert summary.num_services is None

    def test_empty(self):
        with pytest.raises(MultiVRPError):
            aggregate_stats([])


@pytest.mark.unit
class TestPolicies:
    def observe(self, make_instance, services, problem=ProblemType.CVRPTW):
        _, observation = Environment().reset(make_instance(services, problem=problem))
        return observation

    def test_greedy_nearest(self, make_instance):
        observation = self.observe(
            make_instance,
            [(0.3, 0, 1, 0, 0.0, 2.0, 0.1), (0.1, 0, 1, 0, 0.0, 2.0, 0.1)],
        )
        assert policy_greedy_nearest(observation) == 2

    def test_greedy_nearest_tie(self, make_instance):
        observation = self.observe(
            make_instance,
            [(0.2, 0, 1, 0, 0.0, 2.0, 0.1), (0, 0.2, 1, 0, 0.0, 2.0, 0.1)],
        )
        assert policy_greedy_nearest(observation) == 1

    def test_greedy_falls_back_to_depot(self, make_instance):
        env = Environment()
        state, _ = env.reset(make_instance([(0.3, 0, 1, 0, 0.0, 2.0, 0.1)]))
        _, observation, _ = env.step(state, 1)
        assert policy_greedy_nearest(observation) == 0
        assert policy_greedy_ratio(observation) == 0

    def test_greedy_ratio(self, make_instance):
        observation = self.observe(
            make_instance,
            [(0.1, 0, 0, 3, 0.0, 2.0, 0.1), (0.2, 0, 0, 10, 0.0, 2.0, 0.1)],
            problem=ProblemType.TOPTW,
        )
        assert policy_greedy_ratio(observation) == 2

    def test_greedy_ratio_counts_waiting(self, make_instance):
        observation = self.observe(
            make_instance,
            [(0.1, 0, 0, 3, 0.0, 2.0, 0.1), (0.2, 0, 0, 10, 2.0, 2.5, 0.1)],
            problem=ProblemType.TOPTW,
        )
        assert policy_greedy_ratio(observation) == 1

    def test_random_is_feasible(self, toy_instances):
        _, observation = Environment().reset(toy_instances[ProblemType.PDPTW])
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert observation.action_mask[policy_random(observation, rng)]

    def test_random_is_uniform(self, toy_instances):
        _, observation = Environment().reset(toy_instances[ProblemType.PDPTW])
        rng = np.random.default_rng(7)
        counts = Counter(policy_random(observation, rng) for _ in range(4000))
        assert sorted(counts) == [0, 1, 2, 3]
        assert all(850 <= count <= 1150 for count in counts.values())

    def test_registry(self):
        assert set(POLICIES) == {"random", "greedy_nearest", "greedy_ratio"}
        assert get_policy("greedy_ratio") is policy_greedy_ratio
        with pytest.raises(UnknownPolicyError, match="unknown policy") as error:
            get_policy("clairvoyant")
        assert error.value.code == "UNKNOWN_POLICY"


@pytest.mark.unit
class TestResultsFiles:
    def test_round_trip(self, tmp_path):
        records = [
            episode(10.0),
            RolloutFailure(index=1, instance="bad", code="INVALID_INSTANCE", message="x"),
            aggregate_stats([episode(10.0)]),
        ]
        file_name = str(tmp_path / "results.jsonl")
        write_results(file_name, records)
        assert read_results(file_name) == records
        assert [type(record) for record in read_results(file_name)] == [
            type(record) for record in records
        ]

    def test_invalid_record(self, tmp_path):
        file_name = tmp_path / "results.jsonl"
        file_name.write_text('{"record": "mystery"}\n')
        with pytest.raises(DecodeError, match="results.jsonl:1"):
            read_results(str(file_name))


@pytest.mark.unit
class TestReferenceScores:
    def test_published(self):
        references = load_reference_scores()
        assert len(references) == 8
        reference = find_reference(references, ProblemType.MDVRPTW, 100)
        assert reference.score == 15.224
        assert find_reference(references, ProblemType.PDPTW, 50) is None

    def test_exported_file(self):
        assert load_reference_scores("data_files/reference_scores.yml") == (
            load_reference_scores()
        )

    def test_custom_file(self, tmp_path):
        file_name = tmp_path / "refs.yml"
        file_name.write_text(
            yaml.safe_dump(
                {
                    "reference_scores": [
                        {"problem": "PDPTW", "num_services": 20, "score": 7.5}
                    ]
                }
            )
        )
        references = load_reference_scores(str(file_name))
        assert references[0].problem == ProblemType.PDPTW
        assert references[0].method == "reference"
