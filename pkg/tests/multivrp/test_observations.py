import numpy as np
import pytest

from multivrp.default_observations import DEFAULT_OBSERVATIONS
from multivrp.env import EnvState
from multivrp.models import InstanceData, ObservationConfig, ProblemType
from multivrp.observations import (
    FEATURE_REGISTRY,
    ObservationBuilder,
    check_observation_config,
)
from multivrp.rules import apply_move, commit_move
from multivrp.validation import UnknownFeatureError


def observe(instance, state=None, config=None):
    builder = ObservationBuilder(instance, config or DEFAULT_OBSERVATIONS[instance.problem])
    return builder.observe(state or EnvState.initial(instance))


@pytest.mark.unit
class TestNodeFeatures:
    def test_static_shape(self, toy_instances):
        bundle = observe(toy_instances[ProblemType.CVRPTW])
        assert bundle.nodes_static.shape == (7, 7)
        assert not bundle.nodes_static.flags.writeable

    def test_time_window_normalized(self, toy_instances):
        bundle = observe(toy_instances[ProblemType.CVRPTW])
        window = bundle.column("nodes_static", "time_window")
        assert window[1].tolist() == pytest.approx([0.1, 0.5])
        assert window[0].tolist() == pytest.approx([0.0, 1.0])

    def test_depot_row(self, toy_instances):
        bundle = observe(toy_instances[ProblemType.CVRPTW])
        assert bundle.column("nodes_static", "is_depot")[:, 0].tolist() == [1.0] + [0.0] * 6
        assert bundle.column("nodes_static", "demand")[0, 0] == 0.0
        assert bundle.column("nodes_static", "demand")[6, 0] == pytest.approx(0.6)

    def test_pickup_delivery_flags(self, toy_instances):
        bundle = observe(toy_instances[ProblemType.PDPTW])
        pickups = bundle.column("nodes_static", "is_pickup")[:, 0]
        deliveries = bundle.column("nodes_static", "is_delivery")[:, 0]
        assert pickups.tolist() == [0, 1, 1, 1, 0, 0, 0]
        assert deliveries.tolist() == [0, 0, 0, 0, 1, 1, 1]

    def test_profit_normalized_by_maximum(self, toy_instances):
        bundle = observe(toy_instances[ProblemType.TOPTW])
        profit = bundle.column("nodes_static", "profit")[:, 0]
        assert profit[6] == 1.0
        assert profit[1] == pytest.approx(1 / 6)

    def test_dynamic_at_reset(self, toy_instances):
        bundle = observe(toy_instances[ProblemType.CVRPTW])
        arrival = bundle.column("nodes_dynamic", "arrival_time")[:, 0]
        assert arrival[1:].tolist() == pytest.approx([0.2 / 3] * 6)
        to_open = bundle.column("nodes_dynamic", "time_to_open")[:, 0]
        assert to_open[2] == pytest.approx(1.0 / 3)
        assert bundle.wait[2] == pytest.approx(0.8)
        assert bundle.wait[1] == pytest.approx(0.1)

    def test_time_to_end_tour_uses_home_close_over_horizon(self, toy_instances):
        toy = toy_instances[ProblemType.MDVRPTW]
        instance = InstanceData(**{**toy.dict(), "depot_close": [2.6, 3.0]})
        bundle = observe(instance)
        assert instance.horizon == 3.0
        to_end = bundle.column("nodes_dynamic", "time_to_end_tour_after_step")[:, 0]
        to_close = bundle.column("nodes_dynamic", "time_to_close_after_step")[:, 0]
        services = np.asarray(instance.service_indices)
        closes = np.asarray(instance.tw_close)[services]
        assert (to_end - to_close)[services] == pytest.approx((2.6 - closes) / 3.0)


@pytest.mark.unit
class TestAgentFeatures:
    def test_reset_fractions(self, toy_instances):
        bundle = observe(toy_instances[ProblemType.CVRPTW])
        for name in ("time_elapsed", "load_fraction", "visited_fraction"):
            assert bundle.column("agent", name).tolist() == [0.0]
        assert bundle.column("agent", "feasible_fraction").tolist() == [1.0]
        assert bundle.column("global", "done_agents_fraction").tolist() == [0.0]
        assert bundle.column("global", "served_demand_fraction").tolist() == [0.0]
        assert bundle.column("global", "fleet_capacity_fraction").tolist() == [1.0]

    def test_after_a_move(self, toy_instances):
        instance = toy_instances[ProblemType.CVRPTW]
        state = EnvState.initial(instance)
        commit_move(state, 0, apply_move(state, 0, 6))
        state.last_agent = 0
        bundle = observe(instance, state)
        assert bundle.column("agent", "load_fraction").tolist() == [0.6]
        assert bundle.column("agent", "visited_fraction").tolist() == pytest.approx([1 / 6])
        assert bundle.column("global", "served_demand_fraction")[0] == pytest.approx(6 / 21)
        assert bundle.column("other_agents", "was_last_active")[:, 0].tolist() == [1.0, 0.0]
        time_difference = bundle.column("other_agents", "time_difference_to_active")
        assert time_difference[1, 0] == pytest.approx(-bundle.column("agent", "time_elapsed")[0])

    def test_retired_rows_are_zero(self, toy_instances):
        instance = toy_instances[ProblemType.CVRPTW]
        state = EnvState.initial(instance)
        state.active[1] = False
        bundle = observe(instance, state)
        assert not bundle.other_agents[1].any()
        assert bundle.agents_mask.tolist() == [True, False]
        assert bundle.column("global", "done_agents_fraction").tolist() == [0.5]


@pytest.mark.unit
class TestObservationConfigs:
    @pytest.mark.parametrize("problem", list(ProblemType))
    def test_defaults_are_registered(self, problem):
        config = DEFAULT_OBSERVATIONS[problem]
        assert check_observation_config(config) is config

    def test_unknown_feature(self):
        with pytest.raises(UnknownFeatureError) as error:
            check_observation_config(ObservationConfig(agent=["location", "mood"]))
        assert "mood" in str(error.value)

    def test_column_of_unselected_feature(self, toy_instances):
        bundle = observe(toy_instances[ProblemType.CVRPTW])
        with pytest.raises(UnknownFeatureError):
            bundle.column("nodes_static", "profit")

    def test_custom_selection(self, toy_instances):
        config = ObservationConfig(nodes_static=["coords", "window_width"])
        bundle = observe(toy_instances[ProblemType.CVRPTW], config=config)
        assert bundle.nodes_static.shape == (7, 3)
        assert bundle.nodes_dynamic.shape == (7, 0)
        assert bundle.column("nodes_static", "window_width")[1, 0] == pytest.approx(0.4)

    def test_registry_families(self):
        assert set(FEATURE_REGISTRY) == {
            "nodes_static",
            "nodes_dynamic",
            "agent",
            "other_agents",
            "global",
        }
        assert np.all(
            [feature.width >= 1 for family in FEATURE_REGISTRY.values() for feature in family.values()]
        )
