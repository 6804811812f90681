import numpy as np
import pytest

from multivrp.env import EnvState
from multivrp.models import PenaltyAnchor, ProblemType, SoftTimeWindowParams
from multivrp.rules import (
    ALREADY_SERVED,
    CAPACITY,
    FOREIGN_DEPOT,
    PRECEDENCE,
    RETURN_TIME,
    TIME_WINDOW,
    apply_move,
    commit_move,
    infeasibility_reasons,
    mask_feasible,
    post_move_clock,
)

SOFT = SoftTimeWindowParams(p_max=1.0, w_max=1.0, p_e=1.0, p_l=2.0)


def move(state: EnvState, agent: int, node: int, quantity=None):
    delta = apply_move(state, agent, node, quantity)
    commit_move(state, agent, delta)
    return delta


@pytest.mark.unit
class TestHardWindows:
    def test_waits_for_opening(self, make_instance):
        state = EnvState.initial(make_instance([(0.5, 0, 1, 0, 1.0, 2.0, 0.1)]))
        delta = apply_move(state, 0, 1)
        assert delta.arrival == pytest.approx(0.5)
        assert delta.service_start == pytest.approx(1.0)
        assert delta.depart == pytest.approx(1.1)
        assert mask_feasible(state, 0).tolist() == [True, True]

    def test_apply_does_not_mutate(self, make_instance):
        state = EnvState.initial(make_instance([(0.5, 0, 1, 0, 1.0, 2.0, 0.1)]))
        apply_move(state, 0, 1)
        assert state.location.tolist() == [0]
        assert state.cum_time.tolist() == [0.0]
        assert not state.visited.any()

    def test_closed_window(self, make_instance):
        state = EnvState.initial(make_instance([(0.5, 0, 1, 0, 0.0, 0.4, 0.1)]))
        assert not mask_feasible(state, 0)[1]
        assert infeasibility_reasons(state, 0, 1) == [TIME_WINDOW]

    def test_arrival_at_closing_is_feasible(self, make_instance):
        state = EnvState.initial(make_instance([(0.5, 0, 1, 0, 0.0, 0.5, 0.1)]))
        assert mask_feasible(state, 0)[1]

    def test_return_time(self, make_instance):
        state = EnvState.initial(
            make_instance([(1.0, 0, 1, 0, 0.0, 1.9, 0.5)], horizon=2.0)
        )
        assert infeasibility_reasons(state, 0, 1) == [RETURN_TIME]

    def test_toptw_late_opening(self, make_instance):
        instance = make_instance(
            [(0.1, 0, 0, 3, 2.9, 3.0, 0.2)], problem=ProblemType.TOPTW
        )
        state = EnvState.initial(instance)
        assert not mask_feasible(state, 0)[1]
        assert infeasibility_reasons(state, 0, 1) == [RETURN_TIME]

    def test_post_move_clock(self, make_instance):
        state = EnvState.initial(
            make_instance([(0.5, 0, 1, 0, 1.0, 2.0, 0.1), (0.2, 0, 1, 0, 0.0, 2.0, 0.3)])
        )
        assert post_move_clock(state, 0)[1:].tolist() == pytest.approx([1.1, 0.5])


@pytest.mark.unit
class TestCapacityAndService:
    def test_capacity(self, make_instance):
        state = EnvState.initial(make_instance([(0.5, 0, 7, 0, 0.0, 2.0, 0.1)]))
        state.load[0] = 5.0
        assert infeasibility_reasons(state, 0, 1) == [CAPACITY]
        state.load[0] = 3.0
        assert mask_feasible(state, 0)[1]

    def test_already_served(self, make_instance):
        state = EnvState.initial(make_instance([(0.5, 0, 1, 0, 0.0, 2.0, 0.1)]))
        move(state, 0, 1)
        assert state.visited[1]
        assert state.load[0] == 1.0
        assert infeasibility_reasons(state, 0, 1) == [ALREADY_SERVED]

    def test_home_depot_always_feasible(self, make_instance):
        state = EnvState.initial(make_instance([(0.5, 0, 1, 0, 0.0, 2.0, 0.1)]))
        state.cum_time[0] = 100.0
        assert mask_feasible(state, 0).tolist() == [True, False]
        assert infeasibility_reasons(state, 0, 0) == []

    def test_returning_home_retires(self, make_instance):
        state = EnvState.initial(make_instance([(0.5, 0, 1, 0, 0.0, 2.0, 0.1)]))
        move(state, 0, 1)
        delta = move(state, 0, 0)
        assert delta.returns_home
        assert not state.active[0]
        assert state.agent_distance[0] == pytest.approx(1.0)
        assert [entry[0] for entry in state.traces[0]] == [1, 0]

    def test_foreign_depot(self, toy_instances):
        state = EnvState.initial(toy_instances[ProblemType.MDVRPTW])
        mask = mask_feasible(state, 0)
        assert mask[0] and not mask[1]
        assert infeasibility_reasons(state, 0, 1) == [FOREIGN_DEPOT]
        assert mask_feasible(state, 1)[1]


@pytest.mark.unit
class TestSplitDelivery:
    def test_greedy_quantity(self, make_instance):
        instance = make_instance(
            [(0.5, 0, 7, 0, 0.0, 2.0, 0.1)], problem=ProblemType.SDVRPTW
        )
        state = EnvState.initial(instance)
        state.load[0] = 7.0
        delta = move(state, 0, 1)
        assert delta.quantity == 3.0
        assert not delta.node_visited_after
        assert state.remaining[1] == 4.0
        assert not state.visited[1]
        assert state.load[0] == 10.0
        assert infeasibility_reasons(state, 0, 1) == [CAPACITY]

    def test_completing_a_node(self, make_instance):
        instance = make_instance(
            [(0.5, 0, 7, 0, 0.0, 2.0, 0.1)], problem=ProblemType.SDVRPTW
        )
        state = EnvState.initial(instance)
        delta = move(state, 0, 1)
        assert delta.quantity == 7.0
        assert state.visited[1]
        assert state.remaining[1] == 0.0

    def test_quantity_override(self, make_instance):
        instance = make_instance(
            [(0.5, 0, 7, 0, 0.0, 2.0, 0.1)], problem=ProblemType.SDVRPTW
        )
        state = EnvState.initial(instance)
        assert apply_move(state, 0, 1, quantity=2.0).quantity == 2.0


@pytest.mark.unit
class TestPickupAndDelivery:
    def test_only_pickups_at_reset(self, toy_instances):
        state = EnvState.initial(toy_instances[ProblemType.PDPTW])
        assert np.flatnonzero(mask_feasible(state, 0)).tolist() == [0, 1, 2, 3]
        assert infeasibility_reasons(state, 0, 4) == [PRECEDENCE]

    def test_delivery_by_the_carrier_only(self, toy_instances):
        state = EnvState.initial(toy_instances[ProblemType.PDPTW])
        move(state, 0, 1)
        assert state.picked_by[1] == 0
        assert state.load[0] == 1.0
        assert mask_feasible(state, 0)[4]
        assert not mask_feasible(state, 1)[4]
        assert infeasibility_reasons(state, 1, 4) == [PRECEDENCE]

        delta = move(state, 0, 4)
        assert delta.load_delta == -1.0
        assert state.load[0] == 0.0


@pytest.mark.unit
class TestSoftWindows:
    def soft_state(self, make_instance, soft=SOFT) -> EnvState:
        instance = make_instance(
            [(0.5, 0, 1, 0, 2.0, 4.0, 0.1)],
            problem=ProblemType.CVRPSTW,
            horizon=10.0,
            soft_params=soft,
        )
        return EnvState.initial(instance)

    def test_early_service(self, make_instance):
        state = self.soft_state(make_instance)
        delta = apply_move(state, 0, 1)
        assert delta.arrival == pytest.approx(0.5)
        assert delta.service_start == pytest.approx(1.0)
        assert delta.soft_penalty == pytest.approx(-1.0)

    def test_late_service(self, make_instance):
        state = self.soft_state(make_instance)
        state.cum_time[0] = 4.5
        delta = apply_move(state, 0, 1)
        assert delta.service_start == pytest.approx(5.0)
        assert delta.soft_penalty == pytest.approx(-2.0)
        assert mask_feasible(state, 0)[1]

    def test_too_late(self, make_instance):
        state = self.soft_state(make_instance)
        state.cum_time[0] = 5.0
        assert infeasibility_reasons(state, 0, 1) == [TIME_WINDOW]

    def test_within_window_is_free(self, make_instance):
        state = self.soft_state(make_instance)
        state.cum_time[0] = 2.5
        assert apply_move(state, 0, 1).soft_penalty == 0.0

    def test_waiting_limit(self, make_instance):
        soft = SoftTimeWindowParams(p_max=1.0, w_max=0.2, p_e=1.0, p_l=2.0)
        state = self.soft_state(make_instance, soft)
        assert infeasibility_reasons(state, 0, 1) == [TIME_WINDOW]

    def test_arrival_anchor(self, make_instance):
        soft = SoftTimeWindowParams(
            p_max=1.0,
            w_max=1.0,
            p_e=1.0,
            p_l=2.0,
            penalty_anchor=PenaltyAnchor.ARRIVAL,
        )
        state = self.soft_state(make_instance, soft)
        assert apply_move(state, 0, 1).soft_penalty == pytest.approx(-1.5)
