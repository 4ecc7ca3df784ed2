import itertools
import math

import numpy as np
import pytest

from ucplan import (
    InfeasibleActionError,
    SystemState,
    UnitCommitmentMDP,
    check_set_limits,
    economic_dispatch,
    gen_instance,
    startup_cost,
)

from conftest import make_gen, make_instance


def env_for(gens, demand, reserve=None):
    return UnitCommitmentMDP(make_instance(gens, demand, reserve))


class TestTransition:
    def setup_method(self):
        self.env = env_for(
            [
                make_gen(id=0, p_min=5.0, p_max=120.0, t_up=2, t_down=2),
                make_gen(id=1, p_min=5.0, p_max=120.0, t_up=2, t_down=2),
            ],
            demand=[60.0] * 4,
        )

    def test_counter_advances_while_on(self):
        s = SystemState((3, 3), 0)
        assert self.env.transition(s, (1, 1)).status == (4, 4)

    def test_turn_on_resets_counter(self):
        s = SystemState((-2, 3), 0)
        assert self.env.transition(s, (1, 1)).status == (1, 4)

    def test_counter_caps_at_24(self):
        s = SystemState((24, 3), 0)
        assert self.env.transition(s, (1, 1)).status == (24, 4)

    def test_turn_off_flips_sign(self):
        s = SystemState((3, 3), 0)
        assert self.env.transition(s, (0, 1)).status == (-1, 4)

    def test_off_counter_caps(self):
        env = env_for(
            [
                make_gen(id=0, p_min=0.0, p_max=120.0, t_down=1),
                make_gen(id=1, p_min=0.0, p_max=120.0),
            ],
            demand=[60.0] * 4,
        )
        s = SystemState((-24, 3), 0)
        assert env.transition(s, (0, 1)).status == (-24, 4)

    def test_hour_advances(self):
        s = SystemState((3, 3), 1)
        assert self.env.transition(s, (1, 1)).hour == 2

    def test_locked_on_rejects_shutdown(self):
        with pytest.raises(InfeasibleActionError):
            self.env.transition(SystemState((1, 3), 0), (0, 1))

    def test_locked_off_rejects_startup(self):
        with pytest.raises(InfeasibleActionError):
            self.env.transition(SystemState((-1, 3), 0), (1, 1))

    def test_set_limit_violation_rejected(self):
        # both units off cannot serve positive demand
        with pytest.raises(InfeasibleActionError):
            self.env.transition(SystemState((3, 3), 0), (0, 0))

    def test_terminal_hour_rejected(self):
        with pytest.raises(InfeasibleActionError):
            self.env.transition(SystemState((3, 3), 4), (1, 1))


class TestFeasibleActions:
    def test_up_time_lock_forces_on(self):
        env = env_for(
            [make_gen(id=0, p_min=5.0, p_max=100.0, t_up=2)], demand=[50.0], reserve=[5.0]
        )
        assert env.feasible_actions(SystemState((1,), 0)) == [(1,)]

    def test_down_time_lock_with_covering_partner(self):
        env = env_for(
            [
                make_gen(id=0, p_min=5.0, p_max=100.0, t_down=2),
                make_gen(id=1, p_min=5.0, p_max=100.0, t_up=1, t_down=1),
            ],
            demand=[50.0],
            reserve=[5.0],
        )
        # unit 0 is one hour into a two-hour minimum down window
        assert env.feasible_actions(SystemState((-1, 3), 0)) == [(0, 1)]

    def test_both_units_needed(self):
        env = env_for(
            [
                make_gen(id=0, p_min=5.0, p_max=60.0),
                make_gen(id=1, p_min=5.0, p_max=60.0),
            ],
            demand=[100.0],
            reserve=[10.0],
        )
        assert env.feasible_actions(SystemState((3, 3), 0)) == [(1, 1)]

    def test_terminal_state_has_no_actions(self):
        env = env_for([make_gen(id=0)], demand=[50.0])
        assert env.feasible_actions(SystemState((3,), 1)) == []

    def test_matches_brute_force_filter(self):
        # soundness + completeness against a direct enumeration of 2^N
        rng = np.random.default_rng(3)
        inst = gen_instance(6, 8, seed=5)
        env = UnitCommitmentMDP(inst)
        for _ in range(50):
            status = tuple(
                int(v) if v != 0 else 1
                for v in rng.integers(-24, 25, size=inst.n_units)
            )
            hour = int(rng.integers(0, inst.horizon))
            state = SystemState(status, hour)
            expected = []
            for bits in itertools.product((0, 1), repeat=inst.n_units):
                ok = True
                for i, g in enumerate(inst.generators):
                    if 0 < status[i] < g.t_up and not bits[i]:
                        ok = False
                    if -g.t_down < status[i] < 0 and bits[i]:
                        ok = False
                if ok and check_set_limits(
                    bits,
                    inst.profile.demand[hour],
                    inst.profile.reserve[hour],
                    inst.generators,
                ):
                    expected.append(bits)
            assert env.feasible_actions(state) == expected


class TestReward:
    def test_no_startup_term_when_all_on(self, two_unit_instance):
        env = UnitCommitmentMDP(two_unit_instance)
        s = SystemState((3, 3), 0)
        d = economic_dispatch((1, 1), two_unit_instance.profile.demand[0], two_unit_instance.generators)
        assert env.reward(s, (1, 1)) == -d.cost

    def test_startup_charged_for_restart(self, two_unit_instance):
        env = UnitCommitmentMDP(two_unit_instance)
        gens = two_unit_instance.generators
        s = SystemState((-3, 3), 0)
        d = economic_dispatch((1, 1), two_unit_instance.profile.demand[0], gens)
        expected = -(d.cost + startup_cost(gens[0], 3))
        assert env.reward(s, (1, 1)) == expected

    def test_symmetric_pair_composes_dispatch_and_startup(self):
        gens = [
            make_gen(id=0, a=1.0, b=0.0, c=0.0, e=100.0, f=50.0, g=0.0, h=0.0,
                     p_min=0.0, p_max=10.0, t_down=1),
            make_gen(id=1, a=1.0, b=0.0, c=0.0, p_min=0.0, p_max=10.0),
        ]
        env = env_for(gens, demand=[10.0])
        on = env.reward(SystemState((2, 2), 0), (1, 1))
        assert on == pytest.approx(-50.0, abs=1e-6)
        restarted = env.reward(SystemState((-1, 2), 0), (1, 1))
        assert restarted == pytest.approx(-50.0 - 150.0, abs=1e-6)


class TestCatastrophe:
    def test_terminal_state_is_not_catastrophe(self):
        env = env_for([make_gen(id=0)], demand=[50.0])
        assert not env.is_catastrophe(SystemState((3,), 1))

    def test_locked_out_unit_with_demand(self):
        env = env_for(
            [make_gen(id=0, p_min=5.0, p_max=100.0, t_down=3)], demand=[50.0] * 2
        )
        assert env.is_catastrophe(SystemState((-1,), 0))

    def test_generous_fleet_is_safe(self, two_unit_instance):
        env = UnitCommitmentMDP(two_unit_instance)
        assert not env.is_catastrophe(SystemState((3, 3), 0))


class TestScheduleCost:
    def test_empty_plan_at_terminal_hour(self, two_unit_instance):
        env = UnitCommitmentMDP(two_unit_instance)
        cost = env.schedule_cost([], SystemState((3, 3), env.horizon))
        assert cost.objective == 0.0

    def test_single_step_plan_matches_reward(self, two_unit_instance):
        env = UnitCommitmentMDP(two_unit_instance)
        s = SystemState((3, 3), env.horizon - 1)
        cost = env.schedule_cost([(1, 1)], s)
        assert cost.objective == pytest.approx(-env.reward(s, (1, 1)), rel=1e-15)

    def test_multi_step_plan_composes_stepwise(self, two_unit_instance):
        env = UnitCommitmentMDP(two_unit_instance)
        plan = [(1, 1), (1, 0), (1, 0), (1, 1)]  # respects unit 1's min down time
        state = env.initial_state()
        rewards = []
        for action in plan:
            rewards.append(env.reward(state, action))
            state = env.transition(state, action)
        cost = env.schedule_cost(plan)
        assert -math.fsum(rewards) == pytest.approx(cost.objective, rel=1e-12)

    def test_infeasible_step_reports_index(self, two_unit_instance):
        env = UnitCommitmentMDP(two_unit_instance)
        plan = [(1, 1), (0, 0), (1, 1), (1, 1)]
        with pytest.raises(InfeasibleActionError, match="step 1"):
            env.schedule_cost(plan)

    def test_objective_equals_independent_cost_recompute(self):
        # Eq-style recompute from the dispatch sequence alone, exact
        from ucplan import SearchConfig, tree_search_policy

        for seed in range(5):
            inst = gen_instance(3, 6, seed)
            env = UnitCommitmentMDP(inst)
            plan = tree_search_policy(env.initial_state(), SearchConfig(env.horizon), env).actions
            sol = env.replay(plan)
            gen_atoms, start_atoms = [], []
            state = env.initial_state()
            for action in plan:
                d = economic_dispatch(action, inst.profile.demand[state.hour], inst.generators)
                for i, bit in enumerate(action):
                    if bit:
                        g = inst.generators[i]
                        gen_atoms.append(g.a * d.power[i] ** 2 + g.b * d.power[i] + g.c)
                        if state.status[i] < 0:
                            start_atoms.append(startup_cost(g, -state.status[i]))
                state = env.transition(state, action)
            assert sol.cost.objective == math.fsum(gen_atoms) + math.fsum(start_atoms)
            assert sol.cost.objective == sol.cost.generation_total + sol.cost.startup_total


class TestStateInvariants:
    def test_random_walks_preserve_invariants(self):
        rng = np.random.default_rng(9)
        inst = gen_instance(4, 8, seed=2)
        env = UnitCommitmentMDP(inst)
        for _ in range(30):
            state = env.initial_state()
            while state.hour < env.horizon:
                feas = env.feasible_actions(state)
                if not feas:
                    break
                state = env.transition(state, feas[int(rng.integers(len(feas)))])
                assert all(s != 0 for s in state.status)
                assert all(abs(s) <= 24 for s in state.status)
                assert 0 <= state.hour <= env.horizon
