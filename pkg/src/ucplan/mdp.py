"""Deterministic MDP view of a unit-commitment instance.

A state is the vector of signed on/off hour counters plus the hour index;
an action is one commitment bit per unit.  Transitions advance counters
(saturating at +/-24), feasibility combines the minimum up/down locks
with the hourly set-generation limits, and the reward is minus the hour's
dispatch cost minus start-up costs of units switching on.

States with no feasible action ("catastrophe" states) are valued at
``-BIG`` inside the solvers so that any feasible continuation dominates.
"""

import itertools
from dataclasses import dataclass, replace
from math import fsum

import numpy as np

from .core import (
    STATUS_CAP,
    CostBreakdown,
    ProblemInstance,
    generation_cost,
    startup_cost,
)
from .dispatch import DispatchResult, check_set_limits, economic_dispatch
from .errors import InfeasibleActionError

BIG = 1e12  # catastrophe penalty, dominates any real schedule cost

# one 0/1 commitment bit per unit, bit i commits unit i
CommitmentAction = tuple[int, ...]

# full 2^N action tables are only precomputed up to this fleet size
_TABLE_LIMIT = 16


@dataclass(frozen=True, slots=True)
class SystemState:
    """Signed on/off counters for every unit plus the hour index."""

    status: tuple[int, ...]
    hour: int


@dataclass(frozen=True, slots=True)
class ScheduleSolution:
    """A full-horizon commitment plan with its dispatches and cost."""

    actions: tuple[CommitmentAction, ...]
    states: tuple[SystemState, ...]  # trajectory, one longer than actions
    dispatches: tuple[DispatchResult, ...]
    cost: CostBreakdown
    step_values: tuple[float, ...] | None = None

    @property
    def objective(self) -> float:
        return self.cost.objective

    @property
    def terminal_state(self) -> SystemState:
        return self.states[-1]


class UnitCommitmentMDP:
    """Environment wrapper around an instance with precomputed tables.

    All methods are pure with respect to observable behaviour; dispatch
    costs are memoized internally because every solver re-evaluates the
    same (committed set, hour) pairs many times.
    """

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        self.n_units = instance.n_units
        self.horizon = instance.horizon
        gens = instance.generators
        self._gens = gens
        self._t_up = tuple(g.t_up for g in gens)
        self._t_down = tuple(g.t_down for g in gens)
        n = self.n_units
        self._mask = tuple(1 << (n - 1 - i) for i in range(n))
        # start-up price by hours off, saturated at the counter cap
        self._startup_table = tuple(
            tuple(startup_cost(g, t) for t in range(1, STATUS_CAP + 1)) for g in gens
        )
        self._dispatch_cost_memo: dict[tuple[int, int], float] = {}
        self._catastrophe_memo: dict[tuple[tuple[int, ...], int], bool] = {}

        if n <= _TABLE_LIMIT:
            ints = np.arange(1 << n, dtype=np.int64)
            bits = (ints[:, None] >> np.arange(n - 1, -1, -1)) & 1
            p_min = np.array([g.p_min for g in gens])
            p_max = np.array([g.p_max for g in gens])
            sum_min = bits @ p_min
            sum_max = bits @ p_max
            demand = np.array(instance.profile.demand)
            reserve = np.array(instance.profile.reserve)
            ok = (sum_min[:, None] <= demand) & (sum_max[:, None] >= demand + reserve)
            self._acts_by_hour = [ints[ok[:, t]] for t in range(self.horizon)]
            self._bits_table = tuple(map(tuple, bits.tolist()))
        else:
            self._acts_by_hour = None
            self._bits_table = None

    # -- state space ----------------------------------------------------

    def initial_state(self) -> SystemState:
        return SystemState(tuple(g.initial_status for g in self._gens), 0)

    def transition(self, state: SystemState, action: CommitmentAction) -> SystemState:
        """Advance one hour; raises InfeasibleActionError on lock or limit
        violations."""
        if state.hour >= self.horizon:
            raise InfeasibleActionError(f"no decision at terminal hour {state.hour}")
        self._check_action(state, action)
        return SystemState(self._advance(state.status, action), state.hour + 1)

    def feasible_actions(self, state: SystemState) -> list[CommitmentAction]:
        """All actions satisfying the up/down locks and set generation
        limits at this hour, in lexicographic bit order."""
        if state.hour >= self.horizon:
            return []
        return [self._bits_of(a) for a in self._feasible_ints(state.status, state.hour)]

    def is_catastrophe(self, state: SystemState) -> bool:
        if state.hour >= self.horizon:
            return False
        key = (state.status, state.hour)
        hit = self._catastrophe_memo.get(key)
        if hit is None:
            hit = len(self._feasible_ints(state.status, state.hour)) == 0
            self._catastrophe_memo[key] = hit
        return hit

    # -- rewards and replay ----------------------------------------------

    def reward(self, state, action, next_state=None) -> float:
        """Minus the dispatch cost at this hour minus start-up costs of
        units switching off -> on.  ``next_state`` is implied by the
        deterministic transition and accepted only for signature parity."""
        d = self.dispatch_cost(action, state.hour)
        s = self.startup_outlay(state.status, action)
        return -(d + s)

    def dispatch_cost(self, action, hour: int) -> float:
        aint = self._int_of(action)
        key = (aint, hour)
        cost = self._dispatch_cost_memo.get(key)
        if cost is None:
            cost = economic_dispatch(
                action, self.instance.profile.demand[hour], self._gens
            ).cost
            self._dispatch_cost_memo[key] = cost
        return cost

    def startup_outlay(self, status, action) -> float:
        """Summed start-up costs incurred by ``action`` from ``status``."""
        terms = [
            self._startup_table[i][-st - 1]
            for i, st in enumerate(status)
            if st < 0 and action[i]
        ]
        return fsum(terms) if terms else 0.0

    def schedule_cost(self, plan, start: SystemState | None = None) -> CostBreakdown:
        return self.replay(plan, start).cost

    def replay(self, plan, start: SystemState | None = None) -> ScheduleSolution:
        """Execute a plan step by step, collecting dispatches and costs.

        Raises InfeasibleActionError carrying the offending step index.
        Totals are exact (fsum over per-unit cost terms).
        """
        state = self.initial_state() if start is None else start
        plan = tuple(tuple(a) for a in plan)
        if len(plan) != self.horizon - state.hour:
            raise ValueError(
                f"plan length {len(plan)} != remaining horizon {self.horizon - state.hour}"
            )
        states = [state]
        dispatches = []
        gen_terms: list[float] = []
        startup_terms: list[float] = []
        for k, action in enumerate(plan):
            try:
                self._check_action(state, action)
            except InfeasibleActionError as err:
                raise InfeasibleActionError(f"step {k}: {err}", ) from None
            hour = state.hour
            result = economic_dispatch(
                action, self.instance.profile.demand[hour], self._gens
            )
            dispatches.append(result)
            for i, bit in enumerate(action):
                if bit:
                    gen_terms.append(generation_cost(self._gens[i], result.power[i]))
                    if state.status[i] < 0:
                        startup_terms.append(self._startup_table[i][-state.status[i] - 1])
            state = SystemState(self._advance(state.status, action), hour + 1)
            states.append(state)
        cost = CostBreakdown(fsum(gen_terms), fsum(startup_terms))
        return ScheduleSolution(
            actions=plan,
            states=tuple(states),
            dispatches=tuple(dispatches),
            cost=cost,
        )

    def with_step_values(self, solution: ScheduleSolution, values) -> ScheduleSolution:
        return replace(solution, step_values=tuple(values))

    # -- internals --------------------------------------------------------

    def _check_action(self, state: SystemState, action) -> None:
        if len(action) != self.n_units:
            raise InfeasibleActionError(
                f"action length {len(action)} != {self.n_units}"
            )
        for i, st in enumerate(state.status):
            if 0 < st < self._t_up[i] and not action[i]:
                raise InfeasibleActionError(f"unit {i} locked on (status {st})")
            if -self._t_down[i] < st < 0 and action[i]:
                raise InfeasibleActionError(f"unit {i} locked off (status {st})")
        hour = state.hour
        if not check_set_limits(
            action,
            self.instance.profile.demand[hour],
            self.instance.profile.reserve[hour],
            self._gens,
        ):
            raise InfeasibleActionError(f"set generation limits violated at hour {hour}")

    def _advance(self, status, action) -> tuple[int, ...]:
        out = []
        for st, bit in zip(status, action):
            if bit:
                out.append(min(st + 1, STATUS_CAP) if st > 0 else 1)
            else:
                out.append(max(st - 1, -STATUS_CAP) if st < 0 else -1)
        return tuple(out)

    def _lock_masks(self, status) -> tuple[int, int]:
        lock_on = 0
        lock_off = 0
        for i, st in enumerate(status):
            if 0 < st < self._t_up[i]:
                lock_on |= self._mask[i]
            elif -self._t_down[i] < st < 0:
                lock_off |= self._mask[i]
        return lock_on, lock_off

    def _feasible_ints(self, status, hour: int) -> list[int]:
        """Feasible actions as bit-packed integers, ascending (= lex on
        bit tuples, MSB is unit 0)."""
        lock_on, lock_off = self._lock_masks(status)
        if self._acts_by_hour is not None:
            arr = self._acts_by_hour[hour]
            sel = arr[((arr & lock_on) == lock_on) & ((arr & lock_off) == 0)]
            return sel.tolist()
        return self._feasible_ints_generic(status, hour, lock_on, lock_off)

    def _feasible_ints_generic(self, status, hour, lock_on, lock_off) -> list[int]:
        demand = self.instance.profile.demand[hour]
        reserve = self.instance.profile.reserve[hour]
        free = [i for i in range(self.n_units) if not (lock_on | lock_off) & self._mask[i]]
        base = lock_on
        out = []
        for combo in itertools.product((0, 1), repeat=len(free)):
            aint = base
            for i, bit in zip(free, combo):
                if bit:
                    aint |= self._mask[i]
            if check_set_limits(self._bits_of(aint), demand, reserve, self._gens):
                out.append(aint)
        out.sort()
        return out

    def _bits_of(self, aint: int) -> CommitmentAction:
        if self._bits_table is not None:
            return self._bits_table[aint]
        n = self.n_units
        return tuple((aint >> (n - 1 - i)) & 1 for i in range(n))

    def _int_of(self, action) -> int:
        aint = 0
        for bit, m in zip(action, self._mask):
            if bit:
                aint |= m
        return aint

    def dispatch_cost_int(self, aint: int, hour: int) -> float:
        key = (aint, hour)
        cost = self._dispatch_cost_memo.get(key)
        if cost is None:
            cost = economic_dispatch(
                self._bits_of(aint), self.instance.profile.demand[hour], self._gens
            ).cost
            self._dispatch_cost_memo[key] = cost
        return cost

    def startup_pairs(self, status) -> tuple[tuple[int, float], ...]:
        """(bit mask, start-up price) for every currently-off unit."""
        return tuple(
            (self._mask[i], self._startup_table[i][-st - 1])
            for i, st in enumerate(status)
            if st < 0
        )
