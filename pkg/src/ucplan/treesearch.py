"""Finite-lookahead tree search over the commitment MDP.

``find_best_action`` recursively scores every feasible action sequence up
to a lookahead of H hours (cut off at the planning horizon) and returns
the first action of a maximizing sequence.  ``tree_search_policy`` commits
that action hour by hour across the horizon.  The sub-sampled variant
draws only a few candidate actions per node, biased toward small Hamming
deviations from the previous hour's action, which is where low-cost
schedules concentrate: start-up prices and the up/down locks punish
rapid re-commitment churn.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NoFeasibleActionError
from .mdp import BIG, CommitmentAction, ScheduleSolution, SystemState, UnitCommitmentMDP


@dataclass(frozen=True, slots=True)
class SubsampleConfig:
    """Neighborhood sampling: ``sample_count`` candidates per node, biased
    by ``decay**hamming_distance`` from the anchor action."""

    sample_count: int
    decay: float
    seed: int = 0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if not 0.0 < self.decay < 1.0:
            raise ValueError("decay must lie in (0, 1)")


@dataclass(frozen=True, slots=True)
class SearchConfig:
    lookahead: int
    subsample: SubsampleConfig | None = None
    threads: int = 1

    def __post_init__(self):
        if self.lookahead < 1:
            raise ValueError("lookahead must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


def _search(env: UnitCommitmentMDP, status, hour: int, depth: int) -> float:
    """Best cumulative reward over ``depth`` more steps from (status, hour).

    Returns 0 at the depth cutoff or the terminal hour; -BIG from a
    catastrophe state so any feasible branch dominates.
    """
    if depth == 0 or hour == env.horizon:
        return 0.0
    cands = env._feasible_ints(status, hour)
    if not cands:
        return -BIG
    startups = env.startup_pairs(status)
    best = -float("inf")
    for aint in cands:
        r = -env.dispatch_cost_int(aint, hour)
        for mask, price in startups:
            if aint & mask:
                r -= price
        bits = env._bits_of(aint)
        v = r + _search(env, env._advance(status, bits), hour + 1, depth - 1)
        if v > best:
            best = v
    return best


def find_best_action(
    state: SystemState, lookahead: int, env: UnitCommitmentMDP, threads: int = 1
) -> tuple[CommitmentAction, float]:
    """First action of a reward-maximizing sequence over
    min(lookahead, remaining hours); ties go to the lexicographically
    smallest action."""
    if lookahead < 1:
        raise ValueError("lookahead must be >= 1")
    cands = env._feasible_ints(state.status, state.hour)
    if not cands:
        raise NoFeasibleActionError(f"no feasible action at hour {state.hour}")
    startups = env.startup_pairs(state.status)

    def score(aint: int) -> float:
        r = -env.dispatch_cost_int(aint, state.hour)
        for mask, price in startups:
            if aint & mask:
                r -= price
        bits = env._bits_of(aint)
        return r + _search(env, env._advance(state.status, bits), state.hour + 1, lookahead - 1)

    if threads > 1 and len(cands) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(score, cands))
    else:
        values = [score(a) for a in cands]

    best_a, best_v = cands[0], values[0]
    for aint, v in zip(cands[1:], values[1:]):
        if v > best_v:  # candidates ascend lexicographically
            best_a, best_v = aint, v
    return env._bits_of(best_a), best_v


def tree_search_policy(
    s0: SystemState, config: SearchConfig, env: UnitCommitmentMDP
) -> ScheduleSolution:
    """Receding-horizon rollout of ``find_best_action`` over the full day."""
    if s0.hour != 0:
        raise ValueError("tree search starts from hour 0")
    state = s0
    actions = []
    values = []
    for t in range(env.horizon):
        try:
            action, value = find_best_action(state, config.lookahead, env, config.threads)
        except NoFeasibleActionError as err:
            raise NoFeasibleActionError(str(err), step=t) from None
        actions.append(action)
        values.append(value)
        state = env.transition(state, action)
    solution = env.replay(actions, s0)
    return env.with_step_values(solution, values)


def sample_action_neighborhood(
    a_prev: CommitmentAction,
    state: SystemState,
    sample_count: int,
    decay: float,
    rng: np.random.Generator,
    env: UnitCommitmentMDP,
) -> list[CommitmentAction]:
    """Sample distinct feasible actions near ``a_prev``.

    Inclusion probability is proportional to decay**d where d is the
    Hamming distance to the anchor; the anchor (or its nearest feasible
    projection) is always kept.  Returns the whole feasible set when
    ``sample_count`` covers it, the empty list from a catastrophe state.
    """
    feas = env.feasible_actions(state)
    if not feas:
        return []
    dist = [sum(x != y for x, y in zip(a, a_prev)) for a in feas]
    take = min(sample_count, len(feas))
    anchor = min(range(len(feas)), key=lambda i: (dist[i], feas[i]))
    chosen = {anchor}
    if take > 1:
        rest = np.array([i for i in range(len(feas)) if i != anchor])
        w = np.array([decay ** dist[i] for i in rest])
        picked = rng.choice(rest, size=take - 1, replace=False, p=w / w.sum())
        chosen.update(int(i) for i in picked)
    return [feas[i] for i in sorted(chosen)]


def _search_sub(env, status, hour, depth, anchor, rng, cfg: SubsampleConfig) -> float:
    if depth == 0 or hour == env.horizon:
        return 0.0
    state = SystemState(status, hour)
    cands = sample_action_neighborhood(anchor, state, cfg.sample_count, cfg.decay, rng, env)
    if not cands:
        return -BIG
    startups = env.startup_pairs(status)
    best = -float("inf")
    best_bits = None
    for bits in cands:
        aint = env._int_of(bits)
        r = -env.dispatch_cost_int(aint, hour)
        for mask, price in startups:
            if aint & mask:
                r -= price
        v = r + _search_sub(env, env._advance(status, bits), hour + 1, depth - 1, bits, rng, cfg)
        if v > best or (v == best and bits < best_bits):
            best, best_bits = v, bits
    return best


def subsampled_tree_search(
    s0: SystemState, config: SearchConfig, env: UnitCommitmentMDP
) -> ScheduleSolution:
    """Tree search with per-node action sub-sampling.

    The root candidates at hour t are anchored on the action committed at
    t-1 (at t=0: the on/off sign pattern of the initial state); deeper
    nodes anchor on the action taken along their own path.  Each root
    candidate evaluates under an RNG stream derived from (seed, t, index),
    so results do not depend on thread count.
    """
    if config.subsample is None:
        raise ValueError("subsampled_tree_search requires a subsample config")
    if s0.hour != 0:
        raise ValueError("tree search starts from hour 0")
    cfg = config.subsample
    depth = config.lookahead
    state = s0
    anchor = tuple(1 if st > 0 else 0 for st in s0.status)
    actions = []
    values = []
    for t in range(env.horizon):
        root_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, t]))
        cands = sample_action_neighborhood(
            anchor, state, cfg.sample_count, cfg.decay, root_rng, env
        )
        if not cands:
            raise NoFeasibleActionError(f"no feasible action at hour {t}", step=t)
        startups = env.startup_pairs(state.status)

        def score(item) -> float:
            i, bits = item
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, t, i]))
            aint = env._int_of(bits)
            r = -env.dispatch_cost_int(aint, t)
            for mask, price in startups:
                if aint & mask:
                    r -= price
            return r + _search_sub(
                env, env._advance(state.status, bits), t + 1, depth - 1, bits, rng, cfg
            )

        if config.threads > 1 and len(cands) > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                vals = list(pool.map(score, enumerate(cands)))
        else:
            vals = [score(item) for item in enumerate(cands)]

        best_bits, best_v = cands[0], vals[0]
        for bits, v in zip(cands[1:], vals[1:]):
            if v > best_v or (v == best_v and bits < best_bits):
                best_bits, best_v = bits, v
        actions.append(best_bits)
        values.append(best_v)
        anchor = best_bits
        state = env.transition(state, best_bits)
    solution = env.replay(actions, s0)
    return env.with_step_values(solution, values)
