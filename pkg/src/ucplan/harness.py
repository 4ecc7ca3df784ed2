"""Instance files, seeded instance generation, solver runs, reporting.

Instance JSON schema::

    {"horizon": T, "demand_mw": [...], "reserve_mw": [...],
     "generators": [{"id", "a", "b", "c", "e", "f", "g", "h",
                     "p_min_mw", "p_max_mw", "t_up_h", "t_down_h",
                     "initial_status_h"}, ...]}

A solve writes ``schedule.csv`` (hour, unit_id, committed, power_mw,
gen_cost_usd, startup_cost_usd) and ``summary.json`` into the output
directory.  Every emitted objective is re-derived from the plan by an
independent replay before anything is written.
"""

import csv
import io
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .api_baseline import approximate_policy_iteration
from .backsweep import StateDistanceMetric, evaluate_states, greedy_policy
from .core import (
    DemandProfile,
    GeneratorSpec,
    ProblemInstance,
    generation_cost,
    startup_cost,
    validate_instance,
)
from .errors import InstanceParseError, InstanceValidationError
from .mdp import ScheduleSolution, UnitCommitmentMDP
from .treesearch import (
    SearchConfig,
    SubsampleConfig,
    subsampled_tree_search,
    tree_search_policy,
)

_GEN_KEYS = (
    "id", "a", "b", "c", "e", "f", "g", "h",
    "p_min_mw", "p_max_mw", "t_up_h", "t_down_h", "initial_status_h",
)

ALGORITHMS = ("tree", "tree-sub", "backsweep", "api")


# -- instance files -------------------------------------------------------

def instance_to_dict(instance: ProblemInstance) -> dict:
    return {
        "horizon": instance.horizon,
        "demand_mw": list(instance.profile.demand),
        "reserve_mw": list(instance.profile.reserve),
        "generators": [
            {
                "id": g.id,
                "a": g.a,
                "b": g.b,
                "c": g.c,
                "e": g.e,
                "f": g.f,
                "g": g.g,
                "h": g.h,
                "p_min_mw": g.p_min,
                "p_max_mw": g.p_max,
                "t_up_h": g.t_up,
                "t_down_h": g.t_down,
                "initial_status_h": g.initial_status,
            }
            for g in instance.generators
        ],
    }


def instance_from_dict(data: dict) -> ProblemInstance:
    try:
        horizon = int(data["horizon"])
        demand = tuple(float(x) for x in data["demand_mw"])
        reserve = tuple(float(x) for x in data["reserve_mw"])
        gens = []
        for row in data["generators"]:
            missing = [k for k in _GEN_KEYS if k not in row]
            if missing:
                raise InstanceParseError(f"generator entry missing fields {missing}")
            gens.append(
                GeneratorSpec(
                    id=int(row["id"]),
                    a=float(row["a"]),
                    b=float(row["b"]),
                    c=float(row["c"]),
                    e=float(row["e"]),
                    f=float(row["f"]),
                    g=float(row["g"]),
                    h=float(row["h"]),
                    p_min=float(row["p_min_mw"]),
                    p_max=float(row["p_max_mw"]),
                    t_up=int(row["t_up_h"]),
                    t_down=int(row["t_down_h"]),
                    initial_status=int(row["initial_status_h"]),
                )
            )
    except InstanceParseError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise InstanceParseError(f"malformed instance data: {err}") from None
    return ProblemInstance(tuple(gens), DemandProfile(horizon, demand, reserve))


def save_instance(instance: ProblemInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2) + "\n")


def load_instance(path) -> ProblemInstance:
    """Parse and validate an instance file.

    Raises InstanceParseError on structural problems and
    InstanceValidationError (carrying the report) on invariant breaks.
    """
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise InstanceParseError(f"{path}: invalid JSON at line {err.lineno}") from None
    instance = instance_from_dict(data)
    report = validate_instance(instance)
    if not report.ok:
        raise InstanceValidationError(report)
    return instance


# -- seeded instance generation -------------------------------------------

def _demand_shape(horizon: int) -> np.ndarray:
    """Double-peaked daily curve (morning and evening peaks), unit peak."""
    x = (np.arange(horizon) + 0.5) / horizon
    curve = (
        0.42
        + 0.33 * np.exp(-(((x - 0.375) / 0.11) ** 2))
        + 0.38 * np.exp(-(((x - 0.79) / 0.10) ** 2))
    )
    return curve / curve.max()


def _min_coverable_demand(gens, reserve_ratio: float) -> float:
    """Lowest demand for which some commitment passes both set limits,
    scanning downward from full commitment along overlapping intervals."""
    order = sorted(gens, key=lambda g: (g.p_min, g.id))
    lo_ok = None
    hi = sum(g.p_max for g in order) / (1.0 + reserve_ratio)
    for k in range(len(order), 0, -1):
        lo = sum(g.p_min for g in order[:k])
        cap = sum(g.p_max for g in order[:k]) / (1.0 + reserve_ratio)
        if cap < (lo_ok if lo_ok is not None else hi):
            break  # interval no longer reaches the covered band
        lo_ok = lo
    return lo_ok if lo_ok is not None else hi


def gen_instance(n_units: int, horizon: int, seed: int) -> ProblemInstance:
    """Reproducible random instance at the requested scale.

    Demand follows a double-peaked daily curve scaled so that peak demand
    plus reserve equals 80% of fleet capacity; reserve is 10% of demand.
    The curve's floor is lifted to the lowest hourly-coverable demand so
    every hour admits at least one feasible commitment.  All units start
    on, just past their minimum up time.
    """
    if n_units < 1 or horizon < 1:
        raise ValueError("n_units and horizon must be >= 1")
    rng = np.random.default_rng(seed)
    gens = []
    for i in range(n_units):
        a = rng.uniform(0.001, 0.05)
        b = rng.uniform(5.0, 30.0)
        c = rng.uniform(50.0, 500.0)
        g = rng.uniform(0.05, 0.5)
        h = rng.uniform(0.05, 0.5)
        p_max = rng.uniform(50.0, 400.0)
        p_min = p_max * rng.uniform(0.2, 0.5)
        t_up = int(rng.integers(1, 5))
        t_down = int(rng.integers(1, 5))
        mid = 0.5 * (p_min + p_max)
        typical = a * mid * mid + b * mid + c
        total_startup = typical * rng.uniform(1.0, 4.0)
        split = rng.uniform(0.3, 0.7)
        gens.append(
            GeneratorSpec(
                id=i, a=a, b=b, c=c,
                e=total_startup * split, f=total_startup * (1.0 - split),
                g=g, h=h, p_min=p_min, p_max=p_max,
                t_up=t_up, t_down=t_down, initial_status=t_up,
            )
        )

    reserve_ratio = 0.10
    peak = 0.8 * sum(gen.p_max for gen in gens) / (1.0 + reserve_ratio)
    demand = _demand_shape(horizon) * peak
    floor = _min_coverable_demand(gens, reserve_ratio) * 1.0001
    demand = np.maximum(demand, floor)
    reserve = reserve_ratio * demand
    profile = DemandProfile(horizon, tuple(demand.tolist()), tuple(reserve.tolist()))
    return ProblemInstance(tuple(gens), profile)


# -- solver runs ------------------------------------------------------------

@dataclass(frozen=True)
class RunReport:
    algorithm: str
    config: dict
    objective: float
    generation: float
    startup: float
    runtime_s: float
    seed: int
    solution: ScheduleSolution


def _parse_warm_start(spec_text: str) -> int:
    if not spec_text.startswith("tree:H="):
        raise ValueError(f"warm start must look like tree:H=<int>, got {spec_text!r}")
    return int(spec_text[len("tree:H="):])


def run(
    instance: ProblemInstance,
    algorithm: str,
    *,
    lookahead: int = 1,
    sample_count: int = 64,
    rho: float = 0.5,
    n_samples: int = 50,
    seed: int = 0,
    threads: int = 1,
    warm_start: str = "tree:H=1",
    api_iterations: int = 10,
    api_alpha: float = 0.01,
    api_epsilon: float = 0.1,
    api_episodes: int = 500,
) -> RunReport:
    """Execute one solver and self-audit the reported objective."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}")
    env = UnitCommitmentMDP(instance)
    s0 = env.initial_state()
    config: dict = {"algo": algorithm, "seed": seed, "threads": threads}
    started = time.perf_counter()

    if algorithm == "tree":
        config["H"] = lookahead
        solution = tree_search_policy(s0, SearchConfig(lookahead, threads=threads), env)
    elif algorithm == "tree-sub":
        config.update({"H": lookahead, "K": sample_count, "rho": rho})
        search = SearchConfig(
            lookahead, subsample=SubsampleConfig(sample_count, rho, seed), threads=threads
        )
        solution = subsampled_tree_search(s0, search, env)
    elif algorithm == "backsweep":
        warm_h = _parse_warm_start(warm_start)
        config.update({"ns": n_samples, "warm_start": f"tree:H={warm_h}"})
        warm = tree_search_policy(s0, SearchConfig(warm_h, threads=threads), env)
        metric = StateDistanceMetric().for_instance(instance)
        rng = np.random.default_rng(seed)
        value_set = evaluate_states(n_samples, warm.terminal_state, env, metric, rng)
        solution = greedy_policy(value_set, s0, env, metric)
    else:
        config.update(
            {
                "n_pi": api_iterations,
                "alpha": api_alpha,
                "epsilon": api_epsilon,
                "episodes": api_episodes,
            }
        )
        rng = np.random.default_rng(seed)
        _, solution = approximate_policy_iteration(
            api_iterations, api_alpha, api_epsilon, api_episodes, rng, env
        )
    runtime = time.perf_counter() - started

    audit = UnitCommitmentMDP(instance).schedule_cost(solution.actions)
    if audit.objective != solution.cost.objective:
        raise RuntimeError(
            f"self-audit failed: replay {audit.objective} != reported {solution.cost.objective}"
        )
    return RunReport(
        algorithm=algorithm,
        config=config,
        objective=solution.cost.objective,
        generation=solution.cost.generation_total,
        startup=solution.cost.startup_total,
        runtime_s=runtime,
        seed=seed,
        solution=solution,
    )


# -- outputs ----------------------------------------------------------------

def schedule_rows(solution: ScheduleSolution, instance: ProblemInstance):
    """Per-hour, per-unit rows: commitment, output, and cost split."""
    for hour, (action, state, result) in enumerate(
        zip(solution.actions, solution.states, solution.dispatches)
    ):
        for i, g in enumerate(instance.generators):
            committed = int(action[i])
            power = result.power[i] if committed else 0.0
            gen_cost = generation_cost(g, power) if committed else 0.0
            start = (
                startup_cost(g, -state.status[i])
                if committed and state.status[i] < 0
                else 0.0
            )
            yield (hour, g.id, committed, power, gen_cost, start)


def schedule_csv_text(solution: ScheduleSolution, instance: ProblemInstance) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["hour", "unit_id", "committed", "power_mw", "gen_cost_usd", "startup_cost_usd"]
    )
    for row in schedule_rows(solution, instance):
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def write_run(report: RunReport, out_dir, instance: ProblemInstance) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "schedule.csv").write_text(schedule_csv_text(report.solution, instance))
    summary = {
        "algorithm": report.algorithm,
        "config": report.config,
        "objective_usd": report.objective,
        "generation_usd": report.generation,
        "startup_usd": report.startup,
        "runtime_s": report.runtime_s,
        "seed": report.seed,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


def read_summary(run_dir) -> dict:
    return json.loads((Path(run_dir) / "summary.json").read_text())


def render_report(summaries: list[dict]) -> str:
    """Comparison table in ascending objective order."""
    rows = sorted(summaries, key=lambda s: s["objective_usd"])
    lines = [f"{'Algorithm':<28} {'Objective [$]':>16} {'Run-time [s]':>14}"]
    lines.append("-" * len(lines[0]))
    for s in rows:
        name = s["algorithm"]
        cfg = s.get("config", {})
        if "H" in cfg:
            name += f" (H={cfg['H']}"
            if "K" in cfg:
                name += f", K={cfg['K']}"
            name += ")"
        lines.append(f"{name:<28} {s['objective_usd']:>16,.2f} {s['runtime_s']:>14.2f}")
    return "\n".join(lines)


def report_csv_text(run_dirs) -> str:
    """Per-hour roll-up across runs: committed units, served demand (equal
    to total output by the balance constraint), and cumulative cost."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["algorithm", "hour", "demand_mw", "units_on", "hour_cost_usd", "cumulative_cost_usd"]
    )
    for run_dir in run_dirs:
        summary = read_summary(run_dir)
        by_hour: dict[int, list] = {}
        with open(Path(run_dir) / "schedule.csv", newline="") as fh:
            for row in csv.DictReader(fh):
                by_hour.setdefault(int(row["hour"]), []).append(row)
        cumulative = 0.0
        for hour in sorted(by_hour):
            rows = by_hour[hour]
            demand = sum(float(r["power_mw"]) for r in rows)
            units_on = sum(int(r["committed"]) for r in rows)
            cost = sum(
                float(r["gen_cost_usd"]) + float(r["startup_cost_usd"]) for r in rows
            )
            cumulative += cost
            writer.writerow(
                [summary["algorithm"], hour, repr(demand), units_on, repr(cost), repr(cumulative)]
            )
    return buf.getvalue()
