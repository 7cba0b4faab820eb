"""Benchmark harness: repeated perturbed queries, CSV records, and summary
statistics (cost, consistency, success rate, effective runtime).

A scenario document lists robots, an optional scene, planner configurations,
and problems.  Each problem runs ``repetitions`` times per planner;
repetition 0 keeps the nominal goal and later repetitions perturb one joint
by the configured magnitude.  The perturbed goal for (problem, repetition)
is drawn from a generator seeded by (seed, problem index, repetition), so
every planner sees identical goals and reruns are reproducible.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import time
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import defaults
from .errors import (
    AllFailed,
    EmptyInput,
    KindMismatch,
    PlannerError,
    RobotValidationError,
    ScenarioInvalid,
    ZeroMean,
)
from .kinematics import Pose
from .lattice import GoalConstraint, GoalType
from .planner_api import PlannerInterface

# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def compute_cv(costs) -> float:
    """Coefficient of variation in percent: 100 * sigma / mu.

    Uses the population standard deviation, so a single sample gives 0.
    """
    vals = np.asarray(list(costs), dtype=float)
    if vals.size == 0:
        raise EmptyInput("compute_cv needs at least one cost")
    if vals.size == 1:
        return 0.0
    mu = float(vals.mean())
    if mu <= 0.0:
        raise ZeroMean(f"compute_cv needs a positive mean, got {mu}")
    return float(100.0 * vals.std() / mu)


def effective_runtime_ratios(times):
    """Score each planner by t / t_min over the successful planners.

    ``times`` is a sequence or a mapping planner -> time; ``None`` (or NaN)
    marks a failed planner, which is excluded from t_min and flagged with a
    ``None`` ratio in the output.
    """
    if isinstance(times, Mapping):
        keys = list(times)
        vals = [times[k] for k in keys]
    else:
        keys = None
        vals = list(times)
    if not vals:
        raise EmptyInput("effective_runtime_ratios needs at least one entry")

    def ok(v):
        return v is not None and not (isinstance(v, float) and math.isnan(v))

    good = [float(v) for v in vals if ok(v)]
    if not good:
        raise AllFailed("no successful planner times")
    tmin = min(good)

    def ratio(v):
        if not ok(v):
            return None
        v = float(v)
        if tmin <= 0.0:
            return 1.0 if v <= 0.0 else math.inf
        return v / tmin

    out = [ratio(v) for v in vals]
    if keys is None:
        return out
    return dict(zip(keys, out))


def perturb_goal(goal, magnitude_deg: float, rng, lower=None, upper=None):
    """Perturb one uniformly chosen joint of a joint-space goal by the
    given magnitude in degrees, with uniform sign, clamped to limits.

    Accepts a JOINT :class:`GoalConstraint` or a bare configuration and
    returns the same type.  Deterministic for a given generator state.
    """
    if magnitude_deg < 0:
        raise RobotValidationError("perturbation magnitude must be >= 0")
    wrapped = isinstance(goal, GoalConstraint)
    if wrapped:
        if goal.kind != GoalType.JOINT:
            raise KindMismatch("perturb_goal requires a JOINT goal")
        q = np.array(goal.target, dtype=float)
    else:
        q = np.array(goal, dtype=float)
    if magnitude_deg == 0.0:
        return goal
    j = int(rng.integers(len(q)))
    sign = 1.0 if int(rng.integers(2)) else -1.0
    q[j] += sign * math.radians(magnitude_deg)
    if lower is not None:
        q = np.maximum(q, np.asarray(lower, dtype=float))
    if upper is not None:
        q = np.minimum(q, np.asarray(upper, dtype=float))
    if wrapped:
        return dataclasses.replace(goal, target=q)
    return q


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------


@dataclass
class PlannerConfig:
    """One benchmark column: a label and a string parameter map."""

    label: str
    params: dict


@dataclass
class Problem:
    """One start/goal query; multi-robot problems assign several robots."""

    problem_id: str
    starts: dict[str, np.ndarray]
    goals: dict[str, GoalConstraint]

    @property
    def multi(self) -> bool:
        return len(self.starts) > 1


@dataclass
class Scenario:
    robots: list[dict]
    problems: list[Problem]
    planners: list[PlannerConfig]
    scene: str | None = None
    repetitions: int = defaults.REPS_SINGLE
    perturbation_deg: float = defaults.PERTURBATION_DEG
    time_limit: float = defaults.TIME_LIMIT_SINGLE_S
    seed: int = 0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ScenarioInvalid("repetitions must be >= 1")
        if self.perturbation_deg < 0:
            raise ScenarioInvalid("perturbation must be >= 0")
        if self.time_limit <= 0:
            raise ScenarioInvalid("time_limit must be > 0")
        if not self.robots:
            raise ScenarioInvalid("scenario has no robots")
        if not self.problems:
            raise ScenarioInvalid("scenario has no problems")
        if not self.planners:
            raise ScenarioInvalid("scenario has no planners")


def _parse_goal(doc, robot_name: str) -> GoalConstraint:
    if isinstance(doc, GoalConstraint):
        return doc
    if not isinstance(doc, dict):
        raise ScenarioInvalid(f"goal for {robot_name!r} must be a mapping")
    if "joint" in doc:
        return GoalConstraint.joint(doc["joint"], tolerance=float(doc.get("tolerance", 0.0)))
    if "position" in doc:
        return GoalConstraint.position(doc["position"], tolerance=float(doc.get("tolerance", 0.05)))
    if "pose" in doc:
        vals = [float(v) for v in doc["pose"]]
        if len(vals) != 7:
            raise ScenarioInvalid("pose goal needs [x, y, z, qx, qy, qz, qw]")
        return GoalConstraint.pose(
            Pose(tuple(vals[:3]), tuple(vals[3:])),
            position_tolerance=float(doc.get("tolerance", 0.05)),
            orientation_tolerance=float(doc.get("orientation_tolerance", math.pi)),
        )
    raise ScenarioInvalid(f"goal for {robot_name!r} needs a joint, position, or pose key")


def parse_scenario(doc: dict, base_dir=None) -> Scenario:
    """Build a Scenario from a parsed document; paths resolve against
    ``base_dir``."""
    if not isinstance(doc, dict):
        raise ScenarioInvalid("scenario document must be a mapping")
    base = Path(base_dir) if base_dir is not None else Path(".")

    def resolve(path) -> str:
        p = Path(str(path))
        return str(p if p.is_absolute() else base / p)

    robots = []
    for entry in doc.get("robots", []):
        if isinstance(entry, str):
            entry = {"file": entry}
        if "file" not in entry:
            raise ScenarioInvalid("robot entry needs a 'file' key")
        file = resolve(entry["file"])
        name = entry.get("name")
        if name is None:
            try:
                name = str(yaml.safe_load(Path(file).read_text())["name"])
            except (OSError, yaml.YAMLError, KeyError, TypeError) as exc:
                raise ScenarioInvalid(f"cannot read robot name from {file}: {exc}") from exc
        robots.append({"file": file, "name": str(name), "base_pose": entry.get("base_pose")})

    planners = []
    for entry in doc.get("planners", []):
        if not isinstance(entry, dict):
            raise ScenarioInvalid("planner entry must be a mapping")
        params = entry.get("params", entry)
        params = {str(k): str(v) for k, v in params.items() if k != "label"}
        if "planner_id" not in params:
            raise ScenarioInvalid("planner entry needs a planner_id")
        planners.append(PlannerConfig(label=str(entry.get("label", params["planner_id"])), params=params))

    problems = []
    for idx, entry in enumerate(doc.get("problems", [])):
        if not isinstance(entry, dict):
            raise ScenarioInvalid("problem entry must be a mapping")
        pid = str(entry.get("id", f"p{idx:02d}"))
        if "robots" in entry and isinstance(entry["robots"], dict):
            starts, goals = {}, {}
            for rname, sub in entry["robots"].items():
                starts[rname] = np.asarray(sub["start"], dtype=float)
                goals[rname] = _parse_goal(sub["goal"], rname)
        else:
            rname = entry.get("robot")
            if rname is None:
                if len(robots) != 1:
                    raise ScenarioInvalid(f"problem {pid!r} must name its robot")
                rname = robots[0]["name"]
            if "start" not in entry or "goal" not in entry:
                raise ScenarioInvalid(f"problem {pid!r} needs start and goal")
            starts = {str(rname): np.asarray(entry["start"], dtype=float)}
            goals = {str(rname): _parse_goal(entry["goal"], str(rname))}
        problems.append(Problem(problem_id=pid, starts=starts, goals=goals))

    try:
        return Scenario(
            robots=robots,
            problems=problems,
            planners=planners,
            scene=resolve(doc["scene"]) if doc.get("scene") else None,
            repetitions=int(doc.get("repetitions", defaults.REPS_SINGLE)),
            perturbation_deg=float(doc.get("perturbation_deg", defaults.PERTURBATION_DEG)),
            time_limit=float(doc.get("time_limit", defaults.TIME_LIMIT_SINGLE_S)),
            seed=int(doc.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioInvalid(str(exc)) from exc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioInvalid(f"scenario is not valid YAML: {exc}") from exc
    return parse_scenario(doc, base_dir=path.parent)


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("problem_id", "rep", "planner", "success", "ee_cost_m", "planner_cost", "time_s", "bound")


@dataclass
class BenchmarkRecord:
    problem_id: str
    rep: int
    planner: str
    success: bool
    ee_cost_m: float | None
    planner_cost: float | None
    time_s: float
    bound: float | None

    def row(self) -> list[str]:
        def num(v):
            return "" if v is None else str(float(v))

        return [
            self.problem_id,
            str(self.rep),
            self.planner,
            "true" if self.success else "false",
            num(self.ee_cost_m),
            num(self.planner_cost),
            str(float(self.time_s)),
            num(self.bound),
        ]


@dataclass
class BenchResult:
    records: list[BenchmarkRecord]
    summary: dict[str, dict]
    csv_text: str


def _build_world(scenario: Scenario) -> PlannerInterface:
    world = PlannerInterface()
    for entry in scenario.robots:
        base = entry.get("base_pose")
        world.add_articulation(
            spec=entry["file"],
            name=entry["name"],
            base_pose=Pose.from_dict(base) if base else None,
        )
    if scenario.scene:
        world.load_scene(scenario.scene)
    return world


def _goal_for(scenario: Scenario, world: PlannerInterface, pidx: int, rep: int, seed: int):
    """Perturbed goals for one repetition; identical across planners."""
    problem = scenario.problems[pidx]
    if rep == 0 or scenario.perturbation_deg == 0.0:
        return dict(problem.goals)
    rng = np.random.default_rng([seed, pidx, rep])
    out = {}
    for rname in sorted(problem.goals):
        goal = problem.goals[rname]
        if goal.kind == GoalType.JOINT:
            model, _ = world.scene.robot(rname)
            out[rname] = perturb_goal(
                goal, scenario.perturbation_deg, rng, lower=model.lower, upper=model.upper
            )
        else:
            out[rname] = goal
    return out


def _run_query(world, scenario, cfg: PlannerConfig, problem: Problem, goals, clock):
    params = dict(cfg.params)
    params.setdefault("time_limit", str(scenario.time_limit))
    names = sorted(problem.starts)
    handle = world.make_planner(names, params)
    t0 = clock()
    try:
        if problem.multi:
            traj = handle.plan_multi(problem.starts, goals)
        else:
            traj = handle.plan(problem.starts[names[0]], goals[names[0]])
    except PlannerError:
        return None, clock() - t0
    return traj, clock() - t0


def run_benchmark(
    scenario: Scenario,
    *,
    seed: int | None = None,
    clock=time.perf_counter,
    out=None,
) -> BenchResult:
    """Run every problem x repetition x planner query sequentially.

    Per-query failures (timeouts, unreachable goals) are recorded with an
    empty cost and never abort the run.  ``clock`` is injectable so tests
    can pin recorded times.  ``out`` optionally receives the CSV.
    """
    seed = scenario.seed if seed is None else int(seed)
    world = _build_world(scenario)
    records: list[BenchmarkRecord] = []
    for pidx, problem in enumerate(scenario.problems):
        for rep in range(scenario.repetitions):
            goals = _goal_for(scenario, world, pidx, rep, seed)
            for cfg in scenario.planners:
                traj, elapsed = _run_query(world, scenario, cfg, problem, goals, clock)
                if traj is None:
                    records.append(
                        BenchmarkRecord(problem.problem_id, rep, cfg.label, False, None, None, elapsed, None)
                    )
                else:
                    meta = traj.metadata
                    records.append(
                        BenchmarkRecord(
                            problem.problem_id,
                            rep,
                            cfg.label,
                            True,
                            float(meta["ee_cost"]),
                            float(meta["cost"]),
                            elapsed,
                            float(meta["bound"]),
                        )
                    )
    csv_text = records_to_csv(records)
    if out is not None:
        if hasattr(out, "write"):
            out.write(csv_text)
        else:
            Path(out).write_text(csv_text)
    return BenchResult(records=records, summary=summarize(records), csv_text=csv_text)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def csv_to_records(text: str) -> list[BenchmarkRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_COLUMNS:
        raise ScenarioInvalid(f"unexpected CSV header {header!r}")

    def num(cell):
        return None if cell == "" else float(cell)

    out = []
    for row in reader:
        if not row:
            continue
        out.append(
            BenchmarkRecord(
                problem_id=row[0],
                rep=int(row[1]),
                planner=row[2],
                success=row[3] == "true",
                ee_cost_m=num(row[4]),
                planner_cost=num(row[5]),
                time_s=float(row[6]),
                bound=num(row[7]),
            )
        )
    return out


def _group_cv(costs) -> float:
    try:
        return compute_cv(costs)
    except ZeroMean:
        # Nonnegative costs with zero mean are all zero: no variation.
        return 0.0


def summarize(records) -> dict[str, dict]:
    """Per-planner aggregates, recomputable from the raw records alone.

    Costs and times average over successful queries; CV is computed per
    problem over its successful repetitions and then averaged; the
    effective runtime ratio compares planners within each (problem, rep)
    group and averages each planner's ratios.
    """
    records = list(records)
    planners = sorted({r.planner for r in records})
    problems = sorted({r.problem_id for r in records})

    ratios: dict[str, list[float]] = {p: [] for p in planners}
    groups = sorted({(r.problem_id, r.rep) for r in records})
    for key in groups:
        times = {}
        for rec in records:
            if (rec.problem_id, rec.rep) == key:
                times[rec.planner] = rec.time_s if rec.success else None
        try:
            scored = effective_runtime_ratios(times)
        except AllFailed:
            continue
        for planner, ratio in scored.items():
            if ratio is not None and math.isfinite(ratio):
                ratios[planner].append(ratio)

    summary = {}
    for planner in planners:
        mine = [r for r in records if r.planner == planner]
        wins = [r for r in mine if r.success]
        cvs = []
        for pid in problems:
            costs = [r.ee_cost_m for r in wins if r.problem_id == pid]
            if costs:
                cvs.append(_group_cv(costs))
        summary[planner] = {
            "queries": len(mine),
            "successes": len(wins),
            "success_rate_percent": 100.0 * len(wins) / len(mine) if mine else 0.0,
            "mean_ee_cost_m": float(np.mean([r.ee_cost_m for r in wins])) if wins else None,
            "mean_cv_percent": float(np.mean(cvs)) if cvs else None,
            "mean_time_s": float(np.mean([r.time_s for r in wins])) if wins else None,
            "mean_effective_runtime_ratio": float(np.mean(ratios[planner])) if ratios[planner] else None,
        }
    return summary


def summary_table(summary: dict[str, dict]) -> str:
    """Human-readable summary, one planner per line."""
    header = f"{'planner':<16} {'succ%':>7} {'ee_cost_m':>10} {'cv%':>7} {'time_s':>8} {'t/tmin':>7}"
    lines = [header]

    def fmt(v, spec):
        return "-" if v is None else format(v, spec)

    for planner, row in summary.items():
        lines.append(
            f"{planner:<16} {row['success_rate_percent']:>7.1f} "
            f"{fmt(row['mean_ee_cost_m'], '>10.4f')} {fmt(row['mean_cv_percent'], '>7.2f')} "
            f"{fmt(row['mean_time_s'], '>8.3f')} {fmt(row['mean_effective_runtime_ratio'], '>7.2f')}"
        )
    return "\n".join(lines)
