"""High-level planning facade: build a world, configure a planner by name,
plan, and get back a timed trajectory.

:class:`PlannerInterface` owns a mutable world.  ``make_planner`` freezes a
snapshot of it into a :class:`PlannerHandle`, so later world edits never
leak into a configured planner, and edits attempted while a plan call is
running raise ``WorldFrozen``.  Planner parameters arrive as a map of
strings (e.g. ``{"planner_id": "ARAstar", "time_limit": "5"}``) and are
validated strictly.
"""

from __future__ import annotations

import dataclasses
import json
import threading
from dataclasses import dataclass, field

import numpy as np

from . import defaults
from .collision import Scene, parse_scene_spec
from .errors import (
    ArityMismatch,
    DimensionMismatch,
    GoalInOccupiedVoxel,
    InvalidVmax,
    InvalidWorkerCount,
    MissingAssignment,
    OutOfBounds,
    RobotValidationError,
    UnknownPlannerId,
    WorldFrozen,
)
from .heuristics import make_heuristic
from .kinematics import Pose, RobotModel, ee_path_length, parse_robot_spec
from .lattice import (
    EE_DISPLACEMENT,
    JOINT_L2,
    GoalConstraint,
    GoalType,
    LatticeContext,
    LatticeSpec,
)
from .multirobot import TimedPath, detect_conflicts, solve_multirobot
from .search import ara_star, mha_star, validate_path, weighted_astar, wpase

# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Timed waypoints for one or more robots on a shared timestamp grid.

    ``q[r]`` is a (T, d_r) array; ``qd``/``qdd`` match its shape; ``t`` is
    shared and strictly increasing (a single waypoint has the single stamp
    0).  ``metadata`` carries planner bookkeeping: planner_id, cost,
    ee_cost, bound, expansions, planning_time.
    """

    robots: list[str]
    t: np.ndarray
    q: dict[str, np.ndarray]
    qd: dict[str, np.ndarray]
    qdd: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def path(self, robot: str | None = None) -> list[np.ndarray]:
        name = robot if robot is not None else self.robots[0]
        return [np.array(row) for row in self.q[name]]

    def to_dict(self) -> dict:
        return {
            "robots": {
                name: {
                    "t": self.t.tolist(),
                    "q": self.q[name].tolist(),
                    "qd": self.qd[name].tolist(),
                    "qdd": self.qdd[name].tolist(),
                }
                for name in self.robots
            },
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, path) -> None:
        with open(path, "w") as f:
            f.write(self.to_json())
            f.write("\n")

    @classmethod
    def from_dict(cls, data: dict) -> "Trajectory":
        robots = list(data["robots"])
        t = None
        q, qd, qdd = {}, {}, {}
        for name in robots:
            block = data["robots"][name]
            t = np.asarray(block["t"], dtype=float)
            q[name] = np.asarray(block["q"], dtype=float)
            qd[name] = np.asarray(block["qd"], dtype=float)
            qdd[name] = np.asarray(block["qdd"], dtype=float)
        if t is None:
            raise RobotValidationError("trajectory has no robots")
        return cls(robots=robots, t=t, q=q, qd=qd, qdd=qdd, metadata=dict(data.get("metadata", {})))

    @classmethod
    def from_json(cls, text: str) -> "Trajectory":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "Trajectory":
        with open(path) as f:
            return cls.from_json(f.read())


#: Shortest admissible segment duration, seconds.
MIN_SEGMENT_S = 1e-4


def _vmax_vector(vmax, d: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(vmax, dtype=float))
    if arr.shape == (1,):
        arr = np.repeat(arr, d)
    if arr.shape != (d,):
        raise InvalidVmax(f"vmax has {arr.shape[0]} entries for {d} joints")
    if np.any(arr <= 0):
        raise InvalidVmax("vmax entries must be positive")
    return arr


def _segment_durations(q: np.ndarray, vmax: np.ndarray) -> np.ndarray:
    deltas = np.abs(np.diff(q, axis=0))
    return np.maximum(np.max(deltas / vmax, axis=1), MIN_SEGMENT_S)


def _differentiate(t: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Central differences inside, one-sided at the endpoints."""
    n = len(t)
    out = np.zeros_like(q)
    if n == 1:
        return out
    out[0] = (q[1] - q[0]) / (t[1] - t[0])
    out[-1] = (q[-1] - q[-2]) / (t[-1] - t[-2])
    for k in range(1, n - 1):
        out[k] = (q[k + 1] - q[k - 1]) / (t[k + 1] - t[k - 1])
    return out


def time_parameterize(path, vmax=defaults.DEFAULT_VMAX_RAD_S):
    """Assign timestamps, velocities, and accelerations to a waypoint path.

    Segment duration is the slowest joint's travel time max|dq_j|/vmax_j,
    floored at 0.1 ms; consecutive duplicate waypoints are dropped first.
    Returns (t, q, qd, qdd) arrays.
    """
    q = np.asarray([np.asarray(p, dtype=float) for p in path], dtype=float)
    if q.ndim != 2 or len(q) == 0:
        raise DimensionMismatch("path must be a nonempty sequence of configurations")
    keep = [0]
    for k in range(1, len(q)):
        if not np.array_equal(q[k], q[keep[-1]]):
            keep.append(k)
    q = q[keep]
    vm = _vmax_vector(vmax, q.shape[1])
    if len(q) == 1:
        return np.zeros(1), q, np.zeros_like(q), np.zeros_like(q)
    t = np.concatenate([[0.0], np.cumsum(_segment_durations(q, vm))])
    qd = _differentiate(t, q)
    qdd = _differentiate(t, qd)
    return t, q, qd, qdd


def time_parameterize_multi(paths: dict, vmax=defaults.DEFAULT_VMAX_RAD_S):
    """Shared timestamp grid for synchronized multi-robot paths.

    All paths are padded to the longest horizon by repeating their final
    configuration; each step lasts as long as the slowest robot's move.
    """
    names = list(paths)
    qs = {}
    horizon = 0
    for name in names:
        arr = np.asarray([np.asarray(p, dtype=float) for p in paths[name]], dtype=float)
        if arr.ndim != 2 or len(arr) == 0:
            raise DimensionMismatch(f"path for {name} must be nonempty")
        qs[name] = arr
        horizon = max(horizon, len(arr))
    padded = {}
    for name in names:
        arr = qs[name]
        if len(arr) < horizon:
            pad = np.repeat(arr[-1][None, :], horizon - len(arr), axis=0)
            arr = np.vstack([arr, pad])
        padded[name] = arr
    if horizon == 1:
        t = np.zeros(1)
    else:
        durations = np.full(horizon - 1, MIN_SEGMENT_S)
        for name in names:
            vm = _vmax_vector(vmax, padded[name].shape[1])
            durations = np.maximum(durations, _segment_durations(padded[name], vm))
        t = np.concatenate([[0.0], np.cumsum(durations)])
    qd = {name: _differentiate(t, padded[name]) for name in names}
    qdd = {name: _differentiate(t, qd[name]) for name in names}
    return t, padded, qd, qdd


# ---------------------------------------------------------------------------
# Parameter parsing
# ---------------------------------------------------------------------------

_PARAM_KEYS = {
    "planner_id",
    "time_limit",
    "w",
    "w1",
    "w2",
    "w_low",
    "w_high",
    "w_start",
    "w_step",
    "w_final",
    "num_workers",
    "resolution",
    "cost_model",
    "snap_radius",
    "collision_step",
    "reuse_experience",
    "use_workspace_heuristic",
    "voxel",
    "vmax",
    "wait_cost",
}


@dataclass
class PlannerParams:
    planner_id: str
    time_limit: float | None = None
    w: float = 1.0
    w1: float = 2.0
    w2: float = 2.0
    w_low: float = 1.5
    w_high: float = 1.5
    w_start: float = 10.0
    w_step: float = 1.0
    w_final: float = 1.0
    num_workers: int = 1
    resolution: float = defaults.DEFAULT_RESOLUTION_RAD
    cost_model: str | None = None
    snap_radius: float | None = None
    collision_step: float | None = None
    reuse_experience: bool = True
    use_workspace_heuristic: bool = True
    voxel: float = defaults.DEFAULT_VOXEL_M
    vmax: float = defaults.DEFAULT_VMAX_RAD_S
    wait_cost: float = 1e-3

    @classmethod
    def parse(cls, raw: dict) -> "PlannerParams":
        if "planner_id" not in raw:
            raise UnknownPlannerId("params must include planner_id")
        unknown = set(raw) - _PARAM_KEYS
        if unknown:
            raise RobotValidationError(f"unknown planner params: {sorted(unknown)}")
        pid = str(raw["planner_id"])
        if pid not in defaults.PLANNER_IDS:
            raise UnknownPlannerId(
                f"unknown planner_id {pid!r}; known: {list(defaults.PLANNER_IDS)}"
            )
        out = cls(planner_id=pid)

        def num(key, lo=None):
            val = float(raw[key])
            if lo is not None and val < lo:
                raise RobotValidationError(f"param {key} must be >= {lo}, got {val}")
            return val

        if "time_limit" in raw:
            out.time_limit = num("time_limit", 0.0)
            if out.time_limit <= 0:
                raise RobotValidationError("time_limit must be > 0")
        for key in ("w", "w1", "w2", "w_low", "w_high", "w_start", "w_final"):
            if key in raw:
                setattr(out, key, num(key, 1.0))
        if "w_step" in raw:
            out.w_step = num("w_step")
            if out.w_step <= 0:
                raise RobotValidationError("w_step must be > 0")
        if "num_workers" in raw:
            nw = int(raw["num_workers"])
            if nw < 1 or nw > defaults.WPASE_MAX_WORKERS:
                raise InvalidWorkerCount(
                    f"num_workers must be in 1..{defaults.WPASE_MAX_WORKERS}, got {nw}"
                )
            out.num_workers = nw
        if "resolution" in raw:
            out.resolution = num("resolution")
            if out.resolution <= 0:
                raise RobotValidationError("resolution must be > 0")
        if "cost_model" in raw:
            cm = str(raw["cost_model"])
            if cm not in (JOINT_L2, EE_DISPLACEMENT):
                raise RobotValidationError(f"unknown cost_model {cm!r}")
            out.cost_model = cm
        if "snap_radius" in raw:
            out.snap_radius = num("snap_radius", 0.0)
        if "collision_step" in raw:
            out.collision_step = num("collision_step")
            if out.collision_step <= 0:
                raise RobotValidationError("collision_step must be > 0")
        for key in ("reuse_experience", "use_workspace_heuristic"):
            if key in raw:
                text = str(raw[key]).strip().lower()
                if text not in ("true", "false", "1", "0", "yes", "no"):
                    raise RobotValidationError(f"param {key} must be a boolean string")
                setattr(out, key, text in ("true", "1", "yes"))
        if "voxel" in raw:
            out.voxel = num("voxel")
            if out.voxel <= 0:
                raise RobotValidationError("voxel must be > 0")
        if "vmax" in raw:
            out.vmax = num("vmax")
            if out.vmax <= 0:
                raise InvalidVmax("vmax must be > 0")
        if "wait_cost" in raw:
            out.wait_cost = num("wait_cost", 0.0)
        return out


# ---------------------------------------------------------------------------
# Facade
# ---------------------------------------------------------------------------


class PlannerInterface:
    """Mutable planning world plus planner construction."""

    def __init__(self):
        self._scene = Scene()
        self._lock = threading.Lock()
        self._inflight = 0

    # -- world mutation ---------------------------------------------------

    def _require_unlocked(self):
        with self._lock:
            if self._inflight:
                raise WorldFrozen("world cannot change while a plan call is running")

    def _plan_scope(self):
        return _InflightScope(self)

    @staticmethod
    def _as_pose(pose, p, q) -> Pose | None:
        if pose is not None:
            return pose if isinstance(pose, Pose) else Pose.from_dict(pose)
        if p is None and q is None:
            return None
        return Pose(tuple(p) if p is not None else (0.0, 0.0, 0.0), tuple(q) if q is not None else (0.0, 0.0, 0.0, 1.0))

    def add_articulation(
        self,
        spec=None,
        name: str | None = None,
        base_pose: Pose | None = None,
        end_effector: str | None = None,
        *,
        urdf_path=None,
        p=None,
        q=None,
    ):
        """Add a robot from a robot-spec document, path, or model.

        ``urdf_path`` is accepted as an alias for ``spec``.  ``p``/``q``
        or ``base_pose`` override the document's base pose.
        """
        self._require_unlocked()
        source = spec if spec is not None else urdf_path
        if source is None:
            raise RobotValidationError("add_articulation needs a robot spec")
        model = _load_robot(source)
        if end_effector is not None:
            model = dataclasses.replace(model, end_effector=end_effector)
        if name is None:
            name = model.name
        base = self._as_pose(base_pose, p, q)
        self._scene.add_robot(name, model, base)
        return self

    def add_box(self, name: str, size, p=None, q=None, pose: Pose | None = None):
        """Add a box by full extents (meters)."""
        self._require_unlocked()
        self._scene.add_box(name, size, self._as_pose(pose, p, q) or Pose())
        return self

    def add_sphere(self, name: str, radius: float, p=None, q=None, pose: Pose | None = None):
        self._require_unlocked()
        self._scene.add_sphere(name, radius, self._as_pose(pose, p, q) or Pose())
        return self

    def remove_object(self, name: str):
        self._require_unlocked()
        self._scene.remove_object(name)
        return self

    def set_base_pose(self, name: str, p=None, q=None, pose: Pose | None = None):
        self._require_unlocked()
        self._scene.set_base_pose(name, self._as_pose(pose, p, q) or Pose())
        return self

    def load_scene(self, text_or_path):
        """Merge objects from a scene document into the world."""
        self._require_unlocked()
        loaded = _load_scene(text_or_path)
        for obj in loaded.objects.values():
            self._scene.add_object(obj)
        return self

    @property
    def scene(self) -> Scene:
        return self._scene

    # -- planner construction ---------------------------------------------

    def make_planner(self, robot_names: list[str], params: dict) -> "PlannerHandle":
        parsed = PlannerParams.parse(params)
        names = list(robot_names)
        if not names:
            raise ArityMismatch("make_planner needs at least one robot name")
        multi = parsed.planner_id in defaults.MULTI_ROBOT_PLANNERS
        if len(names) > 1 and not multi:
            raise ArityMismatch(
                f"{parsed.planner_id} plans a single robot; got {len(names)} names"
            )
        if len(names) == 1 and multi:
            raise ArityMismatch(f"{parsed.planner_id} requires more than one robot")
        snapshot = self._scene.snapshot()
        for name in names:
            snapshot.robot(name)
        return PlannerHandle(self, snapshot, names, parsed)


class _InflightScope:
    def __init__(self, owner: PlannerInterface):
        self.owner = owner

    def __enter__(self):
        with self.owner._lock:
            self.owner._inflight += 1

    def __exit__(self, *exc):
        with self.owner._lock:
            self.owner._inflight -= 1
        return False


def _load_robot(source) -> RobotModel:
    if isinstance(source, RobotModel):
        return source
    if isinstance(source, dict):
        return parse_robot_spec(source)
    text = str(source)
    if "\n" not in text and (text.endswith(".yaml") or text.endswith(".yml") or text.endswith(".json")):
        with open(text) as f:
            text = f.read()
    return parse_robot_spec(text)


def _load_scene(source) -> Scene:
    text = str(source)
    if "\n" not in text and (text.endswith(".yaml") or text.endswith(".yml") or text.endswith(".json")):
        with open(text) as f:
            text = f.read()
    return parse_scene_spec(text)


class PlannerHandle:
    """A frozen world snapshot bound to one parsed planner configuration."""

    def __init__(self, owner: PlannerInterface, scene: Scene, names: list[str], params: PlannerParams):
        self.owner = owner
        self.scene = scene
        self.robot_names = names
        self.params = params
        self._contexts: dict = {}

    def _spec_for(self, goal_kind: GoalType) -> LatticeSpec:
        cm = self.params.cost_model
        if cm is None:
            # Workspace goals plan in end-effector units so the straight-line
            # distance heuristic keeps full strength; joint goals keep the
            # uniform joint metric.
            cm = JOINT_L2 if goal_kind == GoalType.JOINT else EE_DISPLACEMENT
        return LatticeSpec(
            resolution=self.params.resolution,
            cost_model=cm,
            snap_radius=self.params.snap_radius,
            collision_step=self.params.collision_step,
        )

    def _context(self, name: str, spec: LatticeSpec) -> LatticeContext:
        key = (name, spec.cost_model)
        ctx = self._contexts.get(key)
        if ctx is None:
            ctx = LatticeContext(self.scene, name, spec)
            self._contexts[key] = ctx
        return ctx

    # -- single robot ------------------------------------------------------

    def plan(self, start, goal: GoalConstraint) -> Trajectory:
        if len(self.robot_names) != 1:
            raise ArityMismatch("use plan_multi with a multi-robot planner")
        if not isinstance(goal, GoalConstraint):
            raise RobotValidationError("goal must be a GoalConstraint")
        name = self.robot_names[0]
        p = self.params
        spec = self._spec_for(goal.kind)
        ctx = self._context(name, spec)
        with self.owner._plan_scope():
            if p.planner_id == "wAstar":
                result = weighted_astar(
                    self.scene, name, spec, start, goal,
                    w=p.w, time_limit=p.time_limit, context=ctx,
                )
            elif p.planner_id == "ARAstar":
                series = ara_star(
                    self.scene, name, spec, start, goal,
                    w_start=p.w_start, w_step=p.w_step, w_final=p.w_final,
                    time_limit=p.time_limit, context=ctx,
                )
                result = series[-1]
            elif p.planner_id == "MHAstar":
                inadmissible = ()
                if p.use_workspace_heuristic:
                    try:
                        inadmissible = (
                            make_heuristic("workspace_bfs", ctx, goal, voxel=p.voxel),
                        )
                    except (GoalInOccupiedVoxel, OutOfBounds):
                        inadmissible = ()
                result = mha_star(
                    self.scene, name, spec, start, goal,
                    inadmissible=inadmissible, w1=p.w1, w2=p.w2,
                    time_limit=p.time_limit, context=ctx,
                )
            elif p.planner_id == "wPASE":
                result = wpase(
                    self.scene, name, spec, start, goal,
                    w=p.w, num_workers=p.num_workers,
                    time_limit=p.time_limit, context=ctx,
                )
            else:
                raise UnknownPlannerId(f"unknown planner_id {p.planner_id!r}")
        result.planner_id = p.planner_id
        t, q, qd, qdd = time_parameterize(result.path, p.vmax)
        return Trajectory(
            robots=[name],
            t=t,
            q={name: q},
            qd={name: qd},
            qdd={name: qdd},
            metadata={
                "planner_id": p.planner_id,
                "cost": result.cost,
                "ee_cost": result.ee_cost,
                "bound": result.bound,
                "expansions": result.expansions,
                "planning_time": result.time_s,
            },
        )

    def plan_anytime(self, start, goal: GoalConstraint):
        """ARA* solution series as (bound, cost, Trajectory) tuples."""
        if len(self.robot_names) != 1:
            raise ArityMismatch("use plan_multi with a multi-robot planner")
        name = self.robot_names[0]
        p = self.params
        spec = self._spec_for(goal.kind)
        ctx = self._context(name, spec)
        with self.owner._plan_scope():
            series = ara_star(
                self.scene, name, spec, start, goal,
                w_start=p.w_start, w_step=p.w_step, w_final=p.w_final,
                time_limit=p.time_limit, context=ctx,
            )
        out = []
        for result in series:
            t, q, qd, qdd = time_parameterize(result.path, p.vmax)
            traj = Trajectory(
                robots=[name], t=t, q={name: q}, qd={name: qd}, qdd={name: qdd},
                metadata={
                    "planner_id": "ARAstar",
                    "cost": result.cost,
                    "ee_cost": result.ee_cost,
                    "bound": result.bound,
                    "expansions": result.expansions,
                    "planning_time": result.time_s,
                },
            )
            out.append((result.bound, result.cost, traj))
        return out

    # -- multi robot -------------------------------------------------------

    def plan_multi(self, starts: dict, goals: dict) -> Trajectory:
        if len(self.robot_names) < 2:
            raise ArityMismatch("plan_multi needs a multi-robot planner")
        for name in self.robot_names:
            if name not in starts:
                raise MissingAssignment(f"no start for robot {name}")
            if name not in goals:
                raise MissingAssignment(f"no goal for robot {name}")
        p = self.params
        requests = {}
        specs = {}
        contexts = {}
        for name in self.robot_names:
            goal = goals[name]
            if not isinstance(goal, GoalConstraint):
                raise RobotValidationError(f"goal for {name} must be a GoalConstraint")
            spec = self._spec_for(goal.kind)
            specs[name] = spec
            contexts[name] = self._context(name, spec)
            requests[name] = (starts[name], goal)
        with self.owner._plan_scope():
            result = solve_multirobot(
                self.scene,
                requests,
                specs,
                w_low=p.w_low,
                w_high=p.w_high,
                time_limit=p.time_limit,
                reuse_experience=p.reuse_experience,
                wait_cost=p.wait_cost,
                contexts=contexts,
            )
        paths = {name: result.paths[name].configs for name in self.robot_names}
        t, q, qd, qdd = time_parameterize_multi(paths, p.vmax)
        ee_costs = {
            name: ee_path_length(
                self.scene.robot(name)[0], paths[name], self.scene.robot(name)[1]
            )
            for name in self.robot_names
        }
        return Trajectory(
            robots=list(self.robot_names),
            t=t,
            q=q,
            qd=qd,
            qdd=qdd,
            metadata={
                "planner_id": p.planner_id,
                "cost": result.soc,
                "ee_cost": float(sum(ee_costs.values())),
                "per_robot_ee_cost": ee_costs,
                "bound": result.bound,
                "lb": result.lb,
                "expansions": result.high_level_expansions,
                "low_level_expansions": result.low_level_expansions,
                "planning_time": result.time_s,
            },
        )


# ---------------------------------------------------------------------------
# Trajectory validation
# ---------------------------------------------------------------------------


def validate_trajectory(
    scene: Scene,
    trajectory: Trajectory,
    step: float = defaults.DEFAULT_RESOLUTION_RAD / 4.0,
) -> bool:
    """Re-validate a trajectory: limits, collisions, timestamps, robot pairs."""
    t = trajectory.t
    if len(t) == 0 or t[0] != 0.0:
        return False
    if np.any(np.diff(t) <= 0):
        return False
    spec = LatticeSpec(resolution=defaults.DEFAULT_RESOLUTION_RAD)
    for name in trajectory.robots:
        path = trajectory.path(name)
        if len(path) != len(t):
            return False
        if not validate_path(scene, name, spec, path, step=step):
            return False
    if len(trajectory.robots) > 1:
        timed = [
            TimedPath(robot=name, configs=trajectory.path(name))
            for name in trajectory.robots
        ]
        if detect_conflicts(scene, timed):
            return False
    return True
