"""Implicit search graph over a discretized configuration space.

States are integer joint coordinates on a regular per-joint grid anchored at
the lower limit; motion primitives are +-1 steps in a single joint.  The
graph is never enumerated: successors are generated on demand and validated
against the scene.

:class:`LatticeContext` binds a frozen scene, one robot, and a
:class:`LatticeSpec`, and memoizes state validity, edge validity, costs, and
end-effector positions so that several planner invocations on the same
instance share the collision-checking work.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .collision import Scene, in_collision
from .errors import (
    KindMismatch,
    OutOfLimits,
    RobotValidationError,
    StateInCollision,
)
from .geometry import quat_angle, vec_dist
from .kinematics import Pose, RobotModel, ee_position, forward_kinematics

JOINT_L2 = "joint_l2"
EE_DISPLACEMENT = "ee_displacement"

#: Edge costs are floored here so that every edge cost is strictly positive.
MIN_EDGE_COST = 1e-6


class GoalType(enum.Enum):
    JOINT = "JOINT"
    POSITION = "POSITION"
    POSE = "POSE"


@dataclass(frozen=True)
class GoalConstraint:
    """Goal predicate: joint region, end-effector ball, or pose region.

    Joint goals default to an exact match (goal snapping makes that
    reachable); workspace goals default to a 5 cm ball with orientation
    unconstrained, so a position-only Pose is a usable target as is.
    """

    kind: GoalType
    target: object
    joint_tolerance: float = 0.0
    position_tolerance: float = 0.05
    orientation_tolerance: float = math.pi

    def __post_init__(self):
        if self.kind == GoalType.JOINT:
            arr = np.asarray(self.target, dtype=float).ravel()
            object.__setattr__(self, "target", arr)
            if self.joint_tolerance < 0:
                raise RobotValidationError("joint tolerance must be >= 0")
        elif self.kind == GoalType.POSITION:
            arr = np.asarray(self.target, dtype=float).ravel()
            if arr.shape != (3,):
                raise KindMismatch("POSITION goal target must be a 3-vector")
            object.__setattr__(self, "target", arr)
            if self.position_tolerance < 0:
                raise RobotValidationError("position tolerance must be >= 0")
        elif self.kind == GoalType.POSE:
            if not isinstance(self.target, Pose):
                raise KindMismatch("POSE goal target must be a Pose")
            if self.position_tolerance < 0 or self.orientation_tolerance < 0:
                raise RobotValidationError("pose tolerances must be >= 0")
        else:
            raise KindMismatch(f"unknown goal kind {self.kind!r}")

    @classmethod
    def joint(cls, q, tolerance: float = 0.0) -> "GoalConstraint":
        return cls(GoalType.JOINT, np.asarray(q, dtype=float), joint_tolerance=tolerance)

    @classmethod
    def position(cls, p, tolerance: float = 0.05) -> "GoalConstraint":
        return cls(GoalType.POSITION, p, position_tolerance=tolerance)

    @classmethod
    def pose(
        cls,
        pose: Pose,
        position_tolerance: float = 0.05,
        orientation_tolerance: float = math.pi,
    ) -> "GoalConstraint":
        return cls(
            GoalType.POSE,
            pose,
            position_tolerance=position_tolerance,
            orientation_tolerance=orientation_tolerance,
        )


@dataclass
class LatticeSpec:
    """Lattice geometry and cost model.

    ``resolution`` broadcasts a scalar to every joint.  ``snap_radius``
    (max-norm, radians) triggers a validated straight-line edge from a
    near-goal state to the exact goal configuration, so paths terminate at
    the requested joint goal even when it is off-lattice.  ``None`` defaults
    to the largest per-joint resolution.
    """

    resolution: object = 0.05
    cost_model: str = JOINT_L2
    snap_radius: float | None = None
    collision_step: float | None = None  # default: min resolution / 2

    def __post_init__(self):
        if self.cost_model not in (JOINT_L2, EE_DISPLACEMENT):
            raise RobotValidationError(f"unknown cost model {self.cost_model!r}")
        res = np.atleast_1d(np.asarray(self.resolution, dtype=float))
        if np.any(res <= 0):
            raise RobotValidationError("lattice resolution must be positive")
        self.resolution = res
        if self.snap_radius is not None and self.snap_radius < 0:
            raise RobotValidationError("snap_radius must be >= 0")
        if self.collision_step is not None and self.collision_step <= 0:
            raise RobotValidationError("collision_step must be positive")


@dataclass(frozen=True, eq=False)
class LatticeState:
    """Hash-consed lattice vertex.

    ``coords`` is None for off-lattice states added by goal/start snapping.
    ``config`` is the continuized configuration.  States are interned per
    :class:`LatticeSpace`, so identity comparison is exact: equal coords
    imply the same object and the same ``id``.
    """

    id: int
    coords: tuple[int, ...] | None
    config: np.ndarray

    def __hash__(self):
        return self.id


class LatticeSpace:
    """State interner and coordinate conversions for one robot + spec."""

    def __init__(self, robot: RobotModel, spec: LatticeSpec):
        self.robot = robot
        self.spec = spec
        d = robot.nq
        res = spec.resolution
        if res.shape == (1,):
            res = np.repeat(res, d)
        if res.shape != (d,):
            raise RobotValidationError(
                f"resolution has {res.shape[0]} entries for a {d}-joint robot"
            )
        self.res = res
        self.lo = robot.lower
        self.hi = robot.upper
        # Top coordinate per joint: round-half-up of range/resolution.  The
        # top cell's continuization is clamped to the upper limit, which
        # keeps both round-trip error <= res/2 and configs within limits.
        self.cmax = np.floor((self.hi - self.lo) / self.res + 0.5).astype(int)
        self.snap_radius = (
            spec.snap_radius if spec.snap_radius is not None else float(np.max(self.res))
        )
        self.collision_step = (
            spec.collision_step if spec.collision_step is not None else float(np.min(self.res)) / 2.0
        )
        self._lock = threading.Lock()
        self._by_key: dict = {}
        self._by_id: list[LatticeState] = []

    def size(self) -> int:
        return int(np.prod(self.cmax.astype(object) + 1))

    def _intern(self, key, coords, config) -> LatticeState:
        state = self._by_key.get(key)
        if state is not None:
            return state
        with self._lock:
            state = self._by_key.get(key)
            if state is None:
                config = np.asarray(config, dtype=float)
                config.setflags(write=False)
                state = LatticeState(id=len(self._by_id), coords=coords, config=config)
                self._by_id.append(state)
                self._by_key[key] = state
        return state

    def state(self, coords) -> LatticeState:
        coords = tuple(int(c) for c in coords)
        cached = self._by_key.get(coords)
        if cached is not None:
            return cached
        if any(c < 0 or c > m for c, m in zip(coords, self.cmax)):
            raise OutOfLimits(f"lattice coords {coords} outside the joint range")
        config = np.minimum(self.lo + np.array(coords) * self.res, self.hi)
        return self._intern(coords, coords, config)

    def by_id(self, sid: int) -> LatticeState:
        return self._by_id[sid]

    def discretize(self, q) -> LatticeState:
        arr = self.robot.check_dimension(q)
        if np.any(arr < self.lo - 1e-9) or np.any(arr > self.hi + 1e-9):
            raise OutOfLimits(f"configuration {arr} outside joint limits")
        coords = np.floor((arr - self.lo) / self.res + 0.5).astype(int)
        coords = np.clip(coords, 0, self.cmax)
        return self.state(coords)

    def snap_state(self, q) -> LatticeState:
        """Off-lattice state for an exact configuration (start or goal snap)."""
        arr = self.robot.check_dimension(q)
        if np.any(arr < self.lo - 1e-9) or np.any(arr > self.hi + 1e-9):
            raise OutOfLimits(f"configuration {arr} outside joint limits")
        on = self.discretize(arr)
        if np.array_equal(on.config, arr):
            return on
        return self._intern(("snap", tuple(arr.tolist())), None, arr)

    def adopt(self, state: LatticeState) -> LatticeState:
        """Re-intern a state created by another space with identical geometry."""
        if state.coords is not None:
            return self.state(state.coords)
        return self.snap_state(state.config)


def discretize(robot: RobotModel, spec: LatticeSpec, q) -> LatticeState:
    """Round a configuration to the nearest lattice state (half-up)."""
    return LatticeSpace(robot, spec).discretize(q)


def continuize(state: LatticeState) -> np.ndarray:
    return np.array(state.config)


def goal_satisfied(
    robot: RobotModel, goal: GoalConstraint, state: LatticeState, base_pose: Pose | None = None
) -> bool:
    """Evaluate the goal predicate on a lattice state."""
    if goal.kind == GoalType.JOINT:
        target = robot.check_dimension(goal.target)
        return float(np.max(np.abs(state.config - target))) <= goal.joint_tolerance + 1e-12
    if goal.kind == GoalType.POSITION:
        ee = ee_position(robot, state.config, base_pose)
        return vec_dist(ee, tuple(goal.target)) <= goal.position_tolerance + 1e-12
    if goal.kind == GoalType.POSE:
        ee = forward_kinematics(robot, state.config, base_pose).ee
        if vec_dist(ee.p, goal.target.p) > goal.position_tolerance + 1e-12:
            return False
        return quat_angle(ee.q, goal.target.q) <= goal.orientation_tolerance + 1e-12
    raise KindMismatch(f"unknown goal kind {goal.kind!r}")


class LatticeContext:
    """Frozen scene + robot + lattice with memoized collision queries.

    Safe for concurrent read-mostly use: the interner takes a lock and the
    memo dicts only ever go from missing to a final value, so a racing
    recomputation is idempotent.
    """

    def __init__(self, scene: Scene, robot_name: str, spec: LatticeSpec):
        scene._check_frozen()
        self.scene = scene
        self.robot_name = robot_name
        self.model, self.base_pose = scene.robot(robot_name)
        self.spec = spec
        self.space = LatticeSpace(self.model, spec)
        self._valid: dict[int, bool] = {}
        self._edges: dict[tuple[int, int], bool] = {}
        self._succ: dict[int, tuple] = {}
        self._ee: dict[int, tuple] = {}
        self._reach = None

    # -- collision memoization -------------------------------------------

    def state_valid(self, state: LatticeState) -> bool:
        cached = self._valid.get(state.id)
        if cached is None:
            cached = not in_collision(self.scene, self.robot_name, state.config)
            self._valid[state.id] = cached
        return cached

    def edge_ok(self, a: LatticeState, b: LatticeState) -> bool:
        """Validated straight joint-space edge; endpoints use the state cache."""
        key = (a.id, b.id) if a.id < b.id else (b.id, a.id)
        cached = self._edges.get(key)
        if cached is not None:
            return cached
        ok = self.state_valid(a) and self.state_valid(b)
        if ok:
            qa, qb = a.config, b.config
            span = float(np.max(np.abs(qb - qa)))
            n = max(1, math.ceil(span / self.space.collision_step - 1e-12))
            for i in range(1, n):
                if in_collision(self.scene, self.robot_name, qa + (i / n) * (qb - qa)):
                    ok = False
                    break
        self._edges[key] = ok
        return ok

    def ee(self, state: LatticeState) -> tuple:
        cached = self._ee.get(state.id)
        if cached is None:
            cached = ee_position(self.model, state.config, self.base_pose)
            self._ee[state.id] = cached
        return cached

    # -- costs ------------------------------------------------------------

    def edge_cost(self, a: LatticeState, b: LatticeState) -> float:
        if self.spec.cost_model == EE_DISPLACEMENT:
            return max(MIN_EDGE_COST, vec_dist(self.ee(a), self.ee(b)))
        if a.coords is not None and b.coords is not None:
            # Coordinate deltas keep primitive costs exactly uniform even in
            # a clamped top cell.
            delta = np.array(b.coords) - np.array(a.coords)
            return float(np.linalg.norm(delta * self.space.res))
        return float(np.linalg.norm(b.config - a.config))

    def pair_lower_bound(self, a: LatticeState, b: LatticeState) -> float:
        """Admissible estimate of the path cost between two states."""
        if self.spec.cost_model == EE_DISPLACEMENT:
            return vec_dist(self.ee(a), self.ee(b))
        return float(np.linalg.norm(b.config - a.config))

    def reach(self) -> float:
        """Conservative bound on end-effector speed per unit joint motion."""
        if self._reach is None:
            total = sum(
                math.sqrt(sum(v * v for v in j.origin.p)) for j in self.model.joints
            )
            self._reach = max(total, 1e-6)
        return self._reach

    # -- graph ------------------------------------------------------------

    def successors(self, state: LatticeState):
        """Validated (state, cost) moves: +-1 step per joint, joint index
        ascending, negative step before positive.

        Off-lattice (snapped) states connect to their rounded lattice state
        and its neighbors instead.
        """
        cached = self._succ.get(state.id)
        if cached is not None:
            return cached
        if not self.state_valid(state):
            raise StateInCollision(f"successors of a colliding state {state.coords}")
        space = self.space
        out = []
        if state.coords is None:
            rounded = space.discretize(state.config)
            targets = [rounded] + [t for t, _ in self._lattice_moves(rounded)]
            for t in targets:
                if t.id != state.id and self.edge_ok(state, t):
                    out.append((t, max(MIN_EDGE_COST, self.edge_cost(state, t))))
        else:
            for t, _ in self._lattice_moves(state):
                if self.edge_ok(state, t):
                    out.append((t, self.edge_cost(state, t)))
        cached = tuple(out)
        self._succ[state.id] = cached
        return cached

    def _lattice_moves(self, state: LatticeState):
        space = self.space
        coords = state.coords
        moves = []
        for j in range(len(coords)):
            for step in (-1, 1):
                c = coords[j] + step
                if 0 <= c <= space.cmax[j]:
                    nxt = space.state(coords[:j] + (c,) + coords[j + 1 :])
                    moves.append((nxt, step))
        return moves

    def snap_successor(self, state: LatticeState, goal: GoalConstraint):
        """Validated straight edge to the exact JOINT goal, if within reach."""
        if goal.kind != GoalType.JOINT:
            return None
        target = self.model.check_dimension(goal.target)
        delta = float(np.max(np.abs(state.config - target)))
        if delta == 0.0 or delta > self.space.snap_radius:
            return None
        try:
            gs = self.space.snap_state(target)
        except OutOfLimits:
            return None
        if gs.id == state.id or not self.edge_ok(state, gs):
            return None
        return gs, max(MIN_EDGE_COST, self.edge_cost(state, gs))

    def goal_satisfied(self, goal: GoalConstraint, state: LatticeState) -> bool:
        return goal_satisfied(self.model, goal, state, self.base_pose)

    def start_state(self, q) -> LatticeState:
        return self.space.snap_state(q)


def successors(scene: Scene, robot_name: str, spec: LatticeSpec, state: LatticeState):
    """One-shot successor expansion (builds a throwaway context)."""
    ctx = LatticeContext(scene, robot_name, spec)
    return ctx.successors(ctx.space.adopt(state))
