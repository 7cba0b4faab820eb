"""Heuristics for lattice search.

Two families: configuration-space distances (joint Euclidean, end-effector
straight-line) and a workspace breadth-first distance field over a voxel
grid that routes the end effector around obstacles.  A small registry maps
names to factories so planners can assemble heuristic sets from string
parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .collision import BOX, SPHERE, Scene
from .errors import GoalInOccupiedVoxel, KindMismatch, OutOfBounds, RobotValidationError
from .geometry import point_aabb_dist, quat_rotate
from .kinematics import ee_position
from .lattice import (
    EE_DISPLACEMENT,
    GoalConstraint,
    GoalType,
    LatticeContext,
    LatticeState,
)

Heuristic = Callable[[LatticeState], float]

#: Distance assigned to voxels the wavefront cannot reach, as a multiple of
#: the grid diagonal.  Large enough to dominate any reachable distance.
UNREACHABLE_FACTOR = 10.0

DEFAULT_VOXEL = 0.05


def h_joint_euclidean(q_goal) -> Heuristic:
    """L2 joint-space distance to a fixed goal configuration.

    Consistent for the joint_l2 cost model: every edge costs exactly the
    joint-space length of the step.
    """
    target = np.asarray(q_goal, dtype=float).ravel()

    def h(state: LatticeState) -> float:
        return float(np.linalg.norm(state.config - target))

    return h


def h_ee_distance(target_position, ee_fn: Callable[[LatticeState], tuple], scale: float = 1.0) -> Heuristic:
    """Scaled straight-line end-effector distance to a workspace point."""
    tx, ty, tz = (float(v) for v in target_position)

    def h(state: LatticeState) -> float:
        x, y, z = ee_fn(state)
        return scale * math.sqrt((x - tx) ** 2 + (y - ty) ** 2 + (z - tz) ** 2)

    return h


# ---------------------------------------------------------------------------
# Workspace BFS distance field
# ---------------------------------------------------------------------------


@dataclass
class WorkspaceGrid:
    """Voxelized workspace with hop distances to a goal position.

    ``distances`` holds BFS hop count times voxel size for free voxels and
    +inf where the wavefront never arrived.  Queries outside the grid, in
    occupied voxels, or in unreached voxels all return ``penalty``.
    """

    origin: np.ndarray
    voxel: float
    dims: tuple[int, int, int]
    occupancy: np.ndarray
    distances: np.ndarray
    goal_index: tuple[int, int, int]

    @property
    def penalty(self) -> float:
        return UNREACHABLE_FACTOR * self.diameter

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.array(self.dims) * self.voxel))

    def index_of(self, p) -> tuple[int, int, int] | None:
        idx = np.floor((np.asarray(p, dtype=float) - self.origin) / self.voxel).astype(int)
        if np.any(idx < 0) or np.any(idx >= self.dims):
            return None
        return tuple(int(i) for i in idx)

    def distance(self, p) -> float:
        idx = self.index_of(p)
        if idx is None or self.occupancy[idx]:
            return self.penalty
        d = float(self.distances[idx])
        return d if math.isfinite(d) else self.penalty


def _obb_intersects_aabb(center, rot_q, half_obb, aabb_center, half_aabb) -> bool:
    """Separating-axis test between an oriented box and an axis-aligned box."""
    t = np.asarray(center, dtype=float) - np.asarray(aabb_center, dtype=float)
    # Columns of R are the OBB axes in world coordinates.
    axes = np.column_stack(
        [quat_rotate(rot_q, (1.0, 0.0, 0.0)), quat_rotate(rot_q, (0.0, 1.0, 0.0)), quat_rotate(rot_q, (0.0, 0.0, 1.0))]
    )
    ha = np.asarray(half_aabb, dtype=float)
    hb = np.asarray(half_obb, dtype=float)
    absr = np.abs(axes) + 1e-12
    # World axes.
    for i in range(3):
        if abs(t[i]) > ha[i] + float(absr[i] @ hb):
            return False
    # OBB axes.
    for j in range(3):
        if abs(float(t @ axes[:, j])) > float(ha @ absr[:, j]) + hb[j]:
            return False
    # Cross products of axis pairs.
    for i in range(3):
        for j in range(3):
            axis = np.cross(np.eye(3)[i], axes[:, j])
            n = np.linalg.norm(axis)
            if n < 1e-9:
                continue
            axis /= n
            ra = float(ha @ np.abs(axis))
            rb = float(hb @ np.abs(axes.T @ axis))
            if abs(float(t @ axis)) > ra + rb + 1e-12:
                return False
    return True


def _mark_occupancy(scene: Scene, origin, voxel: float, dims) -> np.ndarray:
    occ = np.zeros(dims, dtype=bool)
    half_vox = (voxel / 2.0, voxel / 2.0, voxel / 2.0)
    for obj in scene.objects.values():
        if obj.shape == SPHERE:
            world_half = np.full(3, obj.radius)
        else:
            axes = np.abs(
                np.column_stack(
                    [
                        quat_rotate(obj.pose.q, (1.0, 0.0, 0.0)),
                        quat_rotate(obj.pose.q, (0.0, 1.0, 0.0)),
                        quat_rotate(obj.pose.q, (0.0, 0.0, 1.0)),
                    ]
                )
            )
            world_half = axes @ np.asarray(obj.half_extents)
        p = np.asarray(obj.pose.p)
        lo = np.floor((p - world_half - origin) / voxel).astype(int)
        hi = np.floor((p + world_half - origin) / voxel).astype(int)
        lo = np.maximum(lo, 0)
        hi = np.minimum(hi, np.array(dims) - 1)
        if np.any(lo > hi):
            continue
        for i in range(lo[0], hi[0] + 1):
            for j in range(lo[1], hi[1] + 1):
                for k in range(lo[2], hi[2] + 1):
                    if occ[i, j, k]:
                        continue
                    center = origin + (np.array([i, j, k]) + 0.5) * voxel
                    if obj.shape == SPHERE:
                        rel = tuple(float(v) for v in (np.asarray(obj.pose.p) - center))
                        if point_aabb_dist(rel, half_vox) <= obj.radius:
                            occ[i, j, k] = True
                    else:
                        if _obb_intersects_aabb(
                            obj.pose.p, obj.pose.q, obj.half_extents, center, half_vox
                        ):
                            occ[i, j, k] = True
    return occ


def _bfs_distances(occ: np.ndarray, goal_index, voxel: float) -> np.ndarray:
    """Vectorized 6-connected wavefront from the goal voxel, in meters."""
    free = ~occ
    dist = np.full(occ.shape, np.inf)
    frontier = np.zeros(occ.shape, dtype=bool)
    frontier[goal_index] = True
    dist[goal_index] = 0.0
    hops = 0
    while frontier.any():
        hops += 1
        grown = np.zeros_like(frontier)
        grown[1:, :, :] |= frontier[:-1, :, :]
        grown[:-1, :, :] |= frontier[1:, :, :]
        grown[:, 1:, :] |= frontier[:, :-1, :]
        grown[:, :-1, :] |= frontier[:, 1:, :]
        grown[:, :, 1:] |= frontier[:, :, :-1]
        grown[:, :, :-1] |= frontier[:, :, 1:]
        grown &= free & np.isinf(dist)
        dist[grown] = hops * voxel
        frontier = grown
    return dist


def _auto_bounds(scene: Scene, goal_position, voxel: float):
    points = [np.asarray(goal_position, dtype=float)]
    for obj in scene.objects.values():
        p = np.asarray(obj.pose.p)
        ext = np.full(3, obj.radius) if obj.shape == SPHERE else np.asarray(obj.half_extents) * math.sqrt(3.0)
        points.append(p - ext)
        points.append(p + ext)
    for model, base in scene.robots.values():
        reach = sum(math.sqrt(sum(v * v for v in j.origin.p)) for j in model.joints)
        reach += max(
            (
                max(math.sqrt(sum(v * v for v in c.a)), math.sqrt(sum(v * v for v in c.b))) + c.radius
                for caps in model.links.values()
                for c in caps
            ),
            default=0.0,
        )
        base_p = np.asarray(base.p)
        points.append(base_p - reach)
        points.append(base_p + reach)
    stacked = np.vstack(points)
    lo = stacked.min(axis=0) - 2 * voxel
    hi = stacked.max(axis=0) + 2 * voxel
    return lo, hi


def build_workspace_bfs(
    scene: Scene,
    goal_position,
    voxel: float = DEFAULT_VOXEL,
    bounds=None,
) -> WorkspaceGrid:
    """Build a goal-rooted BFS distance field over the workspace.

    Raises :class:`GoalInOccupiedVoxel` if the goal voxel intersects an
    obstacle and :class:`OutOfBounds` if the goal lies outside ``bounds``.
    """
    if voxel <= 0:
        raise RobotValidationError("voxel size must be positive")
    goal = np.asarray(goal_position, dtype=float).ravel()
    if goal.shape != (3,):
        raise RobotValidationError("goal position must be a 3-vector")
    if bounds is None:
        lo, hi = _auto_bounds(scene, goal, voxel)
    else:
        lo = np.asarray(bounds[0], dtype=float)
        hi = np.asarray(bounds[1], dtype=float)
        if np.any(hi <= lo):
            raise RobotValidationError("grid bounds must satisfy min < max")
    dims = tuple(int(max(1, math.ceil((hi[a] - lo[a]) / voxel - 1e-12))) for a in range(3))
    grid_origin = lo
    idx = np.floor((goal - grid_origin) / voxel).astype(int)
    if np.any(idx < 0) or np.any(idx >= dims):
        raise OutOfBounds(f"goal position {goal.tolist()} outside the grid bounds")
    occ = _mark_occupancy(scene, grid_origin, voxel, dims)
    goal_index = tuple(int(i) for i in idx)
    if occ[goal_index]:
        raise GoalInOccupiedVoxel(f"goal position {goal.tolist()} lies in an occupied voxel")
    distances = _bfs_distances(occ, goal_index, voxel)
    return WorkspaceGrid(
        origin=grid_origin,
        voxel=voxel,
        dims=dims,
        occupancy=occ,
        distances=distances,
        goal_index=goal_index,
    )


def h_workspace(grid: WorkspaceGrid, ee_fn: Callable[[LatticeState], tuple], scale: float = 1.0) -> Heuristic:
    """End-effector lookup into a BFS distance field."""

    def h(state: LatticeState) -> float:
        return scale * grid.distance(ee_fn(state))

    return h


# ---------------------------------------------------------------------------
# Registry and goal-driven assembly
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, Callable] = {}


def register_heuristic(name: str, factory: Callable) -> None:
    """Register a factory ``(ctx, goal, **params) -> Heuristic`` under a name."""
    _REGISTRY[name] = factory


def heuristic_names() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def make_heuristic(name: str, ctx: LatticeContext, goal: GoalConstraint, **params) -> Heuristic:
    if name not in _REGISTRY:
        raise KeyError(f"unknown heuristic {name!r}; known: {heuristic_names()}")
    return _REGISTRY[name](ctx, goal, **params)


def goal_ee_position(ctx: LatticeContext, goal: GoalConstraint) -> tuple:
    """Workspace point the goal constrains the end effector to."""
    if goal.kind == GoalType.JOINT:
        return ee_position(ctx.model, goal.target, ctx.base_pose)
    if goal.kind == GoalType.POSITION:
        return tuple(float(v) for v in goal.target)
    return goal.target.p


def admissible_ee_scale(ctx: LatticeContext) -> float:
    """Scale making workspace meters a lower bound on path cost.

    End-effector motion per unit joint_l2 motion is bounded by
    reach * sqrt(d); for the ee_displacement model the two spaces already
    share units.
    """
    if ctx.spec.cost_model == EE_DISPLACEMENT:
        return 1.0
    return 1.0 / (ctx.reach() * math.sqrt(ctx.model.nq))


def _factory_joint_euclidean(ctx: LatticeContext, goal: GoalConstraint, **params) -> Heuristic:
    if goal.kind != GoalType.JOINT:
        raise KindMismatch("joint_euclidean requires a JOINT goal")
    return h_joint_euclidean(goal.target)


def _factory_ee_distance(ctx: LatticeContext, goal: GoalConstraint, scale: float | None = None) -> Heuristic:
    target = goal_ee_position(ctx, goal)
    if scale is None:
        scale = admissible_ee_scale(ctx)
    return h_ee_distance(target, ctx.ee, scale)


def _factory_workspace_bfs(
    ctx: LatticeContext,
    goal: GoalConstraint,
    voxel: float = DEFAULT_VOXEL,
    bounds=None,
    scale: float = 1.0,
) -> Heuristic:
    grid = build_workspace_bfs(ctx.scene, goal_ee_position(ctx, goal), voxel, bounds)
    return h_workspace(grid, ctx.ee, scale)


register_heuristic("joint_euclidean", _factory_joint_euclidean)
register_heuristic("ee_distance", _factory_ee_distance)
register_heuristic("workspace_bfs", _factory_workspace_bfs)


def default_heuristic(ctx: LatticeContext, goal: GoalConstraint) -> Heuristic:
    """Consistent heuristic matched to the goal kind and cost model."""
    if goal.kind == GoalType.JOINT and ctx.spec.cost_model != EE_DISPLACEMENT:
        return h_joint_euclidean(ctx.model.check_dimension(goal.target))
    return _factory_ee_distance(ctx, goal)
