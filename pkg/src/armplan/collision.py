"""Free-space membership tests against a primitive-shape scene.

A :class:`Scene` collects obstacles (boxes, spheres) and robots.  It must be
frozen before any collision query; a frozen scene is immutable and safe for
concurrent read-only queries from parallel search workers.

Narrow phase is exact: capsule-sphere, capsule-box, and capsule-capsule all
reduce to closed-form segment distance queries.  Self-collision skips
adjacent link pairs, which share a joint and always touch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import (
    DuplicateName,
    MissingAssignment,
    RobotSpecError,
    RobotValidationError,
    UnknownName,
    UnknownRobot,
    WorldFrozen,
)
from .geometry import (
    Vec3,
    quat_conjugate,
    quat_rotate,
    seg_aabb_dist,
    seg_point_dist,
    seg_seg_dist,
)
from .kinematics import Pose, RobotModel, link_capsule_segments

BOX = "box"
SPHERE = "sphere"


@dataclass(frozen=True)
class SceneObject:
    name: str
    shape: str
    pose: Pose
    half_extents: Vec3 | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.shape == BOX:
            if self.half_extents is None or any(h <= 0 for h in self.half_extents):
                raise RobotValidationError(f"box {self.name!r}: extents must be positive")
            object.__setattr__(
                self, "half_extents", tuple(float(v) for v in self.half_extents)
            )
        elif self.shape == SPHERE:
            if self.radius is None or self.radius <= 0:
                raise RobotValidationError(f"sphere {self.name!r}: radius must be positive")
            object.__setattr__(self, "radius", float(self.radius))
        else:
            raise RobotValidationError(f"object {self.name!r}: unknown shape {self.shape!r}")


class Scene:
    """World obstacles plus robots with their base poses.

    Mutating calls raise :class:`WorldFrozen` once :meth:`freeze` has been
    called.  Collision queries require a frozen scene.
    """

    def __init__(self):
        self.objects: dict[str, SceneObject] = {}
        self.robots: dict[str, tuple[RobotModel, Pose]] = {}
        self.frozen = False

    def _check_mutable(self):
        if self.frozen:
            raise WorldFrozen("scene is frozen; no further mutation allowed")

    def add_object(self, obj: SceneObject):
        self._check_mutable()
        if obj.name in self.objects or obj.name in self.robots:
            raise DuplicateName(f"name {obj.name!r} already in scene")
        self.objects[obj.name] = obj

    def add_box(self, name: str, size, pose: Pose):
        """Add a box; ``size`` is the full extent (stored as half-extents)."""
        half = tuple(float(s) / 2.0 for s in size)
        self.add_object(SceneObject(name=name, shape=BOX, pose=pose, half_extents=half))

    def add_sphere(self, name: str, radius: float, pose: Pose):
        self.add_object(SceneObject(name=name, shape=SPHERE, pose=pose, radius=radius))

    def remove_object(self, name: str):
        self._check_mutable()
        if name not in self.objects:
            raise UnknownName(f"no object named {name!r}")
        del self.objects[name]

    def add_robot(self, name: str, model: RobotModel, base_pose: Pose | None = None):
        self._check_mutable()
        if name in self.robots or name in self.objects:
            raise DuplicateName(f"name {name!r} already in scene")
        self.robots[name] = (model, base_pose or model.base_pose)

    def set_base_pose(self, name: str, pose: Pose):
        self._check_mutable()
        if name not in self.robots:
            raise UnknownRobot(f"no robot named {name!r}")
        model, _ = self.robots[name]
        self.robots[name] = (model, pose)

    def robot(self, name: str) -> tuple[RobotModel, Pose]:
        try:
            return self.robots[name]
        except KeyError:
            raise UnknownRobot(f"no robot named {name!r}") from None

    def freeze(self) -> "Scene":
        self.frozen = True
        # Obstacle data flattened for the narrow-phase loop.
        self._obstacles = []
        for obj in self.objects.values():
            if obj.shape == SPHERE:
                self._obstacles.append((SPHERE, obj.pose.p, None, obj.radius))
            else:
                self._obstacles.append(
                    (BOX, obj.pose.p, quat_conjugate(obj.pose.q), obj.half_extents)
                )
        return self

    def snapshot(self) -> "Scene":
        """Frozen copy; the original stays mutable."""
        snap = Scene()
        snap.objects = dict(self.objects)
        snap.robots = dict(self.robots)
        return snap.freeze()

    def _check_frozen(self):
        if not self.frozen:
            raise WorldFrozen("collision queries require a frozen scene")


def parse_scene_spec(text) -> Scene:
    """Parse a scene document (YAML/JSON text or loaded dict); returns an
    unfrozen scene with no robots."""
    if isinstance(text, str):
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise RobotSpecError(f"unparseable scene spec: {exc}") from exc
    else:
        doc = text
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise RobotSpecError("scene spec must be a mapping")
    scene = Scene()
    for i, od in enumerate(doc.get("objects", [])):
        if not isinstance(od, dict) or "name" not in od or "type" not in od:
            raise RobotSpecError(f"object #{i} must be a mapping with name and type")
        pose = Pose.from_dict(od.get("pose", {}))
        if od["type"] == BOX:
            if "size" not in od:
                raise RobotSpecError(f"box {od['name']!r} is missing 'size'")
            scene.add_box(str(od["name"]), od["size"], pose)
        elif od["type"] == SPHERE:
            if "radius" not in od:
                raise RobotSpecError(f"sphere {od['name']!r} is missing 'radius'")
            scene.add_sphere(str(od["name"]), float(od["radius"]), pose)
        else:
            raise RobotSpecError(f"object {od['name']!r}: unknown type {od['type']!r}")
    return scene


def load_scene_spec(path) -> Scene:
    with open(path) as fh:
        return parse_scene_spec(fh.read())


def _segment_hits_obstacle(a: Vec3, b: Vec3, radius: float, obstacle) -> bool:
    kind, p, q_conj, params = obstacle
    if kind == SPHERE:
        return seg_point_dist(a, b, p) <= radius + params
    # Box: move the segment into the box frame, then test against the AABB.
    la = quat_rotate(q_conj, (a[0] - p[0], a[1] - p[1], a[2] - p[2]))
    lb = quat_rotate(q_conj, (b[0] - p[0], b[1] - p[1], b[2] - p[2]))
    return seg_aabb_dist(la, lb, params) <= radius


def _world_segments(scene: Scene, robot_name: str, q):
    model, base = scene.robot(robot_name)
    return model, link_capsule_segments(model, q, base)


def in_collision(scene: Scene, robot_name: str, q) -> bool:
    """True iff any link capsule hits a scene object or a non-adjacent link
    capsule of the same robot."""
    scene._check_frozen()
    _, segs = _world_segments(scene, robot_name, q)
    obstacles = scene._obstacles
    for _, a, b, r in segs:
        for obs in obstacles:
            if _segment_hits_obstacle(a, b, r, obs):
                return True
    # Self-collision: skip same-link and adjacent-link pairs.
    n = len(segs)
    for i in range(n):
        li, ai, bi, ri = segs[i]
        for j in range(i + 1, n):
            lj, aj, bj, rj = segs[j]
            if abs(li - lj) <= 1:
                continue
            if seg_seg_dist(ai, bi, aj, bj) <= ri + rj:
                return True
    return False


def pair_in_collision(scene: Scene, robot_a: str, q_a, robot_b: str, q_b) -> bool:
    """True iff any capsule of robot_a intersects any capsule of robot_b."""
    scene._check_frozen()
    _, segs_a = _world_segments(scene, robot_a, q_a)
    _, segs_b = _world_segments(scene, robot_b, q_b)
    return segments_intersect(segs_a, segs_b)


def segments_intersect(segs_a, segs_b) -> bool:
    """Pairwise capsule test between two precomputed world segment lists."""
    for _, aa, ab, ar in segs_a:
        for _, ba, bb, br in segs_b:
            if seg_seg_dist(aa, ab, ba, bb) <= ar + br:
                return True
    return False


def robots_in_collision(scene: Scene, assignments: dict) -> bool:
    """True iff any robot collides with the world, itself, or another robot.

    Every robot in the scene must be assigned a configuration.
    """
    scene._check_frozen()
    for name in scene.robots:
        if name not in assignments:
            raise MissingAssignment(f"robot {name!r} has no assigned configuration")
    names = list(scene.robots)
    for name in names:
        if in_collision(scene, name, assignments[name]):
            return True
    world = {name: _world_segments(scene, name, assignments[name])[1] for name in names}
    for i, na in enumerate(names):
        for nb in names[i + 1 :]:
            if segments_intersect(world[na], world[nb]):
                return True
    return False


def edge_valid(scene: Scene, robot_name: str, q_a, q_b, step: float) -> bool:
    """Collision-free along the straight joint-space segment from q_a to q_b.

    Samples are spaced at most ``step`` apart in max-norm, endpoints
    included.  Discretized check only: no swept volumes, so a fine enough
    step is the caller's responsibility (resolution completeness).
    """
    if step <= 0:
        raise ValueError("step must be positive")
    model, _ = scene.robot(robot_name)
    qa = model.check_dimension(q_a)
    qb = model.check_dimension(q_b)
    span = float(np.max(np.abs(qb - qa))) if model.nq else 0.0
    n = max(1, math.ceil(span / step - 1e-12))
    for i in range(n + 1):
        t = i / n
        if in_collision(scene, robot_name, qa + t * (qb - qa)):
            return False
    return True
