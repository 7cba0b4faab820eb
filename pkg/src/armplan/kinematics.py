"""Robot models, spec parsing, and forward kinematics for serial chains.

A robot is an ordered chain of revolute joints.  Collision geometry is a set
of capsules attached to each link.  The document format is YAML (JSON is
accepted too, being a YAML subset):

.. code-block:: yaml

    name: planar2
    base_pose: {p: [0, 0, 0], q: [0, 0, 0, 1]}
    joints:
      - {name: j1, parent: base, child: link1, axis: [0, 0, 1],
         origin: {p: [0, 0, 0], q: [0, 0, 0, 1]}, limits: [-3.14, 3.14]}
    links:
      - {name: link1, capsules: [{a: [0, 0, 0], b: [1, 0, 0], radius: 0.05}]}
    end_effector: link1

Angles are radians, lengths are meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import DimensionMismatch, RobotSpecError, RobotValidationError
from .geometry import (
    IDENTITY_QUAT,
    Quat,
    Vec3,
    compose_transforms,
    quat_from_axis_angle,
    quat_mul,
    quat_norm,
    transform_point,
    vec_dist,
)

UNIT_TOL = 1e-9


@dataclass(frozen=True)
class Pose:
    """Rigid transform: translation ``p`` and unit quaternion ``q`` (xyzw)."""

    p: tuple[float, float, float] = (0.0, 0.0, 0.0)
    q: Quat = IDENTITY_QUAT

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))
        if len(self.p) != 3 or len(self.q) != 4:
            raise RobotValidationError("pose needs a 3-vector p and 4-vector q")
        if abs(quat_norm(self.q) - 1.0) > UNIT_TOL:
            raise RobotValidationError(f"pose quaternion is not unit: {self.q}")

    @property
    def position(self) -> np.ndarray:
        return np.array(self.p)

    @property
    def orientation(self) -> np.ndarray:
        return np.array(self.q)

    def to_dict(self) -> dict:
        return {"p": list(self.p), "q": list(self.q)}

    @classmethod
    def from_dict(cls, d: dict) -> "Pose":
        return cls(tuple(d.get("p", (0, 0, 0))), tuple(d.get("q", IDENTITY_QUAT)))


@dataclass(frozen=True)
class Capsule:
    """Segment [a, b] in the link frame, inflated by ``radius``."""

    a: Vec3
    b: Vec3
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0.0:
            raise RobotValidationError("capsule radius must be positive")


@dataclass(frozen=True)
class Joint:
    name: str
    parent: str
    child: str
    axis: Vec3
    origin: Pose
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "axis", tuple(float(v) for v in self.axis))
        ax, ay, az = self.axis
        if abs(math.sqrt(ax * ax + ay * ay + az * az) - 1.0) > UNIT_TOL:
            raise RobotValidationError(f"joint {self.name!r}: axis must be unit length")
        if not self.lo < self.hi:
            raise RobotValidationError(
                f"joint {self.name!r}: limits must satisfy lo < hi, got [{self.lo}, {self.hi}]"
            )


@dataclass(frozen=True)
class RobotModel:
    """Validated serial chain of revolute joints with capsule geometry.

    Immutable after construction; forward kinematics on a shared model is
    safe from concurrent workers.
    """

    name: str
    joints: tuple[Joint, ...]
    links: dict[str, tuple[Capsule, ...]]
    end_effector: str
    base_pose: Pose = field(default_factory=Pose)

    def __post_init__(self):
        if len(self.joints) < 1:
            raise RobotValidationError("robot needs at least one joint")
        chain = [self.joints[0].parent]
        for j in self.joints:
            if j.parent != chain[-1]:
                raise RobotValidationError(
                    f"joint {j.name!r}: parent {j.parent!r} breaks the serial chain "
                    f"(expected {chain[-1]!r})"
                )
            if j.child in chain:
                raise RobotValidationError(f"duplicate link name {j.child!r}")
            chain.append(j.child)
        object.__setattr__(self, "joints", tuple(self.joints))
        for name in self.links:
            if name not in chain:
                raise RobotValidationError(f"capsules attached to unknown link {name!r}")
        object.__setattr__(
            self, "links", {name: tuple(self.links.get(name, ())) for name in chain}
        )
        if self.end_effector not in chain:
            raise RobotValidationError(
                f"end_effector {self.end_effector!r} is not a link of the chain"
            )

    @property
    def nq(self) -> int:
        return len(self.joints)

    @property
    def link_names(self) -> tuple[str, ...]:
        return tuple(self.links.keys())

    @property
    def lower(self) -> np.ndarray:
        return np.array([j.lo for j in self.joints])

    @property
    def upper(self) -> np.ndarray:
        return np.array([j.hi for j in self.joints])

    def check_dimension(self, q) -> np.ndarray:
        arr = np.asarray(q, dtype=float)
        if arr.shape != (self.nq,):
            raise DimensionMismatch(
                f"robot {self.name!r} expects {self.nq} joint values, got shape {arr.shape}"
            )
        return arr

    def within_limits(self, q, tol: float = 1e-12) -> bool:
        arr = self.check_dimension(q)
        return bool(np.all(arr >= self.lower - tol) and np.all(arr <= self.upper + tol))


@dataclass(frozen=True)
class FKResult:
    """World transforms of every link, in chain order, plus the end-effector."""

    link_poses: dict[str, Pose]
    ee: Pose


def _require(cond: bool, msg: str):
    if not cond:
        raise RobotSpecError(msg)


def _parse_pose(d, where: str) -> Pose:
    if d is None:
        return Pose()
    _require(isinstance(d, dict), f"{where}: pose must be a mapping with keys p, q")
    try:
        return Pose(tuple(d.get("p", (0, 0, 0))), tuple(d.get("q", IDENTITY_QUAT)))
    except (TypeError, ValueError) as exc:
        raise RobotSpecError(f"{where}: bad pose ({exc})") from exc


def parse_robot_spec(text) -> RobotModel:
    """Parse a robot-spec document (YAML/JSON text, or an already-loaded dict).

    Raises :class:`RobotSpecError` for malformed documents and
    :class:`RobotValidationError` for invariant violations (bad limits,
    non-unit axis, missing end-effector link, ...).
    """
    if isinstance(text, RobotModel):
        return text
    if isinstance(text, str):
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise RobotSpecError(f"unparseable robot spec: {exc}") from exc
    else:
        doc = text
    _require(isinstance(doc, dict), "robot spec must be a mapping")
    _require("joints" in doc, "robot spec is missing 'joints'")
    _require("end_effector" in doc, "robot spec is missing 'end_effector'")
    _require(isinstance(doc["joints"], list), "'joints' must be a list")

    joints = []
    for i, jd in enumerate(doc["joints"]):
        _require(isinstance(jd, dict), f"joint #{i} must be a mapping")
        for key in ("name", "parent", "child", "axis", "limits"):
            _require(key in jd, f"joint #{i} is missing {key!r}")
        limits = jd["limits"]
        _require(
            isinstance(limits, (list, tuple)) and len(limits) == 2,
            f"joint #{i}: limits must be [lo, hi]",
        )
        joints.append(
            Joint(
                name=str(jd["name"]),
                parent=str(jd["parent"]),
                child=str(jd["child"]),
                axis=tuple(jd["axis"]),
                origin=_parse_pose(jd.get("origin"), f"joint #{i}"),
                lo=float(limits[0]),
                hi=float(limits[1]),
            )
        )

    links: dict[str, tuple[Capsule, ...]] = {}
    for i, ld in enumerate(doc.get("links", [])):
        _require(isinstance(ld, dict) and "name" in ld, f"link #{i} must be a mapping with a name")
        caps = []
        for cd in ld.get("capsules", []):
            for key in ("a", "b", "radius"):
                _require(key in cd, f"link {ld['name']!r}: capsule is missing {key!r}")
            caps.append(Capsule(tuple(cd["a"]), tuple(cd["b"]), cd["radius"]))
        links[str(ld["name"])] = tuple(caps)

    return RobotModel(
        name=str(doc.get("name", "robot")),
        joints=tuple(joints),
        links=links,
        end_effector=str(doc["end_effector"]),
        base_pose=_parse_pose(doc.get("base_pose"), "base_pose"),
    )


def load_robot_spec(path) -> RobotModel:
    with open(path) as fh:
        return parse_robot_spec(fh.read())


def _fk_chain(robot: RobotModel, q: np.ndarray, base_pose: Pose) -> list[tuple[Vec3, Quat]]:
    """World (p, q) of each link in chain order; index 0 is the base link."""
    p, rot = base_pose.p, base_pose.q
    out = [(p, rot)]
    for joint, angle in zip(robot.joints, q):
        p, rot = compose_transforms(p, rot, joint.origin.p, joint.origin.q)
        rot = quat_mul(rot, quat_from_axis_angle(joint.axis, float(angle)))
        out.append((p, rot))
    return out


def forward_kinematics(robot: RobotModel, q, base_pose: Pose | None = None) -> FKResult:
    """Chained rigid transforms from the chain root to every link.

    ``base_pose`` overrides the model's stored root transform (used when a
    scene repositions the robot).
    """
    arr = robot.check_dimension(q)
    chain = _fk_chain(robot, arr, base_pose or robot.base_pose)
    poses = {
        name: Pose(p, rot) for name, (p, rot) in zip(robot.link_names, chain)
    }
    return FKResult(link_poses=poses, ee=poses[robot.end_effector])


def ee_position(robot: RobotModel, q, base_pose: Pose | None = None) -> Vec3:
    """World position of the end-effector link origin (fast path, tuple out)."""
    arr = robot.check_dimension(q)
    chain = _fk_chain(robot, arr, base_pose or robot.base_pose)
    idx = robot.link_names.index(robot.end_effector)
    return chain[idx][0]


def link_capsule_segments(
    robot: RobotModel, q, base_pose: Pose | None = None
) -> list[tuple[int, Vec3, Vec3, float]]:
    """World-frame capsule segments for all links: (link index, a, b, radius)."""
    arr = robot.check_dimension(q)
    chain = _fk_chain(robot, arr, base_pose or robot.base_pose)
    segs = []
    for li, name in enumerate(robot.link_names):
        p, rot = chain[li]
        for cap in robot.links[name]:
            segs.append(
                (li, transform_point(p, rot, cap.a), transform_point(p, rot, cap.b), cap.radius)
            )
    return segs


def ee_path_length(robot: RobotModel, waypoints, base_pose: Pose | None = None) -> float:
    """Sum of Euclidean chords between consecutive end-effector positions."""
    pts = [ee_position(robot, w, base_pose) for w in waypoints]
    if not pts:
        raise DimensionMismatch("ee_path_length needs at least one waypoint")
    return sum(vec_dist(a, b) for a, b in zip(pts, pts[1:]))
