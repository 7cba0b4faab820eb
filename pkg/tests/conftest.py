"""Shared fixtures: small robots, scene builders, and randomized instance
generators used across the unit and acceptance tests."""

from __future__ import annotations

import numpy as np
import pytest

from armplan import (
    GoalConstraint,
    LatticeContext,
    LatticeSpec,
    PlannerInterface,
    Pose,
    RobotModel,
    Scene,
    in_collision,
    parse_robot_spec,
    parse_scene_spec,
)

PLANAR2_YAML = """
name: planar2
base_pose: {p: [0, 0, 0], q: [0, 0, 0, 1]}
joints:
  - {name: j1, parent: base, child: l1, axis: [0, 0, 1], origin: {p: [0, 0, 0.1]}, limits: [-3.0, 3.0]}
  - {name: j2, parent: l1, child: l2, axis: [0, 0, 1], origin: {p: [0.4, 0, 0]}, limits: [-2.5, 2.5]}
links:
  - {name: l1, capsules: [{a: [0.05, 0, 0], b: [0.35, 0, 0], radius: 0.04}]}
  - {name: l2, capsules: [{a: [0.05, 0, 0], b: [0.35, 0, 0], radius: 0.04}]}
end_effector: l2
"""

PLANAR3_YAML = """
name: planar3
joints:
  - {name: j1, parent: base, child: l1, axis: [0, 0, 1], origin: {p: [0, 0, 0.1]}, limits: [-2.0, 2.0]}
  - {name: j2, parent: l1, child: l2, axis: [0, 0, 1], origin: {p: [0.3, 0, 0]}, limits: [-2.0, 2.0]}
  - {name: j3, parent: l2, child: l3, axis: [0, 1, 0], origin: {p: [0.3, 0, 0]}, limits: [-1.5, 1.5]}
links:
  - {name: l1, capsules: [{a: [0.04, 0, 0], b: [0.26, 0, 0], radius: 0.035}]}
  - {name: l2, capsules: [{a: [0.04, 0, 0], b: [0.26, 0, 0], radius: 0.035}]}
  - {name: l3, capsules: [{a: [0.03, 0, 0], b: [0.2, 0, 0], radius: 0.03}]}
end_effector: l3
"""

SEVEN_DOF_YAML = """
name: seven
joints:
  - {name: j1, parent: base, child: l1, axis: [0, 0, 1], origin: {p: [0, 0, 0.15]}, limits: [-2.9, 2.9]}
  - {name: j2, parent: l1, child: l2, axis: [0, 1, 0], origin: {p: [0, 0, 0.1]}, limits: [-1.8, 1.8]}
  - {name: j3, parent: l2, child: l3, axis: [0, 0, 1], origin: {p: [0, 0, 0.2]}, limits: [-2.9, 2.9]}
  - {name: j4, parent: l3, child: l4, axis: [0, 1, 0], origin: {p: [0, 0, 0.12]}, limits: [-2.0, 2.0]}
  - {name: j5, parent: l4, child: l5, axis: [0, 0, 1], origin: {p: [0, 0, 0.18]}, limits: [-2.9, 2.9]}
  - {name: j6, parent: l5, child: l6, axis: [0, 1, 0], origin: {p: [0, 0, 0.1]}, limits: [-1.6, 1.6]}
  - {name: j7, parent: l6, child: l7, axis: [0, 0, 1], origin: {p: [0, 0, 0.08]}, limits: [-2.9, 2.9]}
links:
  - {name: l2, capsules: [{a: [0, 0, 0.02], b: [0, 0, 0.18], radius: 0.05}]}
  - {name: l4, capsules: [{a: [0, 0, 0.02], b: [0, 0, 0.16], radius: 0.045}]}
  - {name: l6, capsules: [{a: [0, 0, 0.0], b: [0, 0, 0.09], radius: 0.04}]}
  - {name: l7, capsules: [{a: [0, 0, 0], b: [0, 0, 0.06], radius: 0.03}]}
end_effector: l7
"""

PILLAR_SCENE_YAML = """
objects:
  - {name: pillar, type: sphere, radius: 0.08, pose: {p: [0.45, 0.45, 0.1]}}
"""


@pytest.fixture(scope="session")
def planar2_model() -> RobotModel:
    return parse_robot_spec(PLANAR2_YAML)


@pytest.fixture(scope="session")
def planar3_model() -> RobotModel:
    return parse_robot_spec(PLANAR3_YAML)


@pytest.fixture(scope="session")
def seven_model() -> RobotModel:
    return parse_robot_spec(SEVEN_DOF_YAML)


def make_scene(robot_yaml=PLANAR2_YAML, scene_yaml=None, name=None, base_pose=None) -> tuple[Scene, str]:
    """Frozen scene holding one robot and optional obstacles."""
    model = parse_robot_spec(robot_yaml)
    scene = Scene()
    scene.add_robot(name or model.name, model, base_pose)
    if scene_yaml:
        for obj in parse_scene_spec(scene_yaml).objects.values():
            scene.add_object(obj)
    return scene.snapshot(), name or model.name


@pytest.fixture
def pillar_scene() -> tuple[Scene, str]:
    return make_scene(PLANAR2_YAML, PILLAR_SCENE_YAML)


def planar_robot_yaml(
    name: str,
    link_lengths,
    limits,
    radius: float = 0.035,
    axes=None,
) -> str:
    """Planar chain spec with given link lengths and symmetric limits."""
    joints = []
    links = []
    parent = "base"
    for i, (length, lim) in enumerate(zip(link_lengths, limits)):
        child = f"l{i + 1}"
        origin = [0, 0, 0.1] if i == 0 else [link_lengths[i - 1], 0, 0]
        axis = [0, 0, 1] if axes is None else list(axes[i])
        joints.append(
            f"  - {{name: j{i + 1}, parent: {parent}, child: {child}, axis: {axis}, "
            f"origin: {{p: {origin}}}, limits: [{-lim}, {lim}]}}"
        )
        links.append(
            f"  - {{name: {child}, capsules: [{{a: [{radius}, 0, 0], "
            f"b: [{length - radius}, 0, 0], radius: {radius}}}]}}"
        )
        parent = child
    return (
        f"name: {name}\njoints:\n" + "\n".join(joints) + "\nlinks:\n" + "\n".join(links) + f"\nend_effector: l{len(link_lengths)}\n"
    )


def random_single_instance(rng: np.random.Generator):
    """Randomized 2- or 3-DOF instance with a valid start and goal.

    Keeps the lattice at or below 1e5 states.  Returns
    (scene, robot name, spec, start, goal constraint, context).
    """
    dof = 2 if rng.random() < 0.7 else 3
    if dof == 2:
        lengths = rng.uniform(0.25, 0.45, size=2)
        limits = rng.uniform(1.2, 1.6, size=2)
    else:
        lengths = rng.uniform(0.2, 0.35, size=3)
        limits = rng.uniform(0.55, 0.72, size=3)
    yaml_text = planar_robot_yaml("rand", lengths.tolist(), np.round(limits, 2).tolist())
    model = parse_robot_spec(yaml_text)
    scene = Scene()
    scene.add_robot("rand", model, None)
    reach = float(np.sum(lengths))
    for k in range(int(rng.integers(0, 3))):
        ang = rng.uniform(-np.pi, np.pi)
        r = rng.uniform(0.35, 1.0) * reach
        scene.add_sphere(
            f"obs{k}",
            float(rng.uniform(0.04, 0.1)),
            Pose((r * np.cos(ang), r * np.sin(ang), 0.1)),
        )
    frozen = scene.snapshot()
    spec = LatticeSpec(resolution=0.05)
    ctx = LatticeContext(frozen, "rand", spec)
    assert ctx.space.size() <= 100_000

    def sample_valid():
        for _ in range(200):
            q = rng.uniform(model.lower, model.upper)
            if not in_collision(frozen, "rand", q):
                return q
        raise AssertionError("could not sample a collision-free configuration")

    start = sample_valid()
    goal_q = sample_valid()
    return frozen, "rand", spec, start, GoalConstraint.joint(goal_q), ctx


def make_world_planar2(scene_yaml=PILLAR_SCENE_YAML) -> PlannerInterface:
    world = PlannerInterface()
    world.add_articulation(spec=PLANAR2_YAML)
    if scene_yaml:
        world.load_scene(scene_yaml)
    return world
