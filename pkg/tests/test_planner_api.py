"""Facade tests: world management, parameter parsing, time
parameterization, trajectory serialization, and end-to-end plans through
every planner id."""

import json

import numpy as np
import pytest

from armplan import (
    GoalConstraint,
    Pose,
    PlannerInterface,
    Trajectory,
    time_parameterize,
    time_parameterize_multi,
    validate_trajectory,
)
from armplan.errors import (
    ArityMismatch,
    DimensionMismatch,
    InvalidVmax,
    InvalidWorkerCount,
    MissingAssignment,
    NoPathExists,
    RobotValidationError,
    UnknownPlannerId,
    UnknownRobot,
    WorldFrozen,
)
from armplan.planner_api import MIN_SEGMENT_S, PlannerParams

from conftest import PILLAR_SCENE_YAML, PLANAR2_YAML

STICK_YAML = """
name: stick
joints:
  - {name: j1, parent: base, child: rod, axis: [0, 0, 1], origin: {p: [0, 0, 0.1]}, limits: [-1.0, 1.0]}
links:
  - {name: rod, capsules: [{a: [0.05, 0, 0], b: [0.45, 0, 0], radius: 0.04}]}
end_effector: rod
"""


def planar_world() -> PlannerInterface:
    world = PlannerInterface()
    world.add_articulation(PLANAR2_YAML, name="arm")
    return world


class TestTimeParameterize:
    def test_durations_follow_slowest_joint(self):
        path = [[0.0, 0.0], [0.1, 0.2], [0.1, 0.2], [0.3, 0.2]]
        t, q, qd, qdd = time_parameterize(path, vmax=[0.1, 0.4])
        assert len(q) == 3  # duplicate dropped
        assert t == pytest.approx([0.0, 1.0, 3.0])
        assert q.shape == qd.shape == qdd.shape

    def test_difference_stencils(self):
        t, q, qd, _ = time_parameterize([[0.0], [0.1], [0.3]], vmax=0.1)
        assert t == pytest.approx([0.0, 1.0, 3.0])
        assert qd[0, 0] == pytest.approx((q[1, 0] - q[0, 0]) / (t[1] - t[0]))
        assert qd[1, 0] == pytest.approx((q[2, 0] - q[0, 0]) / (t[2] - t[0]))
        assert qd[2, 0] == pytest.approx((q[2, 0] - q[1, 0]) / (t[2] - t[1]))

    def test_single_waypoint_and_all_duplicates(self):
        for path in ([[0.2, 0.1]], [[0.2, 0.1], [0.2, 0.1], [0.2, 0.1]]):
            t, q, qd, qdd = time_parameterize(path)
            assert t == pytest.approx([0.0])
            assert q.shape == (1, 2)
            assert not qd.any() and not qdd.any()

    def test_minimum_segment_duration(self):
        t, _, _, _ = time_parameterize([[0.0], [1e-9]], vmax=1.0)
        assert t[1] == pytest.approx(MIN_SEGMENT_S)

    def test_scalar_vmax_broadcasts(self):
        t, _, _, _ = time_parameterize([[0.0, 0.0], [0.2, 0.4]], vmax=2.0)
        assert t[1] == pytest.approx(0.2)

    def test_vmax_validation(self):
        with pytest.raises(InvalidVmax):
            time_parameterize([[0.0, 0.0], [1.0, 1.0]], vmax=[1.0, 1.0, 1.0])
        with pytest.raises(InvalidVmax):
            time_parameterize([[0.0], [1.0]], vmax=0.0)
        with pytest.raises(InvalidVmax):
            time_parameterize([[0.0], [1.0]], vmax=-0.5)

    def test_empty_path_rejected(self):
        with pytest.raises(DimensionMismatch):
            time_parameterize([])

    def test_multi_pads_to_longest_horizon(self):
        paths = {
            "a": [[0.0], [0.1], [0.2], [0.3]],
            "b": [[1.0]],
        }
        t, q, qd, qdd = time_parameterize_multi(paths, vmax=0.1)
        assert len(t) == 4
        assert q["b"].shape == (4, 1)
        assert np.allclose(q["b"], 1.0)
        assert not qd["b"].any()
        assert t == pytest.approx([0.0, 1.0, 2.0, 3.0])

    def test_multi_takes_slowest_robot_per_step(self):
        paths = {"a": [[0.0], [0.1]], "b": [[0.0], [0.4]]}
        t, _, _, _ = time_parameterize_multi(paths, vmax=1.0)
        assert t[1] == pytest.approx(0.4)

    def test_multi_single_step(self):
        t, q, _, _ = time_parameterize_multi({"a": [[0.5]]})
        assert t == pytest.approx([0.0])
        assert q["a"].shape == (1, 1)


class TestTrajectorySerialization:
    def build(self) -> Trajectory:
        t, q, qd, qdd = time_parameterize([[0.0, 0.0], [0.3, 0.1], [0.5, -0.2]])
        return Trajectory(
            robots=["arm"], t=t, q={"arm": q}, qd={"arm": qd}, qdd={"arm": qdd},
            metadata={"planner_id": "wAstar", "cost": 1.5},
        )

    def test_json_roundtrip(self):
        traj = self.build()
        again = Trajectory.from_json(traj.to_json())
        assert again.robots == ["arm"]
        assert np.allclose(again.t, traj.t)
        assert np.allclose(again.q["arm"], traj.q["arm"])
        assert np.allclose(again.qdd["arm"], traj.qdd["arm"])
        assert again.metadata["cost"] == 1.5

    def test_document_shape(self):
        doc = json.loads(self.build().to_json())
        assert set(doc) == {"robots", "metadata"}
        assert set(doc["robots"]["arm"]) == {"t", "q", "qd", "qdd"}

    def test_save_and_load(self, tmp_path):
        target = tmp_path / "traj.json"
        traj = self.build()
        traj.save(target)
        again = Trajectory.load(target)
        assert np.allclose(again.q["arm"], traj.q["arm"])

    def test_empty_document_rejected(self):
        with pytest.raises(RobotValidationError):
            Trajectory.from_dict({"robots": {}, "metadata": {}})

    def test_path_accessor(self):
        traj = self.build()
        path = traj.path()
        assert len(path) == 3
        assert np.allclose(path[1], traj.q["arm"][1])


class TestPlannerParams:
    def test_defaults(self):
        p = PlannerParams.parse({"planner_id": "wAstar"})
        assert p.w == 1.0
        assert p.time_limit is None
        assert p.num_workers == 1
        assert p.resolution == pytest.approx(0.05)
        assert p.cost_model is None
        assert p.reuse_experience is True

    def test_string_values_parse(self):
        p = PlannerParams.parse(
            {"planner_id": "wPASE", "num_workers": "3", "w": "2.5", "time_limit": "5"}
        )
        assert p.num_workers == 3
        assert p.w == pytest.approx(2.5)
        assert p.time_limit == pytest.approx(5.0)

    def test_unknown_key_rejected(self):
        with pytest.raises(RobotValidationError):
            PlannerParams.parse({"planner_id": "wAstar", "wweight": "2"})

    def test_planner_id_required_and_known(self):
        with pytest.raises(UnknownPlannerId):
            PlannerParams.parse({})
        with pytest.raises(UnknownPlannerId):
            PlannerParams.parse({"planner_id": "rrt"})

    def test_numeric_validation(self):
        bad = [
            {"planner_id": "wAstar", "w": "0.5"},
            {"planner_id": "wAstar", "time_limit": "0"},
            {"planner_id": "ARAstar", "w_step": "0"},
            {"planner_id": "wAstar", "resolution": "-1"},
            {"planner_id": "wAstar", "cost_model": "workspace"},
            {"planner_id": "wAstar", "collision_step": "0"},
        ]
        for raw in bad:
            with pytest.raises(RobotValidationError):
                PlannerParams.parse(raw)
        with pytest.raises(InvalidVmax):
            PlannerParams.parse({"planner_id": "wAstar", "vmax": "0"})

    def test_worker_bounds(self):
        for nw in ("0", "7"):
            with pytest.raises(InvalidWorkerCount):
                PlannerParams.parse({"planner_id": "wPASE", "num_workers": nw})
        assert PlannerParams.parse({"planner_id": "wPASE", "num_workers": "6"}).num_workers == 6

    def test_boolean_strings(self):
        p = PlannerParams.parse({"planner_id": "xECBS", "reuse_experience": "no"})
        assert p.reuse_experience is False
        p = PlannerParams.parse({"planner_id": "MHAstar", "use_workspace_heuristic": "1"})
        assert p.use_workspace_heuristic is True
        with pytest.raises(RobotValidationError):
            PlannerParams.parse({"planner_id": "xECBS", "reuse_experience": "maybe"})


class TestWorldManagement:
    def test_builder_style_world(self):
        world = (
            PlannerInterface()
            .add_articulation(PLANAR2_YAML, name="arm")
            .add_sphere("ball", 0.05, p=(0.5, 0.5, 0.1))
            .add_box("slab", (0.2, 0.2, 0.02), p=(0.0, -0.6, 0.1))
        )
        assert set(world.scene.objects) == {"ball", "slab"}
        world.remove_object("slab")
        assert set(world.scene.objects) == {"ball"}

    def test_load_scene_merges_objects(self):
        world = planar_world().load_scene(PILLAR_SCENE_YAML)
        assert world.scene.objects

    def test_unknown_robot_rejected_at_make_planner(self):
        with pytest.raises(UnknownRobot):
            planar_world().make_planner(["nobody"], {"planner_id": "wAstar"})

    def test_arity_checks(self):
        world = PlannerInterface()
        world.add_articulation(STICK_YAML, name="left", p=(-0.45, 0, 0))
        world.add_articulation(
            STICK_YAML, name="right", p=(0.45, 0, 0), q=(0, 0, 1, 0)
        )
        with pytest.raises(ArityMismatch):
            world.make_planner([], {"planner_id": "wAstar"})
        with pytest.raises(ArityMismatch):
            world.make_planner(["left", "right"], {"planner_id": "wAstar"})
        with pytest.raises(ArityMismatch):
            world.make_planner(["left"], {"planner_id": "xECBS"})

    def test_world_frozen_while_plan_runs(self):
        world = planar_world()
        handle = world.make_planner(["arm"], {"planner_id": "wAstar"})
        with handle.owner._plan_scope():
            with pytest.raises(WorldFrozen):
                world.add_sphere("late", 0.05, p=(1.0, 1.0, 1.0))
        world.add_sphere("late", 0.05, p=(1.0, 1.0, 1.0))
        assert "late" in world.scene.objects

    def test_snapshot_isolation(self):
        world = planar_world()
        goal = GoalConstraint.joint([1.0, 0.5])
        before = world.make_planner(["arm"], {"planner_id": "wAstar"})
        # Bury the goal configuration after the handle snapshotted the world.
        world.add_sphere("bury", 0.2, p=(0.216, 0.337, 0.1))
        traj = before.plan([-1.0, 0.0], goal)
        assert traj.metadata["cost"] > 0
        after = world.make_planner(["arm"], {"planner_id": "wAstar"})
        with pytest.raises(NoPathExists):
            after.plan([-1.0, 0.0], goal)


@pytest.fixture(scope="module")
def pillar_world():
    return planar_world().load_scene(PILLAR_SCENE_YAML)


class TestPlanSingle:
    START = [-1.0, 0.0]
    GOAL_Q = [1.0, 0.5]

    def plan_with(self, world, params):
        handle = world.make_planner(["arm"], params)
        return handle.plan(self.START, GoalConstraint.joint(self.GOAL_Q))

    def test_weighted_astar_trajectory(self, pillar_world):
        traj = self.plan_with(pillar_world, {"planner_id": "wAstar"})
        assert traj.robots == ["arm"]
        assert traj.t[0] == 0.0 and np.all(np.diff(traj.t) > 0)
        assert np.allclose(traj.q["arm"][0], self.START)
        assert np.allclose(traj.q["arm"][-1], self.GOAL_Q, atol=1e-9)
        meta = traj.metadata
        assert meta["planner_id"] == "wAstar"
        assert meta["bound"] == pytest.approx(1.0)
        assert meta["expansions"] > 0
        assert validate_trajectory(pillar_world.scene.snapshot(), traj)

    def test_every_planner_id_is_sound(self, pillar_world):
        optimal = self.plan_with(pillar_world, {"planner_id": "wAstar"}).metadata["cost"]
        cases = [
            {"planner_id": "wAstar", "w": "2"},
            {"planner_id": "ARAstar", "w_start": "3", "w_final": "1.5"},
            {"planner_id": "MHAstar", "w1": "1.5", "w2": "1.5"},
            {"planner_id": "wPASE", "w": "2", "num_workers": "2"},
        ]
        for params in cases:
            traj = self.plan_with(pillar_world, params)
            meta = traj.metadata
            assert meta["cost"] <= meta["bound"] * optimal + 1e-9, params
            assert validate_trajectory(pillar_world.scene.snapshot(), traj), params

    def test_cost_model_defaults_per_goal_kind(self, pillar_world):
        handle = pillar_world.make_planner(["arm"], {"planner_id": "wAstar"})
        handle.plan(self.START, GoalConstraint.joint(self.GOAL_Q))
        assert ("arm", "joint_l2") in handle._contexts
        handle.plan(self.START, GoalConstraint.position([0.3, 0.2, 0.1], tolerance=0.08))
        assert ("arm", "ee_displacement") in handle._contexts

    def test_cost_model_override(self, pillar_world):
        handle = pillar_world.make_planner(
            ["arm"], {"planner_id": "wAstar", "cost_model": "joint_l2"}
        )
        handle.plan(self.START, GoalConstraint.position([0.3, 0.2, 0.1], tolerance=0.08))
        assert list(handle._contexts) == [("arm", "joint_l2")]

    def test_position_goal_cost_matches_ee_cost(self, pillar_world):
        traj = self.plan_with(pillar_world, {"planner_id": "wAstar"})
        handle = pillar_world.make_planner(["arm"], {"planner_id": "wAstar"})
        traj = handle.plan(self.START, GoalConstraint.position([0.3, 0.2, 0.1], tolerance=0.08))
        # End-effector cost model: planner cost is the ee path length up to
        # the zero-motion floor on last-joint moves.
        assert traj.metadata["cost"] == pytest.approx(traj.metadata["ee_cost"], abs=1e-3)

    def test_mhastar_workspace_fallback(self, pillar_world):
        handle = pillar_world.make_planner(["arm"], {"planner_id": "MHAstar"})
        # Target beyond the workspace grid: the guided heuristic cannot be
        # built, so the planner falls back to the anchor search.
        traj = handle.plan(self.START, GoalConstraint.position([1.2, 0.0, 0.1], tolerance=0.9))
        assert traj.metadata["cost"] >= 0.0
        assert validate_trajectory(pillar_world.scene.snapshot(), traj)

    def test_plan_anytime_series(self, pillar_world):
        handle = pillar_world.make_planner(
            ["arm"], {"planner_id": "ARAstar", "w_start": "8", "w_step": "2"}
        )
        series = handle.plan_anytime(self.START, GoalConstraint.joint(self.GOAL_Q))
        assert series
        bounds = [b for b, _, _ in series]
        costs = [c for _, c, _ in series]
        assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))
        assert all(c2 <= c1 + 1e-12 for c1, c2 in zip(costs, costs[1:]))
        assert bounds[-1] == pytest.approx(1.0)
        for bound, cost, traj in series:
            assert traj.metadata["bound"] == pytest.approx(bound)
            assert traj.metadata["cost"] == pytest.approx(cost)

    def test_goal_type_enforced(self, pillar_world):
        handle = pillar_world.make_planner(["arm"], {"planner_id": "wAstar"})
        with pytest.raises(RobotValidationError):
            handle.plan(self.START, [1.0, 0.5])


class TestPlanMulti:
    @pytest.fixture()
    def world(self):
        w = PlannerInterface()
        w.add_articulation(STICK_YAML, name="left", p=(-0.45, 0, 0))
        w.add_articulation(STICK_YAML, name="right", p=(0.45, 0, 0), q=(0, 0, 1, 0))
        return w

    def test_two_robot_plan(self, world):
        handle = world.make_planner(["left", "right"], {"planner_id": "xECBS"})
        starts = {"left": np.array([0.8]), "right": np.array([0.8])}
        goals = {
            "left": GoalConstraint.joint([-0.8]),
            "right": GoalConstraint.joint([-0.8]),
        }
        traj = handle.plan_multi(starts, goals)
        assert set(traj.robots) == {"left", "right"}
        assert traj.q["left"].shape == traj.q["right"].shape
        meta = traj.metadata
        assert meta["bound"] == pytest.approx(2.25)
        assert meta["lb"] <= meta["cost"] + 1e-9
        assert set(meta["per_robot_ee_cost"]) == {"left", "right"}
        assert validate_trajectory(world.scene.snapshot(), traj)

    def test_missing_assignments(self, world):
        handle = world.make_planner(["left", "right"], {"planner_id": "xECBS"})
        goals = {
            "left": GoalConstraint.joint([-0.8]),
            "right": GoalConstraint.joint([-0.8]),
        }
        with pytest.raises(MissingAssignment):
            handle.plan_multi({"left": np.array([0.8])}, goals)
        with pytest.raises(MissingAssignment):
            handle.plan_multi(
                {"left": np.array([0.8]), "right": np.array([0.8])},
                {"left": goals["left"]},
            )

    def test_single_robot_handle_rejects_plan_multi(self):
        world = planar_world()
        handle = world.make_planner(["arm"], {"planner_id": "wAstar"})
        with pytest.raises(ArityMismatch):
            handle.plan_multi({}, {})


class TestValidateTrajectory:
    def test_tampered_waypoint_fails(self):
        world = planar_world().load_scene(PILLAR_SCENE_YAML)
        handle = world.make_planner(["arm"], {"planner_id": "wAstar"})
        traj = handle.plan([-1.0, 0.0], GoalConstraint.joint([1.0, 0.5]))
        assert validate_trajectory(world.scene.snapshot(), traj)
        mid = len(traj.q["arm"]) // 2
        traj.q["arm"][mid] = [0.78, 0.05]  # inside the pillar's sweep
        assert not validate_trajectory(world.scene.snapshot(), traj)

    def test_timestamp_rules(self):
        world = planar_world()
        handle = world.make_planner(["arm"], {"planner_id": "wAstar"})
        traj = handle.plan([-1.0, 0.0], GoalConstraint.joint([-0.5, 0.2]))
        good = traj.t.copy()
        traj.t = good + 0.5
        assert not validate_trajectory(world.scene.snapshot(), traj)
        traj.t = good.copy()
        if len(good) > 2:
            traj.t[2] = traj.t[1]
            assert not validate_trajectory(world.scene.snapshot(), traj)

    def test_length_mismatch_fails(self):
        world = planar_world()
        handle = world.make_planner(["arm"], {"planner_id": "wAstar"})
        traj = handle.plan([-1.0, 0.0], GoalConstraint.joint([-0.5, 0.2]))
        traj.q["arm"] = traj.q["arm"][:-1]
        assert not validate_trajectory(world.scene.snapshot(), traj)

    def test_multi_robot_conflict_fails(self):
        world = PlannerInterface()
        world.add_articulation(STICK_YAML, name="left", p=(-0.45, 0, 0))
        world.add_articulation(STICK_YAML, name="right", p=(0.45, 0, 0), q=(0, 0, 1, 0))
        q = np.zeros((2, 1))
        t = np.array([0.0, 1.0])
        zeros = np.zeros_like(q)
        traj = Trajectory(
            robots=["left", "right"], t=t,
            q={"left": q, "right": q},
            qd={"left": zeros, "right": zeros},
            qdd={"left": zeros, "right": zeros},
        )
        assert not validate_trajectory(world.scene.snapshot(), traj)
