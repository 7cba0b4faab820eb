"""HTTP service exposing worlds, planners, benchmarking, and validation.

Worlds are server-side sessions holding a mutable :class:`PlannerInterface`;
planner tokens reference frozen planner handles.  Every domain error maps to
a JSON body ``{"error": <stable code>, "detail": <message>}`` so thin
clients can branch on the code without parsing messages.
"""

from __future__ import annotations

import math
import uuid

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import defaults
from .bench import (
    compute_cv,
    effective_runtime_ratios,
    load_scenario,
    parse_scenario,
    run_benchmark,
)
from .errors import (
    PlannerError,
    RobotValidationError,
    UnknownName,
    UnknownPlannerId,
)
from .kinematics import Pose
from .lattice import GoalConstraint
from .planner_api import (
    PlannerHandle,
    PlannerInterface,
    Trajectory,
    validate_trajectory,
)

_NOT_FOUND_CODES = {"UnknownRobot", "UnknownName", "UnknownPlannerId"}


# ---------------------------------------------------------------------------
# Request bodies
# ---------------------------------------------------------------------------


class PoseBody(BaseModel):
    p: list[float] = Field(default=[0.0, 0.0, 0.0])
    q: list[float] = Field(default=[0.0, 0.0, 0.0, 1.0])

    def to_pose(self) -> Pose:
        return Pose(tuple(self.p), tuple(self.q))


class RobotBody(BaseModel):
    spec: str | None = None
    urdf_path: str | None = None
    name: str | None = None
    base_pose: PoseBody | None = None
    end_effector: str | None = None


class ObjectBody(BaseModel):
    name: str
    type: str
    size: list[float] | None = None
    radius: float | None = None
    pose: PoseBody | None = None


class SceneBody(BaseModel):
    spec: str


class BasePoseBody(BaseModel):
    name: str
    pose: PoseBody


class MakePlannerBody(BaseModel):
    robots: list[str]
    params: dict[str, str]


class GoalBody(BaseModel):
    joint: list[float] | None = None
    position: list[float] | None = None
    pose: list[float] | None = None
    tolerance: float | None = None
    orientation_tolerance: float | None = None

    def to_goal(self) -> GoalConstraint:
        given = [k for k in ("joint", "position", "pose") if getattr(self, k) is not None]
        if len(given) != 1:
            raise RobotValidationError("goal needs exactly one of joint, position, pose")
        if self.joint is not None:
            return GoalConstraint.joint(self.joint, tolerance=self.tolerance or 0.0)
        if self.position is not None:
            return GoalConstraint.position(
                self.position,
                tolerance=0.05 if self.tolerance is None else self.tolerance,
            )
        vals = self.pose
        if len(vals) != 7:
            raise RobotValidationError("pose goal needs [x, y, z, qx, qy, qz, qw]")
        return GoalConstraint.pose(
            Pose(tuple(vals[:3]), tuple(vals[3:])),
            position_tolerance=0.05 if self.tolerance is None else self.tolerance,
            orientation_tolerance=(
                math.pi if self.orientation_tolerance is None else self.orientation_tolerance
            ),
        )


class PlanBody(BaseModel):
    start: list[float]
    goal: GoalBody


class PlanMultiBody(BaseModel):
    starts: dict[str, list[float]]
    goals: dict[str, GoalBody]


class ValidateBody(BaseModel):
    trajectory: dict
    world_id: str | None = None
    robot: str | None = None
    robot_name: str | None = None
    scene: str | None = None
    step: float = defaults.DEFAULT_RESOLUTION_RAD / 4.0


class BenchBody(BaseModel):
    scenario_path: str | None = None
    scenario: dict | None = None
    base_dir: str | None = None
    seed: int | None = None


class CvBody(BaseModel):
    costs: list[float]


class RatiosBody(BaseModel):
    times: list[float | None] | dict[str, float | None]


# ---------------------------------------------------------------------------
# App
# ---------------------------------------------------------------------------


def create_app() -> FastAPI:
    app = FastAPI(title="armplan", version="1.0")
    worlds: dict[str, PlannerInterface] = {}
    planners: dict[str, PlannerHandle] = {}

    @app.exception_handler(PlannerError)
    async def planner_error(request: Request, exc: PlannerError):
        status = 404 if exc.code in _NOT_FOUND_CODES else 400
        if exc.code == "Timeout":
            status = 408
        return JSONResponse(status_code=status, content={"error": exc.code, "detail": str(exc)})

    def world_of(world_id: str) -> PlannerInterface:
        if world_id not in worlds:
            raise UnknownName(f"unknown world {world_id!r}")
        return worlds[world_id]

    def planner_of(token: str) -> PlannerHandle:
        if token not in planners:
            raise UnknownPlannerId(f"unknown planner token {token!r}")
        return planners[token]

    @app.get("/health")
    def health():
        return {"status": "ok", "planner_ids": list(defaults.PLANNER_IDS)}

    @app.post("/worlds")
    def make_world():
        world_id = uuid.uuid4().hex[:12]
        worlds[world_id] = PlannerInterface()
        return {"world_id": world_id}

    @app.delete("/worlds/{world_id}")
    def drop_world(world_id: str):
        world_of(world_id)
        del worlds[world_id]
        return {"ok": True}

    @app.post("/worlds/{world_id}/robots")
    def add_robot(world_id: str, body: RobotBody):
        world = world_of(world_id)
        world.add_articulation(
            spec=body.spec,
            urdf_path=body.urdf_path,
            name=body.name,
            base_pose=body.base_pose.to_pose() if body.base_pose else None,
            end_effector=body.end_effector,
        )
        name = body.name or list(world.scene.robots)[-1]
        model, _ = world.scene.robot(name)
        return {"name": name, "nq": model.nq}

    @app.post("/worlds/{world_id}/objects")
    def add_object(world_id: str, body: ObjectBody):
        world = world_of(world_id)
        pose = body.pose.to_pose() if body.pose else Pose()
        if body.type == "box":
            if body.size is None:
                raise RobotValidationError("box object needs a size")
            world.add_box(body.name, body.size, pose=pose)
        elif body.type == "sphere":
            if body.radius is None:
                raise RobotValidationError("sphere object needs a radius")
            world.add_sphere(body.name, body.radius, pose=pose)
        else:
            raise RobotValidationError(f"unknown object type {body.type!r}")
        return {"name": body.name}

    @app.post("/worlds/{world_id}/scene")
    def load_scene(world_id: str, body: SceneBody):
        world = world_of(world_id)
        world.load_scene(body.spec)
        return {"objects": sorted(world.scene.objects)}

    @app.delete("/worlds/{world_id}/objects/{name}")
    def drop_object(world_id: str, name: str):
        world_of(world_id).remove_object(name)
        return {"ok": True}

    @app.post("/worlds/{world_id}/base_pose")
    def set_base_pose(world_id: str, body: BasePoseBody):
        world_of(world_id).set_base_pose(body.name, pose=body.pose.to_pose())
        return {"ok": True}

    @app.post("/worlds/{world_id}/planners")
    def make_planner(world_id: str, body: MakePlannerBody):
        handle = world_of(world_id).make_planner(body.robots, body.params)
        token = uuid.uuid4().hex[:12]
        planners[token] = handle
        return {"planner_token": token, "planner_id": handle.params.planner_id}

    @app.post("/planners/{token}/plan")
    def plan(token: str, body: PlanBody):
        traj = planner_of(token).plan(body.start, body.goal.to_goal())
        return traj.to_dict()

    @app.post("/planners/{token}/plan_anytime")
    def plan_anytime(token: str, body: PlanBody):
        series = planner_of(token).plan_anytime(body.start, body.goal.to_goal())
        return {
            "solutions": [
                {"bound": bound, "cost": cost, "trajectory": traj.to_dict()}
                for bound, cost, traj in series
            ]
        }

    @app.post("/planners/{token}/plan_multi")
    def plan_multi(token: str, body: PlanMultiBody):
        goals = {name: g.to_goal() for name, g in body.goals.items()}
        traj = planner_of(token).plan_multi(body.starts, goals)
        return traj.to_dict()

    @app.post("/validate")
    def validate(body: ValidateBody):
        traj = Trajectory.from_dict(body.trajectory)
        if body.world_id is not None:
            scene = world_of(body.world_id).scene.snapshot()
        else:
            if body.robot is None:
                raise RobotValidationError("validate needs a world_id or a robot spec")
            world = PlannerInterface()
            world.add_articulation(spec=body.robot, name=body.robot_name)
            if body.scene:
                world.load_scene(body.scene)
            scene = world.scene.snapshot()
        return {"valid": validate_trajectory(scene, traj, step=body.step)}

    @app.post("/bench")
    def bench(body: BenchBody):
        if body.scenario_path is not None:
            scenario = load_scenario(body.scenario_path)
        elif body.scenario is not None:
            scenario = parse_scenario(body.scenario, base_dir=body.base_dir)
        else:
            raise RobotValidationError("bench needs a scenario_path or inline scenario")
        result = run_benchmark(scenario, seed=body.seed)
        return {"csv": result.csv_text, "summary": result.summary}

    @app.post("/metrics/cv")
    def metrics_cv(body: CvBody):
        return {"cv_percent": compute_cv(body.costs)}

    @app.post("/metrics/runtime_ratios")
    def metrics_ratios(body: RatiosBody):
        return {"ratios": effective_runtime_ratios(body.times)}

    return app


app = create_app()
