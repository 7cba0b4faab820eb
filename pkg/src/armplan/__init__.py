"""Search-based motion planning for serial-chain manipulators.

Build a world (robots from YAML specs, box and sphere obstacles), pick a
planner by id, and plan joint-space or end-effector goals on a discretized
joint lattice with provable suboptimality bounds.  Ships weighted A*,
anytime repairing A*, multi-heuristic A*, a parallelized weighted A*, and a
bounded-suboptimal multi-robot solver, plus a benchmark harness, an HTTP
service, and a CLI.
"""

from . import defaults
from .bench import (
    BenchmarkRecord,
    BenchResult,
    PlannerConfig,
    Problem,
    Scenario,
    compute_cv,
    effective_runtime_ratios,
    load_scenario,
    parse_scenario,
    perturb_goal,
    run_benchmark,
    summarize,
)
from .collision import (
    Scene,
    SceneObject,
    edge_valid,
    in_collision,
    load_scene_spec,
    parse_scene_spec,
    robots_in_collision,
)
from .errors import PlannerError
from .heuristics import (
    WorkspaceGrid,
    build_workspace_bfs,
    default_heuristic,
    h_ee_distance,
    h_joint_euclidean,
    h_workspace,
    heuristic_names,
    make_heuristic,
    register_heuristic,
)
from .kinematics import (
    Capsule,
    Joint,
    Pose,
    RobotModel,
    ee_path_length,
    ee_position,
    forward_kinematics,
    load_robot_spec,
    parse_robot_spec,
)
from .lattice import (
    GoalConstraint,
    GoalType,
    LatticeContext,
    LatticeSpace,
    LatticeSpec,
    LatticeState,
    continuize,
    discretize,
    goal_satisfied,
)
from .multirobot import (
    Conflict,
    Constraint,
    MultirobotResult,
    TimedPath,
    detect_conflicts,
    solve_multirobot,
)
from .planner_api import (
    PlannerHandle,
    PlannerInterface,
    Trajectory,
    time_parameterize,
    time_parameterize_multi,
    validate_trajectory,
)
from .search import (
    PlanResult,
    ara_star,
    dijkstra_oracle,
    mha_star,
    validate_path,
    weighted_astar,
    wpase,
)

__version__ = "0.1.0"

__all__ = [
    "BenchResult",
    "BenchmarkRecord",
    "Capsule",
    "Conflict",
    "Constraint",
    "GoalConstraint",
    "GoalType",
    "Joint",
    "LatticeContext",
    "LatticeSpace",
    "LatticeSpec",
    "LatticeState",
    "MultirobotResult",
    "PlanResult",
    "PlannerConfig",
    "PlannerError",
    "PlannerHandle",
    "PlannerInterface",
    "Pose",
    "Problem",
    "RobotModel",
    "Scenario",
    "Scene",
    "SceneObject",
    "TimedPath",
    "Trajectory",
    "WorkspaceGrid",
    "ara_star",
    "build_workspace_bfs",
    "default_heuristic",
    "compute_cv",
    "continuize",
    "defaults",
    "detect_conflicts",
    "dijkstra_oracle",
    "discretize",
    "edge_valid",
    "ee_path_length",
    "ee_position",
    "effective_runtime_ratios",
    "forward_kinematics",
    "goal_satisfied",
    "h_ee_distance",
    "h_joint_euclidean",
    "h_workspace",
    "heuristic_names",
    "in_collision",
    "load_robot_spec",
    "load_scenario",
    "load_scene_spec",
    "make_heuristic",
    "mha_star",
    "parse_robot_spec",
    "parse_scenario",
    "parse_scene_spec",
    "perturb_goal",
    "register_heuristic",
    "robots_in_collision",
    "run_benchmark",
    "solve_multirobot",
    "summarize",
    "time_parameterize",
    "time_parameterize_multi",
    "validate_path",
    "validate_trajectory",
    "weighted_astar",
    "wpase",
]
