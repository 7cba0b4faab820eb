"""Command-line client for planning, benchmarking, and validation.

The CLI talks to the HTTP service.  By default it spins the service up
in-process (no sockets, same filesystem); ``--server URL`` points it at a
running instance instead.  Exit codes: 0 success, 2 validation failure
(bad inputs or an invalid trajectory), 3 planning failure (no path or
timeout).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import re
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PLANNING = 3

#: Error codes meaning the planner ran but found nothing in time.
_PLANNING_FAILURES = {
    "Timeout",
    "NoPathExists",
    "StartInvalid",
    "StartsInCollision",
    "LatticeTooLarge",
    "GoalInOccupiedVoxel",
}


class ServiceError(Exception):
    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail

    @property
    def exit_code(self) -> int:
        return EXIT_PLANNING if self.code in _PLANNING_FAILURES else EXIT_VALIDATION


class ServiceClient:
    """Minimal JSON-over-HTTP client with an in-process default transport."""

    def __init__(self, server: str | None = None):
        self.server = server
        self._app = None
        if server is None:
            from .service import create_app

            self._app = create_app()

    def request(self, method: str, path: str, body=None) -> dict:
        if self._app is not None:
            response = asyncio.run(self._request_asgi(method, path, body))
        else:
            response = httpx.request(
                method, self.server.rstrip("/") + path, json=body, timeout=None
            )
        if response.status_code >= 400:
            try:
                payload = response.json()
            except ValueError:
                payload = {}
            raise ServiceError(
                str(payload.get("error", f"HTTP{response.status_code}")),
                str(payload.get("detail", response.text)),
            )
        return response.json()

    async def _request_asgi(self, method: str, path: str, body):
        transport = httpx.ASGITransport(app=self._app)
        async with httpx.AsyncClient(transport=transport, base_url="http://armplan") as client:
            return await client.request(method, path, json=body)

    def post(self, path: str, body=None) -> dict:
        return self.request("POST", path, body)

    def get(self, path: str) -> dict:
        return self.request("GET", path)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ServiceError("ValidationError", f"expected comma-separated numbers: {exc}") from exc


def _goal_body(args) -> dict:
    if args.goal_joint is not None:
        return {"joint": _csv_floats(args.goal_joint)}
    vals = _csv_floats(args.goal_pose)
    if len(vals) != 7:
        raise ServiceError("ValidationError", "--goal-pose needs x,y,z,qx,qy,qz,qw")
    return {"pose": vals}


def _build_world(client: ServiceClient, robot_path: str, scene_path: str | None) -> tuple[str, str]:
    world_id = client.post("/worlds")["world_id"]
    robot = client.post(
        f"/worlds/{world_id}/robots", {"spec": Path(robot_path).read_text()}
    )
    if scene_path:
        client.post(f"/worlds/{world_id}/scene", {"spec": Path(scene_path).read_text()})
    return world_id, robot["name"]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_plan(args) -> int:
    client = ServiceClient(args.server)
    world_id, robot = _build_world(client, args.robot, args.scene)
    params = {"planner_id": args.planner}
    if args.w is not None:
        params["w"] = str(args.w)
    if args.time_limit is not None:
        params["time_limit"] = str(args.time_limit)
    for item in args.param:
        if "=" not in item:
            raise ServiceError("ValidationError", f"--param needs key=value, got {item!r}")
        key, _, value = item.partition("=")
        params[key] = value
    token = client.post(f"/worlds/{world_id}/planners", {"robots": [robot], "params": params})[
        "planner_token"
    ]
    traj = client.post(
        f"/planners/{token}/plan", {"start": _csv_floats(args.start), "goal": _goal_body(args)}
    )
    text = json.dumps(traj, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    meta = traj["metadata"]
    print(
        f"planned with {meta['planner_id']}: cost {meta['cost']:.4f}, "
        f"ee {meta['ee_cost']:.4f} m, bound {meta['bound']:.2f}, "
        f"{meta['expansions']} expansions, {meta['planning_time']:.3f} s",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    import yaml

    client = ServiceClient(args.server)
    path = Path(args.scenario)
    try:
        doc = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ServiceError("ScenarioInvalid", str(exc)) from exc
    body = {"scenario": doc, "base_dir": str(path.parent.resolve())}
    if args.seed is not None:
        body["seed"] = args.seed
    result = client.post("/bench", body)
    if args.out:
        Path(args.out).write_text(result["csv"])
    else:
        print(result["csv"], end="")
    from .bench import summary_table

    print(summary_table(result["summary"]), file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    client = ServiceClient(args.server)
    body = {
        "trajectory": json.loads(Path(args.trajectory).read_text()),
        "robot": Path(args.robot).read_text(),
    }
    if args.scene:
        body["scene"] = Path(args.scene).read_text()
    valid = client.post("/validate", body)["valid"]
    print("valid" if valid else "invalid")
    return EXIT_OK if valid else EXIT_VALIDATION


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("armplan.service:app", host=args.host, port=args.port, log_level="info")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="armplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="plan a single-robot trajectory")
    # Angle lists like "-1,0" must parse as values, not option names.
    plan._negative_number_matcher = re.compile(r"^-\d+[\d.,eE+-]*$")
    plan.add_argument("--robot", required=True, help="robot spec file")
    plan.add_argument("--scene", default=None, help="scene file")
    plan.add_argument("--start", required=True, help="start angles, comma-separated radians")
    goal = plan.add_mutually_exclusive_group(required=True)
    goal.add_argument("--goal-joint", default=None, help="goal angles, comma-separated radians")
    goal.add_argument("--goal-pose", default=None, help="goal pose x,y,z,qx,qy,qz,qw")
    plan.add_argument("--planner", required=True, help="planner id")
    plan.add_argument("--w", type=float, default=None, help="suboptimality weight")
    plan.add_argument("--time-limit", type=float, default=None, help="seconds")
    plan.add_argument("--out", default=None, help="trajectory output file (JSON)")
    plan.add_argument("--param", action="append", default=[], help="extra planner param key=value")
    plan.add_argument("--server", default=None, help="service URL (default: in-process)")
    plan.set_defaults(func=cmd_plan)

    bench = sub.add_parser("bench", help="run a benchmark scenario")
    bench.add_argument("--scenario", required=True, help="scenario file")
    bench.add_argument("--out", default=None, help="CSV output file")
    bench.add_argument("--seed", type=int, default=None, help="seed override")
    bench.add_argument("--server", default=None, help="service URL (default: in-process)")
    bench.set_defaults(func=cmd_bench)

    validate = sub.add_parser("validate", help="re-validate a trajectory file")
    validate.add_argument("--trajectory", required=True, help="trajectory file (JSON)")
    validate.add_argument("--robot", required=True, help="robot spec file")
    validate.add_argument("--scene", default=None, help="scene file")
    validate.add_argument("--server", default=None, help="service URL (default: in-process)")
    validate.set_defaults(func=cmd_validate)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8330)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ServiceError as exc:
        print(f"error [{exc.code}]: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
