"""Conflict-based planning for several arms sharing one workspace.

Robots move on their own lattices over a shared discrete clock: per
timestep each robot takes one lattice move or waits, and a finished robot
parks at its goal.  A two-level search in the style of bounded-suboptimal
CBS coordinates them: the low level plans one robot against motion
constraints with a focal search biased away from the other robots' current
paths, and the high level resolves pairwise conflicts by branching on
constraints.

A conflict is an interval [t, t+1] where the linearly interpolated motions
of two robots collide at some sampled fraction tau.  The constraint handed
to a child forbids exactly that: the constrained robot's motion over the
interval must stay collision-free against the other robot's recorded
motion, checked on the same sampling grid.  Returned solutions therefore
re-validate under dense interpolation, and the sum of costs is within
w_low * w_high of the best level-respecting joint plan.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .collision import Scene, segments_intersect
from .errors import (
    NoPathExists,
    PlanningTimeout,
    RobotValidationError,
    StartInvalid,
    StartsInCollision,
)
from .heuristics import default_heuristic
from .kinematics import link_capsule_segments
from .lattice import GoalConstraint, LatticeContext, LatticeSpec
from .search import _EPS, weighted_astar

#: Cost of waiting in place for one timestep before reaching the goal.
WAIT_COST = 1e-3


@dataclass
class TimedPath:
    """One robot's trajectory on the shared clock.

    ``configs[t]`` is the configuration at timestep t; after the last entry
    the robot parks there.  ``cost`` counts lattice moves plus WAIT_COST
    per pre-arrival wait; ``lb`` is the low-level lower-bound certificate.
    """

    robot: str
    configs: list[np.ndarray]
    cost: float = 0.0
    lb: float = 0.0

    @property
    def horizon(self) -> int:
        return len(self.configs)

    def at(self, t: int) -> np.ndarray:
        return self.configs[min(t, len(self.configs) - 1)]

    def motion(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        return self.at(t), self.at(t + 1)


@dataclass(frozen=True)
class Conflict:
    """First colliding sample between two robots on interval [t, t+1]."""

    t: int
    tau: float
    robot_a: str
    robot_b: str
    q_a: np.ndarray
    q_b: np.ndarray

    @property
    def kind(self) -> str:
        return "state" if self.tau in (0.0, 1.0) else "edge"


@dataclass(frozen=True)
class Constraint:
    """Forbids colliding with another robot's motion over one interval."""

    t: int
    other: str
    q_from: tuple
    q_to: tuple


class _PairChecker:
    """Pairwise robot-robot collision tests with segment and result caches."""

    def __init__(self, scene: Scene):
        self.scene = scene
        self._segs: dict = {}
        self._pairs: dict = {}

    def segments(self, name: str, q: np.ndarray):
        key = (name, q.tobytes())
        segs = self._segs.get(key)
        if segs is None:
            model, base = self.scene.robot(name)
            segs = link_capsule_segments(model, q, base)
            self._segs[key] = segs
        return segs

    def colliding(self, name_a: str, qa: np.ndarray, name_b: str, qb: np.ndarray) -> bool:
        key = (name_a, qa.tobytes(), name_b, qb.tobytes())
        hit = self._pairs.get(key)
        if hit is None:
            hit = segments_intersect(self.segments(name_a, qa), self.segments(name_b, qb))
            self._pairs[key] = hit
        return hit

    def motion_collision_tau(
        self,
        name_a: str,
        motion_a: tuple[np.ndarray, np.ndarray],
        name_b: str,
        motion_b: tuple[np.ndarray, np.ndarray],
        step_a: float,
        step_b: float,
    ):
        """First tau in [0, 1] where the interpolated motions collide."""
        af, at = motion_a
        bf, bt = motion_b
        n = 1
        span_a = float(np.max(np.abs(at - af))) if len(af) else 0.0
        span_b = float(np.max(np.abs(bt - bf))) if len(bf) else 0.0
        if span_a > 0:
            n = max(n, math.ceil(span_a / step_a - 1e-12))
        if span_b > 0:
            n = max(n, math.ceil(span_b / step_b - 1e-12))
        for i in range(n + 1):
            tau = i / n
            qa = af if tau == 0.0 else (at if tau == 1.0 else af + tau * (at - af))
            qb = bf if tau == 0.0 else (bt if tau == 1.0 else bf + tau * (bt - bf))
            if self.colliding(name_a, qa, name_b, qb):
                return tau
        return None


def detect_conflicts(
    scene: Scene,
    paths: list[TimedPath],
    steps: dict[str, float] | None = None,
    checker: _PairChecker | None = None,
) -> list[Conflict]:
    """All pairwise conflicts, chronological, one per (pair, interval).

    ``steps`` gives the interpolation step per robot (max-norm radians);
    missing entries default to 0.0125, an eighth of the default lattice
    resolution.
    """
    checker = checker or _PairChecker(scene)
    steps = steps or {}
    horizon = max((p.horizon for p in paths), default=0)
    out = []
    for t in range(max(0, horizon - 1)):
        for i in range(len(paths)):
            for j in range(i + 1, len(paths)):
                a, b = paths[i], paths[j]
                tau = checker.motion_collision_tau(
                    a.robot,
                    a.motion(t),
                    b.robot,
                    b.motion(t),
                    steps.get(a.robot, 0.0125),
                    steps.get(b.robot, 0.0125),
                )
                if tau is not None:
                    ma, mb = a.motion(t), b.motion(t)
                    out.append(
                        Conflict(
                            t=t,
                            tau=tau,
                            robot_a=a.robot,
                            robot_b=b.robot,
                            q_a=ma[0] + tau * (ma[1] - ma[0]),
                            q_b=mb[0] + tau * (mb[1] - mb[0]),
                        )
                    )
    return out


@dataclass
class MultirobotResult:
    paths: dict[str, TimedPath]
    soc: float
    lb: float
    bound: float
    high_level_expansions: int
    low_level_expansions: int
    time_s: float


@dataclass
class _CTNode:
    constraints: dict[str, tuple]
    paths: dict[str, TimedPath]
    soc: float
    lb: float
    conflicts: list
    seq: int


class _RobotProblem:
    def __init__(self, ctx: LatticeContext, start, goal: GoalConstraint):
        self.ctx = ctx
        self.goal = goal
        q0 = ctx.model.check_dimension(start)
        if np.any(q0 < ctx.model.lower - 1e-9) or np.any(q0 > ctx.model.upper + 1e-9):
            raise StartInvalid(f"start for {ctx.robot_name} outside joint limits")
        self.start = ctx.start_state(q0)
        if not ctx.state_valid(self.start):
            raise StartInvalid(f"start for {ctx.robot_name} is in collision")
        self.h = default_heuristic(ctx, goal)
        self._hcache: dict[int, float] = {}
        self.step = float(np.min(ctx.space.res)) / 8.0

    def hval(self, s) -> float:
        v = self._hcache.get(s.id)
        if v is None:
            v = float(self.h(s))
            self._hcache[s.id] = v
        return v

    def edges(self, s):
        out = self.ctx.successors(s)
        snap = self.ctx.snap_successor(s, self.goal)
        if snap is not None:
            out = out + (snap,)
        return out

    def is_goal(self, s) -> bool:
        return self.ctx.goal_satisfied(self.goal, s)


class _MultiSolver:
    def __init__(
        self,
        scene: Scene,
        requests: dict,
        spec,
        w_low: float,
        w_high: float,
        reuse_experience: bool,
        deadline,
        time_limit,
        wait_cost: float,
        contexts: dict | None,
    ):
        self.scene = scene
        self.names = sorted(requests)
        self.w_low = w_low
        self.w_high = w_high
        self.reuse = reuse_experience
        self.deadline = deadline
        self.time_limit = time_limit
        self.wait_cost = wait_cost
        self.checker = _PairChecker(scene)
        self.problems: dict[str, _RobotProblem] = {}
        for name in self.names:
            start, goal = requests[name]
            if contexts is not None and name in contexts:
                ctx = contexts[name]
            else:
                rs = spec[name] if isinstance(spec, dict) else spec
                ctx = LatticeContext(scene, name, rs)
            self.problems[name] = _RobotProblem(ctx, start, goal)
        for i, a in enumerate(self.names):
            for b in self.names[i + 1 :]:
                if self.checker.colliding(
                    a, self.problems[a].start.config, b, self.problems[b].start.config
                ):
                    raise StartsInCollision(f"robots {a} and {b} collide at their starts")
        self.steps = {name: self.problems[name].step for name in self.names}
        self.low_expansions = 0
        self.baseline_len: dict[str, int] = {}

    def _check_time(self):
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise PlanningTimeout(f"no conflict-free plan within {self.time_limit} s")

    # -- low level --------------------------------------------------------

    def _motion_blocked(self, name, motion, constraints_at_t) -> bool:
        pr = self.problems[name]
        for ct in constraints_at_t:
            tau = self.checker.motion_collision_tau(
                name,
                motion,
                ct.other,
                (np.asarray(ct.q_from), np.asarray(ct.q_to)),
                pr.step,
                self.steps.get(ct.other, pr.step),
            )
            if tau is not None:
                return True
        return False

    def _cat_hits(self, name, motion, others: list[TimedPath], t: int) -> int:
        """Cheap conflict count against current paths: two samples per move."""
        mid = (motion[0] + motion[1]) / 2.0
        hits = 0
        for p in others:
            om = p.motion(t)
            omid = (om[0] + om[1]) / 2.0
            if self.checker.colliding(name, mid, p.robot, omid) or self.checker.colliding(
                name, motion[1], p.robot, om[1]
            ):
                hits += 1
        return hits

    def low_level(
        self,
        name: str,
        constraints: tuple,
        others: list[TimedPath],
        seed: TimedPath | None,
    ) -> TimedPath | None:
        """Focal search over (state, time); None when no path fits the horizon."""
        pr = self.problems[name]
        space = pr.ctx.space
        by_time: dict[int, list] = {}
        for ct in constraints:
            by_time.setdefault(ct.t, []).append(ct)
        max_ct = max(by_time, default=-1)
        base_len = self.baseline_len[name]
        horizon = max(2 * base_len + 8, max_ct + base_len + 8)

        w = self.w_low
        s0 = pr.start
        g = {(s0.id, 0): 0.0}
        parent: dict = {(s0.id, 0): None}
        seq = 0
        h0 = pr.hval(s0)
        open_heap = [(h0, 0.0, 0, s0.id, 0)]
        focal_heap = [(0, 0, h0, 0.0, 0, s0.id, 0)]
        pending: list = []
        nc = {(s0.id, 0): 0}
        dev = {(s0.id, 0): 0}
        focal_bound = w * h0
        expanded = set()
        popped = 0

        def node_live(sid, t, gv):
            return (sid, t) not in expanded and g.get((sid, t)) == gv

        while open_heap:
            while open_heap:
                f, ng, _, sid, t = open_heap[0]
                if node_live(sid, t, -ng):
                    break
                heapq.heappop(open_heap)
            if not open_heap:
                break
            f_min = open_heap[0][0]
            bound_now = w * f_min
            if bound_now > focal_bound + _EPS:
                focal_bound = bound_now
                while pending and pending[0][0] <= focal_bound + _EPS:
                    fp, moved = heapq.heappop(pending)
                    heapq.heappush(focal_heap, moved)
            entry = None
            while focal_heap:
                cand = heapq.heappop(focal_heap)
                _nc, _dv, f, ng, sq, sid, t = cand
                if not node_live(sid, t, -ng):
                    continue
                if f <= bound_now + _EPS:
                    entry = cand
                    break
                heapq.heappush(pending, (f, cand))
            if entry is None:
                # Focal drained ahead of OPEN; expand the OPEN minimum.
                f, ng, sq, sid, t = heapq.heappop(open_heap)
                entry = (0, 0, f, ng, sq, sid, t)
            _nc, _dv, f, ng, sq, sid, t = entry
            gv = -ng
            s = space.by_id(sid)
            expanded.add((sid, t))
            popped += 1
            if popped % 64 == 0:
                self._check_time()
            self.low_expansions += 1
            if pr.is_goal(s):
                parked_ok = True
                for ct_t, cts in by_time.items():
                    if ct_t >= t and self._motion_blocked(name, (s.config, s.config), cts):
                        parked_ok = False
                        break
                if parked_ok:
                    configs = []
                    key = (sid, t)
                    while key is not None:
                        configs.append(np.array(space.by_id(key[0]).config))
                        key = parent[key]
                    configs.reverse()
                    return TimedPath(robot=name, configs=configs, cost=gv, lb=f_min)
            if t + 1 > horizon:
                continue
            moves = [(s, self.wait_cost)] + list(pr.edges(s))
            cts = by_time.get(t, [])
            for nxt, cost in moves:
                motion = (s.config, nxt.config)
                if cts and self._motion_blocked(name, motion, cts):
                    continue
                key = (nxt.id, t + 1)
                nt = gv + cost
                old = g.get(key)
                if old is None or nt < old - 1e-15:
                    g[key] = nt
                    parent[key] = (sid, t)
                    seq += 1
                    hv = pr.hval(nxt)
                    fv = nt + hv
                    ncv = nc[(sid, t)] + (self._cat_hits(name, motion, others, t) if others else 0)
                    dvv = dev[(sid, t)]
                    if seed is not None and not np.array_equal(nxt.config, seed.at(t + 1)):
                        dvv += 1
                    nc[key] = ncv
                    dev[key] = dvv
                    open_entry = (fv, -nt, seq, nxt.id, t + 1)
                    heapq.heappush(open_heap, open_entry)
                    focal_entry = (ncv, dvv, fv, -nt, seq, nxt.id, t + 1)
                    if fv <= focal_bound + _EPS:
                        heapq.heappush(focal_heap, focal_entry)
                    else:
                        heapq.heappush(pending, (fv, focal_entry))
        return None

    # -- high level -------------------------------------------------------

    def solve(self, t0: float) -> MultirobotResult:
        paths: dict[str, TimedPath] = {}
        for name in self.names:
            # The untimed solo plan proves per-robot feasibility and sizes
            # the time horizon for the constrained searches.
            pr = self.problems[name]
            remaining = None
            if self.deadline is not None:
                remaining = max(0.0, self.deadline - time.perf_counter())
            solo = weighted_astar(
                self.scene,
                name,
                pr.ctx.spec,
                pr.start.config,
                pr.goal,
                heuristic=pr.h,
                w=self.w_low,
                time_limit=remaining,
                context=pr.ctx,
            )
            self.baseline_len[name] = len(solo.path) + 1
            p = self.low_level(name, (), list(paths.values()), None)
            if p is None:
                raise NoPathExists(f"robot {name} cannot reach its goal")
            paths[name] = p
        seq = 0
        conflicts = detect_conflicts(self.scene, list(paths.values()), self.steps, self.checker)
        root = _CTNode(
            constraints={name: () for name in self.names},
            paths=paths,
            soc=sum(p.cost for p in paths.values()),
            lb=sum(p.lb for p in paths.values()),
            conflicts=conflicts,
            seq=seq,
        )
        open_heap = [(root.lb, root.soc, 0)]
        focal_heap = [(len(root.conflicts), root.soc, 0)]
        pending: list = []
        nodes = {0: root}
        closed: set[int] = set()
        factor = self.w_low * self.w_high
        focal_bound = factor * root.lb
        high_expansions = 0

        while open_heap:
            self._check_time()
            while open_heap and open_heap[0][2] in closed:
                heapq.heappop(open_heap)
            if not open_heap:
                break
            lb_min = open_heap[0][0]
            bound_now = factor * lb_min
            if bound_now > focal_bound + _EPS:
                focal_bound = bound_now
                while pending and pending[0][0] <= focal_bound + _EPS:
                    _soc, entry = heapq.heappop(pending)
                    heapq.heappush(focal_heap, entry)
            node = None
            while focal_heap:
                ncf, soc, nid = heapq.heappop(focal_heap)
                if nid in closed:
                    continue
                if soc <= bound_now + _EPS:
                    node = nodes[nid]
                    break
                heapq.heappush(pending, (soc, (ncf, soc, nid)))
            if node is None:
                _lb, soc, nid = heapq.heappop(open_heap)
                if nid in closed:
                    continue
                node = nodes[nid]
            closed.add(node.seq)
            high_expansions += 1
            if not node.conflicts:
                return MultirobotResult(
                    paths=node.paths,
                    soc=node.soc,
                    lb=lb_min,
                    bound=factor,
                    high_level_expansions=high_expansions,
                    low_level_expansions=self.low_expansions,
                    time_s=time.perf_counter() - t0,
                )
            first = node.conflicts[0]
            for mine, other in (
                (first.robot_a, first.robot_b),
                (first.robot_b, first.robot_a),
            ):
                om = node.paths[other].motion(first.t)
                ct = Constraint(
                    t=first.t,
                    other=other,
                    q_from=tuple(float(v) for v in om[0]),
                    q_to=tuple(float(v) for v in om[1]),
                )
                constraints = dict(node.constraints)
                constraints[mine] = constraints[mine] + (ct,)
                others = [p for rname, p in node.paths.items() if rname != mine]
                seed = node.paths[mine] if self.reuse else None
                newp = self.low_level(mine, constraints[mine], others, seed)
                if newp is None:
                    continue
                paths = dict(node.paths)
                paths[mine] = newp
                seq += 1
                child = _CTNode(
                    constraints=constraints,
                    paths=paths,
                    soc=sum(p.cost for p in paths.values()),
                    lb=sum(p.lb for p in paths.values()),
                    conflicts=detect_conflicts(
                        self.scene, list(paths.values()), self.steps, self.checker
                    ),
                    seq=seq,
                )
                nodes[seq] = child
                heapq.heappush(open_heap, (child.lb, child.soc, seq))
                entry = (len(child.conflicts), child.soc, seq)
                if child.soc <= focal_bound + _EPS:
                    heapq.heappush(focal_heap, entry)
                else:
                    heapq.heappush(pending, (child.soc, entry))
        raise NoPathExists("conflict tree exhausted without a conflict-free plan")


def solve_multirobot(
    scene: Scene,
    requests: dict,
    spec,
    *,
    w_low: float = 1.5,
    w_high: float = 1.5,
    time_limit: float | None = None,
    reuse_experience: bool = True,
    wait_cost: float = WAIT_COST,
    contexts: dict | None = None,
) -> MultirobotResult:
    """Plan all requested robots jointly.

    ``requests`` maps robot name to (start configuration, GoalConstraint);
    ``spec`` is one LatticeSpec for all robots or a per-robot dict.  The
    sum of costs is within w_low * w_high of the optimal joint plan on the
    shared clock, certified by the returned ``lb``.
    """
    if w_low < 1.0 or w_high < 1.0:
        raise RobotValidationError("suboptimality factors must be >= 1")
    if not requests:
        raise RobotValidationError("at least one robot must be requested")
    t0 = time.perf_counter()
    deadline = None if time_limit is None else t0 + time_limit
    solver = _MultiSolver(
        scene,
        requests,
        spec,
        w_low,
        w_high,
        reuse_experience,
        deadline,
        time_limit,
        wait_cost,
        contexts,
    )
    return solver.solve(t0)
