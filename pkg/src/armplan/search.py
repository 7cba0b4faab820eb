"""Graph search over the configuration lattice.

All planners share one machinery: a :class:`LatticeContext` supplies
validated successors and edge costs, a heuristic maps states to cost-to-go
estimates, and the open list orders entries by (key, -g, state id) so ties
break toward deeper states and then deterministically by insertion order.

Planners return a :class:`PlanResult`; the reported cost is recomputed from
the returned waypoints so it always matches the trajectory exactly.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .collision import Scene, edge_valid, in_collision
from .errors import (
    InvalidWorkerCount,
    LatticeTooLarge,
    NoPathExists,
    PlanningTimeout,
    RobotValidationError,
    StartInvalid,
)
from .heuristics import Heuristic, default_heuristic
from .kinematics import ee_path_length
from .lattice import GoalConstraint, LatticeContext, LatticeSpec, LatticeState

#: dijkstra_oracle refuses lattices with more states than this.
DEFAULT_LATTICE_CAP = 1_000_000

#: Wall-clock deadline is polled once per this many expansions.
TIME_CHECK_INTERVAL = 256

_EPS = 1e-12


@dataclass
class PlanResult:
    """A plan plus bookkeeping.

    ``cost`` is the lattice path cost under the active cost model,
    ``ee_cost`` the end-effector path length in meters, and ``bound`` the
    suboptimality factor guaranteed for ``cost``.
    """

    path: list[np.ndarray]
    cost: float
    bound: float
    expansions: int
    generated: int
    time_s: float
    ee_cost: float = 0.0
    planner_id: str = ""

    def to_dict(self) -> dict:
        return {
            "path": [q.tolist() for q in self.path],
            "cost": self.cost,
            "bound": self.bound,
            "expansions": self.expansions,
            "generated": self.generated,
            "time_s": self.time_s,
            "ee_cost": self.ee_cost,
            "planner_id": self.planner_id,
        }


class _Problem:
    """Start validation, heuristic cache, and shared expansion helpers."""

    def __init__(self, scene, robot_name, spec, start, goal, heuristic, context):
        self.ctx = context if context is not None else LatticeContext(scene, robot_name, spec)
        self.goal = goal
        model = self.ctx.model
        q0 = model.check_dimension(start)
        if np.any(q0 < model.lower - 1e-9) or np.any(q0 > model.upper + 1e-9):
            raise StartInvalid(f"start {q0.tolist()} outside joint limits")
        s0 = self.ctx.start_state(q0)
        if not self.ctx.state_valid(s0):
            raise StartInvalid("start configuration is in collision")
        self.start = s0
        self.h: Heuristic = heuristic if heuristic is not None else default_heuristic(self.ctx, goal)
        self._hcache: dict[int, float] = {}

    def hval(self, state: LatticeState) -> float:
        v = self._hcache.get(state.id)
        if v is None:
            v = float(self.h(state))
            self._hcache[state.id] = v
        return v

    def edges(self, state: LatticeState):
        out = self.ctx.successors(state)
        snap = self.ctx.snap_successor(state, self.goal)
        if snap is not None:
            out = out + (snap,)
        return out

    def is_goal(self, state: LatticeState) -> bool:
        return self.ctx.goal_satisfied(self.goal, state)

    def reconstruct(self, parent: dict[int, int], sid: int) -> list[np.ndarray]:
        space = self.ctx.space
        ids = [sid]
        while parent[ids[-1]] >= 0:
            ids.append(parent[ids[-1]])
        ids.reverse()
        return [np.array(space.by_id(i).config) for i in ids]

    def path_cost(self, path: list[np.ndarray]) -> float:
        space = self.ctx.space
        total = 0.0
        for a, b in zip(path, path[1:]):
            total += self.ctx.edge_cost(space.snap_state(a), space.snap_state(b))
        return total

    def finish(
        self, path, bound, expansions, generated, t0, planner_id
    ) -> PlanResult:
        return PlanResult(
            path=path,
            cost=self.path_cost(path),
            bound=bound,
            expansions=expansions,
            generated=generated,
            time_s=time.perf_counter() - t0,
            ee_cost=ee_path_length(self.ctx.model, path, self.ctx.base_pose),
            planner_id=planner_id,
        )


def _check_weight(w: float) -> float:
    if w < 1.0:
        raise RobotValidationError(f"heuristic weight must be >= 1, got {w}")
    return float(w)


def _deadline(time_limit):
    if time_limit is None:
        return None
    if time_limit < 0:
        raise RobotValidationError("time limit must be >= 0")
    return time.perf_counter() + time_limit


# ---------------------------------------------------------------------------
# Weighted A*
# ---------------------------------------------------------------------------


def weighted_astar(
    scene: Scene,
    robot_name: str,
    spec: LatticeSpec,
    start,
    goal: GoalConstraint,
    *,
    heuristic: Heuristic | None = None,
    w: float = 1.0,
    time_limit: float | None = None,
    context: LatticeContext | None = None,
    planner_id: str = "wAstar",
) -> PlanResult:
    """Weighted A* with lazy duplicate detection and reopening.

    Reopening on a strictly better g keeps the w-suboptimality bound and
    costs nothing when the heuristic is consistent.
    """
    w = _check_weight(w)
    t0 = time.perf_counter()
    deadline = _deadline(time_limit)
    pr = _Problem(scene, robot_name, spec, start, goal, heuristic, context)
    s0 = pr.start
    if pr.is_goal(s0):
        return pr.finish([np.array(s0.config)], 1.0, 0, 1, t0, planner_id)

    by_id = pr.ctx.space.by_id
    g = {s0.id: 0.0}
    parent = {s0.id: -1}
    open_heap = [(w * pr.hval(s0), 0.0, s0.id)]
    expansions = 0
    generated = 1
    while open_heap:
        f, ng, sid = heapq.heappop(open_heap)
        gv = -ng
        if g.get(sid) != gv:
            continue
        s = by_id(sid)
        if pr.is_goal(s):
            return pr.finish(pr.reconstruct(parent, sid), w, expansions, generated, t0, planner_id)
        expansions += 1
        if deadline is not None and expansions % TIME_CHECK_INTERVAL == 0:
            if time.perf_counter() > deadline:
                raise PlanningTimeout(f"no plan within {time_limit} s")
        for t, c in pr.edges(s):
            nt = gv + c
            old = g.get(t.id)
            if old is None or nt < old - 1e-15:
                g[t.id] = nt
                parent[t.id] = sid
                heapq.heappush(open_heap, (nt + w * pr.hval(t), -nt, t.id))
                generated += 1
    raise NoPathExists("search space exhausted without reaching the goal")


# ---------------------------------------------------------------------------
# Dijkstra oracle
# ---------------------------------------------------------------------------


def dijkstra_oracle(
    scene: Scene,
    robot_name: str,
    spec: LatticeSpec,
    start,
    goal: GoalConstraint,
    *,
    context: LatticeContext | None = None,
    size_cap: int = DEFAULT_LATTICE_CAP,
    time_limit: float | None = None,
) -> float:
    """Exact optimal cost by uniform-cost search over the same graph.

    Intended as a ground-truth reference on small instances; refuses spaces
    larger than ``size_cap`` states.
    """
    ctx = context if context is not None else LatticeContext(scene, robot_name, spec)
    if ctx.space.size() > size_cap:
        raise LatticeTooLarge(
            f"{ctx.space.size()} lattice states exceed the oracle cap of {size_cap}"
        )
    res = weighted_astar(
        scene,
        robot_name,
        spec,
        start,
        goal,
        heuristic=lambda s: 0.0,
        w=1.0,
        time_limit=time_limit,
        context=ctx,
        planner_id="dijkstra",
    )
    return res.cost


# ---------------------------------------------------------------------------
# Anytime repairing A*
# ---------------------------------------------------------------------------


def ara_star(
    scene: Scene,
    robot_name: str,
    spec: LatticeSpec,
    start,
    goal: GoalConstraint,
    *,
    heuristic: Heuristic | None = None,
    w_start: float = 10.0,
    w_step: float = 1.0,
    w_final: float = 1.0,
    time_limit: float | None = None,
    context: LatticeContext | None = None,
    planner_id: str = "ARAstar",
) -> list[PlanResult]:
    """Anytime search: repeated weighted passes with decreasing weight.

    Returns the published solution sequence: bounds strictly decrease,
    costs never increase, and a final bound of 1.0 certifies optimality.
    States improved after closing go to an inconsistency list and are
    re-expanded in the next pass.  Raises Timeout only when the deadline
    passes before any solution is found.
    """
    w_start = _check_weight(w_start)
    w_final = _check_weight(w_final)
    if w_final > w_start:
        raise RobotValidationError("w_final must not exceed w_start")
    if w_step <= 0:
        raise RobotValidationError("w_step must be positive")
    t0 = time.perf_counter()
    deadline = _deadline(time_limit)
    pr = _Problem(scene, robot_name, spec, start, goal, heuristic, context)
    s0 = pr.start
    if pr.is_goal(s0):
        return [pr.finish([np.array(s0.config)], 1.0, 0, 1, t0, planner_id)]

    by_id = pr.ctx.space.by_id
    g = {s0.id: 0.0}
    parent = {s0.id: -1}
    w = w_start
    open_heap = [(w * pr.hval(s0), 0.0, s0.id)]
    closed: set[int] = set()
    incons: set[int] = set()
    incumbent_id = None
    incumbent_g = math.inf
    best_path = None
    best_cost = math.inf
    prev_bound = math.inf
    results: list[PlanResult] = []
    expansions = 0
    generated = 1

    def publish(bound: float) -> None:
        nonlocal best_path, best_cost, prev_bound
        path = pr.reconstruct(parent, incumbent_id)
        cost = pr.path_cost(path)
        # Keep the cheapest path seen so published costs never increase.
        if cost < best_cost:
            best_path, best_cost = path, cost
        if bound < prev_bound - 1e-9:
            prev_bound = bound
            results.append(
                pr.finish(best_path, bound, expansions, generated, t0, planner_id)
            )

    while True:
        timed_out = False
        while open_heap:
            f, ng, sid = open_heap[0]
            if g.get(sid) != -ng:
                heapq.heappop(open_heap)
                continue
            if incumbent_g <= f + _EPS:
                break
            heapq.heappop(open_heap)
            gv = -ng
            s = by_id(sid)
            if pr.is_goal(s):
                if gv < incumbent_g:
                    incumbent_g = gv
                    incumbent_id = sid
                continue
            closed.add(sid)
            expansions += 1
            if deadline is not None and expansions % TIME_CHECK_INTERVAL == 0:
                if time.perf_counter() > deadline:
                    timed_out = True
                    break
            for t, c in pr.edges(s):
                nt = gv + c
                old = g.get(t.id)
                if old is None or nt < old - 1e-15:
                    g[t.id] = nt
                    parent[t.id] = sid
                    if t.id in closed:
                        incons.add(t.id)
                    else:
                        heapq.heappush(open_heap, (nt + w * pr.hval(t), -nt, t.id))
                        generated += 1

        live = {sid for f, ng, sid in open_heap if g.get(sid) == -ng}
        live |= incons
        lb = min((g[i] + pr.hval(by_id(i)) for i in live), default=math.inf)
        if incumbent_id is None:
            if timed_out:
                raise PlanningTimeout(f"no plan within {time_limit} s")
            raise NoPathExists("search space exhausted without reaching the goal")
        if incumbent_g <= lb + _EPS or lb <= 0.0:
            bound = 1.0
        else:
            bound = max(1.0, min(w, incumbent_g / lb))
        publish(bound)
        if timed_out or bound <= 1.0 + _EPS or w <= w_final + _EPS:
            return results
        w = max(w_final, w - w_step)
        open_heap = [(g[i] + w * pr.hval(by_id(i)), -g[i], i) for i in live]
        heapq.heapify(open_heap)
        generated += len(incons)
        incons.clear()
        closed.clear()


# ---------------------------------------------------------------------------
# Shared multi-heuristic A*
# ---------------------------------------------------------------------------


def mha_star(
    scene: Scene,
    robot_name: str,
    spec: LatticeSpec,
    start,
    goal: GoalConstraint,
    *,
    anchor: Heuristic | None = None,
    inadmissible: tuple = (),
    w1: float = 1.0,
    w2: float = 1.0,
    time_limit: float | None = None,
    context: LatticeContext | None = None,
    planner_id: str = "MHAstar",
) -> PlanResult:
    """Multi-queue search sharing one g-table across heuristics.

    The anchor queue orders by g + w1 * h_anchor with an admissible anchor;
    each inadmissible heuristic gets its own queue, which is expanded in
    round-robin order whenever its minimum key stays within w2 of the
    anchor's.  A state expands at most once from the anchor and once from
    any inadmissible queue.  The solution cost is within w1 * w2 of
    optimal.  With no inadmissible heuristics only the anchor queue runs,
    i.e. weighted A* at w1 with deferred termination.
    """
    w1 = _check_weight(w1)
    w2 = _check_weight(w2)
    t0 = time.perf_counter()
    deadline = _deadline(time_limit)
    pr = _Problem(scene, robot_name, spec, start, goal, anchor, context)
    s0 = pr.start
    bound = w1 * w2
    if pr.is_goal(s0):
        return pr.finish([np.array(s0.config)], 1.0, 0, 1, t0, planner_id)

    by_id = pr.ctx.space.by_id
    inad = list(inadmissible)
    n = len(inad)
    hcaches: list[dict[int, float]] = [dict() for _ in range(n)]

    def hv(i: int, s: LatticeState) -> float:
        if i == 0:
            return pr.hval(s)
        c = hcaches[i - 1].get(s.id)
        if c is None:
            c = float(inad[i - 1](s))
            hcaches[i - 1][s.id] = c
        return c

    g = {s0.id: 0.0}
    parent = {s0.id: -1}
    heaps = [[] for _ in range(n + 1)]
    live: list[dict[int, float]] = [dict() for _ in range(n + 1)]
    for i in range(n + 1):
        heapq.heappush(heaps[i], (w1 * hv(i, s0), 0.0, s0.id))
        live[i][s0.id] = 0.0
    closed_anchor: set[int] = set()
    closed_inad: set[int] = set()
    incumbent_id = None
    incumbent_g = math.inf
    expansions = 0
    generated = 1
    cycle = itertools.cycle(range(1, n + 1)) if n else itertools.cycle([0])

    def clean(i: int) -> float:
        heap = heaps[i]
        while heap and live[i].get(heap[0][2]) != -heap[0][1]:
            heapq.heappop(heap)
        return heap[0][0] if heap else math.inf

    def drop(sid: int) -> None:
        for i in range(n + 1):
            live[i].pop(sid, None)

    while True:
        mk0 = clean(0)
        if mk0 is math.inf:
            break
        i = next(cycle)
        use = 0
        if i != 0 and clean(i) <= w2 * mk0 + _EPS:
            use = i
        term_key = clean(use)
        if incumbent_g <= term_key + _EPS:
            return pr.finish(
                pr.reconstruct(parent, incumbent_id), bound, expansions, generated, t0, planner_id
            )
        key, ng, sid = heapq.heappop(heaps[use])
        gv = -ng
        s = by_id(sid)
        drop(sid)
        if pr.is_goal(s):
            if gv < incumbent_g:
                incumbent_g = gv
                incumbent_id = sid
            continue
        if use == 0:
            closed_anchor.add(sid)
        else:
            closed_inad.add(sid)
        expansions += 1
        if deadline is not None and expansions % TIME_CHECK_INTERVAL == 0:
            if time.perf_counter() > deadline:
                raise PlanningTimeout(f"no plan within {time_limit} s")
        for t, c in pr.edges(s):
            nt = gv + c
            old = g.get(t.id)
            if old is None or nt < old - 1e-15:
                g[t.id] = nt
                parent[t.id] = sid
                generated += 1
                if t.id not in closed_anchor:
                    heapq.heappush(heaps[0], (nt + w1 * hv(0, t), -nt, t.id))
                    live[0][t.id] = nt
                if t.id not in closed_inad:
                    for j in range(1, n + 1):
                        heapq.heappush(heaps[j], (nt + w1 * hv(j, t), -nt, t.id))
                        live[j][t.id] = nt

    if incumbent_id is not None:
        return pr.finish(
            pr.reconstruct(parent, incumbent_id), bound, expansions, generated, t0, planner_id
        )
    raise NoPathExists("search space exhausted without reaching the goal")


# ---------------------------------------------------------------------------
# Parallel A* with slow expansions
# ---------------------------------------------------------------------------


def _pase_batch(open_heap, live, by_id, lb, num_workers: int, scan_cap: int = 64):
    """Best open states that provably cannot improve one another.

    Scans the open list in priority order and keeps a state only when its
    g-value is within the admissible pairwise distance of every state
    already picked, so all picks can expand with final g-values.  Skipped
    entries go back on the heap.
    """
    aside = []
    batch = []
    while open_heap and len(batch) < num_workers and len(aside) < scan_cap:
        entry = heapq.heappop(open_heap)
        key, ng, sid = entry
        gv = -ng
        if live.get(sid) != gv:
            continue
        s = by_id(sid)
        safe = True
        for _, og, other in batch:
            d = lb(other, s)
            if gv > og + d + _EPS or og > gv + d + _EPS:
                safe = False
                break
        if safe:
            del live[sid]
            batch.append((sid, gv, s))
        else:
            aside.append(entry)
    for entry in aside:
        heapq.heappush(open_heap, entry)
    return batch


def wpase(
    scene: Scene,
    robot_name: str,
    spec: LatticeSpec,
    start,
    goal: GoalConstraint,
    *,
    heuristic: Heuristic | None = None,
    w: float = 1.0,
    num_workers: int = 1,
    time_limit: float | None = None,
    context: LatticeContext | None = None,
    planner_id: str = "wPASE",
) -> PlanResult:
    """Parallel weighted A* expanding independent states in rounds.

    Each round selects up to ``num_workers`` open states whose g-values
    cannot improve one another, generates their successors concurrently,
    then applies the cost updates in a fixed order.  The result therefore
    never depends on thread scheduling, and with one worker the expansion
    order, path, and cost match :func:`weighted_astar` exactly.
    """
    if num_workers < 1:
        raise InvalidWorkerCount(f"num_workers must be >= 1, got {num_workers}")
    w = _check_weight(w)
    t0 = time.perf_counter()
    deadline = _deadline(time_limit)
    pr = _Problem(scene, robot_name, spec, start, goal, heuristic, context)
    s0 = pr.start
    if pr.is_goal(s0):
        return pr.finish([np.array(s0.config)], 1.0, 0, 1, t0, planner_id)

    by_id = pr.ctx.space.by_id
    lb = pr.ctx.pair_lower_bound
    g = {s0.id: 0.0}
    parent = {s0.id: -1}
    live = {s0.id: 0.0}
    open_heap = [(w * pr.hval(s0), 0.0, s0.id)]
    expansions = 0
    generated = 1

    def expand(s):
        # Collision checks and heuristic lookups; safe to run concurrently.
        return [(t, c, pr.hval(t)) for t, c in pr.edges(s)]

    pool = ThreadPoolExecutor(max_workers=num_workers) if num_workers > 1 else None
    try:
        while True:
            while open_heap and live.get(open_heap[0][2]) != -open_heap[0][1]:
                heapq.heappop(open_heap)
            if not open_heap:
                raise NoPathExists("search space exhausted without reaching the goal")
            if deadline is not None and time.perf_counter() > deadline:
                raise PlanningTimeout(f"no plan within {time_limit} s")
            batch = _pase_batch(open_heap, live, by_id, lb, num_workers)
            for sid, gv, s in batch:
                if pr.is_goal(s):
                    return pr.finish(
                        pr.reconstruct(parent, sid), w, expansions, generated, t0, planner_id
                    )
            if pool is not None and len(batch) > 1:
                edge_lists = list(pool.map(expand, [s for _, _, s in batch]))
            else:
                edge_lists = [expand(s) for _, _, s in batch]
            for (sid, gv, s), edges in zip(batch, edge_lists):
                base = g[sid]
                for t, c, ht in edges:
                    nt = base + c
                    old = g.get(t.id)
                    if old is None or nt < old - 1e-15:
                        g[t.id] = nt
                        parent[t.id] = sid
                        live[t.id] = nt
                        heapq.heappush(open_heap, (nt + w * ht, -nt, t.id))
                        generated += 1
                expansions += 1
    finally:
        if pool is not None:
            pool.shutdown(wait=False)


# ---------------------------------------------------------------------------
# Plan validation
# ---------------------------------------------------------------------------


def validate_path(
    scene: Scene,
    robot_name: str,
    spec: LatticeSpec,
    path,
    step: float | None = None,
) -> bool:
    """Re-validate a waypoint path against the scene.

    Checks limits at every waypoint and collisions along every segment at
    an interpolation step defaulting to a quarter of the finest lattice
    resolution.
    """
    model, _ = scene.robot(robot_name)
    if step is None:
        res = np.atleast_1d(np.asarray(spec.resolution, dtype=float))
        step = float(np.min(res)) / 4.0
    if len(path) == 0:
        return False
    for q in path:
        arr = model.check_dimension(q)
        if np.any(arr < model.lower - 1e-9) or np.any(arr > model.upper + 1e-9):
            return False
    if len(path) == 1:
        return not in_collision(scene, robot_name, path[0])
    for a, b in zip(path, path[1:]):
        if not edge_valid(scene, robot_name, a, b, step):
            return False
    return True
