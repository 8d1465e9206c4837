"""Built-in engine: exact at desk scale, anytime at production scale.

The search branches on the assignment booleans (who teaches which task),
propagating staffing counts, per-TA hour intervals, course/new-course
caps, and a global hour-conservation check after every decision. When a
skeleton is fully decided, the leftover hours form a transportation
subproblem solved by the hours module; its value plus the skeleton's
fixed soft penalties scores the leaf. An admissible per-clause bound
(committed penalties plus each clause's best reachable value) prunes
the tree, a greedy warm start provides an immediate incumbent, and
progress is logged in machine-parseable `t= inc= lb= nodes=` lines.

thread_budget is validated and recorded but the engine always runs a
single worker (within the allowed budget); determinism at budget 1 is
the contract the acceptance suite checks. The seed is recorded for
provenance only: the search is fully deterministic, so equal configs
replay identically.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .assignment import Assignment
from .errors import TapError
from .hours import Distribution, JobSide, TaSide, distribute, workload_penalty
from .model import ModelIR, Shape

BIG = 1 << 60


@dataclass(frozen=True)
class SolveConfig:
    time_limit: float = 60.0
    seed: int = 0
    thread_budget: int = 1
    optimality_required: bool = False
    log_interval: float = 5.0
    tie_break: str = "none"  # "none" | "squared_deviation"
    node_limit: int | None = None

    def __post_init__(self):
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.thread_budget < 1:
            raise ValueError("thread_budget must be >= 1")
        if self.tie_break not in ("none", "squared_deviation"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")


@dataclass(frozen=True)
class SolveStats:
    nodes: int
    propagations: int
    wall_time: float


@dataclass(frozen=True)
class SolveOutcome:
    status: str  # optimal | feasible_timeout | infeasible | unknown
    best: Assignment | None
    objective: int | None
    lower_bound: int | None
    stats: SolveStats
    log: tuple[str, ...]
    conflict: str | None = None


class _Conflict(TapError):
    def __init__(self, tag: str):
        self.tag = tag
        super().__init__(tag)


class _Stop(Exception):
    pass


@dataclass(frozen=True)
class _Job:
    idx: int
    c: int
    t: int
    tau: int
    rho: int
    m: int
    admin: bool
    kmin: int
    kmax: int


class _Problem:
    """Static search view compiled from the model shape."""

    def __init__(self, shape: Shape):
        self.shape = shape
        bounds, weights = shape.bounds, shape.weights
        self.mode = weights.penalty_mode
        self.S = shape.n_tas
        self.eps = bounds.min_task_hours
        self.lam_s = bounds.soft_dev
        self.mu_h = bounds.hard_courses_per_ta
        self.nu_h = bounds.hard_tas_per_course
        self.sig_h = bounds.hard_new_courses
        self.mu_s = bounds.soft_courses_per_ta
        self.nu_s = bounds.soft_extra_tas_per_task
        self.sig_s = bounds.soft_new_courses
        self.weights = weights
        self.theta = shape.theta
        self.year5 = [y >= 5 for y in shape.year]
        self.hlo = [max(0, th - bounds.hard_dev) for th in shape.theta]
        self.hhi = [th + bounds.hard_dev for th in shape.theta]

        admin_t = shape.task_kinds.index("admin")
        self.jobs: list[_Job] = []
        self.job_by_ct: dict[tuple[int, int], int] = {}
        self.total_tau = 0
        for c in range(shape.n_courses):
            for t in range(shape.n_kinds):
                tau = shape.tau[c][t]
                if tau <= 0:
                    continue
                m = max(1, min(tau, self.eps))
                admin = t == admin_t
                kmin = max(shape.rho[c][t], 1)
                kmax = min(tau // m, 1 if admin else BIG)
                self.job_by_ct[(c, t)] = len(self.jobs)
                self.jobs.append(
                    _Job(len(self.jobs), c, t, tau, shape.rho[c][t], m, admin, kmin, kmax)
                )
                self.total_tau += tau

        self.pairs: list[tuple[int, int]] = []  # pid -> (s, job idx)
        self.pair_of: dict[tuple[int, int], int] = {}
        self.job_pairs: list[list[int]] = [[] for _ in self.jobs]
        self.course_pairs: dict[int, list[int]] = {}
        self.ta_courses: list[dict[int, list[int]]] = [dict() for _ in range(self.S)]
        for job in self.jobs:
            for s in range(self.S):
                if (s, job.c) in shape.xi:
                    continue
                pid = len(self.pairs)
                self.pairs.append((s, job.idx))
                self.pair_of[(s, job.idx)] = pid
                self.job_pairs[job.idx].append(pid)
                self.course_pairs.setdefault(job.c, []).append(pid)
                self.ta_courses[s].setdefault(job.c, []).append(pid)

        self.pinned: dict[int, int] = {}  # pid -> fixed hours
        for (s, c, t), v in sorted(shape.pins_hours.items()):
            j = self.job_by_ct.get((c, t))
            if j is None or (s, j) not in self.pair_of:
                if v > 0:
                    raise _Conflict(f"pin[{s},{c},{t}]")
                continue
            self.pinned[self.pair_of[(s, j)]] = v

        # branching order within a job: continuity, then preference, then index
        self.job_order: list[list[int]] = []
        for job in self.jobs:
            def _key(pid, _c=job.c):
                s = self.pairs[pid][0]
                return (
                    0 if (s, _c) in shape.kappa else 1,
                    -shape.pref.get((s, _c), 0),
                    s,
                )
            self.job_order.append(sorted(self.job_pairs[job.idx], key=_key))

        self.cap0 = []
        self.cmin = []
        for pid, (s, j) in enumerate(self.pairs):
            job = self.jobs[j]
            if pid in self.pinned:
                self.cap0.append(self.pinned[pid])
                self.cmin.append(self.pinned[pid])
            elif job.kmax == 1:
                # a single-member task hands its whole block to that member
                self.cap0.append(job.tau)
                self.cmin.append(job.tau)
            else:
                self.cap0.append(job.tau - (job.kmin - 1) * job.m)
                self.cmin.append(job.m)

        self.pref_pos = sorted(k for k, v in shape.pref.items() if v == 1)
        self.pref_neg = sorted(k for k, v in shape.pref.items() if v == -1)


class _State:
    def __init__(self, prob: _Problem):
        self.p = prob
        S = prob.S
        self.pstate = [0] * len(prob.pairs)
        self.jA = [0] * len(prob.jobs)
        self.jU = [len(prob.job_pairs[j]) for j in range(len(prob.jobs))]
        self.minh = [0] * S
        self.maxh = [0] * S
        self.wcnt: dict[tuple[int, int], int] = {}
        self.W = [0] * S
        self.V: dict[int, int] = {}
        self.Z = [0] * S
        self.pot: dict[tuple[int, int], int] = {}
        for pid, (s, j) in enumerate(prob.pairs):
            self.maxh[s] += prob.cap0[pid]
            key = (s, prob.jobs[j].c)
            self.pot[key] = self.pot.get(key, 0) + 1
        self.gmin = sum(max(self.minh[s], prob.hlo[s]) for s in range(S))
        self.gmax = sum(min(self.maxh[s], prob.hhi[s]) for s in range(S))
        self.trail: list[tuple] = []
        self.propagations = 0

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            kind, a, b = trail.pop()
            if kind == 0:
                self.pstate[a] = b
            elif kind == 1:
                self.jA[a] = b
            elif kind == 2:
                self.jU[a] = b
            elif kind == 3:
                self.minh[a] = b
            elif kind == 4:
                self.maxh[a] = b
            elif kind == 5:
                self.wcnt[a] = b
            elif kind == 6:
                self.W[a] = b
            elif kind == 7:
                self.V[a] = b
            elif kind == 8:
                self.Z[a] = b
            elif kind == 9:
                self.pot[a] = b
            elif kind == 10:
                self.gmin = b
            else:
                self.gmax = b

    def decide(self, pid: int, value: int) -> None:
        """Apply one decision and propagate to fixpoint; raises _Conflict."""
        p = self.p
        trail = self.trail
        queue = [(pid, value)]
        while queue:
            pid, value = queue.pop()
            state = self.pstate[pid]
            if state == value:
                continue
            s, j = p.pairs[pid]
            job = p.jobs[j]
            c = job.c
            if state != 0:
                raise _Conflict(f"Eq13[{c}]" if job.admin else f"Eq8[{c},{job.t}]")
            self.propagations += 1
            trail.append((0, pid, 0))
            self.pstate[pid] = value
            trail.append((2, j, self.jU[j]))
            self.jU[j] -= 1

            if value == 1:
                trail.append((1, j, self.jA[j]))
                self.jA[j] += 1
                if self.jA[j] > job.kmax:
                    raise _Conflict(f"Eq13[{c}]" if job.admin else f"Eq8[{c},{job.t}]")
                old = self.minh[s]
                new = old + p.cmin[pid]
                trail.append((3, s, old))
                self.minh[s] = new
                if new > p.hhi[s]:
                    raise _Conflict(f"Eq9[{s}]")
                d = max(new, p.hlo[s]) - max(old, p.hlo[s])
                if d:
                    trail.append((10, None, self.gmin))
                    self.gmin += d
                    if self.gmin > p.total_tau:
                        raise _Conflict(f"Eq6[{c},{job.t}]")
                key = (s, c)
                oldw = self.wcnt.get(key, 0)
                trail.append((5, key, oldw))
                self.wcnt[key] = oldw + 1
                if oldw == 0:
                    trail.append((6, s, self.W[s]))
                    self.W[s] += 1
                    if self.W[s] > p.mu_h:
                        raise _Conflict(f"Eq10[{s}]")
                    oldv = self.V.get(c, 0)
                    trail.append((7, c, oldv))
                    self.V[c] = oldv + 1
                    if self.V[c] > p.nu_h:
                        raise _Conflict(f"Eq11[{c}]")
                    fresh = (s, c) not in p.shape.kappa
                    if fresh:
                        trail.append((8, s, self.Z[s]))
                        self.Z[s] += 1
                        if self.Z[s] > p.sig_h:
                            raise _Conflict(f"Eq12[{s}]")
                    if self.W[s] == p.mu_h:
                        for c2, pids in p.ta_courses[s].items():
                            if self.wcnt.get((s, c2), 0) == 0:
                                queue.extend((q, -1) for q in pids if self.pstate[q] == 0)
                    if self.V[c] == p.nu_h:
                        for q in p.course_pairs.get(c, ()):
                            s2 = p.pairs[q][0]
                            if self.pstate[q] == 0 and self.wcnt.get((s2, c), 0) == 0:
                                queue.append((q, -1))
                    if fresh and self.Z[s] == p.sig_h:
                        for c2, pids in p.ta_courses[s].items():
                            if self.wcnt.get((s, c2), 0) == 0 and (s, c2) not in p.shape.kappa:
                                queue.extend((q, -1) for q in pids if self.pstate[q] == 0)
                if self.jA[j] == job.kmax:
                    queue.extend((q, -1) for q in p.job_pairs[j] if self.pstate[q] == 0)
            else:
                old = self.maxh[s]
                new = old - p.cap0[pid]
                trail.append((4, s, old))
                self.maxh[s] = new
                if new < p.hlo[s]:
                    raise _Conflict(f"Eq9[{s}]")
                d = min(new, p.hhi[s]) - min(old, p.hhi[s])
                if d:
                    trail.append((11, None, self.gmax))
                    self.gmax += d
                    if self.gmax < p.total_tau:
                        raise _Conflict(f"Eq6[{c},{job.t}]")
                key = (s, c)
                oldpot = self.pot[key]
                trail.append((9, key, oldpot))
                self.pot[key] = oldpot - 1
                if self.pot[key] == 0 and key in p.shape.pins_course:
                    raise _Conflict(f"pin[{s},{c}]")
                avail = self.jA[j] + self.jU[j]
                if avail < job.kmin:
                    raise _Conflict(
                        f"Eq6[{c},{job.t}]" if avail == 0 else f"Eq8[{c},{job.t}]"
                    )
                if avail == job.kmin and self.jA[j] < job.kmin:
                    queue.extend((q, 1) for q in p.job_pairs[j] if self.pstate[q] == 0)

    def bound(self) -> int:
        """Admissible lower bound: committed penalties plus per-clause minima."""
        p = self.p
        w = p.weights
        ind = p.mode == "indicator"
        lb = 0
        for s in range(p.S):
            wlo = max(self.minh[s], p.hlo[s])
            whi = min(self.maxh[s], p.hhi[s])
            theta = p.theta[s]
            dist = max(0, wlo - theta, theta - whi)
            if p.year5[s] and w.w_target5 and dist > 0:
                lb += w.w_target5 * (1 if ind else dist)
            if w.w_soft_dev and dist > p.lam_s:
                lb += w.w_soft_dev * (1 if ind else dist - p.lam_s)
            if w.w_soft_new:
                over = self.Z[s] - p.sig_s
                if over > 0:
                    lb += w.w_soft_new * (1 if ind else over)
            if w.w_soft_courses:
                over = self.W[s] - p.mu_s
                if over > 0:
                    lb += w.w_soft_courses * (1 if ind else over)
        if w.w_soft_staff:
            for j, job in enumerate(p.jobs):
                over = max(self.jA[j], job.kmin) - (job.rho + p.nu_s)
                if over > 0:
                    lb += w.w_soft_staff * (1 if ind else over)
        if w.w_pref_positive:
            for key in p.pref_pos:
                if self.pot.get(key, 0) == 0:
                    lb += w.w_pref_positive
        if w.w_pref_negative:
            for key in p.pref_neg:
                if self.wcnt.get(key, 0) > 0:
                    lb += w.w_pref_negative
        return lb

    def skeleton_penalty(self) -> int:
        """Soft penalty fully fixed by a completed skeleton (hours excluded)."""
        p = self.p
        w = p.weights
        ind = p.mode == "indicator"
        pen = 0
        for s in range(p.S):
            over = self.Z[s] - p.sig_s
            if over > 0:
                pen += w.w_soft_new * (1 if ind else over)
            over = self.W[s] - p.mu_s
            if over > 0:
                pen += w.w_soft_courses * (1 if ind else over)
        for j, job in enumerate(p.jobs):
            over = self.jA[j] - (job.rho + p.nu_s)
            if over > 0:
                pen += w.w_soft_staff * (1 if ind else over)
        for key in p.pref_pos:
            if self.wcnt.get(key, 0) == 0:
                pen += w.w_pref_positive
        for key in p.pref_neg:
            if self.wcnt.get(key, 0) > 0:
                pen += w.w_pref_negative
        return pen

    def leaf_inputs(self):
        """Transportation view of the decided skeleton, or None when a pin
        overload already rules it out."""
        p = self.p
        tas = [
            TaSide(base=self.minh[s], lo=p.hlo[s], hi=p.hhi[s], theta=p.theta[s], year5=p.year5[s])
            for s in range(p.S)
        ]
        jobs = []
        flow_pairs: list[list[tuple[int, int]]] = []
        for j, job in enumerate(p.jobs):
            extra = job.tau
            members = []
            for pid in p.job_pairs[j]:
                if self.pstate[pid] != 1:
                    continue
                if pid in p.pinned:
                    extra -= p.pinned[pid]
                else:
                    extra -= job.m
                    members.append((p.pairs[pid][0], pid))
            if extra < 0:
                return None
            jobs.append(JobSide(extra=extra, pairs=tuple(s for s, _ in members)))
            flow_pairs.append(members)
        return tas, jobs, flow_pairs

    def leaf_distribution(self, tie_break: bool) -> Distribution | None:
        """Exact hour split for the decided skeleton; None if none exists.
        On success, Distribution.extras maps pair id -> total hours."""
        p = self.p
        inputs = self.leaf_inputs()
        if inputs is None:
            return None
        tas, jobs, flow_pairs = inputs
        dist = distribute(
            tas, jobs, p.lam_s, p.weights.w_target5, p.weights.w_soft_dev,
            p.mode, tie_break=tie_break,
        )
        if not dist.feasible:
            return None
        extras = dist.extras or {}
        by_pair: dict[int, int] = {}
        for j, members in enumerate(flow_pairs):
            for s, pid in members:
                by_pair[pid] = p.cmin[pid] + extras.get((s, j), 0)
        for pid, v in p.pinned.items():
            if self.pstate[pid] == 1 and v > 0:
                by_pair[pid] = v
        dist.extras = by_pair
        return dist


def _assignment_from_hours(shape: Shape, prob: _Problem, pair_hours: dict[int, int]) -> Assignment:
    x: dict[tuple[int, int, int], int] = {}
    h = [0] * shape.n_tas
    n: dict[tuple[int, int], int] = {}
    for pid in sorted(pair_hours):
        hours = pair_hours[pid]
        if hours <= 0:
            continue
        s, j = prob.pairs[pid]
        job = prob.jobs[j]
        x[(s, job.c, job.t)] = hours
        h[s] += hours
        n[(job.c, job.t)] = n.get((job.c, job.t), 0) + 1
    w = frozenset((s, c) for (s, c, _t) in x)
    z = [0] * shape.n_tas
    for (s, c) in w:
        if (s, c) not in shape.kappa:
            z[s] += 1
    return Assignment(
        ta_ids=shape.ta_ids,
        course_ids=shape.course_ids,
        x=x,
        w=w,
        y=frozenset(x),
        h=tuple(h),
        n=n,
        z=tuple(z),
    )


def evaluate_assignment(shape: Shape, assignment: Assignment) -> int:
    """Solver-side soft objective of a complete assignment."""
    w = shape.weights
    bounds = shape.bounds
    ind = w.penalty_mode == "indicator"
    pen = 0
    courses_of = [0] * shape.n_tas
    for (s, _c) in assignment.w:
        courses_of[s] += 1
    for s in range(shape.n_tas):
        ta = TaSide(0, 0, 0, shape.theta[s], shape.year[s] >= 5)
        pen += workload_penalty(
            assignment.h[s], ta, bounds.soft_dev, w.w_target5, w.w_soft_dev, w.penalty_mode
        )
        over = courses_of[s] - bounds.soft_courses_per_ta
        if over > 0:
            pen += w.w_soft_courses * (1 if ind else over)
        over = assignment.z[s] - bounds.soft_new_courses
        if over > 0:
            pen += w.w_soft_new * (1 if ind else over)
    for (c, t), count in assignment.n.items():
        over = count - (shape.rho[c][t] + bounds.soft_extra_tas_per_task)
        if over > 0:
            pen += w.w_soft_staff * (1 if ind else over)
    for (s, c), p in shape.pref.items():
        if p == 1 and (s, c) not in assignment.w:
            pen += w.w_pref_positive
        elif p == -1 and (s, c) in assignment.w:
            pen += w.w_pref_negative
    return pen


def _setup(ir: ModelIR) -> tuple[_Problem, _State]:
    prob = _Problem(ir.shape)
    state = _State(prob)
    for j, job in enumerate(prob.jobs):
        if job.kmin > job.kmax:
            raise _Conflict(f"Eq13[{job.c}]" if job.admin else f"Eq8[{job.c},{job.t}]")
        if len(prob.job_pairs[j]) < job.kmin:
            raise _Conflict(f"Eq6[{job.c},{job.t}]")
    for s in range(prob.S):
        if prob.hhi[s] < 0:
            raise _Conflict(f"Eq9[{s}]")
    for (s, c) in sorted(prob.shape.pins_course):
        if not prob.ta_courses[s].get(c):
            raise _Conflict(f"pin[{s},{c}]")
    for pid, v in sorted(prob.pinned.items()):
        state.decide(pid, 1 if v > 0 else -1)
    for s in range(prob.S):
        if state.maxh[s] < prob.hlo[s]:
            raise _Conflict(f"Eq9[{s}]")
    if state.gmax < prob.total_tau or state.gmin > prob.total_tau:
        raise _Conflict("Eq6[global]")
    return prob, state


def _greedy_fill(prob: _Problem, state: _State, forced: tuple[int, ...]) -> bool:
    """Build a hard-feasible skeleton in place; False on a dead end.

    Phases: forced memberships, minimum staffing per task (continuity
    first, then the largest-deficit TA), reachability growth for hard
    lower hour windows, flow-guided membership repair until the hour
    transport is feasible, then closure of the remaining open pairs.
    """
    from .hours import absorption_gaps, feasible_transport, window_shortfalls

    for pid in forced:
        try:
            state.decide(pid, 1)
        except _Conflict:
            return False
    order = sorted(range(len(prob.jobs)), key=lambda j: (-prob.jobs[j].m, -prob.jobs[j].tau, j))
    for j in order:
        job = prob.jobs[j]
        while state.jA[j] < job.kmin:
            cands = [pid for pid in prob.job_order[j] if state.pstate[pid] == 0]
            cands.sort(
                key=lambda pid: (
                    0 if (prob.pairs[pid][0], job.c) in prob.shape.kappa else 1,
                    state.minh[prob.pairs[pid][0]] - prob.theta[prob.pairs[pid][0]],
                    prob.pairs[pid][0],
                )
            )
            placed = False
            for pid in cands:
                mk = state.mark()
                try:
                    state.decide(pid, 1)
                    placed = True
                    break
                except _Conflict:
                    state.undo(mk)
                    try:
                        state.decide(pid, -1)
                    except _Conflict:
                        return False
            if not placed:
                return False

    if not _grow_reach(prob, state):
        return False

    # flow-guided membership repair while pairs are still open: starved
    # tasks recruit the TA with the most upper-window room, short-changed
    # TAs get the task with the biggest leftover pool
    def windows_now():
        return [
            (max(0, prob.hlo[s] - state.minh[s]), prob.hhi[s] - state.minh[s])
            for s in range(prob.S)
        ]

    def room(s):
        return prob.hhi[s] - state.minh[s]

    for _round in range(4 * prob.S + 16):
        inputs = state.leaf_inputs()
        if inputs is None:
            return False
        _tas, jobs, _fp = inputs
        windows = windows_now()
        gaps = absorption_gaps(jobs, windows)
        shorts = {} if gaps else window_shortfalls(jobs, windows)
        if not gaps and not shorts:
            if feasible_transport(jobs, windows) is not None:
                break
            # both one-sided relaxations pass: grow the largest pool
            gaps = {max(range(len(jobs)), key=lambda j: (jobs[j].extra, -j)): 1}
        progressed = False
        for j in sorted(gaps, key=lambda j: (-gaps[j], j)):
            cands = [pid for pid in prob.job_pairs[j] if state.pstate[pid] == 0]
            cands.sort(key=lambda pid: (-room(prob.pairs[pid][0]), prob.pairs[pid][0]))
            for pid in cands:
                mk = state.mark()
                try:
                    state.decide(pid, 1)
                    progressed = True
                    break
                except _Conflict:
                    state.undo(mk)
        for s in sorted(shorts, key=lambda s: (-shorts[s], s)):
            cands = [
                pid
                for pids in prob.ta_courses[s].values()
                for pid in pids
                if state.pstate[pid] == 0
            ]
            cands.sort(key=lambda pid: (-jobs[prob.pairs[pid][1]].extra, pid))
            for pid in cands:
                mk = state.mark()
                try:
                    state.decide(pid, 1)
                    progressed = True
                    break
                except _Conflict:
                    state.undo(mk)
        if not progressed:
            return False
    else:
        return False

    # closure: drop every remaining open pair (assigning only when the
    # exclusion itself is contradictory)
    for pid in range(len(prob.pairs)):
        if state.pstate[pid] != 0:
            continue
        mk = state.mark()
        try:
            state.decide(pid, -1)
        except _Conflict:
            state.undo(mk)
            try:
                state.decide(pid, 1)
            except _Conflict:
                return False
    return True


def _grow_reach(prob: _Problem, state: _State) -> bool:
    """Assign extra tasks until every TA can plausibly reach their hard
    lower hour bound (committed minimums plus their jobs' leftover pools)."""
    assigned_of: list[list[int]] = [[] for _ in range(prob.S)]
    for pid, (s, j) in enumerate(prob.pairs):
        if state.pstate[pid] == 1:
            assigned_of[s].append(pid)

    for _round in range(4 * prob.S + 8):
        pool = [job.tau for job in prob.jobs]
        for pid, (s, j) in enumerate(prob.pairs):
            if state.pstate[pid] == 1:
                pool[j] -= prob.cmin[pid]
        reach = []
        for s in range(prob.S):
            r = state.minh[s]
            for pid in assigned_of[s]:
                if pid not in prob.pinned and state.pstate[pid] == 1:
                    r += pool[prob.pairs[pid][1]]
            reach.append(r)
        lacking = [s for s in range(prob.S) if reach[s] < prob.hlo[s]]
        if not lacking:
            return True
        lacking.sort(key=lambda s: (reach[s] - prob.hlo[s], s))
        s = lacking[0]
        placed = False
        cand_jobs = sorted(
            (j for j in range(len(prob.jobs)) if state.jA[j] < prob.jobs[j].kmax),
            key=lambda j: (-pool[j], j),
        )
        for j in cand_jobs:
            pid = prob.pair_of.get((s, j))
            if pid is None or state.pstate[pid] != 0:
                continue
            mk = state.mark()
            try:
                state.decide(pid, 1)
                assigned_of[s].append(pid)
                placed = True
                break
            except _Conflict:
                state.undo(mk)
        if not placed:
            return False
    return False


def warm_start(ir: ModelIR, cfg: SolveConfig | None = None) -> Assignment | None:
    """Greedy hard-feasible seed: staff each task at its minimum count,
    preferring continuity and then the largest-deficit TA, grow
    memberships under flow guidance until the hour transport closes,
    and distribute. Never claimed optimal; None when the greedy
    dead-ends (the instance may still be feasible for the full search)."""
    tie = bool(cfg and cfg.tie_break == "squared_deviation")
    try:
        prob, state = _setup(ir)
    except _Conflict:
        return None
    if not _greedy_fill(prob, state, ()):
        return None
    dist = state.leaf_distribution(tie)
    if dist is None:
        return None
    return _assignment_from_hours(ir.shape, prob, dist.extras)


class _Logger:
    def __init__(self, cfg: SolveConfig, on_log=None):
        self.records: list[str] = []
        self.cfg = cfg
        self.on_log = on_log
        self.t0 = time.monotonic()
        self.next_at = 0.0

    def elapsed(self) -> float:
        return time.monotonic() - self.t0

    def emit(self, inc, lb, nodes, force=False):
        t = self.elapsed()
        if not force and t < self.next_at:
            return
        self.next_at = t + self.cfg.log_interval
        line = f"t={t:.1f} inc={inc if inc is not None else '-'} lb={lb} nodes={nodes}"
        self.records.append(line)
        if self.on_log:
            self.on_log(line)


def solve(ir: ModelIR, cfg: SolveConfig, stop=None, on_log=None) -> SolveOutcome:
    """Branch-and-bound over the assignment booleans.

    Completes with a proven optimum (or proven infeasibility) when the
    tree closes inside the limits; otherwise returns the best incumbent
    found with the admissible root bound. The returned assignment always
    satisfies every hard constraint with the reported objective exactly.
    """
    log = _Logger(cfg, on_log)
    tie = cfg.tie_break == "squared_deviation"

    try:
        prob, state = _setup(ir)
    except _Conflict as conflict:
        log.emit(None, 0, 0, force=True)
        return SolveOutcome(
            status="infeasible",
            best=None,
            objective=None,
            lower_bound=None,
            stats=SolveStats(0, 0, log.elapsed()),
            log=tuple(log.records),
            conflict=conflict.tag,
        )

    root_lb = state.bound()
    best_obj: int | None = None
    best_key: tuple[int, int] | None = None
    best_hours: dict[int, int] | None = None
    exact_closed = True
    nodes = 0

    warm = warm_start(ir, cfg)
    if warm is not None:
        warm_obj = evaluate_assignment(ir.shape, warm)
        sq = sum((warm.h[s] - prob.theta[s]) ** 2 for s in range(prob.S))
        best_obj, best_key = warm_obj, (warm_obj, sq)
        best_hours = {
            prob.pair_of[(s, prob.job_by_ct[(c, t)])]: v
            for (s, c, t), v in warm.x.items()
        }
        log.emit(best_obj, root_lb, 0, force=True)

    deadline = log.t0 + cfg.time_limit
    interrupted = False

    def check_limits():
        if stop is not None and stop():
            raise _Stop
        if time.monotonic() > deadline:
            raise _Stop
        if cfg.node_limit is not None and nodes >= cfg.node_limit:
            raise _Stop

    def prunable(lb: int) -> bool:
        if best_obj is None:
            return False
        return lb > best_obj if tie else lb >= best_obj

    def pick_pair() -> int | None:
        best_j, best_score = None, None
        for j, job in enumerate(prob.jobs):
            if state.jU[j] == 0:
                continue
            need = job.kmin - state.jA[j]
            score = (0 if need > 0 else 1, state.jA[j] + state.jU[j] - job.kmin, j)
            if best_score is None or score < best_score:
                best_j, best_score = j, score
        if best_j is None:
            return None
        for pid in prob.job_order[best_j]:
            if state.pstate[pid] == 0:
                return pid
        return None

    def leaf():
        nonlocal best_obj, best_key, best_hours, exact_closed
        dist = state.leaf_distribution(tie)
        if dist is None:
            return
        fixed = state.skeleton_penalty()
        obj = fixed + dist.penalty
        if not dist.exact and fixed + dist.bound < (best_obj if best_obj is not None else BIG):
            exact_closed = False
        key = (obj, dist.sqdev)
        if best_obj is None or (key < best_key if tie else obj < best_obj):
            best_obj, best_key = obj, key
            best_hours = dict(dist.extras)
            log.emit(best_obj, root_lb, nodes, force=True)

    try:
        if not prunable(state.bound()):
            first = pick_pair()
            if first is None:
                leaf()
                stack = []
            else:
                stack = [(state.mark(), first, (1, -1), 0)]
        else:
            stack = []
        while stack:
            mk, pid, alts, idx = stack[-1]
            state.undo(mk)
            if idx >= len(alts):
                stack.pop()
                continue
            stack[-1] = (mk, pid, alts, idx + 1)
            nodes += 1
            if nodes % 64 == 0:
                check_limits()
                log.emit(best_obj, root_lb, nodes)
            try:
                state.decide(pid, alts[idx])
            except _Conflict:
                continue
            if prunable(state.bound()):
                continue
            nxt = pick_pair()
            if nxt is None:
                leaf()
                continue
            j = prob.pairs[nxt][1]
            order = (1, -1) if state.jA[j] < prob.jobs[j].kmin else (-1, 1)
            stack.append((state.mark(), nxt, order, 0))
    except _Stop:
        interrupted = True

    stats = SolveStats(nodes, state.propagations, log.elapsed())
    assignment = (
        _assignment_from_hours(ir.shape, prob, best_hours) if best_hours is not None else None
    )

    if not interrupted:
        if assignment is None:
            status, objective, lower = "infeasible", None, None
        elif exact_closed:
            status, objective, lower = "optimal", best_obj, best_obj
        else:
            status, objective, lower = "feasible_timeout", best_obj, root_lb
    elif assignment is None:
        status, objective, lower = "unknown", None, root_lb
    else:
        status, objective, lower = "feasible_timeout", best_obj, root_lb

    log.emit(best_obj, lower if lower is not None else root_lb, nodes, force=True)
    return SolveOutcome(
        status=status,
        best=assignment,
        objective=objective,
        lower_bound=lower,
        stats=stats,
        log=tuple(log.records),
    )
