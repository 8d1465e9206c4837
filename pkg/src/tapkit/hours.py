"""Exact hour distribution for a fixed assignment skeleton.

Once it is decided who teaches which task, the remaining freedom is how
to split each task's hours beyond the per-assignment minimum. That is a
bounded integer transportation problem: tasks supply their leftover
hours, TAs absorb them within a hard window around their target, and
the only objective terms that still move are the per-TA workload
penalties (exact-target for fifth-years, soft deviation).

Magnitude-mode costs are convex piecewise linear in the TA total, so an
integer min-cost flow solves the distribution exactly at any scale.
Indicator-mode costs are step functions; they are solved exactly by
enumerating nested penalty bands (cheap at audit/oracle sizes) and by a
convex surrogate flow with an independent lower bound when the band
product is too large to enumerate.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import networkx as nx


@dataclass(frozen=True)
class TaSide:
    base: int  # committed hours: assignment minimums plus pins
    lo: int  # hard lower bound on the final total
    hi: int  # hard upper bound on the final total
    theta: int
    year5: bool


@dataclass(frozen=True)
class JobSide:
    extra: int  # hours to distribute beyond the minimums
    pairs: tuple[int, ...]  # TA indices that may absorb them


@dataclass
class Distribution:
    feasible: bool
    h: list[int] | None = None
    extras: dict[tuple[int, int], int] | None = None  # (ta, job) -> hours
    penalty: int = 0  # workload families only
    bound: int = 0  # admissible lower bound on that penalty
    exact: bool = True
    sqdev: int = 0


# --- small deterministic max-flow (Dinic) ----------------------------------


class _Dinic:
    def __init__(self, n: int):
        self.n = n
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, cap: int) -> int:
        idx = len(self.to)
        self.adj[u].append(idx)
        self.to.append(v)
        self.cap.append(cap)
        self.adj[v].append(idx + 1)
        self.to.append(u)
        self.cap.append(0)
        return idx

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while True:
            level = [-1] * self.n
            level[s] = 0
            queue = [s]
            for u in queue:
                for idx in self.adj[u]:
                    if self.cap[idx] > 0 and level[self.to[idx]] < 0:
                        level[self.to[idx]] = level[u] + 1
                        queue.append(self.to[idx])
            if level[t] < 0:
                return flow
            it = [0] * self.n

            def dfs(u: int, pushed: int) -> int:
                if u == t:
                    return pushed
                while it[u] < len(self.adj[u]):
                    idx = self.adj[u][it[u]]
                    v = self.to[idx]
                    if self.cap[idx] > 0 and level[v] == level[u] + 1:
                        got = dfs(v, min(pushed, self.cap[idx]))
                        if got:
                            self.cap[idx] -= got
                            self.cap[idx ^ 1] += got
                            return got
                    it[u] += 1
                return 0

            while True:
                pushed = dfs(s, 1 << 62)
                if not pushed:
                    break
                flow += pushed


def feasible_transport(jobs: list[JobSide], windows: list[tuple[int, int]]):
    """Integral extras satisfying job supplies and per-TA flow windows.

    windows[i] bounds the total extra flow into TA i. Returns the
    (ta, job) -> extra map, or None when no distribution exists.
    """
    n_jobs = len(jobs)
    n_tas = len(windows)
    for flo, fhi in windows:
        if flo > fhi or fhi < 0:
            return None
    total = sum(j.extra for j in jobs)
    # circulation with lower bounds: S0 -> job (= extra), job -> ta,
    # ta -> T0 (window), T0 -> S0 (free); excess trick for lower bounds.
    S0, T0 = n_jobs + n_tas, n_jobs + n_tas + 1
    SS, TT = n_jobs + n_tas + 2, n_jobs + n_tas + 3
    net = _Dinic(n_jobs + n_tas + 4)
    excess = [0] * (n_jobs + n_tas + 2)
    pair_edges: dict[tuple[int, int], int] = {}
    for j, job in enumerate(jobs):
        if job.extra < 0:
            return None
        excess[j] += job.extra
        excess[S0] -= job.extra
        for ti in job.pairs:
            pair_edges[(ti, j)] = net.add_edge(j, n_jobs + ti, job.extra)
    for ti, (flo, fhi) in enumerate(windows):
        flo = max(flo, 0)
        if flo:
            excess[n_jobs + ti] -= flo
            excess[T0] += flo
        net.add_edge(n_jobs + ti, T0, fhi - flo)
    net.add_edge(T0, S0, 1 << 62)
    need = 0
    for node, ex in enumerate(excess):
        if ex > 0:
            net.add_edge(SS, node, ex)
            need += ex
        elif ex < 0:
            net.add_edge(node, TT, -ex)
    if net.max_flow(SS, TT) != need:
        return None
    extras = {}
    for (ti, j), idx in pair_edges.items():
        used = jobs[j].extra - net.cap[idx]
        if used:
            extras[(ti, j)] = used
    return extras


def absorption_gaps(jobs: list[JobSide], windows: list[tuple[int, int]]):
    """Upper-window diagnostic: per-job extra hours that cannot be absorbed
    by its members even with the lower windows dropped. Empty when the
    capacity side of the transport is satisfiable."""
    n_jobs = len(jobs)
    net = _Dinic(n_jobs + len(windows) + 2)
    S0, T0 = n_jobs + len(windows), n_jobs + len(windows) + 1
    job_edges = []
    for j, job in enumerate(jobs):
        job_edges.append(net.add_edge(S0, j, job.extra))
        for ti in job.pairs:
            net.add_edge(j, n_jobs + ti, job.extra)
    for ti, (_flo, fhi) in enumerate(windows):
        net.add_edge(n_jobs + ti, T0, max(0, fhi))
    net.max_flow(S0, T0)
    gaps = {}
    for j, job in enumerate(jobs):
        unsent = net.cap[job_edges[j]]
        if unsent > 0:
            gaps[j] = unsent
    return gaps


def window_shortfalls(jobs: list[JobSide], windows: list[tuple[int, int]]):
    """Lower-window diagnostic: per-TA hours missing toward the required
    minimum inflow with the upper windows relaxed. Empty when the demand
    side of the transport is satisfiable."""
    n_jobs = len(jobs)
    net = _Dinic(n_jobs + len(windows) + 2)
    S0, T0 = n_jobs + len(windows), n_jobs + len(windows) + 1
    for j, job in enumerate(jobs):
        net.add_edge(S0, j, job.extra)
        for ti in job.pairs:
            net.add_edge(j, n_jobs + ti, job.extra)
    ta_edges = {}
    for ti, (flo, _fhi) in enumerate(windows):
        if flo > 0:
            ta_edges[ti] = net.add_edge(n_jobs + ti, T0, flo)
    net.max_flow(S0, T0)
    lacking = {}
    for ti, idx in ta_edges.items():
        if net.cap[idx] > 0:
            lacking[ti] = net.cap[idx]
    return lacking


# --- penalty shapes ---------------------------------------------------------


def workload_penalty(h: int, ta: TaSide, lam_s: int, w14: int, w15: int, mode: str) -> int:
    dev = abs(h - ta.theta)
    if mode == "indicator":
        pen = w14 if (ta.year5 and dev > 0) else 0
        if dev > lam_s:
            pen += w15
        return pen
    pen = w14 * dev if ta.year5 else 0
    if dev > lam_s:
        pen += w15 * (dev - lam_s)
    return pen


def _surrogate_penalty(h: int, ta: TaSide, lam_s: int, w14: int, w15: int) -> int:
    # convex stand-in for the indicator steps: same weights, magnitude shape
    dev = abs(h - ta.theta)
    pen = w14 * dev if ta.year5 else 0
    if dev > lam_s:
        pen += w15 * (dev - lam_s)
    return pen


def _bands(ta: TaSide, lam_s: int, w14: int, w15: int) -> list[tuple[int, int, int]]:
    """Nested (cost, lo, hi) windows for the indicator step costs."""
    raw = []
    if ta.year5:
        raw = [(0, ta.theta, ta.theta),
               (w14, ta.theta - lam_s, ta.theta + lam_s),
               (w14 + w15, ta.lo, ta.hi)]
    else:
        raw = [(0, ta.theta - lam_s, ta.theta + lam_s),
               (w15, ta.lo, ta.hi)]
    out = []
    for cost, lo, hi in raw:
        lo, hi = max(lo, ta.lo), min(hi, ta.hi)
        if lo > hi:
            continue
        if out and out[-1][0] == cost:
            out[-1] = (cost, lo, hi)  # same price, keep the wider window
            continue
        if out and (lo, hi) == (out[-1][1], out[-1][2]):
            continue  # no wider than the cheaper band
        out.append((cost, lo, hi))
    return out


# --- cost-bearing flow ------------------------------------------------------


def _min_cost_transport(jobs, windows, marginals):
    """Min-cost extras; marginals(ti, f) is the cost of TA ti's flow unit
    f -> f+1 (nondecreasing in f within the window). Exact for convex costs."""
    G = nx.DiGraph()
    total = sum(j.extra for j in jobs)
    sink = ("sink",)
    sink_demand = total
    for j, job in enumerate(jobs):
        G.add_node(("j", j), demand=-job.extra)
        for ti in job.pairs:
            G.add_edge(("j", j), ("t", ti), capacity=job.extra, weight=0)
    for ti, (flo, fhi) in enumerate(windows):
        if flo > fhi or fhi < 0:
            return None
        flo = max(flo, 0)
        if ("t", ti) not in G:
            G.add_node(("t", ti))
        if flo:
            G.nodes[("t", ti)]["demand"] = flo
            sink_demand -= flo
        # group equal marginals into segments; one relay node per segment
        f = flo
        seg = 0
        while f < fhi:
            cost = marginals(ti, f)
            width = 1
            while f + width < fhi and marginals(ti, f + width) == cost:
                width += 1
            relay = ("seg", ti, seg)
            G.add_edge(("t", ti), relay, capacity=width, weight=cost)
            G.add_edge(relay, sink, capacity=width, weight=0)
            f += width
            seg += 1
    G.add_node(sink, demand=sink_demand)
    try:
        flow = nx.min_cost_flow(G)
    except nx.NetworkXUnfeasible:
        return None
    extras = {}
    for j, job in enumerate(jobs):
        for ti in job.pairs:
            used = flow[("j", j)].get(("t", ti), 0)
            if used:
                extras[(ti, j)] = used
    return extras


def _totals(tas, jobs, extras) -> list[int]:
    h = [ta.base for ta in tas]
    for (ti, _j), used in extras.items():
        h[ti] += used
    return h


def distribute(
    tas: list[TaSide],
    jobs: list[JobSide],
    lam_s: int,
    w14: int,
    w15: int,
    mode: str,
    tie_break: bool = False,
    exact_limit: int = 4096,
) -> Distribution:
    """Optimal (or best-effort, see module docstring) hour distribution."""
    windows = []
    for ta in tas:
        flo = max(0, ta.lo - ta.base)
        fhi = ta.hi - ta.base
        windows.append((flo, fhi))

    def pen_of(h):
        return sum(
            workload_penalty(h[i], tas[i], lam_s, w14, w15, mode) for i in range(len(tas))
        )

    def sq_of(h):
        return sum((h[i] - tas[i].theta) ** 2 for i in range(len(tas)))

    def finish(extras, exact, bound=None):
        h = _totals(tas, jobs, extras)
        pen = pen_of(h)
        return Distribution(
            feasible=True,
            h=h,
            extras=extras,
            penalty=pen,
            bound=pen if exact else (bound if bound is not None else 0),
            exact=exact,
            sqdev=sq_of(h),
        )

    if mode == "magnitude":
        big = 1 + sum(max(abs(ta.hi - ta.theta), abs(ta.lo - ta.theta)) ** 2 for ta in tas)

        def marginals(ti, f):
            ta = tas[ti]
            h0 = ta.base + f
            delta = workload_penalty(h0 + 1, ta, lam_s, w14, w15, "magnitude") - workload_penalty(
                h0, ta, lam_s, w14, w15, "magnitude"
            )
            if not tie_break:
                return delta
            sq_delta = (h0 + 1 - ta.theta) ** 2 - (h0 - ta.theta) ** 2
            return delta * big + sq_delta

        extras = _min_cost_transport(jobs, windows, marginals)
        if extras is None:
            return Distribution(feasible=False)
        return finish(extras, exact=True)

    # indicator mode: exact nested-band enumeration when small enough
    bands = [_bands(ta, lam_s, w14, w15) for ta in tas]
    combos = 1
    for levels in bands:
        if not levels:
            return Distribution(feasible=False)
        combos *= len(levels)
        if combos > exact_limit:
            break

    if combos <= exact_limit:
        return _exact_indicator(tas, jobs, bands, windows, lam_s, w14, w15, tie_break, pen_of, sq_of, finish)

    # large skeleton: convex surrogate incumbent + independent bound
    def marginals(ti, f):
        ta = tas[ti]
        h0 = ta.base + f
        return _surrogate_penalty(h0 + 1, ta, lam_s, w14, w15) - _surrogate_penalty(
            h0, ta, lam_s, w14, w15
        )

    extras = _min_cost_transport(jobs, windows, marginals)
    if extras is None:
        return Distribution(feasible=False)
    bound = sum(min(cost for cost, _, _ in levels) for levels in bands)
    return finish(extras, exact=False, bound=bound)


def _exact_indicator(tas, jobs, bands, windows, lam_s, w14, w15, tie_break, pen_of, sq_of, finish):
    start = tuple(0 for _ in tas)
    heap = [(sum(levels[0][0] for levels in bands), start)]
    seen = {start}
    best = None  # (cost, extras)
    best_cost = None
    candidates = []
    while heap:
        cost, combo = heapq.heappop(heap)
        if best_cost is not None and cost > best_cost:
            break
        wins = []
        ok = True
        for i, k in enumerate(combo):
            _, lo, hi = bands[i][k]
            flo = max(0, lo - tas[i].base, windows[i][0])
            fhi = min(hi - tas[i].base, windows[i][1])
            if flo > fhi or fhi < 0:
                ok = False
                break
            wins.append((flo, fhi))
        if ok:
            extras = feasible_transport(jobs, wins)
            if extras is not None:
                if best_cost is None:
                    best_cost = cost
                    best = extras
                if tie_break:
                    candidates.append((combo, wins))
                else:
                    break
        for i in range(len(tas)):
            if combo[i] + 1 < len(bands[i]):
                child = combo[:i] + (combo[i] + 1,) + combo[i + 1:]
                if child not in seen:
                    seen.add(child)
                    child_cost = cost - bands[i][combo[i]][0] + bands[i][combo[i] + 1][0]
                    heapq.heappush(heap, (child_cost, child))
    if best is None:
        return Distribution(feasible=False)
    if not tie_break:
        return finish(best, exact=True)
    # among minimum-penalty band choices, minimize squared deviation
    best_result = None
    for _combo, wins in candidates:
        def marginals(ti, f, _wins=wins):
            ta = tas[ti]
            h0 = ta.base + f
            return (h0 + 1 - ta.theta) ** 2 - (h0 - ta.theta) ** 2

        extras = _min_cost_transport(jobs, wins, marginals)
        if extras is None:
            continue
        result = finish(extras, exact=True)
        key = (result.penalty, result.sqdev)
        if best_result is None or key < (best_result.penalty, best_result.sqdev):
            best_result = result
    return best_result if best_result is not None else finish(best, exact=True)
