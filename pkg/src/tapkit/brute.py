"""Exhaustive oracle for small compiled models.

Enumerates every hour matrix consistent with the variable bounds and
the per-task coverage rows, derives the dependent quantities, filters
by evaluating every hard row, and scores soft terms at their tight
realization values. It shares no search, propagation, or distribution
code with the solver: candidate generation is plain composition
enumeration, and every candidate is accepted or rejected by generic
row evaluation alone. The model shape is touched only at the very end,
to label the winning assignment with TA/course ids.
"""

from __future__ import annotations

import re
from functools import lru_cache

from .assignment import Assignment
from .errors import BudgetExceeded
from .model import ModelIR
from .solver import SolveOutcome, SolveStats

_X_TAG = re.compile(r"^x_s(\d+)_c(\d+)_t(\d+)$")


def _value_choices(var, low_from_eq7):
    if var.lo == var.hi:
        return (var.lo,)
    low = low_from_eq7 if low_from_eq7 is not None else max(1, var.lo)
    vals = [0] if var.lo == 0 else []
    vals.extend(range(max(low, var.lo), var.hi + 1))
    return tuple(vals)


def _compositions(choice_sets, total):
    """All vectors with per-slot values from choice_sets summing to total."""
    n = len(choice_sets)
    suffix_max = [0] * (n + 1)
    suffix_min = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_max[i] = suffix_max[i + 1] + max(choice_sets[i])
        suffix_min[i] = suffix_min[i + 1] + min(choice_sets[i])
    out = [0] * n

    def rec(i, remaining):
        if i == n:
            if remaining == 0:
                yield tuple(out)
            return
        if remaining < suffix_min[i] or remaining > suffix_max[i]:
            return
        for v in choice_sets[i]:
            if v > remaining:
                break
            out[i] = v
            yield from rec(i + 1, remaining - v)

    yield from rec(0, total)


def _count_compositions(choice_sets, total) -> int:
    @lru_cache(maxsize=None)
    def ways(i, remaining):
        if i == len(choice_sets):
            return 1 if remaining == 0 else 0
        return sum(ways(i + 1, remaining - v) for v in choice_sets[i] if v <= remaining)

    return ways(0, total)


def _row_holds(row, values) -> bool:
    total = sum(coef * values[vid] for coef, vid in row.terms)
    if row.relation == "<=":
        return total <= row.rhs
    if row.relation == ">=":
        return total >= row.rhs
    return total == row.rhs


def _row_shortfall(row, values) -> int:
    total = sum(coef * values[vid] for coef, vid in row.terms)
    if row.relation == "<=":
        return max(0, total - row.rhs)
    if row.relation == ">=":
        return max(0, row.rhs - total)
    return abs(total - row.rhs)


def brute_force(ir: ModelIR, budget: int = 2_000_000) -> SolveOutcome:
    """Provably optimal outcome by exhaustive enumeration.

    Raises BudgetExceeded when the number of candidate hour matrices
    (the product of per-task composition counts) exceeds `budget`.
    """
    variables = ir.variables
    x_vars: dict[tuple[int, int, int], int] = {}
    for v in variables:
        m = _X_TAG.match(v.tag)
        if m:
            x_vars[tuple(int(g) for g in m.groups())] = v.id

    # structure hints read off the rows themselves
    tau_of: dict[tuple[int, int], int] = {}
    eq7_low: dict[int, int] = {}
    eq4_rows: dict[int, object] = {}
    for row in ir.hard:
        if row.origin.startswith("Eq6[") and row.relation == "=":
            c, t = (int(g) for g in row.origin[4:-1].split(","))
            tau_of[(c, t)] = row.rhs
        elif row.origin.startswith("Eq7[") and row.relation == ">=":
            xs = [vid for _co, vid in row.terms if variables[vid].tag.startswith("x_")]
            ys = [(co, vid) for co, vid in row.terms if variables[vid].tag.startswith("y_")]
            if len(xs) == 1 and len(ys) == 1:
                eq7_low[xs[0]] = -ys[0][0]
        elif row.origin.startswith("Eq4[") and row.relation == "=":
            zs = [vid for _co, vid in row.terms if variables[vid].tag.startswith("z_")]
            if len(zs) == 1:
                eq4_rows[zs[0]] = row

    groups: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    for key in sorted(x_vars):
        groups.setdefault((key[1], key[2]), []).append(key)

    plan = []
    total_candidates = 1
    for ct in sorted(groups):
        vids = [x_vars[k] for k in groups[ct]]
        choice_sets = tuple(_value_choices(variables[vid], eq7_low.get(vid)) for vid in vids)
        if ct in tau_of:
            count = _count_compositions(choice_sets, tau_of[ct])
        else:
            count = 1
            for cs in choice_sets:
                count *= len(cs)
        plan.append((vids, choice_sets, tau_of.get(ct)))
        total_candidates *= count
        if total_candidates > budget:
            raise BudgetExceeded(
                f"{total_candidates} candidate hour matrices exceed budget {budget}"
            )
    if total_candidates == 0:
        return SolveOutcome(
            status="infeasible", best=None, objective=None, lower_bound=None,
            stats=SolveStats(0, 0, 0.0), log=("oracle: no coverage-consistent candidates",),
        )

    # dependent-variable derivation tables
    y_deps: list[tuple[int, int]] = []  # (y vid, x vid)
    w_deps: list[tuple[int, list[int]]] = []
    h_deps: list[tuple[int, list[int]]] = []
    n_deps: list[tuple[int, list[int]]] = []
    z_vids: list[int] = []
    by_s: dict[int, list[int]] = {}
    by_ct: dict[tuple[int, int], list[int]] = {}
    by_sc: dict[tuple[int, int], list[int]] = {}
    for (s, c, t), vid in x_vars.items():
        by_s.setdefault(s, []).append(vid)
        by_ct.setdefault((c, t), []).append(vid)
        by_sc.setdefault((s, c), []).append(vid)
    for v in variables:
        tag = v.tag
        if tag.startswith("y_s"):
            s, c, t = (int(p[1:]) for p in tag[2:].split("_"))
            if (s, c, t) in x_vars:
                y_deps.append((v.id, x_vars[(s, c, t)]))
        elif tag.startswith("w_s"):
            s, c = (int(p[1:]) for p in tag[2:].split("_"))
            w_deps.append((v.id, by_sc.get((s, c), [])))
        elif tag.startswith("h_s"):
            h_deps.append((v.id, by_s.get(int(tag[3:]), [])))
        elif tag.startswith("n_c"):
            c, t = (int(p[1:]) for p in tag[2:].split("_"))
            n_deps.append((v.id, by_ct.get((c, t), [])))
        elif tag.startswith("z_s"):
            z_vids.append(v.id)

    check_rows = [
        row for row in ir.hard
        if not (row.origin.startswith("Eq4[") and row.relation == "=")
    ]
    soft_eval = [
        (term, variables[term.realization].kind == "binary") for term in ir.softs
    ]

    best_obj: int | None = None
    best_x: dict[tuple[int, int, int], int] | None = None
    explored = 0
    values = [0] * len(variables)

    def scan():
        nonlocal best_obj, best_x, explored
        explored += 1
        for yv, xv in y_deps:
            values[yv] = 1 if values[xv] > 0 else 0
        for wv, xs in w_deps:
            values[wv] = 1 if any(values[xv] > 0 for xv in xs) else 0
        for hv, xs in h_deps:
            values[hv] = sum(values[xv] for xv in xs)
        for nv, xs in n_deps:
            values[nv] = sum(1 for xv in xs if values[xv] > 0)
        for zv in z_vids:
            row = eq4_rows.get(zv)
            if row is None:
                values[zv] = 0
                continue
            rest = sum(co * values[vid] for co, vid in row.terms if vid != zv)
            zco = next(co for co, vid in row.terms if vid == zv)
            values[zv] = (row.rhs - rest) // zco
        for row in check_rows:
            if not _row_holds(row, values):
                return
        obj = 0
        for term, indicator in soft_eval:
            if indicator:
                if any(not _row_holds(cl, values) for cl in term.clause):
                    obj += term.weight
            else:
                shortfall = max((_row_shortfall(cl, values) for cl in term.clause), default=0)
                obj += term.weight * shortfall
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best_x = {key: values[vid] for key, vid in x_vars.items() if values[vid] > 0}

    def walk(i):
        if i == len(plan):
            scan()
            return
        vids, choice_sets, total = plan[i]
        if total is None:
            def free(k):
                if k == len(vids):
                    walk(i + 1)
                    return
                for v in choice_sets[k]:
                    values[vids[k]] = v
                    free(k + 1)
            free(0)
        else:
            for combo in _compositions(choice_sets, total):
                for vid, v in zip(vids, combo):
                    values[vid] = v
                walk(i + 1)

    walk(0)

    stats = SolveStats(explored, 0, 0.0)
    if best_obj is None:
        return SolveOutcome(
            status="infeasible", best=None, objective=None, lower_bound=None,
            stats=stats, log=(f"oracle: {explored} candidates, none feasible",),
        )
    shape = ir.shape
    h = [0] * shape.n_tas
    n: dict[tuple[int, int], int] = {}
    for (s, c, t), v in best_x.items():
        h[s] += v
        n[(c, t)] = n.get((c, t), 0) + 1
    w = frozenset((s, c) for (s, c, _t) in best_x)
    z = [0] * shape.n_tas
    for (s, c) in w:
        if (s, c) not in shape.kappa:
            z[s] += 1
    best = Assignment(
        ta_ids=shape.ta_ids, course_ids=shape.course_ids, x=dict(best_x),
        w=w, y=frozenset(best_x), h=tuple(h), n=n, z=tuple(z),
    )
    return SolveOutcome(
        status="optimal", best=best, objective=best_obj, lower_bound=best_obj,
        stats=stats, log=(f"oracle: {explored} candidates enumerated",),
    )
