"""Independent audit of a proposed assignment against an instance.

This module re-derives every quantity straight from the hour matrix and
the instance data; it deliberately shares no code with the model
compiler or the solver so it can act as the final authority on
feasibility and objective values. Supplied derived fields are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .assignment import Assignment, check_alignment
from .errors import HardViolation
from .instance import ADMIN, TASK_KINDS, Instance

SOFT_FAMILIES = ("Eq14", "Eq15", "Eq16", "Eq17", "Eq18", "Eq19", "Eq20")


@dataclass(frozen=True)
class Violation:
    origin: str
    subject: tuple
    measured: int
    bound: int


@dataclass(frozen=True)
class Verdict:
    hard_violations: tuple[Violation, ...]
    soft_penalty_by_family: dict[str, int]
    total_objective: int
    strict_ok: bool

    def to_document(self) -> dict:
        return {
            "strict_ok": self.strict_ok,
            "total_objective": self.total_objective,
            "soft_penalty_by_family": dict(self.soft_penalty_by_family),
            "hard_violations": [
                {
                    "origin": v.origin,
                    "subject": list(v.subject),
                    "measured": v.measured,
                    "bound": v.bound,
                }
                for v in self.hard_violations
            ],
        }


def write_verdict(verdict: Verdict, path) -> None:
    Path(path).write_text(json.dumps(verdict.to_document(), indent=2) + "\n")


class _View:
    """Everything recomputed from x alone, plus instance lookup tables."""

    def __init__(self, instance: Instance, assignment: Assignment):
        check_alignment(instance, assignment)
        self.inst = instance
        self.S = len(instance.tas)
        self.C = len(instance.courses)
        self.T = len(TASK_KINDS)
        course_idx = instance.course_index()
        ta_idx = instance.ta_index()

        self.tau = [[0] * self.T for _ in range(self.C)]
        self.rho = [[0] * self.T for _ in range(self.C)]
        for task in instance.tasks:
            c = course_idx[task.course_id]
            t = TASK_KINDS.index(task.task_kind)
            self.tau[c][t] = task.total_hours
            self.rho[c][t] = task.required_tas

        self.xi, self.kappa, self.pref = set(), set(), {}
        for p in instance.pairs:
            key = (ta_idx[p.ta_id], course_idx[p.course_id])
            if p.forbidden:
                self.xi.add(key)
            if p.taught_last_year:
                self.kappa.add(key)
            if p.preference:
                self.pref[key] = p.preference

        self.x = {k: v for k, v in assignment.x.items() if v > 0}
        self.h = [0] * self.S
        self.n = [[0] * self.T for _ in range(self.C)]
        self.task_hours = [[0] * self.T for _ in range(self.C)]
        self.pair_hours = {}
        for (s, c, t), v in self.x.items():
            self.h[s] += v
            self.n[c][t] += 1
            self.task_hours[c][t] += v
            self.pair_hours[(s, c)] = self.pair_hours.get((s, c), 0) + v
        self.w = set(self.pair_hours)
        self.courses_of = [0] * self.S
        self.z = [0] * self.S
        for (s, c) in self.w:
            self.courses_of[s] += 1
            if (s, c) not in self.kappa:
                self.z[s] += 1


def _hard_violations(view: _View) -> list[Violation]:
    inst = view.inst
    out: list[Violation] = []

    for (s, c) in sorted(view.xi):
        total = view.pair_hours.get((s, c), 0)
        if total > 0:
            out.append(Violation(f"Eq1[{s},{c}]", (s, c), total, 0))

    for c in range(view.C):
        for t in range(view.T):
            assigned = view.task_hours[c][t]
            if view.tau[c][t] == 0:
                if assigned > 0:
                    out.append(Violation(f"Eq5[{c},{t}]", (c, t), assigned, 0))
                continue
            if assigned != view.tau[c][t]:
                out.append(Violation(f"Eq6[{c},{t}]", (c, t), assigned, view.tau[c][t]))

    eps = inst.bounds.min_task_hours
    for (s, c, t), v in sorted(view.x.items()):
        tau = view.tau[c][t]
        if tau == 0:
            continue  # already reported under Eq5
        low = min(tau, eps)
        if v < low or v > tau:
            out.append(Violation(f"Eq7[{s},{c},{t}]", (s, c, t), v, low if v < low else tau))

    for c in range(view.C):
        for t in range(view.T):
            if view.n[c][t] < view.rho[c][t]:
                out.append(Violation(f"Eq8[{c},{t}]", (c, t), view.n[c][t], view.rho[c][t]))

    lam = inst.bounds.hard_dev
    for s in range(view.S):
        dev = abs(view.h[s] - inst.tas[s].target_hours)
        if dev > lam:
            out.append(Violation(f"Eq9[{s}]", (s,), view.h[s], lam))

    for s in range(view.S):
        if view.courses_of[s] > inst.bounds.hard_courses_per_ta:
            out.append(Violation(f"Eq10[{s}]", (s,), view.courses_of[s], inst.bounds.hard_courses_per_ta))

    for c in range(view.C):
        count = sum(1 for (s2, c2) in view.w if c2 == c)
        if count > inst.bounds.hard_tas_per_course:
            out.append(Violation(f"Eq11[{c}]", (c,), count, inst.bounds.hard_tas_per_course))

    for s in range(view.S):
        if view.z[s] > inst.bounds.hard_new_courses:
            out.append(Violation(f"Eq12[{s}]", (s,), view.z[s], inst.bounds.hard_new_courses))

    admin_t = TASK_KINDS.index(ADMIN)
    for c in range(view.C):
        if view.n[c][admin_t] > 1:
            out.append(Violation(f"Eq13[{c}]", (c,), view.n[c][admin_t], 1))

    return out


def _soft_penalties(view: _View, mode: str) -> dict[str, int]:
    inst = view.inst
    w = inst.weights
    lam_s = inst.bounds.soft_dev
    indicator = mode == "indicator"
    pen = {fam: 0 for fam in SOFT_FAMILIES}

    for s in range(view.S):
        theta = inst.tas[s].target_hours
        dev = abs(view.h[s] - theta)
        if inst.tas[s].year >= 5 and dev > 0:
            pen["Eq14"] += w.w_target5 * (1 if indicator else dev)
        if dev > lam_s:
            pen["Eq15"] += w.w_soft_dev * (1 if indicator else dev - lam_s)
        excess_new = view.z[s] - inst.bounds.soft_new_courses
        if excess_new > 0:
            pen["Eq16"] += w.w_soft_new * (1 if indicator else excess_new)
        excess_courses = view.courses_of[s] - inst.bounds.soft_courses_per_ta
        if excess_courses > 0:
            pen["Eq18"] += w.w_soft_courses * (1 if indicator else excess_courses)

    for c in range(view.C):
        for t in range(view.T):
            if view.tau[c][t] == 0:
                continue
            excess = view.n[c][t] - (view.rho[c][t] + inst.bounds.soft_extra_tas_per_task)
            if excess > 0:
                pen["Eq17"] += w.w_soft_staff * (1 if indicator else excess)

    for (s, c), p in view.pref.items():
        if p == 1 and (s, c) not in view.w:
            pen["Eq19"] += w.w_pref_positive
        elif p == -1 and (s, c) in view.w:
            pen["Eq20"] += w.w_pref_negative

    return pen


def score_soft(instance: Instance, assignment: Assignment, mode: str | None = None) -> dict[str, int]:
    """Per-family soft penalty. Indicator mode charges each violated
    clause its weight; magnitude mode charges weight per unit of excess."""
    view = _View(instance, assignment)
    return _soft_penalties(view, mode or instance.weights.penalty_mode)


def soft_violation_counts(instance: Instance, assignment: Assignment) -> dict[str, int]:
    """Number of violated clauses per family, independent of weights."""
    view = _View(instance, assignment)
    counts = {fam: 0 for fam in SOFT_FAMILIES}
    lam_s = instance.bounds.soft_dev
    for s in range(view.S):
        theta = instance.tas[s].target_hours
        dev = abs(view.h[s] - theta)
        if instance.tas[s].year >= 5 and dev > 0:
            counts["Eq14"] += 1
        if dev > lam_s:
            counts["Eq15"] += 1
        if view.z[s] > instance.bounds.soft_new_courses:
            counts["Eq16"] += 1
        if view.courses_of[s] > instance.bounds.soft_courses_per_ta:
            counts["Eq18"] += 1
    for c in range(view.C):
        for t in range(view.T):
            if view.tau[c][t] > 0 and view.n[c][t] > view.rho[c][t] + instance.bounds.soft_extra_tas_per_task:
                counts["Eq17"] += 1
    for (s, c), p in view.pref.items():
        if p == 1 and (s, c) not in view.w:
            counts["Eq19"] += 1
        elif p == -1 and (s, c) in view.w:
            counts["Eq20"] += 1
    return counts


def check(instance: Instance, assignment: Assignment, mode: str = "strict") -> Verdict:
    """Audit an assignment. Audit mode returns the full Verdict even when
    hard constraints are broken (manual schedules typically break them);
    strict mode raises HardViolation carrying that same Verdict."""
    if mode not in ("strict", "audit"):
        raise ValueError(f"unknown mode {mode!r}")
    view = _View(instance, assignment)
    violations = tuple(_hard_violations(view))
    penalties = _soft_penalties(view, instance.weights.penalty_mode)
    verdict = Verdict(
        hard_violations=violations,
        soft_penalty_by_family=penalties,
        total_objective=sum(penalties.values()),
        strict_ok=not violations,
    )
    if mode == "strict" and violations:
        raise HardViolation(verdict)
    return verdict
