"""Seeded synthetic instances shaped like the production data.

Documented distributions (seed-deterministic via one random.Random):

* years uniform on 1..5; employment fractions uniform on {0.1, ..., 1.0};
  carryover uniform on -40..40;
* continuity flags come from a simulated previous year: each course is
  given 1-2 previous teachers drawn from the TAs in year >= 2;
* every course gets its admin task (raw 20-60 hours) plus up to
  max_tasks_per_course - 1 further kinds (raw 10-120 hours); raw hours
  are rescaled and one task repaired so total demand lands within one
  task's hours of demand_to_capacity_ratio x total target;
* required staff grows with task size (one TA per started 120 hours,
  capped at 3 and at what the minimum-hours rule allows);
* a small sprinkle of preferences (about 6% of pairs, split +/-) and
  forbidden pairs (about 2%, never a course's last candidates).

Ratios above 1.0 (allowed up to 1.2) deliberately oversubscribe the
staff to produce infeasible instances for solver testing.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .errors import SpecError
from .instance import (
    ADMIN,
    TASK_KINDS,
    BoundConfig,
    CourseTask,
    Instance,
    PairData,
    TeachingAssistant,
    WeightConfig,
    validate,
)


def generate(
    n_tas: int,
    n_courses: int,
    max_tasks_per_course: int,
    demand_to_capacity_ratio,
    seed: int,
) -> Instance:
    """Valid, seed-deterministic synthetic instance (see module docstring)."""
    ratio = Fraction(demand_to_capacity_ratio).limit_denominator(1000) if not isinstance(
        demand_to_capacity_ratio, Fraction
    ) else demand_to_capacity_ratio
    if n_tas <= 0 or n_courses <= 0 or max_tasks_per_course <= 0:
        raise SpecError("dimensions must be positive")
    if max_tasks_per_course > len(TASK_KINDS):
        raise SpecError(f"at most {len(TASK_KINDS)} tasks per course")
    if not (0 < ratio <= Fraction(12, 10)):
        raise SpecError("demand_to_capacity_ratio must be in (0, 1.2]")

    rng = random.Random(seed)
    bounds = BoundConfig(
        hard_dev=150,
        soft_dev=75,
        hard_new_courses=2,
        soft_new_courses=1,
        hard_courses_per_ta=3,
        soft_courses_per_ta=2,
        hard_tas_per_course=8,
        soft_extra_tas_per_task=0,
        min_task_hours=5,
        annual_full_load=350,
    )
    weights = WeightConfig()

    tas = tuple(
        TeachingAssistant.create(
            f"ta{i:03d}",
            rng.randint(1, 5),
            Fraction(rng.randint(1, 10), 10),
            rng.randint(-40, 40),
            bounds.annual_full_load,
        )
        for i in range(n_tas)
    )
    courses = tuple(f"c{j:03d}" for j in range(n_courses))

    # previous-year simulation: seasoned TAs who already taught each course
    seasoned = [ta.id for ta in tas if ta.year >= 2]
    taught: set[tuple[str, str]] = set()
    for course in courses:
        if not seasoned:
            break
        count = min(len(seasoned), rng.randint(1, 2))
        for ta_id in rng.sample(seasoned, count):
            taught.add((ta_id, course))

    # raw task menu, then rescale to the requested demand ratio
    other_kinds = [k for k in TASK_KINDS if k != ADMIN]
    menu: list[tuple[str, str, int]] = []
    for course in courses:
        menu.append((course, ADMIN, rng.randint(20, 60)))
        extra = rng.randint(0, max_tasks_per_course - 1)
        for kind in rng.sample(other_kinds, extra):
            menu.append((course, kind, rng.randint(10, 120)))

    capacity = sum(ta.target_hours for ta in tas)
    target_demand = max(len(menu), round(capacity * ratio))
    raw_total = sum(hours for _, _, hours in menu)
    eps = bounds.min_task_hours

    tasks = []
    for course, kind, raw in menu:
        hours = max(eps, 1, round(raw * target_demand / raw_total))
        tasks.append([course, kind, hours])
    # repair the rounding drift on the largest task so the total demand
    # stays within one task's hours of the requested ratio
    drift = target_demand - sum(t[2] for t in tasks)
    tasks.sort(key=lambda t: (-t[2], t[0], t[1]))
    tasks[0][2] = max(eps, 1, tasks[0][2] + drift)

    course_tasks = []
    for course, kind, hours in tasks:
        if kind == ADMIN:
            rho = 1
        else:
            rho = min(3, 1 + hours // 120)
            if eps > 0:
                rho = max(1, min(rho, hours // max(eps, 1)))
            rho = min(rho, bounds.hard_tas_per_course)
        course_tasks.append(CourseTask(course, kind, hours, rho))

    # sparse pair data; forbids skip a course's previous teachers so that
    # continuity-friendly staffing stays possible
    pairs: dict[tuple[str, str], PairData] = {}
    for (ta_id, course) in taught:
        pairs[(ta_id, course)] = PairData(ta_id, course, taught_last_year=True)
    for ta in tas:
        for course in courses:
            key = (ta.id, course)
            roll = rng.random()
            pref = 0
            if roll < 0.03:
                pref = 1
            elif roll < 0.06:
                pref = -1
            forbidden = rng.random() < 0.02 and key not in taught
            if pref or forbidden:
                old = pairs.get(key, PairData(ta.id, course))
                pairs[key] = PairData(
                    ta.id, course, pref, forbidden or old.forbidden, old.taught_last_year
                )

    return validate(
        Instance(
            label=f"synthetic-{n_tas}x{n_courses}-s{seed}",
            tas=tas,
            courses=courses,
            tasks=tuple(course_tasks),
            pairs=tuple(pairs.values()),
            bounds=bounds,
            weights=weights,
        )
    )
