"""Problem instances: staff, courses, tasks, bounds, weights.

An instance bundles everything the model builder needs: the set of
teaching assistants with their contractual targets, the course/task
hour matrix, sparse per-pair data (preferences, forbidden pairs,
continuity from the previous year), and the hard/soft bound and weight
configuration. Instances are immutable after loading and canonically
ordered, so serialization round-trips are byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .errors import ParseError, ValidationError

# The ten task kinds a course may carry. Administration is special:
# every course has exactly one admin task and it goes to a single TA.
TASK_KINDS = (
    "admin",
    "exercise",
    "problem_solving",
    "lab",
    "computer",
    "assignment_supervision",
    "assignment_evaluation",
    "project_supervision",
    "exam_evaluation",
    "other",
)
ADMIN = "admin"
TASK_KIND_INDEX = {kind: i for i, kind in enumerate(TASK_KINDS)}


def _as_fraction(value, where=""):
    """Coerce a JSON scalar to an exact Fraction.

    Accepts ints, Fractions, decimal strings ("0.15"), ratio strings
    ("3/20"), and floats (via their shortest repr, so 0.15 means 3/20).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational number: {value!r}", where) from exc
    raise ValidationError(f"not a rational number: {value!r}", where)


def _fraction_to_json(frac: Fraction):
    """Render a Fraction as a JSON scalar that reparses to the same value."""
    as_float = float(frac)
    if Fraction(repr(as_float)) == frac:
        if frac.denominator == 1:
            return int(frac)
        return as_float
    return f"{frac.numerator}/{frac.denominator}"


def round_half_up(value: Fraction) -> int:
    """Round to the nearest integer, halves away from zero-point-five up."""
    return int((value + Fraction(1, 2)).__floor__())


def compute_target(employment_fraction, carryover: int, annual_full_load: int) -> int:
    """Target hours for one TA: the employment share of a full annual
    load, rounded half-up, plus carryover from previous years."""
    frac = _as_fraction(employment_fraction)
    if not (0 <= frac <= 1):
        raise ValidationError("employment_fraction out of [0,1]")
    if annual_full_load <= 0:
        raise ValidationError("annual_full_load must be positive")
    return round_half_up(frac * annual_full_load) + carryover


@dataclass(frozen=True)
class TeachingAssistant:
    id: str
    year: int
    employment_fraction: Fraction
    carryover_hours: int
    target_hours: int

    @classmethod
    def create(cls, id, year, employment_fraction, carryover_hours, annual_full_load):
        frac = _as_fraction(employment_fraction)
        return cls(
            id=id,
            year=year,
            employment_fraction=frac,
            carryover_hours=carryover_hours,
            target_hours=compute_target(frac, carryover_hours, annual_full_load),
        )


@dataclass(frozen=True)
class CourseTask:
    course_id: str
    task_kind: str
    total_hours: int
    required_tas: int


@dataclass(frozen=True)
class PairData:
    ta_id: str
    course_id: str
    preference: int = 0
    forbidden: bool = False
    taught_last_year: bool = False

    @property
    def is_default(self) -> bool:
        return self.preference == 0 and not self.forbidden and not self.taught_last_year


@dataclass(frozen=True)
class BoundConfig:
    hard_dev: int = 100
    soft_dev: int = 50
    hard_new_courses: int = 1
    soft_new_courses: int = 0
    hard_courses_per_ta: int = 2
    soft_courses_per_ta: int = 1
    hard_tas_per_course: int = 8
    soft_extra_tas_per_task: int = 0
    min_task_hours: int = 5
    annual_full_load: int = 350


@dataclass(frozen=True)
class WeightConfig:
    w_target5: int = 30
    w_soft_dev: int = 30
    w_soft_new: int = 0
    w_soft_staff: int = 1
    w_soft_courses: int = 5
    w_pref_positive: int = 1
    w_pref_negative: int = 1
    penalty_mode: str = "indicator"


# Hard bounds and soft weights tuned per production year. Soft bounds are
# not part of the published tuning; the shipped defaults are soft_dev =
# hard_dev/2, soft_new = 0, soft_courses = hard_courses - 1, soft extra
# staff = 0, with min task hours 5 and a 350 h full load.
YEAR_PRESETS = {
    "2022": (BoundConfig(hard_dev=100, soft_dev=50, hard_courses_per_ta=2, soft_courses_per_ta=1), WeightConfig()),
    "2023": (BoundConfig(hard_dev=120, soft_dev=60, hard_courses_per_ta=3, soft_courses_per_ta=2), WeightConfig()),
    "2024": (BoundConfig(hard_dev=150, soft_dev=75, hard_courses_per_ta=3, soft_courses_per_ta=2), WeightConfig()),
    "2025": (BoundConfig(hard_dev=150, soft_dev=75, hard_courses_per_ta=2, soft_courses_per_ta=1), WeightConfig()),
    "2026": (BoundConfig(hard_dev=160, soft_dev=80, hard_courses_per_ta=3, soft_courses_per_ta=2), WeightConfig()),
}

PENALTY_MODES = ("indicator", "magnitude")


@dataclass(frozen=True)
class Instance:
    label: str
    tas: tuple[TeachingAssistant, ...]
    courses: tuple[str, ...]
    tasks: tuple[CourseTask, ...]
    pairs: tuple[PairData, ...]
    bounds: BoundConfig = field(default_factory=BoundConfig)
    weights: WeightConfig = field(default_factory=WeightConfig)

    def ta_index(self) -> dict[str, int]:
        return {ta.id: i for i, ta in enumerate(self.tas)}

    def course_index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.courses)}

    def task_map(self) -> dict[tuple[str, str], CourseTask]:
        return {(t.course_id, t.task_kind): t for t in self.tasks}

    def pair_map(self) -> dict[tuple[str, str], PairData]:
        return {(p.ta_id, p.course_id): p for p in self.pairs}

    def pair(self, ta_id: str, course_id: str) -> PairData:
        return self.pair_map().get((ta_id, course_id), PairData(ta_id, course_id))

    def total_demand(self) -> int:
        return sum(t.total_hours for t in self.tasks)

    def total_target(self) -> int:
        return sum(ta.target_hours for ta in self.tas)


@dataclass(frozen=True)
class CapacityReport:
    total_demand: int
    total_target: int
    slack: int
    warning: bool


def capacity_report(instance: Instance) -> CapacityReport:
    """Aggregate demand-vs-supply check: total task hours against the sum
    of targets plus the hard deviation allowance. Negative slack means no
    schedule can cover the demand."""
    demand = instance.total_demand()
    supply = instance.total_target() + len(instance.tas) * instance.bounds.hard_dev
    slack = supply - demand
    return CapacityReport(demand, instance.total_target(), slack, slack < 0)


def _canonical(instance: Instance) -> Instance:
    tas = tuple(sorted(instance.tas, key=lambda t: t.id))
    courses = tuple(sorted(instance.courses))
    tasks = tuple(
        sorted(instance.tasks, key=lambda t: (t.course_id, TASK_KIND_INDEX[t.task_kind]))
    )
    pairs = tuple(
        sorted((p for p in instance.pairs if not p.is_default), key=lambda p: (p.ta_id, p.course_id))
    )
    return replace(instance, tas=tas, courses=courses, tasks=tasks, pairs=pairs)


def validate(instance: Instance) -> Instance:
    """Check every domain rule; returns the canonically ordered instance.

    Raises ValidationError with the offending field path. The aggregate
    capacity condition is deliberately a warning (see capacity_report),
    not an error: over-subscribed instances must still load for audits.
    """
    seen_tas = set()
    for i, ta in enumerate(instance.tas):
        where = f"tas[{i}]"
        if not ta.id:
            raise ValidationError("empty id", where)
        if ta.id in seen_tas:
            raise ValidationError(f"duplicate TA id {ta.id!r}", where)
        seen_tas.add(ta.id)
        if not (1 <= ta.year <= 5):
            raise ValidationError("year must be in 1..5", f"{where}.year")
        if not (0 <= ta.employment_fraction <= 1):
            raise ValidationError("employment_fraction out of [0,1]", f"{where}.employment_fraction")
        expect = compute_target(
            ta.employment_fraction, ta.carryover_hours, instance.bounds.annual_full_load
        )
        if ta.target_hours != expect:
            raise ValidationError(
                f"target_hours {ta.target_hours} inconsistent, expected {expect}",
                f"{where}.target_hours",
            )

    seen_courses = set()
    for j, course in enumerate(instance.courses):
        if not course:
            raise ValidationError("empty id", f"courses[{j}]")
        if course in seen_courses:
            raise ValidationError(f"duplicate course id {course!r}", f"courses[{j}]")
        seen_courses.add(course)

    admin_courses = set()
    seen_tasks = set()
    for k, task in enumerate(instance.tasks):
        where = f"tasks[{k}]"
        if task.course_id not in seen_courses:
            raise ValidationError(f"unknown course {task.course_id!r}", f"{where}.course")
        if task.task_kind not in TASK_KIND_INDEX:
            raise ValidationError(f"unknown task kind {task.task_kind!r}", f"{where}.kind")
        key = (task.course_id, task.task_kind)
        if key in seen_tasks:
            raise ValidationError(f"duplicate task {key}", where)
        seen_tasks.add(key)
        if task.total_hours <= 0:
            raise ValidationError(
                "listed task must have positive hours (absent tasks are omitted)",
                f"{where}.hours",
            )
        if task.required_tas < 0:
            raise ValidationError("required_tas must be >= 0", f"{where}.required_tas")
        if task.task_kind == ADMIN:
            admin_courses.add(task.course_id)
    for course in sorted(seen_courses - admin_courses):
        raise ValidationError(f"course {course!r} lacks an admin task", "tasks")

    seen_pairs = set()
    for k, pair in enumerate(instance.pairs):
        where = f"pairs[{k}]"
        if pair.ta_id not in seen_tas:
            raise ValidationError(f"unknown TA {pair.ta_id!r}", f"{where}.ta")
        if pair.course_id not in seen_courses:
            raise ValidationError(f"unknown course {pair.course_id!r}", f"{where}.course")
        key = (pair.ta_id, pair.course_id)
        if key in seen_pairs:
            raise ValidationError(f"duplicate pair {key}", where)
        seen_pairs.add(key)
        if pair.preference not in (-1, 0, 1):
            raise ValidationError("preference must be in {-1,0,1}", f"{where}.preference")

    b = instance.bounds
    for name in (
        "hard_dev", "soft_dev", "hard_new_courses", "soft_new_courses",
        "hard_courses_per_ta", "soft_courses_per_ta", "hard_tas_per_course",
        "soft_extra_tas_per_task", "min_task_hours",
    ):
        if getattr(b, name) < 0:
            raise ValidationError("must be >= 0", f"bounds.{name}")
    if b.annual_full_load <= 0:
        raise ValidationError("must be > 0", "bounds.annual_full_load")
    if b.soft_dev > b.hard_dev:
        raise ValidationError("soft_dev must be <= hard_dev", "bounds.soft_dev")
    if b.soft_new_courses > b.hard_new_courses:
        raise ValidationError("soft_new_courses must be <= hard_new_courses", "bounds.soft_new_courses")
    if b.soft_courses_per_ta > b.hard_courses_per_ta:
        raise ValidationError("soft_courses_per_ta must be <= hard_courses_per_ta", "bounds.soft_courses_per_ta")

    w = instance.weights
    for name in (
        "w_target5", "w_soft_dev", "w_soft_new", "w_soft_staff",
        "w_soft_courses", "w_pref_positive", "w_pref_negative",
    ):
        if getattr(w, name) < 0:
            raise ValidationError("weight must be >= 0", f"weights.{name}")
    if w.penalty_mode not in PENALTY_MODES:
        raise ValidationError(f"penalty_mode must be one of {PENALTY_MODES}", "weights.penalty_mode")

    return _canonical(instance)


# --- JSON (de)serialization -------------------------------------------------

_BOUND_KEYS = (
    "hard_dev", "soft_dev", "hard_new_courses", "soft_new_courses",
    "hard_courses_per_ta", "soft_courses_per_ta", "hard_tas_per_course",
    "soft_extra_tas_per_task", "min_task_hours", "annual_full_load",
)
_WEIGHT_KEYS = (
    "w_target5", "w_soft_dev", "w_soft_new", "w_soft_staff", "w_soft_courses",
    "w_pref_positive", "w_pref_negative", "penalty_mode",
)


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ValidationError("missing field", f"{where}.{key}" if where else key)
    return doc[key]


def _int_field(doc, key, where):
    value = _require(doc, key, where)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"expected integer, got {value!r}", f"{where}.{key}" if where else key)
    return value


def from_document(doc: dict) -> Instance:
    """Build and validate an Instance from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ValidationError("instance document must be a JSON object")
    label = doc.get("label", "")

    bounds = BoundConfig()
    if "bounds" in doc:
        b = doc["bounds"]
        unknown = set(b) - set(_BOUND_KEYS)
        if unknown:
            raise ValidationError(f"unknown keys {sorted(unknown)}", "bounds")
        bounds = BoundConfig(**{k: _int_field(b, k, "bounds") for k in _BOUND_KEYS if k in b})

    weights = WeightConfig()
    if "weights" in doc:
        w = dict(doc["weights"])
        unknown = set(w) - set(_WEIGHT_KEYS)
        if unknown:
            raise ValidationError(f"unknown keys {sorted(unknown)}", "weights")
        mode = w.pop("penalty_mode", WeightConfig().penalty_mode)
        weights = WeightConfig(
            **{k: _int_field(w, k, "weights") for k in w}, penalty_mode=mode
        )

    tas = []
    for i, row in enumerate(_require(doc, "tas", "")):
        where = f"tas[{i}]"
        frac = _as_fraction(_require(row, "employment_fraction", where), f"{where}.employment_fraction")
        if not (0 <= frac <= 1):
            raise ValidationError("employment_fraction out of [0,1]", f"{where}.employment_fraction")
        tas.append(
            TeachingAssistant.create(
                id=str(_require(row, "id", where)),
                year=_int_field(row, "year", where),
                employment_fraction=frac,
                carryover_hours=_int_field(row, "carryover_hours", where),
                annual_full_load=bounds.annual_full_load,
            )
        )

    courses = [str(c) for c in _require(doc, "courses", "")]

    tasks = []
    for k, row in enumerate(_require(doc, "tasks", "")):
        where = f"tasks[{k}]"
        tasks.append(
            CourseTask(
                course_id=str(_require(row, "course", where)),
                task_kind=str(_require(row, "kind", where)),
                total_hours=_int_field(row, "hours", where),
                required_tas=_int_field(row, "required_tas", where),
            )
        )

    pairs = []
    for k, row in enumerate(doc.get("pairs", [])):
        where = f"pairs[{k}]"
        pref = row.get("preference", 0)
        if isinstance(pref, bool) or not isinstance(pref, int):
            raise ValidationError("preference must be in {-1,0,1}", f"{where}.preference")
        pairs.append(
            PairData(
                ta_id=str(_require(row, "ta", where)),
                course_id=str(_require(row, "course", where)),
                preference=pref,
                forbidden=bool(row.get("forbidden", False)),
                taught_last_year=bool(row.get("taught_last_year", False)),
            )
        )

    return validate(
        Instance(
            label=str(label),
            tas=tuple(tas),
            courses=tuple(courses),
            tasks=tuple(tasks),
            pairs=tuple(pairs),
            bounds=bounds,
            weights=weights,
        )
    )


def to_document(instance: Instance) -> dict:
    """Canonical JSON document for an instance (stable key and row order)."""
    inst = _canonical(instance)
    return {
        "label": inst.label,
        "bounds": {k: getattr(inst.bounds, k) for k in _BOUND_KEYS},
        "weights": {k: getattr(inst.weights, k) for k in _WEIGHT_KEYS},
        "tas": [
            {
                "id": ta.id,
                "year": ta.year,
                "employment_fraction": _fraction_to_json(ta.employment_fraction),
                "carryover_hours": ta.carryover_hours,
            }
            for ta in inst.tas
        ],
        "courses": list(inst.courses),
        "tasks": [
            {
                "course": t.course_id,
                "kind": t.task_kind,
                "hours": t.total_hours,
                "required_tas": t.required_tas,
            }
            for t in inst.tasks
        ],
        "pairs": [
            {
                "ta": p.ta_id,
                "course": p.course_id,
                "preference": p.preference,
                "forbidden": p.forbidden,
                "taught_last_year": p.taught_last_year,
            }
            for p in inst.pairs
        ],
    }


def serialize(instance: Instance) -> str:
    return json.dumps(to_document(instance), indent=2) + "\n"


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(serialize(instance))


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text, parse_float=lambda s: Fraction(s))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return from_document(doc)


def load_instance(path) -> Instance:
    """Load, validate, and canonicalize an instance file."""
    p = Path(path)
    if not p.exists():
        raise ParseError(f"no such file: {p}")
    return loads_instance(p.read_text())
