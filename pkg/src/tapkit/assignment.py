"""Candidate solutions and the solution text format.

An Assignment stores the hour matrix x[s,c,t] plus every derived
quantity (course flags w, task flags y, totals h, staffing counts n,
new-course counts z). The derived fields are functions of x and are
always recomputed here, never trusted from outside.

The text format (one ``name value`` pair per line, ``#`` comments) is
shared by the CLI solution files and the external-solver import path,
so both kinds of output are interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import IndexMismatch
from .instance import ADMIN, TASK_KINDS, Instance


def x_name(s: int, c: int, t: int) -> str:
    return f"x_s{s}_c{c}_t{t}"


def y_name(s: int, c: int, t: int) -> str:
    return f"y_s{s}_c{c}_t{t}"


def w_name(s: int, c: int) -> str:
    return f"w_s{s}_c{c}"


def h_name(s: int) -> str:
    return f"h_s{s}"


def n_name(c: int, t: int) -> str:
    return f"n_c{c}_t{t}"


def z_name(s: int) -> str:
    return f"z_s{s}"


@dataclass(frozen=True)
class Assignment:
    ta_ids: tuple[str, ...]
    course_ids: tuple[str, ...]
    x: dict[tuple[int, int, int], int]  # nonzero hours only
    w: frozenset[tuple[int, int]]
    y: frozenset[tuple[int, int, int]]
    h: tuple[int, ...]
    n: dict[tuple[int, int], int]
    z: tuple[int, ...]

    def hours(self, s: int, c: int, t: int) -> int:
        return self.x.get((s, c, t), 0)

    def courses_of(self, s: int) -> int:
        return sum(1 for (si, _) in self.w if si == s)


def derive_assignment(instance: Instance, x: dict[tuple[int, int, int], int]) -> Assignment:
    """Build an Assignment from raw hours, recomputing all derived fields.

    Keys are (ta index, course index, task kind index) in the instance's
    canonical order; zero entries are dropped.
    """
    n_tas = len(instance.tas)
    n_courses = len(instance.courses)
    n_kinds = len(TASK_KINDS)
    clean: dict[tuple[int, int, int], int] = {}
    for (s, c, t), v in x.items():
        if not (0 <= s < n_tas and 0 <= c < n_courses and 0 <= t < n_kinds):
            raise IndexMismatch(f"x index {(s, c, t)} out of range")
        if not isinstance(v, int):
            raise IndexMismatch(f"x[{s},{c},{t}] = {v!r} is not an integer")
        if v < 0:
            raise IndexMismatch(f"x[{s},{c},{t}] = {v} is negative")
        if v > 0:
            clean[(s, c, t)] = v

    y = frozenset(clean)
    w = frozenset((s, c) for (s, c, _) in clean)
    h = [0] * n_tas
    n: dict[tuple[int, int], int] = {}
    for (s, c, t), v in clean.items():
        h[s] += v
        n[(c, t)] = n.get((c, t), 0) + 1

    taught = {
        (p.ta_id, p.course_id) for p in instance.pairs if p.taught_last_year
    }
    ta_ids = tuple(ta.id for ta in instance.tas)
    course_ids = tuple(instance.courses)
    z = [0] * n_tas
    for (s, c) in w:
        if (ta_ids[s], course_ids[c]) not in taught:
            z[s] += 1

    return Assignment(
        ta_ids=ta_ids,
        course_ids=course_ids,
        x=clean,
        w=w,
        y=y,
        h=tuple(h),
        n=n,
        z=tuple(z),
    )


def check_alignment(instance: Instance, assignment: Assignment) -> None:
    """Raise IndexMismatch unless the assignment indexes this instance."""
    if assignment.ta_ids != tuple(ta.id for ta in instance.tas):
        raise IndexMismatch("TA id sets differ between instance and assignment")
    if assignment.course_ids != tuple(instance.courses):
        raise IndexMismatch("course id sets differ between instance and assignment")


def serialize_solution(instance: Instance, assignment: Assignment, header: dict | None = None) -> str:
    """Deterministic solution text: every x variable, zeros included."""
    lines = [f"# instance {instance.label}"]
    for key in sorted((header or {})):
        lines.append(f"# {key} {header[key]}")
    for s in range(len(instance.tas)):
        for c in range(len(instance.courses)):
            for t in range(len(TASK_KINDS)):
                lines.append(f"{x_name(s, c, t)} {assignment.hours(s, c, t)}")
    return "\n".join(lines) + "\n"


def write_solution(instance: Instance, assignment: Assignment, path, header: dict | None = None) -> None:
    Path(path).write_text(serialize_solution(instance, assignment, header))


def parse_solution_text(text: str) -> dict[str, str]:
    """Parse ``name value`` lines into a raw string map (comments skipped)."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise IndexMismatch(f"line {lineno}: expected 'name value', got {raw!r}")
        values[parts[0]] = parts[1]
    return values


def load_solution(instance: Instance, path) -> Assignment:
    """Read a solution file against an instance and rebuild the Assignment."""
    values = parse_solution_text(Path(path).read_text())
    x: dict[tuple[int, int, int], int] = {}
    for name, raw in values.items():
        if not name.startswith("x_s"):
            continue
        try:
            s, c, t = (int(part[1:]) for part in name[2:].split("_"))
        except ValueError as exc:
            raise IndexMismatch(f"bad variable name {name!r}") from exc
        x[(s, c, t)] = _parse_int(name, raw)
    return derive_assignment(instance, x)


def _parse_int(name: str, raw: str) -> int:
    from .errors import NonIntegerValue

    try:
        return int(raw)
    except ValueError:
        pass
    try:
        as_float = float(raw)
    except ValueError as exc:
        raise NonIntegerValue(f"{name}: {raw!r} is not a number") from exc
    if as_float != int(as_float):
        raise NonIntegerValue(f"{name}: {raw!r} is not an integer")
    return int(as_float)
