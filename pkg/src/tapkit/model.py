"""Compile an instance into a normalized integer-linear constraint system.

The compiled form (ModelIR) is the single interchange structure between
the built-in solver, the brute-force oracle, and the external-format
encoders. It contains:

* dense integer/binary variables for course flags w[s,c], task flags
  y[s,c,t], hours x[s,c,t], totals h[s], staffing counts n[c,t], and
  new-course counts z[s] (tags double as stable external names);
* hard rows tagged with their constraint family (Eq1..Eq13 plus the
  linking and channeling rows that tie n/y/w to x);
* weighted soft terms (families Eq14..Eq20), each carrying the clause
  itself plus the linearized rows tying it to a realization variable:
  a violation indicator (indicator mode) or an excess slack
  (magnitude mode).

Forbidden pairs and absent tasks are compiled as domain fixings to
zero; fixed-at-zero variables are folded out of every row, which never
changes the optimum. Rows that fold to a constant truth are dropped;
rows that fold to a constant falsehood are kept with empty terms so an
unsatisfiable model still builds (infeasibility is the solver's
verdict, not the compiler's).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from . import assignment as names
from .errors import BigMOverflow
from .instance import ADMIN, TASK_KINDS, TASK_KIND_INDEX, Instance, serialize

INT_BUDGET = 2**62

SOFT_FAMILIES = ("Eq14", "Eq15", "Eq16", "Eq17", "Eq18", "Eq19", "Eq20")


@dataclass(frozen=True)
class Variable:
    id: int
    kind: str  # "binary" | "int"
    lo: int
    hi: int
    tag: str

    @property
    def fixed_zero(self) -> bool:
        return self.lo == 0 and self.hi == 0


@dataclass(frozen=True)
class LinearConstraint:
    terms: tuple[tuple[int, int], ...]  # (coefficient, variable id)
    relation: str  # "<=" | ">=" | "="
    rhs: int
    origin: str


@dataclass(frozen=True)
class SoftTerm:
    family: str
    subject: tuple[int, ...]
    weight: int
    clause: tuple[LinearConstraint, ...]
    realization: int
    link_rows: tuple[LinearConstraint, ...]


@dataclass(frozen=True)
class PinHours:
    ta_id: str
    course_id: str
    task_kind: str
    hours: int


@dataclass(frozen=True)
class PinCourse:
    ta_id: str
    course_id: str


@dataclass
class Shape:
    """Structured view of the compiled instance.

    Used by the structured search engine, the warm-start heuristic, and
    assignment reconstruction; the row lists above stay authoritative for
    generic consumers (oracle, encoders).
    """

    ta_ids: tuple[str, ...]
    course_ids: tuple[str, ...]
    task_kinds: tuple[str, ...]
    year: tuple[int, ...]
    theta: tuple[int, ...]
    tau: tuple[tuple[int, ...], ...]  # [course][task kind]
    rho: tuple[tuple[int, ...], ...]
    xi: frozenset[tuple[int, int]]
    kappa: frozenset[tuple[int, int]]
    pref: dict[tuple[int, int], int]
    bounds: object
    weights: object
    pins_hours: dict[tuple[int, int, int], int]
    pins_course: frozenset[tuple[int, int]]
    w_id: list[list[int]]
    y_id: list[list[list[int]]]
    x_id: list[list[list[int]]]
    h_id: list[int]
    n_id: list[list[int]]
    z_id: list[int]

    @property
    def n_tas(self) -> int:
        return len(self.ta_ids)

    @property
    def n_courses(self) -> int:
        return len(self.course_ids)

    @property
    def n_kinds(self) -> int:
        return len(self.task_kinds)

    def total_demand(self) -> int:
        return sum(sum(row) for row in self.tau)


@dataclass
class ModelIR:
    variables: list[Variable]
    hard: list[LinearConstraint]
    softs: list[SoftTerm]
    sense: str
    provenance: dict
    shape: Shape

    def objective_terms(self) -> list[tuple[int, int]]:
        return [(t.weight, t.realization) for t in self.softs]

    def all_rows(self) -> list[LinearConstraint]:
        rows = list(self.hard)
        for term in self.softs:
            rows.extend(term.link_rows)
        return rows


def _bound_range(terms, variables) -> tuple[int, int]:
    lo = hi = 0
    for coef, vid in terms:
        v = variables[vid]
        a, b = coef * v.lo, coef * v.hi
        lo += min(a, b)
        hi += max(a, b)
    return lo, hi


def linearize_indicator(condition: int, body: LinearConstraint, variables, big_m: int | None = None):
    """Rows equivalent to (condition = 1 implies body) for a binary condition.

    The relaxation constant is derived from the body's variable bounds
    (the tightest valid value), never a magic number; an explicit big_m
    may widen but not narrow it. Returns no rows when the body already
    holds over the whole box.
    """
    rows = []
    lo, hi = _bound_range(body.terms, variables)

    def tight(needed: int) -> int | None:
        if needed <= 0:
            return None
        if needed > INT_BUDGET:
            raise BigMOverflow(f"big-M {needed} exceeds integer budget for {body.origin}")
        if big_m is not None:
            if big_m < needed:
                raise ValueError(f"big_m {big_m} below required {needed} for {body.origin}")
            return big_m
        return needed

    if body.relation in ("<=", "="):
        m = tight(hi - body.rhs)
        if m is not None:
            rows.append(LinearConstraint(body.terms + ((m, condition),), "<=", body.rhs + m, body.origin))
    if body.relation in (">=", "="):
        m = tight(body.rhs - lo)
        if m is not None:
            rows.append(LinearConstraint(body.terms + ((-m, condition),), ">=", body.rhs - m, body.origin))
    return rows


class _Builder:
    def __init__(self, instance: Instance, pins):
        self.instance = instance
        self.variables: list[Variable] = []
        self.hard: list[LinearConstraint] = []
        self.softs: list[SoftTerm] = []
        self.pins = tuple(pins)

    def new_var(self, kind, lo, hi, tag) -> int:
        vid = len(self.variables)
        self.variables.append(Variable(vid, kind, lo, hi, tag))
        return vid

    def fix(self, vid: int, value: int) -> None:
        v = self.variables[vid]
        self.variables[vid] = Variable(v.id, v.kind, value, value, v.tag)

    def dead(self, vid: int) -> bool:
        return self.variables[vid].fixed_zero

    def row(self, terms, relation, rhs, origin, keep_constant_false=True):
        live = tuple((c, vid) for c, vid in terms if c != 0 and not self.dead(vid))
        if not live:
            satisfied = {"<=": 0 <= rhs, ">=": 0 >= rhs, "=": rhs == 0}[relation]
            if satisfied or not keep_constant_false:
                return None
        constraint = LinearConstraint(live if live else (), relation, rhs, origin)
        self.hard.append(constraint)
        return constraint


def build(instance: Instance, pins=()) -> ModelIR:
    """Compile a validated instance (plus optional session pins) to ModelIR."""
    b = _Builder(instance, pins)
    inst = instance
    S, C, T = len(inst.tas), len(inst.courses), len(TASK_KINDS)
    ta_idx = inst.ta_index()
    course_idx = inst.course_index()

    tau = [[0] * T for _ in range(C)]
    rho = [[0] * T for _ in range(C)]
    for task in inst.tasks:
        c, t = course_idx[task.course_id], TASK_KIND_INDEX[task.task_kind]
        tau[c][t] = task.total_hours
        rho[c][t] = task.required_tas

    xi, kappa, pref = set(), set(), {}
    for p in inst.pairs:
        s, c = ta_idx[p.ta_id], course_idx[p.course_id]
        if p.forbidden:
            xi.add((s, c))
        if p.taught_last_year:
            kappa.add((s, c))
        if p.preference:
            pref[(s, c)] = p.preference

    pins_hours: dict[tuple[int, int, int], int] = {}
    pins_course: set[tuple[int, int]] = set()
    for pin in pins:
        s, c = ta_idx[pin.ta_id], course_idx[pin.course_id]
        if isinstance(pin, PinHours):
            pins_hours[(s, c, TASK_KIND_INDEX[pin.task_kind])] = pin.hours
        else:
            pins_course.add((s, c))

    theta = tuple(ta.target_hours for ta in inst.tas)
    total_tau = sum(sum(r) for r in tau)
    bounds, weights = inst.bounds, inst.weights
    eps = bounds.min_task_hours

    # --- variables (block order fixes external names) ---
    w_id = [[b.new_var("binary", 0, 1, names.w_name(s, c)) for c in range(C)] for s in range(S)]
    y_id = [[[b.new_var("binary", 0, 1, names.y_name(s, c, t)) for t in range(T)] for c in range(C)] for s in range(S)]
    x_id = [[[b.new_var("int", 0, tau[c][t], names.x_name(s, c, t)) for t in range(T)] for c in range(C)] for s in range(S)]
    h_id = [b.new_var("int", 0, total_tau, names.h_name(s)) for s in range(S)]
    n_id = [[b.new_var("int", 0, S if tau[c][t] > 0 else 0, names.n_name(c, t)) for t in range(T)] for c in range(C)]
    z_id = [b.new_var("int", 0, C, names.z_name(s)) for s in range(S)]

    # Eq1 (forbidden pairs) and Eq5 (absent tasks) become domain fixings.
    for s in range(S):
        for c in range(C):
            for t in range(T):
                if tau[c][t] == 0 or (s, c) in xi:
                    b.fix(x_id[s][c][t], 0)
                    b.fix(y_id[s][c][t], 0)
            if (s, c) in xi:
                b.fix(w_id[s][c], 0)

    # Session pins: hour pins fix x (and the matching task flag).
    for (s, c, t), v in pins_hours.items():
        if b.dead(x_id[s][c][t]) and v > 0:
            b.row((), "=", v, f"pin[{s},{c},{t}]")
            continue
        b.fix(x_id[s][c][t], v)
        b.fix(y_id[s][c][t], 1 if v > 0 else 0)

    def live(vid):
        return not b.dead(vid)

    # Eq2: per-TA total hours.
    for s in range(S):
        terms = [(1, h_id[s])]
        terms += [(-1, x_id[s][c][t]) for c in range(C) for t in range(T) if live(x_id[s][c][t])]
        b.row(terms, "=", 0, f"Eq2[{s}]")

    # Eq3/channel: task flags imply course flags and vice versa.
    for s in range(S):
        for c in range(C):
            for t in range(T):
                if live(y_id[s][c][t]):
                    b.row([(1, y_id[s][c][t]), (-1, w_id[s][c])], "<=", 0, f"Eq3[{s},{c},{t}]")
            ys = [(-1, y_id[s][c][t]) for t in range(T) if live(y_id[s][c][t])]
            if live(w_id[s][c]):
                b.row([(1, w_id[s][c])] + ys, "<=", 0, f"channel[{s},{c}]")

    # Eq4: new-course counters.
    for s in range(S):
        terms = [(1, z_id[s])]
        terms += [
            (-1, w_id[s][c])
            for c in range(C)
            if (s, c) not in kappa and live(w_id[s][c])
        ]
        b.row(terms, "=", 0, f"Eq4[{s}]")

    # Eq6: task hours must be covered exactly.
    for c in range(C):
        for t in range(T):
            if tau[c][t] > 0:
                terms = [(1, x_id[s][c][t]) for s in range(S) if live(x_id[s][c][t])]
                b.row(terms, "=", tau[c][t], f"Eq6[{c},{t}]")

    # Eq7: conditional per-assignment hour window (also channels x>=1 <-> y=1).
    for s in range(S):
        for c in range(C):
            for t in range(T):
                if not live(x_id[s][c][t]):
                    continue
                low = max(1, min(tau[c][t], eps))
                b.row([(1, x_id[s][c][t]), (-low, y_id[s][c][t])], ">=", 0, f"Eq7[{s},{c},{t}]")
                b.row([(1, x_id[s][c][t]), (-tau[c][t], y_id[s][c][t])], "<=", 0, f"Eq7[{s},{c},{t}]")

    # linking + Eq8: staffing counts.
    for c in range(C):
        for t in range(T):
            if tau[c][t] > 0:
                terms = [(1, n_id[c][t])]
                terms += [(-1, y_id[s][c][t]) for s in range(S) if live(y_id[s][c][t])]
                b.row(terms, "=", 0, f"linking[{c},{t}]")
            if rho[c][t] >= 1:
                b.row([(1, n_id[c][t])], ">=", rho[c][t], f"Eq8[{c},{t}]")

    # Eq9: hard workload deviation window, as two inequalities.
    lam_h = bounds.hard_dev
    for s in range(S):
        b.row([(1, h_id[s])], "<=", theta[s] + lam_h, f"Eq9[{s}]")
        b.row([(1, h_id[s])], ">=", theta[s] - lam_h, f"Eq9[{s}]")

    # Eq10/Eq11/Eq12/Eq13: course-count, staffing, and continuity caps.
    for s in range(S):
        terms = [(1, w_id[s][c]) for c in range(C) if live(w_id[s][c])]
        if terms:
            b.row(terms, "<=", bounds.hard_courses_per_ta, f"Eq10[{s}]")
    for c in range(C):
        terms = [(1, w_id[s][c]) for s in range(S) if live(w_id[s][c])]
        if terms:
            b.row(terms, "<=", bounds.hard_tas_per_course, f"Eq11[{c}]")
    for s in range(S):
        b.row([(1, z_id[s])], "<=", bounds.hard_new_courses, f"Eq12[{s}]")
    admin_t = TASK_KINDS.index(ADMIN)
    for c in range(C):
        if tau[c][admin_t] > 0:
            b.row([(1, n_id[c][admin_t])], "<=", 1, f"Eq13[{c}]")

    # Course pins: at least one task of the course must be taken.
    for (s, c) in sorted(pins_course):
        terms = [(1, y_id[s][c][t]) for t in range(T) if live(y_id[s][c][t])]
        b.row(terms, ">=", 1, f"pin[{s},{c}]")

    # --- soft terms ---
    mode = weights.penalty_mode
    lam_s = bounds.soft_dev

    def clause_row(terms, relation, rhs, origin):
        live_terms = tuple((co, vid) for co, vid in terms if co != 0 and not b.dead(vid))
        return LinearConstraint(live_terms, relation, rhs, origin)

    def add_soft(family, subject, weight, clause_rows):
        origin = f"{family}[{','.join(str(i) for i in subject)}]"
        clause_rows = tuple(clause_rows)
        needed = []  # (relation-normalized row, tight M)
        for row in clause_rows:
            lo, hi = _bound_range(row.terms, b.variables)
            if row.relation in ("<=", "="):
                m = hi - row.rhs
                if m > 0:
                    needed.append((row, "<=", m))
            if row.relation in (">=", "="):
                m = row.rhs - lo
                if m > 0:
                    needed.append((row, ">=", m))
        if not needed:
            return  # clause holds over the whole box; nothing to charge
        for _, _, m in needed:
            if m > INT_BUDGET:
                raise BigMOverflow(f"big-M {m} exceeds integer budget for {origin}")
        if mode == "indicator":
            real = b.new_var("binary", 0, 1, f"v{family[2:]}_{'_'.join(_sub_names(family, subject))}")
            links = tuple(
                LinearConstraint(row.terms + ((-m if rel == "<=" else m, real),), rel, row.rhs, origin)
                for row, rel, m in needed
            )
        else:
            cap = max(m for _, _, m in needed)
            real = b.new_var("int", 0, cap, f"u{family[2:]}_{'_'.join(_sub_names(family, subject))}")
            links = tuple(
                LinearConstraint(row.terms + ((-1 if rel == "<=" else 1, real),), rel, row.rhs, origin)
                for row, rel, m in needed
            )
        b.softs.append(SoftTerm(family, tuple(subject), weight, clause_rows, real, links))

    for s in range(S):
        if inst.tas[s].year >= 5:
            add_soft("Eq14", (s,), weights.w_target5,
                     [clause_row([(1, h_id[s])], "=", theta[s], f"Eq14[{s}]")])
    for s in range(S):
        add_soft("Eq15", (s,), weights.w_soft_dev, [
            clause_row([(1, h_id[s])], "<=", theta[s] + lam_s, f"Eq15[{s}]"),
            clause_row([(1, h_id[s])], ">=", theta[s] - lam_s, f"Eq15[{s}]"),
        ])
    for s in range(S):
        add_soft("Eq16", (s,), weights.w_soft_new,
                 [clause_row([(1, z_id[s])], "<=", bounds.soft_new_courses, f"Eq16[{s}]")])
    for c in range(C):
        for t in range(T):
            if tau[c][t] > 0:
                add_soft("Eq17", (c, t), weights.w_soft_staff,
                         [clause_row([(1, n_id[c][t])], "<=",
                                     rho[c][t] + bounds.soft_extra_tas_per_task, f"Eq17[{c},{t}]")])
    for s in range(S):
        terms = [(1, w_id[s][c]) for c in range(C)]
        add_soft("Eq18", (s,), weights.w_soft_courses,
                 [clause_row(terms, "<=", bounds.soft_courses_per_ta, f"Eq18[{s}]")])
    for (s, c), p in sorted(pref.items()):
        if p == 1:
            add_soft("Eq19", (s, c), weights.w_pref_positive,
                     [clause_row([(1, w_id[s][c])], ">=", 1, f"Eq19[{s},{c}]")])
        else:
            add_soft("Eq20", (s, c), weights.w_pref_negative,
                     [clause_row([(1, w_id[s][c])], "<=", 0, f"Eq20[{s},{c}]")])

    shape = Shape(
        ta_ids=tuple(ta.id for ta in inst.tas),
        course_ids=tuple(inst.courses),
        task_kinds=TASK_KINDS,
        year=tuple(ta.year for ta in inst.tas),
        theta=theta,
        tau=tuple(tuple(r) for r in tau),
        rho=tuple(tuple(r) for r in rho),
        xi=frozenset(xi),
        kappa=frozenset(kappa),
        pref=pref,
        bounds=bounds,
        weights=weights,
        pins_hours=pins_hours,
        pins_course=frozenset(pins_course),
        w_id=w_id,
        y_id=y_id,
        x_id=x_id,
        h_id=h_id,
        n_id=n_id,
        z_id=z_id,
    )
    digest = hashlib.sha256(
        (serialize(inst) + repr(sorted(pins_hours.items())) + repr(sorted(pins_course))).encode()
    ).hexdigest()[:12]
    return ModelIR(
        variables=b.variables,
        hard=b.hard,
        softs=b.softs,
        sense="min",
        provenance={"label": inst.label, "config_hash": digest},
        shape=shape,
    )


def _sub_names(family: str, subject: tuple[int, ...]) -> list[str]:
    if family == "Eq17":
        return [f"c{subject[0]}", f"t{subject[1]}"]
    if family in ("Eq19", "Eq20"):
        return [f"s{subject[0]}", f"c{subject[1]}"]
    return [f"s{subject[0]}"]


@dataclass(frozen=True)
class ModelStats:
    variables_total: int
    variables_by_family: dict
    constraints_total: int
    constraints_by_origin: dict
    softs_by_family: dict


def origin_family(origin: str) -> str:
    return origin.split("[", 1)[0]


def model_stats(ir: ModelIR) -> ModelStats:
    """Total and per-family counts of variables, rows, and soft terms."""
    var_fams: dict[str, int] = {}
    for v in ir.variables:
        fam = v.tag.split("_", 1)[0]
        var_fams[fam] = var_fams.get(fam, 0) + 1
    row_fams: dict[str, int] = {}
    for row in ir.hard:
        fam = origin_family(row.origin)
        row_fams[fam] = row_fams.get(fam, 0) + 1
    soft_fams: dict[str, int] = {}
    for term in ir.softs:
        soft_fams[term.family] = soft_fams.get(term.family, 0) + 1
    return ModelStats(
        variables_total=len(ir.variables),
        variables_by_family=var_fams,
        constraints_total=len(ir.hard),
        constraints_by_origin=row_fams,
        softs_by_family=soft_fams,
    )
