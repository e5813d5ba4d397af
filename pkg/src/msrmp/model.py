"""Domain types, exact-decimal parsing and validation for risk-model documents.

All real-valued quantities are `fractions.Fraction` so that every comparison
made downstream (dominance, dedup, golden files) is exact.  A document decimal
like "0.725" parses to 29/40; a value like "5/6" is accepted too.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction

Rational = Fraction

DEFAULT_GOALS = [
    ("G1", "Confidentiality"),
    ("G2", "Integrity"),
    ("G3", "Availability"),
    ("G4", "Unlinkability & Data minimization"),
    ("G5", "Transparency"),
    ("G6", "Intervenability"),
]

DEFAULT_MITIGATION_LEVELS = (Fraction(0), Fraction(1, 2), Fraction(1))
DEFAULT_IMPACT_SCALE_MAX = 4


class ModelError(ValueError):
    """Raised when a risk-model document cannot be parsed into a valid model."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


def rat(value, where="value"):
    """Parse a document number into an exact Fraction.

    Accepts ints, decimal strings ("0.4"), and fraction strings ("5/6").
    Floats are rejected: binary floats silently corrupt exactness.
    """
    if isinstance(value, bool):
        raise ModelError(f"{where}: expected a number, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ModelError(
            f"{where}: floats are not accepted; write the value as a string"
        )
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ModelError(f"{where}: cannot parse {value!r} as a rational") from None
    raise ModelError(f"{where}: cannot parse {value!r} as a rational")


def decimal_str(q, places=4):
    """Render a Fraction as a decimal string, rounding half-to-even."""
    q = Fraction(q)
    scale = 10**places
    n, r = divmod(q.numerator * scale, q.denominator)
    # round half-even on the remainder
    double = 2 * r
    if double > q.denominator or (double == q.denominator and n % 2 == 1):
        n += 1
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, scale)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"


def exact_str(q):
    """Canonical exact rendering: a finite decimal when one exists, else p/q."""
    q = Fraction(q)
    den = q.denominator
    while den % 2 == 0:
        den //= 2
    while den % 5 == 0:
        den //= 5
    if den == 1:
        # finite decimal expansion
        places = 0
        d = q.denominator
        while d % 2 == 0:
            d //= 2
            places += 1
        twos = places
        d = q.denominator
        fives = 0
        while d % 5 == 0:
            d //= 5
            fives += 1
        places = max(twos, fives)
        return decimal_str(q, places) if places else str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class ProtectionCriterion:
    id: str
    name: str
    weight: Fraction


@dataclass(frozen=True)
class Stakeholder:
    id: str
    name: str
    criteria: tuple[ProtectionCriterion, ...]


@dataclass(frozen=True)
class Control:
    id: str
    name: str


@dataclass(frozen=True)
class Threat:
    id: str
    name: str
    goals: tuple[str, ...]
    controls: tuple[Control, ...]


@dataclass(frozen=True)
class Goal:
    id: str
    name: str


@dataclass(frozen=True)
class MitigationScale:
    levels: tuple[Fraction, ...] = DEFAULT_MITIGATION_LEVELS
    impact_scale_max: int = DEFAULT_IMPACT_SCALE_MAX


@dataclass(frozen=True)
class RiskModel:
    """A validated instance.  Threat and stakeholder order is the document
    order and defines every vector layout produced downstream."""

    stakeholders: tuple[Stakeholder, ...]
    threats: tuple[Threat, ...]
    goals: tuple[Goal, ...]
    # aversion[stakeholder_id][criterion_id][threat_id] -> int
    aversion: dict
    scale: MitigationScale = MitigationScale()
    # optional fixed assignment[threat_id][control_id] -> Fraction, for assess
    assignment: dict | None = None

    def stakeholder_ids(self):
        return [s.id for s in self.stakeholders]

    def threat_ids(self):
        return [t.id for t in self.threats]

    def stakeholder(self, sid):
        for s in self.stakeholders:
            if s.id == sid:
                return s
        raise KeyError(f"unknown stakeholder {sid!r}")

    def threat(self, tid):
        for t in self.threats:
            if t.id == tid:
                return t
        raise KeyError(f"unknown threat {tid!r}")


def _freeze_aversion(raw):
    return {s: {p: dict(ts) for p, ts in ps.items()} for s, ps in raw.items()}


def parse_model(document) -> RiskModel:
    """Parse a risk-model document (bytes, str, file object, or dict).

    Raises ModelError with one diagnostic per violated invariant.
    """
    if hasattr(document, "read"):
        document = document.read()
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ModelError(f"syntax error at line {exc.lineno} column {exc.colno}: "
                             f"{exc.msg}") from None
    if not isinstance(document, dict):
        raise ModelError("document root must be an object")

    errors = []

    def bad(msg):
        errors.append(msg)

    il_max = document.get("impact_scale_max", DEFAULT_IMPACT_SCALE_MAX)
    if not isinstance(il_max, int) or il_max < 1:
        bad("impact_scale_max: must be an integer >= 1")
        il_max = DEFAULT_IMPACT_SCALE_MAX

    raw_levels = document.get("mitigation_levels")
    if raw_levels is None:
        levels = DEFAULT_MITIGATION_LEVELS
    else:
        levels = []
        for i, lv in enumerate(raw_levels):
            try:
                levels.append(rat(lv, f"mitigation_levels[{i}]"))
            except ModelError as exc:
                errors.extend(exc.diagnostics)
        levels = tuple(levels)

    goals_doc = document.get("goals")
    if goals_doc is None:
        goals = tuple(Goal(i, n) for i, n in DEFAULT_GOALS)
    else:
        goals = tuple(
            Goal(str(g.get("id", "")), str(g.get("name", g.get("id", ""))))
            for g in goals_doc
        )
    goal_ids = [g.id for g in goals]
    if len(set(goal_ids)) != len(goal_ids):
        bad("goals: duplicate goal id")

    stakeholders = []
    for si, s in enumerate(document.get("stakeholders", [])):
        path = f"stakeholders[{si}]"
        sid = str(s.get("id", ""))
        if not sid:
            bad(f"{path}.id: missing")
        criteria = []
        for ci, c in enumerate(s.get("criteria", [])):
            cpath = f"{path}.criteria[{ci}]"
            cid = str(c.get("id", ""))
            if not cid:
                bad(f"{cpath}.id: missing")
            try:
                weight = rat(c.get("weight", 0), f"{cpath}.weight")
            except ModelError as exc:
                errors.extend(exc.diagnostics)
                weight = Fraction(0)
            criteria.append(ProtectionCriterion(cid, str(c.get("name", cid)), weight))
        stakeholders.append(Stakeholder(sid, str(s.get("name", sid)), tuple(criteria)))
    stakeholders = tuple(stakeholders)

    threats = []
    for ti, t in enumerate(document.get("threats", [])):
        path = f"threats[{ti}]"
        tid = str(t.get("id", ""))
        if not tid:
            bad(f"{path}.id: missing")
        controls = tuple(
            Control(str(c.get("id", "")), str(c.get("name", c.get("id", ""))))
            for c in t.get("controls", [])
        )
        tgoals = tuple(str(g) for g in t.get("goals", []))
        threats.append(Threat(tid, str(t.get("name", tid)), tgoals, controls))
    threats = tuple(threats)

    aversion = {}
    for sid, per_crit in document.get("aversion", {}).items():
        aversion[str(sid)] = {
            str(cid): {str(tid): v for tid, v in per_threat.items()}
            for cid, per_threat in per_crit.items()
        }

    assignment = None
    if "assignment" in document:
        assignment = {}
        for tid, per_ctrl in document["assignment"].items():
            assignment[str(tid)] = {}
            for cid, lv in per_ctrl.items():
                try:
                    assignment[str(tid)][str(cid)] = rat(
                        lv, f"assignment.{tid}.{cid}"
                    )
                except ModelError as exc:
                    errors.extend(exc.diagnostics)

    model = RiskModel(
        stakeholders=stakeholders,
        threats=threats,
        goals=goals,
        aversion=aversion,
        scale=MitigationScale(levels=levels, impact_scale_max=il_max),
        assignment=assignment,
    )
    errors.extend(validate_model(model))
    if errors:
        raise ModelError(errors)
    return model


def validate_model(m: RiskModel, goals_mode=False):
    """Return diagnostics for every violated invariant (empty when valid).

    Pass goals_mode=True to additionally require a non-empty goal set per
    threat, which the goal-weighted objective needs.
    """
    diags = []
    levels = m.scale.levels

    if not levels or Fraction(0) not in levels:
        diags.append("mitigation_levels: must contain 0")
    if levels and max(levels) <= 0:
        diags.append("mitigation_levels: maximum level must be > 0")
    if any(lv < 0 or lv > 1 for lv in levels):
        diags.append("mitigation_levels: levels must lie in [0, 1]")
    if any(a >= b for a, b in zip(levels, levels[1:])):
        diags.append("mitigation_levels: levels must be strictly increasing")
    if m.scale.impact_scale_max < 1:
        diags.append("impact_scale_max: must be >= 1")

    sids = [s.id for s in m.stakeholders]
    if len(set(sids)) != len(sids):
        diags.append("stakeholders: duplicate stakeholder id")
    if not m.stakeholders:
        diags.append("stakeholders: at least one stakeholder is required")
    for si, s in enumerate(m.stakeholders):
        cids = [c.id for c in s.criteria]
        if len(set(cids)) != len(cids):
            diags.append(f"stakeholders[{si}].criteria: duplicate criterion id")
        if not s.criteria:
            diags.append(f"stakeholders[{si}].criteria: at least one criterion required")
        else:
            total = sum((c.weight for c in s.criteria), Fraction(0))
            if total != 1:
                diags.append(
                    f"stakeholders[{si}].criteria: weights sum to "
                    f"{exact_str(total)}, expected exactly 1"
                )
        for ci, c in enumerate(s.criteria):
            if c.weight < 0 or c.weight > 1:
                diags.append(
                    f"stakeholders[{si}].criteria[{ci}].weight: must lie in [0, 1]"
                )

    tids = [t.id for t in m.threats]
    if len(set(tids)) != len(tids):
        diags.append("threats: duplicate threat id")
    if not m.threats:
        diags.append("threats: at least one threat is required")
    goal_ids = {g.id for g in m.goals}
    for ti, t in enumerate(m.threats):
        cids = [c.id for c in t.controls]
        if len(set(cids)) != len(cids):
            diags.append(f"threats[{ti}].controls: duplicate control id")
        for g in t.goals:
            if g not in goal_ids:
                diags.append(f"threats[{ti}].goals: unknown goal id {g!r}")
        if goals_mode and not t.goals:
            diags.append(
                f"threats[{ti}].goals: must be non-empty for goal-weighted scoring"
            )

    # aversion table: total over (s, p in criteria(s), T), values in range
    il_max = m.scale.impact_scale_max
    known = {(s.id, c.id) for s in m.stakeholders for c in s.criteria}
    for sid, per_crit in m.aversion.items():
        if sid not in set(sids):
            diags.append(f"aversion.{sid}: unknown stakeholder id")
            continue
        for cid, per_threat in per_crit.items():
            if (sid, cid) not in known:
                diags.append(f"aversion.{sid}.{cid}: unknown criterion id")
                continue
            for tid, v in per_threat.items():
                if tid not in set(tids):
                    diags.append(f"aversion.{sid}.{cid}.{tid}: unknown threat id")
                elif not isinstance(v, int) or isinstance(v, bool):
                    diags.append(f"aversion.{sid}.{cid}.{tid}: must be an integer")
                elif not 0 <= v <= il_max:
                    diags.append(
                        f"aversion.{sid}.{cid}.{tid}: value {v} outside [0, {il_max}]"
                    )
    for s in m.stakeholders:
        for c in s.criteria:
            for t in m.threats:
                if m.aversion.get(s.id, {}).get(c.id, {}).get(t.id) is None:
                    diags.append(f"aversion.{s.id}.{c.id}.{t.id}: missing entry")

    if m.assignment is not None:
        level_set = set(levels)
        for tid, per_ctrl in m.assignment.items():
            if tid not in set(tids):
                diags.append(f"assignment.{tid}: unknown threat id")
                continue
            threat = m.threat(tid)
            ctrl_ids = {c.id for c in threat.controls}
            for cid, lv in per_ctrl.items():
                if cid not in ctrl_ids:
                    diags.append(f"assignment.{tid}.{cid}: unknown control id")
                elif lv not in level_set:
                    diags.append(
                        f"assignment.{tid}.{cid}: level {exact_str(lv)} "
                        f"not in the mitigation scale"
                    )
            for cid in ctrl_ids:
                if cid not in per_ctrl:
                    diags.append(f"assignment.{tid}.{cid}: missing level")
        for t in m.threats:
            if t.id not in m.assignment:
                diags.append(f"assignment.{t.id}: missing threat")

    return diags


def render_model(m: RiskModel) -> dict:
    """Canonical document form of a model; parse(render(m)) == m."""
    doc = {
        "impact_scale_max": m.scale.impact_scale_max,
        "mitigation_levels": [exact_str(lv) for lv in m.scale.levels],
        "goals": [{"id": g.id, "name": g.name} for g in m.goals],
        "stakeholders": [
            {
                "id": s.id,
                "name": s.name,
                "criteria": [
                    {"id": c.id, "name": c.name, "weight": exact_str(c.weight)}
                    for c in s.criteria
                ],
            }
            for s in m.stakeholders
        ],
        "threats": [
            {
                "id": t.id,
                "name": t.name,
                "goals": list(t.goals),
                "controls": [{"id": c.id, "name": c.name} for c in t.controls],
            }
            for t in m.threats
        ],
        "aversion": {
            s.id: {
                c.id: {t.id: m.aversion[s.id][c.id][t.id] for t in m.threats}
                for c in s.criteria
            }
            for s in m.stakeholders
        },
    }
    if m.assignment is not None:
        doc["assignment"] = {
            t.id: {c.id: exact_str(m.assignment[t.id][c.id]) for c in t.controls}
            for t in m.threats
        }
    return doc


def with_assignment(m: RiskModel, assignment) -> RiskModel:
    """A copy of the model carrying the given fixed assignment."""
    return replace(m, assignment=assignment)
