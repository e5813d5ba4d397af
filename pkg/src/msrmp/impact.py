"""Scoring formulas: impact levels, observation weights, threat criticality,
and the two overall-impact-residue objectives (criteria mode and goal-weighted
mode).  Everything is computed over exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import RiskModel

MODES = ("criteria", "goals")


def impact_level(m: RiskModel, sid, tid) -> Fraction:
    """Criteria-weighted, scale-normalized aversion of stakeholder sid to
    threat tid: sum of aversion * criterion weight, divided by the maximum
    impact level."""
    s = m.stakeholder(sid)
    m.threat(tid)  # raises on unknown id
    total = Fraction(0)
    for c in s.criteria:
        total += Fraction(m.aversion[sid][c.id][tid]) * c.weight
    return total / m.scale.impact_scale_max


def impact_profile(m: RiskModel) -> dict:
    """impact_profile(m)[sid][tid] -> impact level, for all pairs."""
    return {
        s.id: {t.id: impact_level(m, s.id, t.id) for t in m.threats}
        for s in m.stakeholders
    }


def affected_goal_count(m: RiskModel, tid) -> int:
    return len(m.threat(tid).goals)


def observation_weight(m: RiskModel, tid) -> Fraction:
    """Fraction of all threat-to-goal incidences attributed to this threat."""
    total = sum(len(t.goals) for t in m.threats)
    if total == 0:
        raise ValueError("no threat affects any goal; observation weights undefined")
    return Fraction(affected_goal_count(m, tid), total)


def goal_threat_counts(m: RiskModel) -> dict:
    """Number of threats affecting each goal."""
    counts = {g.id: 0 for g in m.goals}
    for t in m.threats:
        for g in t.goals:
            counts[g] += 1
    return counts


def goal_spread(m: RiskModel, tid) -> Fraction:
    """Sum over the threat's goals of 1 / (threats affecting that goal).

    This is the per-threat factor that makes the double sum over goals
    collapse to a single sum over threats (see objective_goals).
    """
    counts = goal_threat_counts(m)
    return sum((Fraction(1, counts[g]) for g in m.threat(tid).goals), Fraction(0))


def _residue_vector(m, x):
    """Normalize a residue vector given as a dict or sequence to a dict."""
    tids = m.threat_ids()
    if isinstance(x, dict):
        missing = [t for t in tids if t not in x]
        if missing:
            raise KeyError(f"residue vector missing threats {missing}")
        return {t: Fraction(x[t]) for t in tids}
    x = list(x)
    if len(x) != len(tids):
        raise ValueError(f"residue vector has {len(x)} entries, expected {len(tids)}")
    return {t: Fraction(v) for t, v in zip(tids, x)}


def ntc(m: RiskModel, x) -> dict:
    """Normalized threat criticality: OW_T * x_T, renormalized to sum 1."""
    xv = _residue_vector(m, x)
    ows = {t.id: observation_weight(m, t.id) for t in m.threats}
    denom = sum((ows[t] * xv[t] for t in xv), Fraction(0))
    if denom == 0:
        raise ValueError("normalization denominator is zero for this residue vector")
    return {t: ows[t] * xv[t] / denom for t in xv}


def objective_criteria(m: RiskModel, x) -> tuple:
    """Linear objective: per stakeholder, sum of impact level * residue.

    No 1/|T| prefactor: the Pareto set is invariant under positive constant
    factors and the worked arithmetic of the source tables carries none.
    """
    xv = _residue_vector(m, x)
    profile = impact_profile(m)
    return tuple(
        sum((profile[s.id][t] * xv[t] for t in xv), Fraction(0))
        for s in m.stakeholders
    )


def objective_goals(m: RiskModel, x) -> tuple:
    """Goal-weighted objective: per stakeholder, sum over goals of the average
    NTC-weighted impact of the threats affecting that goal.  Goals affected by
    no threat are skipped; a threat affecting no goal is an error."""
    bad = [t.id for t in m.threats if not t.goals]
    if bad:
        raise ValueError(f"threats {bad} affect no goal; goal-weighted mode undefined")
    xv = _residue_vector(m, x)
    crit = ntc(m, xv)
    profile = impact_profile(m)
    counts = goal_threat_counts(m)
    out = []
    for s in m.stakeholders:
        total = Fraction(0)
        for g in m.goals:
            if counts[g.id] == 0:
                continue
            inner = sum(
                (crit[t.id] * profile[s.id][t.id]
                 for t in m.threats if g.id in t.goals),
                Fraction(0),
            )
            total += inner / counts[g.id]
        out.append(total)
    return tuple(out)


def objective_goals_ratio(m: RiskModel, x) -> tuple:
    """Algebraically equivalent ratio form of objective_goals:
    (sum_T OW*g*i_s*x) / (sum_T OW*x).  Kept as an independent route and
    property-tested against the direct double sum."""
    bad = [t.id for t in m.threats if not t.goals]
    if bad:
        raise ValueError(f"threats {bad} affect no goal; goal-weighted mode undefined")
    xv = _residue_vector(m, x)
    profile = impact_profile(m)
    ows = {t.id: observation_weight(m, t.id) for t in m.threats}
    spreads = {t.id: goal_spread(m, t.id) for t in m.threats}
    denom = sum((ows[t] * xv[t] for t in xv), Fraction(0))
    if denom == 0:
        raise ValueError("normalization denominator is zero for this residue vector")
    return tuple(
        sum((ows[t] * spreads[t] * profile[s.id][t] * xv[t] for t in xv), Fraction(0))
        / denom
        for s in m.stakeholders
    )


def objective(m: RiskModel, x, mode="goals") -> tuple:
    if mode == "criteria":
        return objective_criteria(m, x)
    if mode == "goals":
        return objective_goals_ratio(m, x)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class AssessmentReport:
    mode: str
    residues: dict              # threat id -> Fraction
    objectives: tuple           # per stakeholder, model order
    ntc: dict | None            # threat id -> Fraction (goals mode only)
    goal_averages: dict | None  # goal id -> {stakeholder id -> Fraction}


def assess(m: RiskModel, assignment=None, mode="goals") -> AssessmentReport:
    """Evaluate a fixed per-threat assignment: residues, criticality,
    per-goal averages and the overall objectives."""
    from .residue import residue_of_assignment

    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if assignment is None:
        assignment = m.assignment
    if assignment is None:
        raise ValueError("no assignment given and the model carries none")

    residues = {}
    for t in m.threats:
        per_ctrl = assignment.get(t.id)
        if per_ctrl is None:
            raise ValueError(f"assignment missing threat {t.id!r}")
        residues[t.id] = residue_of_assignment(m, t.id, per_ctrl)

    crit = None
    goal_avgs = None
    if mode == "goals":
        crit = ntc(m, residues)
        profile = impact_profile(m)
        counts = goal_threat_counts(m)
        goal_avgs = {}
        for g in m.goals:
            if counts[g.id] == 0:
                continue
            goal_avgs[g.id] = {
                s.id: sum(
                    (crit[t.id] * profile[s.id][t.id]
                     for t in m.threats if g.id in t.goals),
                    Fraction(0),
                ) / counts[g.id]
                for s in m.stakeholders
            }
        objectives = tuple(
            sum((goal_avgs[g][s.id] for g in goal_avgs), Fraction(0))
            for s in m.stakeholders
        )
    else:
        objectives = objective_criteria(m, residues)

    return AssessmentReport(
        mode=mode,
        residues=residues,
        objectives=objectives,
        ntc=crit,
        goal_averages=goal_avgs,
    )
