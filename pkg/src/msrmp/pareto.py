"""Dominance, non-dominated front extraction, the three solving strategies
(upfront, chunk-collect, chunk-carry), and the risk-appetite constrained
variant.

Internally a feasible point is carried as an integer pair (nums, den) with
objective component s equal to nums[s] / den and den > 0; the scaling is
uniform per model and mode, so dominance can be decided with integer
cross-multiplications instead of Fraction arithmetic.  Public results are
exact Fractions.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from . import impact
from .model import RiskModel
from .residue import count_raw, residue_space, vector_at

STRATEGIES = ("upfront", "chunk-collect", "chunk-carry")


class SolveTimeout(Exception):
    """Raised when a solve exceeds its deadline (used by the bench harness)."""


@dataclass(frozen=True)
class SolveConfig:
    mode: str = "goals"
    strategy: str = "upfront"
    chunk: int = 4096
    # lower bounds on the objective per stakeholder id (risk appetite)
    bounds: dict = field(default_factory=dict)
    exclusive_bounds: bool = False
    oracle_cap: int = 10**6
    deadline: float | None = None  # time.monotonic() value

    def __post_init__(self):
        if self.mode not in impact.MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.chunk < 1:
            raise ValueError("chunk size must be >= 1")
        if any(Fraction(v) < 0 for v in self.bounds.values()):
            raise ValueError("risk-appetite bounds must be nonnegative")


@dataclass(frozen=True)
class FrontEntry:
    objective: tuple          # per stakeholder, exact Fractions
    residues: tuple           # residue vectors achieving it, enumeration order

    @property
    def rmp_residue_count(self):
        return len(self.residues)


@dataclass(frozen=True)
class ParetoFront:
    entries: tuple[FrontEntry, ...]   # sorted lexicographically by objective

    @property
    def feasible(self):
        return bool(self.entries)

    def objectives(self):
        return [e.objective for e in self.entries]

    def __len__(self):
        return len(self.entries)


def dominates(p, q) -> bool:
    """True iff p is componentwise <= q with at least one strict component."""
    if len(p) != len(q):
        raise ValueError(f"dimension mismatch: {len(p)} vs {len(q)}")
    return all(a <= b for a, b in zip(p, q)) and any(a < b for a, b in zip(p, q))


# key comparison outcomes
_EQ, _DOM, _DOMBY, _INC = range(4)


def _compare_keys(p, q):
    """Compare two (nums, den) ratio points; den > 0 on both sides."""
    pn, pd = p
    qn, qd = q
    p_le = p_ge = True
    for a, b in zip(pn, qn):
        left = a * qd
        right = b * pd
        if left < right:
            p_ge = False
        elif left > right:
            p_le = False
    if p_le and p_ge:
        return _EQ
    if p_le:
        return _DOM
    if p_ge:
        return _DOMBY
    return _INC


def _add_point(front, key, payload):
    """Insert one point into a mutable front (list of [key, payloads]).

    payload is a list of opaque achieving witnesses (ordinals or residue
    vectors); equal points merge payloads in arrival order."""
    for entry in front:
        cmp = _compare_keys(entry[0], key)
        if cmp == _EQ:
            entry[1].extend(payload)
            return
        if cmp == _DOM:
            return
    front[:] = [e for e in front if _compare_keys(key, e[0]) != _DOM]
    front.append([key, list(payload)])


def _cull(points):
    """Simple cull: one pass over (key, payloads) pairs in arrival order."""
    front = []
    for key, payload in points:
        _add_point(front, key, payload)
    return front


def front(points) -> ParetoFront:
    """Exact non-dominated set of a finite stream of
    (objective_point, residue_vector) pairs; equal points merge."""
    culled = _cull(
        ((tuple(Fraction(v) for v in obj), 1), [tuple(res)]) for obj, res in points
    )
    entries = [
        FrontEntry(objective=key[0], residues=tuple(dict.fromkeys(payload)))
        for key, payload in culled
    ]
    entries.sort(key=lambda e: e.objective)
    return ParetoFront(tuple(entries))


class _Evaluator:
    """Integer-scaled objective evaluation over residue-space digits."""

    def __init__(self, m: RiskModel, mode, space):
        self.model = m
        self.mode = mode
        self.space = space
        # scale all residues to a common integer grid
        dens = [x.denominator for rs in space.sets for x in rs.residues]
        scale = lcm(*dens) if dens else 1
        self.xs = [
            [int(x * scale) for x in rs.residues] for rs in space.sets
        ]
        profile = impact.impact_profile(m)
        tids = m.threat_ids()
        sids = m.stakeholder_ids()
        if mode == "criteria":
            coeffs = [[profile[s][t] for t in tids] for s in sids]
            k = lcm(*(c.denominator for row in coeffs for c in row))
            self.coef = [[int(c * k) for c in row] for row in coeffs]
            self.cden = None
            self.d0 = k * scale
        else:
            ows = {t: impact.observation_weight(m, t) for t in tids}
            spreads = {t: impact.goal_spread(m, t) for t in tids}
            num = [[ows[t] * spreads[t] * profile[s][t] for t in tids] for s in sids]
            den = [ows[t] for t in tids]
            k1 = lcm(*(b.denominator for row in num for b in row))
            k2 = lcm(*(c.denominator for c in den))
            # fold constants so that the objective is exactly nums/den
            self.coef = [[int(b * k1) * k2 for b in row] for row in num]
            self.cden = [int(c * k2) * k1 for c in den]
            self.d0 = None

    def key_at(self, digits):
        xs = self.xs
        x = [xs[i][d] for i, d in enumerate(digits)]
        if self.cden is None:
            den = self.d0
        else:
            den = sum(c * v for c, v in zip(self.cden, x))
        nums = tuple(sum(a * v for a, v in zip(row, x)) for row in self.coef)
        return nums, den

    def objective_of(self, key):
        nums, den = key
        return tuple(Fraction(n, den) for n in nums)

    def bound_tests(self, bounds, exclusive):
        """Compile bounds into (stakeholder index, p, q) integer tests:
        keep the point iff nums[i] * q >= p * den (or > when exclusive)."""
        sids = self.model.stakeholder_ids()
        tests = []
        for sid, lb in bounds.items():
            if sid not in sids:
                raise KeyError(f"unknown stakeholder {sid!r} in bounds")
            lb = Fraction(lb)
            tests.append((sids.index(sid), lb.numerator, lb.denominator))
        return tests, exclusive


def _feasible_keys(ev, space, tests, exclusive, deadline, check_every=8192):
    """Yield (key, ordinal) over the whole space in mixed-radix order,
    filtered by the risk-appetite bounds."""
    radices = space.radices()
    nt = len(radices)
    digits = [0] * nt
    total = space.size
    key_at = ev.key_at
    ordinal = 0
    while True:
        if deadline is not None and ordinal % check_every == 0:
            if time.monotonic() > deadline:
                raise SolveTimeout
        key = key_at(digits)
        ok = True
        if tests:
            nums, den = key
            for si, p, q in tests:
                lhs = nums[si] * q
                rhs = p * den
                if (lhs <= rhs) if exclusive else (lhs < rhs):
                    ok = False
                    break
        if ok:
            yield key, ordinal
        ordinal += 1
        if ordinal == total:
            return
        for i in range(nt - 1, -1, -1):
            digits[i] += 1
            if digits[i] < radices[i]:
                break
            digits[i] = 0


def _assemble(m, space, culled, cfg) -> ParetoFront:
    ev_entries = []
    for key, ordinals in culled:
        nums, den = key
        objective = tuple(Fraction(n, den) for n in nums)
        seen = dict.fromkeys(ordinals)  # dedup, keep arrival order
        residues = tuple(vector_at(space, o) for o in seen)
        ev_entries.append(FrontEntry(objective=objective, residues=residues))
    ev_entries.sort(key=lambda e: e.objective)
    return ParetoFront(tuple(ev_entries))


def solve(m: RiskModel, cfg: SolveConfig = SolveConfig()) -> ParetoFront:
    """Pareto front of the reduced problem over the residue space, after
    risk-appetite filtering.  All three strategies return identical fronts;
    an empty feasible set yields an empty front, not an exception."""
    if cfg.mode == "goals":
        bad = [t.id for t in m.threats if not t.goals]
        if bad:
            raise ValueError(
                f"threats {bad} affect no goal; goal-weighted mode undefined"
            )
    space = residue_space(m)
    ev = _Evaluator(m, cfg.mode, space)
    tests, exclusive = ev.bound_tests(cfg.bounds, cfg.exclusive_bounds)
    stream = _feasible_keys(ev, space, tests, exclusive, cfg.deadline)

    if cfg.strategy == "upfront":
        # materialize the feasible set, then one culling pass
        culled = _cull((key, [o]) for key, o in stream)
    elif cfg.strategy == "chunk-collect":
        collected = []
        for chunk in _chunks(stream, cfg.chunk):
            local = []
            for key, o in chunk:
                _add_point(local, key, [o])
            collected.extend(local)
        culled = _cull(collected)
    else:  # chunk-carry
        carry = []
        for chunk in _chunks(stream, cfg.chunk):
            nxt = []
            for key, payload in carry:
                _add_point(nxt, key, payload)
            for key, o in chunk:
                _add_point(nxt, key, [o])
            carry = nxt
        culled = carry

    return _assemble(m, space, culled, cfg)


def _chunks(stream, size):
    while True:
        chunk = list(itertools.islice(stream, size))
        if not chunk:
            return
        yield chunk


def solve_direct_oracle(m: RiskModel, cfg: SolveConfig = SolveConfig()) -> ParetoFront:
    """Brute force over all mitigation-mapping combinations (excluding the
    all-max assignment per threat).  Test-scale oracle for solve(): the
    objective-point sets must coincide."""
    raw = count_raw(m)
    if raw > cfg.oracle_cap:
        raise ValueError(
            f"raw search space {raw} exceeds the oracle cap {cfg.oracle_cap}"
        )
    levels = m.scale.levels
    top = max(levels)
    per_threat = []
    for t in m.threats:
        n = len(t.controls)
        if n == 0:
            per_threat.append([Fraction(1)])
            continue
        residues = []
        for combo in itertools.product(levels, repeat=n):
            if all(lv == top for lv in combo):
                continue
            residues.append(1 - sum(combo, Fraction(0)) / n)
        per_threat.append(residues)

    bounds = {k: Fraction(v) for k, v in cfg.bounds.items()}
    sids = m.stakeholder_ids()

    def points():
        for xvec in itertools.product(*per_threat):
            obj = impact.objective(m, xvec, cfg.mode)
            ok = True
            for sid, lb in bounds.items():
                v = obj[sids.index(sid)]
                if (v <= lb) if cfg.exclusive_bounds else (v < lb):
                    ok = False
                    break
            if ok:
                yield obj, xvec

    return front(points())
