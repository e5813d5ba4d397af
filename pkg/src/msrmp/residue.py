"""Per-threat residue sets, search-space counts, and deterministic lazy
enumeration of the cartesian residue space.

A threat with n controls and mitigation scale A admits residues
x = 1 - sigma/n for every achievable sum sigma of n levels from A, except the
unique all-max assignment (adopting every control fully is excluded).  The
sets are ordered descending (1 first); the space is enumerated in mixed-radix
order with the first threat as the most significant digit, which makes chunk
windows and parallel splits deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm, prod

from .model import RiskModel


@dataclass(frozen=True)
class ResidueSet:
    threat_id: str
    n_controls: int
    residues: tuple[Fraction, ...]   # distinct, descending, 1 first

    def __len__(self):
        return len(self.residues)

    def achieving_sum(self, x) -> Fraction:
        """The mitigation-level sum sigma realizing residue x: n * (1 - x)."""
        return self.n_controls * (1 - Fraction(x))


def _achievable_sums(levels, n):
    """Distinct sums of n values drawn (with repetition, ordered) from levels,
    as integers over the common denominator of the levels."""
    den = lcm(*(lv.denominator for lv in levels)) if levels else 1
    scaled = sorted({int(lv * den) for lv in levels})
    sums = {0}
    for _ in range(n):
        sums = {s + lv for s in sums for lv in scaled}
    return sums, den, scaled


def residue_set(m: RiskModel, tid) -> ResidueSet:
    """All achievable residues of a threat, via dynamic programming over
    distinct sums.  A threat with no controls yields {1}: nothing can be
    mitigated."""
    threat = m.threat(tid)
    n = len(threat.controls)
    if n == 0:
        return ResidueSet(tid, 0, (Fraction(1),))
    levels = m.scale.levels
    sums, den, scaled = _achievable_sums(levels, n)
    # the maximal sum is reached only by the all-max assignment; exclude it
    sums.discard(n * max(scaled))
    residues = sorted(
        (1 - Fraction(s, n * den) for s in sums), reverse=True
    )
    return ResidueSet(tid, n, tuple(residues))


@dataclass(frozen=True)
class ResidueSpace:
    sets: tuple[ResidueSet, ...]  # model threat order

    @property
    def size(self):
        return prod(len(s) for s in self.sets)

    def radices(self):
        return [len(s) for s in self.sets]


def residue_space(m: RiskModel) -> ResidueSpace:
    return ResidueSpace(tuple(residue_set(m, t.id) for t in m.threats))


def count_raw(m: RiskModel) -> int:
    """Number of mitigation-mapping combinations, excluding the all-max
    assignment per threat (exact big integer)."""
    k = len(m.scale.levels)
    factors = []
    for t in m.threats:
        n = len(t.controls)
        factors.append(1 if n == 0 else k**n - 1)
    return prod(factors)


def count_reduced(m: RiskModel) -> int:
    """Size of the reduced search space: product of residue-set sizes."""
    return residue_space(m).size


def vector_at(space: ResidueSpace, ordinal) -> tuple:
    """Residue vector at a mixed-radix ordinal (first threat most
    significant, digits indexing the descending residue lists)."""
    radices = space.radices()
    if not 0 <= ordinal < space.size:
        raise IndexError(f"ordinal {ordinal} outside [0, {space.size})")
    digits = [0] * len(radices)
    rem = ordinal
    for i in range(len(radices) - 1, -1, -1):
        rem, digits[i] = divmod(rem, radices[i])
    return tuple(space.sets[i].residues[d] for i, d in enumerate(digits))


def iter_points(space: ResidueSpace, start=0, length=None):
    """Yield (residue_vector, ordinal) for ordinals in [start, start+length),
    without materializing the space."""
    total = space.size
    if length is None:
        length = total - start
    if start < 0 or length < 0 or start + length > total:
        raise IndexError(
            f"window [{start}, {start + length}) outside [0, {total})"
        )
    if length == 0:
        return
    radices = space.radices()
    nt = len(radices)
    digits = [0] * nt
    rem = start
    for i in range(nt - 1, -1, -1):
        rem, digits[i] = divmod(rem, radices[i])
    values = [space.sets[i].residues[digits[i]] for i in range(nt)]
    ordinal = start
    for _ in range(length):
        yield tuple(values), ordinal
        ordinal += 1
        # odometer increment, least significant digit last
        for i in range(nt - 1, -1, -1):
            digits[i] += 1
            if digits[i] < radices[i]:
                values[i] = space.sets[i].residues[digits[i]]
                break
            digits[i] = 0
            values[i] = space.sets[i].residues[0]


def residue_of_assignment(m: RiskModel, tid, assignment) -> Fraction:
    """Residue 1 - (sum of levels / number of controls) of one threat under a
    total assignment {control id -> level}."""
    threat = m.threat(tid)
    n = len(threat.controls)
    if n == 0:
        return Fraction(1)
    level_set = set(m.scale.levels)
    total = Fraction(0)
    for c in threat.controls:
        if c.id not in assignment:
            raise ValueError(f"assignment for threat {tid!r} misses control {c.id!r}")
        lv = Fraction(assignment[c.id])
        if lv not in level_set:
            raise ValueError(
                f"level {lv} for control {c.id!r} is not in the mitigation scale"
            )
        total += lv
    x = 1 - total / n
    if x == 1 - max(m.scale.levels):
        # reachable only by adopting every control at the maximum level
        raise ValueError(
            f"assignment for threat {tid!r} adopts all controls at the maximum "
            f"level, which is excluded"
        )
    return x
