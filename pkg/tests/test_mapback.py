import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msrmp import count_rmps, enumerate_rmps
from msrmp.harness import BenchSpec, gen_instance
from msrmp.mapback import assignments_for_residue, count_assignments
from msrmp.residue import residue_of_assignment, residue_set

F = Fraction

OPTIMUM = (F(1), F(1, 20), F(1, 8), F(1, 6), F(1, 6))


def test_count_at_running_example_optimum(running_model):
    assert count_rmps(running_model, OPTIMUM) == 360
    enum = enumerate_rmps(running_model, OPTIMUM)
    assert enum.per_threat_counts == {"T1": 1, "T2": 10, "T3": 4, "T4": 3, "T5": 3}
    assert enum.total == 1 * 10 * 4 * 3 * 3
    assert not enum.truncated


def test_running_example_optimum_structure(running_model):
    enum = enumerate_rmps(running_model, OPTIMUM)
    # residue 1 on T1: the single all-zero assignment
    (t1,) = enum.per_threat["T1"]
    assert t1.levels == (F(0),) * 5
    # residue 1/20 on T2: nine controls at 1 and one at 1/2
    for a in enum.per_threat["T2"]:
        assert sorted(a.levels) == [F(1, 2)] + [F(1)] * 9
    # residue 1/8 on T3: three at 1 and one at 1/2
    for a in enum.per_threat["T3"]:
        assert sorted(a.levels) == [F(1, 2)] + [F(1)] * 3
    for tid in ("T4", "T5"):
        for a in enum.per_threat[tid]:
            assert sorted(a.levels) == [F(1, 2)] + [F(1)] * 2


def test_published_example_policies_are_enumerated(running_model):
    """Three reference policies: T1 all zero, and in every other threat the
    k-th listed control at 1/2 with the rest at 1 (k = 1, 2, 3)."""
    enum = enumerate_rmps(running_model, OPTIMUM)
    m = running_model
    for k in range(3):
        for tid, which in (("T2", k), ("T3", k), ("T4", k), ("T5", k)):
            n = len(m.threat(tid).controls)
            levels = [F(1)] * n
            levels[which] = F(1, 2)
            assert any(a.levels == tuple(levels) for a in enum.per_threat[tid])
        assert any(a.levels == (F(0),) * 5 for a in enum.per_threat["T1"])


def test_small_example_enumeration(small_model):
    enum = enumerate_rmps(small_model, (F(1, 4), F(1, 2), F(1, 2)))
    assert enum.per_threat_counts == {"T1": 2, "T2": 3, "T3": 1}
    assert enum.total == 6
    assert [a.levels for a in enum.per_threat["T1"]] == [
        (F(1), F(1, 2)), (F(1, 2), F(1)),
    ]
    assert [a.levels for a in enum.per_threat["T2"]] == [
        (F(1), F(0)), (F(1, 2), F(1, 2)), (F(0), F(1)),
    ]
    assert [a.levels for a in enum.per_threat["T3"]] == [(F(1, 2),)]


def test_dict_target_matches_sequence_target(small_model):
    target = {"T1": F(1, 4), "T2": F(1, 2), "T3": F(1, 2)}
    seq = (F(1, 4), F(1, 2), F(1, 2))
    assert enumerate_rmps(small_model, target) == enumerate_rmps(small_model, seq)
    assert count_rmps(small_model, target) == count_rmps(small_model, seq)


def test_unachievable_residue_raises(small_model):
    with pytest.raises(ValueError, match="not achievable"):
        count_assignments(small_model, "T1", F(1, 3))
    with pytest.raises(ValueError, match="not achievable"):
        list(assignments_for_residue(small_model, "T1", F(1, 3)))
    # residue 0 means all-max, which is excluded
    with pytest.raises(ValueError, match="not achievable"):
        count_assignments(small_model, "T1", F(0))
    with pytest.raises(ValueError, match="not achievable"):
        count_assignments(small_model, "T1", F(2))


def test_wrong_vector_length(small_model):
    with pytest.raises(ValueError, match="expected 3"):
        enumerate_rmps(small_model, (F(1), F(1)))


def test_limit_truncates_emission_not_counts(running_model):
    enum = enumerate_rmps(running_model, OPTIMUM, limit=2)
    assert enum.truncated
    assert enum.total == 360  # exact despite truncation
    assert len(enum.per_threat["T2"]) == 2
    assert enum.per_threat_counts["T2"] == 10


def test_assignments_round_trip_to_their_residue(running_model):
    enum = enumerate_rmps(running_model, OPTIMUM)
    for tid, xt in zip(running_model.threat_ids(), OPTIMUM):
        for a in enum.per_threat[tid]:
            assert residue_of_assignment(
                running_model, tid, a.as_dict(running_model)
            ) == xt


def _brute_assignments(m, tid, x):
    threat = m.threat(tid)
    n = len(threat.controls)
    top = max(m.scale.levels)
    out = []
    for combo in itertools.product(m.scale.levels, repeat=n):
        if all(lv == top for lv in combo):
            continue
        if 1 - sum(combo, F(0)) / n == x:
            out.append(combo)
    return out


@given(st.integers(min_value=0, max_value=10**6), st.integers(min_value=1, max_value=5))
@settings(max_examples=50, deadline=None)
def test_sound_and_complete_against_brute_force(index, q):
    m = gen_instance(BenchSpec(seed=11), index=index, threat_count=1,
                     controls_per_threat=q)
    for x in residue_set(m, "T1").residues:
        expected = _brute_assignments(m, "T1", x)
        got = [a.levels for a in assignments_for_residue(m, "T1", x)]
        assert sorted(got) == sorted(expected)
        assert count_assignments(m, "T1", x) == len(expected)


@given(st.integers(min_value=0, max_value=10**6), st.integers(min_value=1, max_value=5))
@settings(max_examples=30, deadline=None)
def test_counts_cover_the_whole_assignment_space(index, q):
    """Summing the per-residue counts recovers 3^q - 1."""
    m = gen_instance(BenchSpec(seed=12), index=index, threat_count=1,
                     controls_per_threat=q)
    total = sum(
        count_assignments(m, "T1", x) for x in residue_set(m, "T1").residues
    )
    assert total == 3**q - 1
