"""Tests for trial count containers and subject-level aggregation."""

import numpy as np
import pytest

from smartmcb.data import TrialData, aggregate_subjects, check_subject_rows
from smartmcb.design import builtin_design

NAN = float("nan")


def small_counts():
    return TrialData(
        successes={1: 3, 2: 2, 3: 1, 4: 4, 5: 1, 6: 2},
        totals={1: 10, 2: 5, 3: 5, 4: 8, 5: 6, 6: 6},
        responders={1: 10, -1: 8},
        enrolled={1: 20, -1: 20},
    )


def test_validate_clean():
    assert small_counts().validate() == []
    assert small_counts().validate_against(builtin_design("design1")) == []


def test_validate_count_bounds():
    bad = TrialData({1: 7}, {1: 5}, {1: 3}, {1: 2})
    msgs = bad.validate()
    assert any("0 <= successes <= total" in m for m in msgs)
    assert any("0 <= responders <= enrolled" in m for m in msgs)


def test_validate_mismatched_keys():
    msgs = TrialData({1: 1}, {2: 3}, {}, {}).validate()
    assert any("successes given without totals" in m for m in msgs)
    assert any("totals given without successes" in m for m in msgs)


def test_validate_against_coverage():
    d = builtin_design("design1")
    data = small_counts()
    shrunk = TrialData(
        {k: v for k, v in data.successes.items() if k != 6},
        {k: v for k, v in data.totals.items() if k != 6},
        data.responders,
        data.enrolled,
    )
    msgs = shrunk.validate_against(d)
    assert any("sequence 6: no counts recorded" in m for m in msgs)

    extra = TrialData(
        {**data.successes, 7: 0},
        {**data.totals, 7: 1},
        data.responders,
        data.enrolled,
    )
    assert any("sequence 7: not part of the design" in m for m in extra.validate_against(d))


def test_validate_against_arm_totals():
    d = builtin_design("design1")
    data = small_counts()
    off = TrialData(data.successes, data.totals, data.responders, {1: 21, -1: 20})
    msgs = off.validate_against(d)
    assert any("sequence totals sum to 20 but enrollment is 21" in m for m in msgs)

    off = TrialData(data.successes, data.totals, {1: 9, -1: 8}, data.enrolled)
    msgs = off.validate_against(d)
    assert any("responder sequence totals sum to 10 but responder count is 9" in m for m in msgs)


def test_empty_sequences():
    d = builtin_design("design1")
    data = small_counts()
    zeroed = TrialData(
        {**data.successes, 5: 0},
        {**data.totals, 5: 0},
        {1: 10, -1: 8},
        {1: 20, -1: 14},
    )
    assert zeroed.empty_sequences(d) == (5,)
    assert data.empty_sequences(d) == ()


def test_dict_roundtrip():
    data = small_counts()
    again = TrialData.from_dict(data.to_dict())
    assert again == data
    # arm keys serialize with an explicit sign
    assert set(data.to_dict()["arms"]) == {"+1", "-1"}


def test_from_dict_rejects():
    with pytest.raises(ValueError, match="malformed counts payload"):
        TrialData.from_dict({"sequences": {"1": {"successes": 2}}, "arms": {}})
    payload = small_counts().to_dict()
    payload["sequences"]["1"]["successes"] = 99
    with pytest.raises(ValueError, match="invalid counts"):
        TrialData.from_dict(payload)


def test_check_subject_rows_shapes():
    arr = check_subject_rows([[1, 1, NAN, 1], [-1, 0, 1, 0]])
    assert arr.shape == (2, 4)
    assert check_subject_rows([]).shape == (0, 4)
    with pytest.raises(ValueError, match=r"shape \(n, 4\)"):
        check_subject_rows([[1, 0, 1]])


def test_check_subject_rows_values():
    with pytest.raises(ValueError, match="row 0: a1 must be -1 or \\+1"):
        check_subject_rows([[2, 0, 1, 0]])
    with pytest.raises(ValueError, match="row 1: s must be 0 or 1"):
        check_subject_rows([[1, 0, 1, 0], [1, 2, 1, 0]])
    with pytest.raises(ValueError, match="row 0: a2 must be -1, \\+1 or absent"):
        check_subject_rows([[1, 0, 0.5, 0]])
    with pytest.raises(ValueError, match="row 0: y must be 0 or 1"):
        check_subject_rows([[1, 0, 1, 3]])


def test_aggregate_subjects_design1():
    d = builtin_design("design1")
    rows = [
        [1, 1, NAN, 1],
        [1, 1, NAN, 0],
        [1, 0, 1, 1],
        [1, 0, -1, 0],
        [-1, 1, NAN, 1],
        [-1, 0, 1, 0],
        [-1, 0, -1, 1],
        [-1, 0, -1, 1],
    ]
    data = aggregate_subjects(d, rows)
    assert data.totals == {1: 2, 2: 1, 3: 1, 4: 1, 5: 1, 6: 2}
    assert data.successes == {1: 1, 2: 1, 3: 0, 4: 1, 5: 0, 6: 2}
    assert data.responders == {1: 2, -1: 1}
    assert data.enrolled == {1: 4, -1: 4}
    assert data.validate_against(d) == []


def test_aggregate_subjects_unroutable_row():
    d = builtin_design("design1")
    # a responder carrying a stage-2 assignment has no design1 sequence
    with pytest.raises(ValueError, match="row 1: no sequence with a1=\\+1, responder=1, stage2=\\+1"):
        aggregate_subjects(d, [[1, 0, 1, 0], [1, 1, 1, 0]])
    # a non-responder without a stage-2 assignment is equally unroutable
    with pytest.raises(ValueError, match="row 0: no sequence with a1=-1, responder=0, stage2=none"):
        aggregate_subjects(d, [[-1, 0, NAN, 0]])


def test_aggregate_subjects_empty():
    d = builtin_design("general")
    data = aggregate_subjects(d, [])
    assert set(data.totals) == set(d.sequence_ids)
    assert all(v == 0 for v in data.totals.values())
    assert data.enrolled == {1: 0, -1: 0}
    assert data.empty_sequences(d) == d.sequence_ids


def test_aggregate_matches_manual_loop():
    d = builtin_design("general")
    rng = np.random.default_rng(42)
    n = 500
    rows = np.column_stack([
        rng.choice([-1.0, 1.0], n),
        rng.integers(0, 2, n).astype(float),
        rng.choice([-1.0, 1.0], n),
        rng.integers(0, 2, n).astype(float),
    ])
    data = aggregate_subjects(d, rows)
    for seq in d.sequences:
        picked = [r for r in rows
                  if r[0] == seq.arm and r[1] == int(seq.responder) and r[2] == seq.stage2]
        assert data.totals[seq.id] == len(picked)
        assert data.successes[seq.id] == sum(int(r[3]) for r in picked)
