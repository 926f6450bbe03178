"""Tests for scenario truth, trial simulation and Monte Carlo power."""

import numpy as np
import pytest

from smartmcb.design import builtin_design
from smartmcb.power import (
    PowerSpec,
    TruthEta,
    estimate_power,
    inferior_edtrs,
    sample_size_search,
    simulate_subjects,
    simulate_trial,
    true_best,
    true_delta,
    true_edtr_probs,
)

from oracles import naive_edtr_prob


def toy_eta(**overrides):
    kw = dict(
        design=builtin_design("design1"),
        theta_seq={1: 0.6, 2: 0.5, 3: 0.3, 4: 0.4, 5: 0.25, 6: 0.2},
        lam={1: 0.4, -1: 0.3},
    )
    kw.update(overrides)
    return TruthEta(**kw)


def toy_spec(**overrides):
    kw = dict(
        eta=toy_eta(),
        alpha=0.05,
        gamma=0.2,
        delta_min=0.8,
        grid=(100, 200),
        datasets_per_n=30,
        draws_per_dataset=120,
        seed=11,
    )
    kw.update(overrides)
    return PowerSpec(**kw)


def test_truth_validate():
    assert toy_eta().validate() == []
    missing = toy_eta(theta_seq={1: 0.6})
    assert any("no response probability" in m for m in missing.validate())
    extra = toy_eta(theta_seq={**toy_eta().theta_seq, 9: 0.5})
    assert any("sequence 9: not part of the design" in m for m in extra.validate())
    bad_lam = toy_eta(lam={1: 1.4, -1: 0.3})
    assert any("outside" in m for m in bad_lam.validate())
    coins = toy_eta(rand_prob_stage1=0.6)
    assert any("fixed at 0.5" in m for m in coins.validate())


def test_truth_interior():
    eta = toy_eta(theta_seq={**toy_eta().theta_seq, 3: 0.0})
    assert eta.validate() == []
    assert any("outside (0, 1)" in m for m in eta.interior_violations())


def test_truth_dict_roundtrip():
    eta = toy_eta()
    payload = eta.to_dict()
    assert set(payload) == {"theta_seq", "lambda"}
    again = TruthEta.from_dict(builtin_design("design1"), payload)
    assert again.theta_seq == eta.theta_seq
    assert again.lam == eta.lam
    with pytest.raises(ValueError, match="malformed truth payload"):
        TruthEta.from_dict(builtin_design("design1"), {"theta_seq": {}})


def test_true_edtr_probs_by_hand():
    eta = toy_eta()
    probs = true_edtr_probs(eta)
    assert probs[1] == pytest.approx(naive_edtr_prob(0.6, 0.5, 0.4))
    assert probs[2] == pytest.approx(naive_edtr_prob(0.6, 0.3, 0.4))
    assert probs[3] == pytest.approx(naive_edtr_prob(0.4, 0.25, 0.3))
    assert probs[4] == pytest.approx(naive_edtr_prob(0.4, 0.2, 0.3))


def test_true_edtr_probs_lambda_extremes():
    # lam 1 collapses onto the responder sequence, lam 0 onto the other
    eta = toy_eta(lam={1: 1.0, -1: 0.0})
    probs = true_edtr_probs(eta)
    assert probs[1] == pytest.approx(0.6)
    assert probs[2] == pytest.approx(0.6)
    assert probs[3] == pytest.approx(0.25)
    assert probs[4] == pytest.approx(0.2)


def test_true_best_and_delta():
    eta = toy_eta()
    assert true_best(eta) == 1
    delta = true_delta(eta)
    assert delta[1] == 0.0
    assert all(d >= 0.0 for d in delta.values())
    # gaps are logit differences
    probs = true_edtr_probs(eta)
    expect = np.log(probs[1] / (1 - probs[1])) - np.log(probs[4] / (1 - probs[4]))
    assert delta[4] == pytest.approx(expect)


def test_true_best_tie_breaks_to_smallest_id():
    eta = toy_eta(theta_seq={1: 0.6, 2: 0.5, 3: 0.3, 4: 0.6, 5: 0.5, 6: 0.3},
                  lam={1: 0.4, -1: 0.4})
    # EDTRs 1 and 3 now share the top probability
    probs = true_edtr_probs(eta)
    assert probs[1] == probs[3]
    assert true_best(eta) == 1


def test_inferior_edtrs_threshold():
    eta = toy_eta()
    delta = true_delta(eta)
    cut = sorted(delta.values())[2]
    assert inferior_edtrs(eta, cut) == tuple(sorted(l for l, d in delta.items() if d >= cut))
    assert inferior_edtrs(eta, 0.0) == (1, 2, 3, 4)
    assert inferior_edtrs(eta, 99.0) == ()


def test_simulate_subjects_shape_and_support():
    eta = toy_eta()
    rows = simulate_subjects(eta, 500, seed=4)
    assert rows.shape == (500, 4)
    a1, s, a2, y = rows.T
    assert set(np.unique(a1)) <= {-1.0, 1.0}
    assert set(np.unique(s)) <= {0.0, 1.0}
    assert set(np.unique(y)) <= {0.0, 1.0}
    # design1: responders carry no stage-2 assignment, non-responders always do
    assert np.isnan(a2[s == 1]).all()
    assert np.isin(a2[s == 0], (-1.0, 1.0)).all()
    assert simulate_subjects(eta, 0, seed=1).shape == (0, 4)
    with pytest.raises(ValueError, match="non-negative"):
        simulate_subjects(eta, -1, seed=1)


def test_simulate_subjects_general_rerandomizes_everyone():
    eta = TruthEta(
        design=builtin_design("general"),
        theta_seq={k: 0.4 for k in range(1, 9)},
        lam={1: 0.5, -1: 0.5},
    )
    rows = simulate_subjects(eta, 400, seed=9)
    assert not np.isnan(rows[:, 2]).any()


def test_simulate_subjects_deterministic():
    eta = toy_eta()
    a = simulate_subjects(eta, 200, seed=77)
    b = simulate_subjects(eta, 200, seed=77)
    assert np.array_equal(a, b, equal_nan=True)
    c = simulate_subjects(eta, 200, seed=78)
    assert not np.array_equal(a, c, equal_nan=True)


def test_simulated_frequencies_match_truth():
    """Law of large numbers at n = 100000, all rates within 4 binomial SEs."""
    eta = toy_eta()
    n = 100_000
    data = simulate_trial(eta, n, seed=123456)
    assert data.validate_against(eta.design) == []

    def within(observed, total, p):
        se = np.sqrt(p * (1 - p) / total)
        return abs(observed / total - p) < 4 * se + 1e-12

    # arm split is a fair coin
    assert within(data.enrolled[1], n, 0.5)
    for arm in (1, -1):
        assert within(data.responders[arm], data.enrolled[arm], eta.lam[arm])
    for seq in eta.design.sequences:
        assert within(data.successes[seq.id], data.totals[seq.id], eta.theta_seq[seq.id])
    # non-responders of an arm split evenly over the two stage-2 options
    assert within(data.totals[2], data.totals[2] + data.totals[3], 0.5)
    assert within(data.totals[5], data.totals[5] + data.totals[6], 0.5)


def test_power_spec_validation():
    assert toy_spec().validate() == []
    assert any("strictly increasing" in m for m in toy_spec(grid=(200, 100)).validate())
    assert any("positive" in m for m in toy_spec(grid=(0, 100)).validate())
    assert any("at least one sample size" in m for m in toy_spec(grid=()).validate())
    assert any("alpha" in m for m in toy_spec(alpha=1.0).validate())
    assert any("gamma" in m for m in toy_spec(gamma=0.0).validate())
    assert any("delta_min" in m for m in toy_spec(delta_min=-0.1).validate())
    assert any("datasets_per_n" in m for m in toy_spec(datasets_per_n=0).validate())
    assert any("seed" in m for m in toy_spec(seed=-1).validate())
    boundary = toy_spec(eta=toy_eta(theta_seq={**toy_eta().theta_seq, 2: 1.0}))
    assert any("outside (0, 1)" in m for m in boundary.validate())


def test_estimate_power_rejects_best_in_inferior_set():
    spec = toy_spec(delta_min=0.0)
    with pytest.raises(ValueError, match="contains the true best"):
        estimate_power(spec, 100)


def test_vacuous_power_is_exactly_one():
    spec = toy_spec(delta_min=50.0, datasets_per_n=10**9)
    # would take forever if it simulated anything
    pt = estimate_power(spec, 100)
    assert pt.power == 1.0 and pt.se == 0.0
    curve = sample_size_search(spec)
    assert [p.power for p in curve.points] == [1.0, 1.0]
    assert curve.recommended_n == spec.grid[0]
    assert curve.inferior_set == ()


def test_estimate_power_deterministic_and_plausible():
    spec = toy_spec()
    a = estimate_power(spec, 150)
    b = estimate_power(spec, 150)
    assert a == b
    assert 0.0 <= a.power <= 1.0
    assert a.se == pytest.approx(np.sqrt(a.power * (1 - a.power) / spec.datasets_per_n))


def test_sample_size_search_curve():
    spec = toy_spec(grid=(60, 400), datasets_per_n=40)
    curve = sample_size_search(spec)
    assert [pt.n for pt in curve.points] == [60, 400]
    assert curve.inferior_set == inferior_edtrs(spec.eta, spec.delta_min)
    assert curve.delta == true_delta(spec.eta)
    assert curve.target_power == pytest.approx(0.8)
    # more subjects should not hurt much; allow 3 joint SEs of slack
    lo, hi = curve.points
    slack = 3 * np.hypot(lo.se, hi.se)
    assert hi.power >= lo.power - slack
    if curve.recommended_n is not None:
        assert curve.points[[pt.n for pt in curve.points].index(curve.recommended_n)].power >= 0.8


def test_threads_do_not_change_results():
    spec = toy_spec(grid=(80, 120, 160), datasets_per_n=20, draws_per_dataset=80)
    serial = sample_size_search(spec, threads=1)
    parallel = sample_size_search(spec, threads=3)
    assert serial == parallel
    with pytest.raises(ValueError, match="threads must be at least 1"):
        sample_size_search(spec, threads=0)
