"""Sliding-window estimation and the adaptive betting loop."""

import numpy as np
import pytest

from kellylab import adaptive_fraction, estimate_p, run_adaptive
from kellylab.adaptive import trace_rows


# ---------------------------------------------------------------------------
# estimate_p
# ---------------------------------------------------------------------------

def test_all_wins_window():
    assert estimate_p([1, 1, 1, 1], 4, 4) == 1.0


def test_all_losses_window():
    assert estimate_p([-1, -1, -1], 3, 3) == 0.0


def test_alternating_window():
    assert estimate_p([1, -1, 1, -1], 4, 4) == 0.5


def test_window_slides():
    outcomes = [1, 1, -1, -1, -1]
    assert estimate_p(outcomes, 4, 2) == 0.0
    assert estimate_p(outcomes, 3, 2) == 0.5


def test_zero_outcome_counts_as_loss():
    assert estimate_p([0.0, 1.0], 2, 2) == 0.5


def test_rejects_training_period_queries():
    with pytest.raises(ValueError):
        estimate_p([1, 1, 1], 2, 3)
    with pytest.raises(ValueError):
        estimate_p([1, 1], 3, 2)


# ---------------------------------------------------------------------------
# adaptive_fraction
# ---------------------------------------------------------------------------

def test_fair_coin_no_bet():
    assert adaptive_fraction(0.5) == 0.0


def test_slight_edge():
    assert adaptive_fraction(0.6) == pytest.approx(0.2)


def test_clamped_below():
    assert adaptive_fraction(0.3) == 0.0


def test_clamped_range():
    for p in np.linspace(0.0, 1.0, 21):
        assert 0.0 <= adaptive_fraction(p) <= 1.0
    with pytest.raises(ValueError):
        adaptive_fraction(1.2)


# ---------------------------------------------------------------------------
# run_adaptive
# ---------------------------------------------------------------------------

def test_run_shapes_and_training_freeze():
    run = run_adaptive(0.6, 200, 50, v0=2.0, seed=0)
    assert run.estimates.size == 150 and run.fractions.size == 150
    assert run.path.values.size == 201
    assert np.all(run.path.values[: 51] == 2.0)


def test_estimates_match_estimate_p():
    run = run_adaptive(0.6, 120, 30, seed=1)
    x = run.path.outcomes[:, 0]
    for i, k in enumerate(range(30, 120)):
        assert run.estimates[i] == estimate_p(x, k, 30)
        assert run.fractions[i] == adaptive_fraction(run.estimates[i])


def test_path_reconstruction_is_exact():
    run = run_adaptive(0.6, 300, 50, seed=2)
    x = run.path.outcomes[:, 0]
    v = 1.0
    for k in range(300):
        if k >= 50:
            v = (1.0 + run.fractions[k - 50] * x[k]) * v
        assert v == run.path.values[k + 1]


def test_estimate_moves_at_most_one_over_window():
    run = run_adaptive(0.6, 500, 50, seed=3)
    steps = np.abs(np.diff(run.estimates))
    assert np.all(steps <= 1.0 / 50 + 1e-15)


def test_fractions_always_survival_feasible():
    for seed in range(10):
        run = run_adaptive(0.55, 400, 40, seed=seed)
        assert np.all(run.fractions >= 0.0) and np.all(run.fractions <= 1.0)
        assert np.all(run.path.values > 0.0)


def test_window_mean_is_unbiased():
    total, count = 0.0, 0
    for seed in range(40):
        run = run_adaptive(0.6, 1000, 50, seed=seed)
        total += float(run.estimates.sum())
        count += run.estimates.size
    assert abs(total / count - 0.6) < 0.01


def test_no_edge_coin_stays_near_start():
    finals = [run_adaptive(0.5, 600, 50, seed=s).path.values[-1] for s in range(40)]
    assert 0.05 < float(np.median(finals)) < 5.0


def test_deterministic_given_seed():
    a = run_adaptive(0.6, 400, 50, seed=42)
    b = run_adaptive(0.6, 400, 50, seed=42)
    assert np.array_equal(a.path.values, b.path.values)
    assert np.array_equal(a.estimates, b.estimates)
    assert list(trace_rows(a)) == list(trace_rows(b))


def test_validation():
    with pytest.raises(ValueError):
        run_adaptive(0.6, 100, 100)
    with pytest.raises(ValueError):
        run_adaptive(1.2, 100, 50)
    with pytest.raises(ValueError):
        run_adaptive(0.6, 100, 50, v0=0.0)


def test_trace_rows_layout():
    run = run_adaptive(0.6, 60, 50, seed=5)
    rows = list(trace_rows(run))
    assert len(rows) == 60
    k, outcome, p_hat, k_hat, wealth = rows[0]
    assert k == 0 and p_hat == "" and k_hat == "0.0"
    assert rows[50][2] != ""
