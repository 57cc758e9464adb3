"""Tests for search budgets and seeded restarts"""

import numpy as np
import pytest

from seqspace.search import EvaluationMeter, SearchBudget, ascend, random_directions, restart_rng, sign_patterns


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(restarts=-1)
    with pytest.raises(ValueError):
        SearchBudget(steps=-5)
    assert SearchBudget(0, 0).restarts == 0


def test_restart_streams_do_not_depend_on_restart_count():
    short = list(random_directions(7, 2, 3))
    long = list(random_directions(7, 5, 3))
    for a, b in zip(short, long):
        np.testing.assert_array_equal(a, b)
    assert all(np.linalg.norm(v) == pytest.approx(1.0) for v in long)
    assert restart_rng(7, 0).random() != restart_rng(7, 1).random()


def test_sign_patterns():
    patterns = list(sign_patterns(3))
    assert len(patterns) == 4
    assert all(p[0] == 1.0 for p in patterns)
    assert len({tuple(p) for p in patterns}) == 4


def test_ascend_never_decreases():
    A = np.diag([3.0, 1.0])

    def ratio(z):
        return float(np.linalg.norm(A @ z) / np.linalg.norm(z))

    def gradient(z):
        n = np.linalg.norm(z)
        r = ratio(z)
        return (A.T @ A @ z) / (r * n ** 2) - r * z / n ** 2

    start = np.array([0.1, 1.0])
    meter = EvaluationMeter()
    z, value = ascend(ratio, gradient, start, 100, meter=meter)
    assert value >= ratio(start)
    assert value == pytest.approx(3.0, rel=1e-6)
    assert meter.used > 0
    _, none = ascend(ratio, gradient, start, 0)
    assert none == pytest.approx(ratio(start))


def test_meter_counts_evaluations():
    meter = EvaluationMeter()
    meter.consume()
    meter.consume(4)
    assert meter.used == 5
