'''
Tests for the sweep engine, using a chord inequality on the line:

    f((1−t)x + ty) ≤ (1−t)f(x) + tf(y)
'''
from unittest import mock

import numpy as np
import pytest

from geoconvex.checker.engine import (hypothesis_failed, PairInequality, run_sweep, SweepProblem,
                                      sweep_report, Thresholds)
from geoconvex.checker.falsify import falsify
from geoconvex.models import CheckReport, CheckStatus, SamplingPlan, Tolerances


class Chord(PairInequality):
    name = 'chord'

    def __init__(self, f):
        self.f = f

    def sides(self, X, Y, T):
        x, y = X[:, :1], Y[:, :1]
        return self.f((1 - T) * x + T * y), (1 - T) * self.f(x) + T * self.f(y)

    def scalar_sides(self, x, y, t):
        lhs, rhs = self.sides(np.array([x], dtype=float), np.array([y], dtype=float), np.array([[t]]))
        return float(lhs[0, 0]), float(rhs[0, 0])


class ForwardChord(Chord):
    'Only compares pairs with x ≤ y'
    skip_reason = 'reversed pairs'

    def skipped(self, X, Y):
        return X[:, 0] > Y[:, 0]


POINTS = np.linspace(-1, 1, 5)[:, None]
TS = np.linspace(0, 1, 5)
TOLERANCE = Thresholds(tolerance=1e-9)


def square(x):
    return x ** 2


def negative_square(x):
    return -x ** 2


def test_run_sweep__convex_function_passes():
    result = run_sweep(Chord(square), POINTS, TS, TOLERANCE)

    assert result.samples == 5 * 5 * 5
    assert result.worst_margin == pytest.approx(0)
    assert not result.violated


def test_run_sweep__concave_function_violated():
    '''
    Ensure the worst sample is found, with ties going to the lexicographically smallest (x, y, t)
    '''
    result = run_sweep(Chord(negative_square), POINTS, TS, TOLERANCE)

    assert result.violation.margin == pytest.approx(1)
    assert result.violation.x == [-1.0]
    assert result.violation.y == [1.0]
    assert result.violation.t == 0.5
    assert result.violation.threshold == 1e-9


def test_run_sweep__strict_threshold_catches_equality():
    '''
    Ensure a linear function fails the strict chord inequality at interior t for distinct endpoints
    '''
    result = run_sweep(Chord(lambda x: x), POINTS, TS, Thresholds(tolerance=1e-9, strict=1e-9))

    assert result.violated
    assert result.violation.threshold == -1e-9
    assert result.violation.x == [-1.0]
    assert result.violation.y == [-0.5]
    assert result.violation.t == 0.25


def test_run_sweep__skipped_pairs_are_counted():
    result = run_sweep(ForwardChord(negative_square), POINTS, TS, TOLERANCE)

    assert result.skipped_pairs == 10
    assert result.samples == 15 * 5

    report = sweep_report('chord', result)
    assert '10 reversed pairs skipped' in report.notes


def test_run_sweep__unconfirmed_witness_is_inconclusive():
    '''
    Ensure a worst sample which does not re-validate on the scalar path makes the report inconclusive
    '''
    ineq = Chord(negative_square)

    with mock.patch.object(Chord, 'scalar_sides', return_value=(0.0, 0.0)):
        result = run_sweep(ineq, POINTS, TS, TOLERANCE)

    assert result.unsound is True
    assert result.violation is None
    assert sweep_report('chord', result).status is CheckStatus.INCONCLUSIVE


def test_thresholds__from_tolerances():
    tol = Tolerances()

    assert Thresholds.from_tolerances(tol).tolerance == tol.closed_form
    assert Thresholds.from_tolerances(tol, fd=True).tolerance == tol.fd
    assert Thresholds.from_tolerances(tol, strict=True).strict == tol.strict


def test_thresholds__strict_only_at_interior_distinct_samples():
    thresholds = Thresholds(tolerance=1e-6, strict=1e-9)

    assert thresholds.scalar(0.5, True) == -1e-9
    assert thresholds.scalar(0.5, False) == 1e-6
    assert thresholds.scalar(1.0, True) == 1e-6


def test_sweep_report__pass_is_qualified():
    report = sweep_report('chord', run_sweep(Chord(square), POINTS, TS, TOLERANCE))

    assert report.status is CheckStatus.PASS
    assert 'passes on samples only; this is not a proof' in report.notes


def test_falsify__margin_history_per_round():
    problem = SweepProblem(
        ineq=Chord(negative_square),
        points=POINTS,
        ts=TS,
        thresholds=TOLERANCE,
        clip=lambda p: np.clip(p, -1, 1),
        cells=np.array([0.5]),
    )

    report = falsify('chord', problem, SamplingPlan(refine_rounds=2))

    assert report.status is CheckStatus.VIOLATED
    assert len(report.margin_history) == 3
    assert report.violation.margin >= 1


def test_hypothesis_failed__carries_evidence():
    evidence = CheckReport(check='inner', status=CheckStatus.VIOLATED, measurements={'K': 4.0})

    report = hypothesis_failed('outer', 'g is not nondecreasing', evidence)

    assert report.status is CheckStatus.HYPOTHESIS_FAILED
    assert report.notes[0] == 'g is not nondecreasing'
    assert 'hypothesis check "inner" was violated' in report.notes
    assert report.measurements == {'K': 4.0}
