'''
Tests for dispatch of check descriptors and assembly of run reports
'''
from unittest import mock

import pytest

from fixtures import RUN_CONFIG
from geoconvex.config import config_digest
from geoconvex.exceptions import CheckNotFound, FalsifyNotSupported, InvalidPoint, InvalidSamplingPlan
from geoconvex.models import (CheckDescriptor, CheckStatus, Expectation, RunConfig, RunStatus, SamplingPlan,
                              Tolerances, UserDefaults)
from geoconvex.runner import (CheckContext, curve_data, falsify_check, probe_config, run_check, run_checks,
                              RunOverrides, witness_config, worker_count)


def test_check_context__settings_precedence(run_config):
    '''
    Ensure the command line beats the descriptor, which beats the run config, which beats the user defaults
    '''
    run_config.sampling = {'t_count': 11, 'zoom': 4.0}
    run_config.tolerance = {'fd': 1e-3}
    descriptor = CheckDescriptor(name='c', kind='three_point', sampling={'t_count': 13, 'refine_rounds': 1},
                                 tolerance={'fd': 1e-2})
    defaults = UserDefaults(sampling=SamplingPlan(t_count=9, line_count=21), tolerance=Tolerances(strict=1e-6))

    ctx = CheckContext(run_config, descriptor, defaults, RunOverrides(sampling={'refine_rounds': 5}))

    assert ctx.plan.t_count == 13
    assert ctx.plan.line_count == 21
    assert ctx.plan.zoom == 4.0
    assert ctx.plan.refine_rounds == 5
    assert ctx.tol.fd == 1e-2
    assert ctx.tol.strict == 1e-6


def test_check_context__seed_override(run_config):
    descriptor = run_config.checks[0]

    assert CheckContext(run_config, descriptor, UserDefaults(), RunOverrides()).plan.seed == 7
    assert CheckContext(run_config, descriptor, UserDefaults(), RunOverrides(seed=3)).plan.seed == 3


def test_run_check__error_makes_check_inconclusive(run_config):
    '''
    Ensure an error raised while a check evaluates is reported, rather than aborting the run
    '''
    descriptor = run_config.check('parabola-three-point')
    failing = mock.Mock(side_effect=InvalidSamplingPlan('too few points'))

    with mock.patch.dict('geoconvex.runner.CHECKS', {'three_point': failing}):
        result = run_check(run_config, descriptor, UserDefaults(), RunOverrides())

    assert result.report.status is CheckStatus.INCONCLUSIVE
    assert result.report.notes == ['Invalid sampling plan: too few points']
    assert result.matched is False


def test_run_check__timings_only_when_requested(run_config):
    descriptor = run_config.check('parabola-three-point')

    assert run_check(run_config, descriptor, UserDefaults(), RunOverrides()).seconds is None
    assert run_check(run_config, descriptor, UserDefaults(), RunOverrides(timings=True)).seconds >= 0


def test_run_checks__status_and_digest(run_config):
    report = run_checks(run_config)

    assert report.status is RunStatus.OK
    assert report.exit_code == 0
    assert report.seed == 7
    assert report.config_digest == config_digest(run_config)
    assert [r.name for r in report.checks] == [c['name'] for c in RUN_CONFIG['checks']]


def test_run_checks__mismatch(run_config):
    run_config.checks[2].expect = Expectation.VIOLATED

    report = run_checks(run_config, descriptors=[run_config.checks[2]])

    assert report.status is RunStatus.MISMATCH
    assert report.exit_code == 1


def test_run_checks__results_keep_descriptor_order(run_config):
    descriptors = list(reversed(run_config.checks))

    report = run_checks(run_config, overrides=RunOverrides(threads=4), descriptors=descriptors)

    assert [r.name for r in report.checks] == [d.name for d in descriptors]


@pytest.mark.parametrize('checks,defaults,overrides,expected', [
    (3, UserDefaults(threads=2), RunOverrides(), 2),
    (3, UserDefaults(threads=2), RunOverrides(threads=8), 3),
    (10, UserDefaults(), RunOverrides(threads=4), 4),
    (0, UserDefaults(), RunOverrides(threads=4), 1),
])
def test_worker_count(checks, defaults, overrides, expected):
    assert worker_count(checks, defaults, overrides) == expected


def test_worker_count__environment_cap(monkeypatch):
    monkeypatch.setenv('GEOCONVEX_THREADS', '1')
    assert worker_count(10, UserDefaults(), RunOverrides(threads=4)) == 1


def test_falsify_check__finds_segment_violation(run_config):
    report = falsify_check(run_config, 'cube-segment')

    result = report.checks[0]
    assert result.report.status is CheckStatus.VIOLATED
    assert result.report.violation.margin >= 1.125
    assert len(result.report.margin_history) == 4


def test_falsify_check__unknown_check(run_config):
    with pytest.raises(CheckNotFound):
        falsify_check(run_config, 'nope')


def test_falsify_check__kind_without_sweep(run_config):
    with pytest.raises(FalsifyNotSupported):
        falsify_check(run_config, 'parabola-three-point')


def test_witness_config__revalidates_violation(run_config):
    '''
    Ensure the single-witness config re-evaluates the reported violation to the same verdict
    '''
    result = run_checks(run_config, descriptors=[run_config.check('cube-segment')]).checks[0]

    config = witness_config(run_config, result)

    assert [c.kind for c in config.checks] == ['geodesic_phi_convex', 'witness']
    assert config.checks[1].args['check'] == 'cube-segment'

    report = run_checks(config)
    assert report.status is RunStatus.OK
    witness = report.checks[1].report
    assert witness.status is CheckStatus.VIOLATED
    assert witness.worst_margin == pytest.approx(result.report.violation.margin)


def test_witness_config__none_without_violation(run_config):
    result = run_checks(run_config, descriptors=[run_config.check('parabola-three-point')]).checks[0]
    assert witness_config(run_config, result) is None


def test_probe_config__catalog_bifunction_without_config():
    config = probe_config(None, 'sum')

    report = run_checks(config)

    probe = report.checks[0].report
    assert probe.status is CheckStatus.VIOLATED
    assert len(probe.probes) == 6
    assert [p.property for p in probe.probes if not p.holds] == ['antisymmetric']


def test_curve_data__cube_on_segment(run_config):
    '''
    Ensure the curve columns at the midpoint of the geodesic from h = −2 to h = −1
    '''
    df = curve_data(run_config, 'cube', [-2, 0], [-1, 0], 17)

    assert list(df.columns) == ['t', 'lhs', 'rhs_phi', 'rhs_chord']
    assert len(df) == 17
    assert df.t.iloc[0] == 0 and df.t.iloc[-1] == 1
    assert df.lhs.iloc[8] == pytest.approx(-3.375)
    assert df.rhs_phi.iloc[8] == pytest.approx(-4.5)
    assert df.rhs_chord.iloc[8] == pytest.approx(-4.5)


def test_curve_data__endpoint_outside_region(run_config):
    with pytest.raises(InvalidPoint):
        curve_data(run_config, 'cube', [-2, 0], [1, 0], 17, region='segment')


def test_curve_data__needs_both_endpoints_of_t(run_config):
    with pytest.raises(InvalidSamplingPlan):
        curve_data(run_config, 'cube', [-2, 0], [-1, 0], 1)


def test_run_config_fixture_is_a_run_config(run_config):
    assert isinstance(run_config, RunConfig)
