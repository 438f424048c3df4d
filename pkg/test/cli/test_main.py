'''
Tests for the top-level commands in cli/main.py
'''
import json

from click.testing import CliRunner
import pytest

from fixtures import MISMATCH_CONFIG, RUN_CONFIG
from geoconvex.cli import cli


def test_check__all_expectations_met(config_file):
    '''
    Ensure check exits zero and prints the summary table
    '''
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['check', '--config', config_file()])

    assert result.exit_code == 0, result.stderr
    assert 'All 4 checks matched their expectations' in result.stdout
    assert 'cube-segment' in result.stdout


def test_check__mismatch_exits_one(config_file):
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['check', '--config', config_file(MISMATCH_CONFIG)])

    assert result.exit_code == 1
    assert '1 checks did not match their expectations: cube-upper' in result.stdout


def test_check__missing_config_exits_two(tmp_path):
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['check', '--config', str(tmp_path / 'missing.json')])

    assert result.exit_code == 2


def test_check__invalid_config_exits_two(config_file):
    '''
    Ensure a descriptor naming an undefined function is rejected before any check runs
    '''
    config = {**RUN_CONFIG, 'checks': [
        {'name': 'bad', 'kind': 'three_point', 'args': {'function': 'nope', 'phi': 'diff', 'x': 0, 'y': 1, 'z': 2}},
    ]}
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['check', '--config', config_file(config)])

    assert result.exit_code == 2
    assert 'nope' in result.stderr


def test_check__json_report(config_file):
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['check', '--config', config_file(), '--format', 'json', '--seed', '11'])

    report = json.loads(result.stdout)
    assert report['status'] == 'ok'
    assert report['seed'] == 11
    assert [c['name'] for c in report['checks']] == [c['name'] for c in RUN_CONFIG['checks']]
    assert all('seconds' not in c for c in report['checks'])


def test_check__json_report_is_reproducible(config_file):
    runner = CliRunner(mix_stderr=False)
    path = config_file()

    first = runner.invoke(cli, ['check', '--config', path, '--format', 'json'])
    second = runner.invoke(cli, ['check', '--config', path, '--format', 'json', '--threads', '1'])

    assert first.stdout == second.stdout


def test_check__timings_column(config_file):
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['check', '--config', config_file(), '--timings'])

    assert 'Seconds' in result.stdout


def test_check__report_written_to_out(config_file, tmp_path):
    out = tmp_path / 'report.json'
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['check', '--config', config_file(), '--format', 'json', '--out', str(out)])

    assert result.exit_code == 0
    assert result.stdout == ''
    assert json.loads(out.read_text(encoding='utf8'))['status'] == 'ok'


def test_falsify__witness_config_revalidates(config_file, tmp_path):
    '''
    Ensure the written witness config runs as its own check, and reproduces the violation
    '''
    witness = tmp_path / 'witness.json'
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['falsify', 'cube-segment', '--config', config_file(), '--format', 'json',
                                 '--witness-out', str(witness)])

    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    assert report['checks'][0]['report']['violation']['margin'] >= 1.125

    generated = json.loads(witness.read_text(encoding='utf8'))
    assert [c['kind'] for c in generated['checks']] == ['geodesic_phi_convex', 'witness']

    rerun = runner.invoke(cli, ['check', '--config', str(witness)])
    assert rerun.exit_code == 0, rerun.stdout


def test_falsify__no_violation_writes_no_witness(config_file, tmp_path):
    witness = tmp_path / 'witness.json'
    config = {**RUN_CONFIG, 'checks': [{**RUN_CONFIG['checks'][0], 'expect': 'pass'}]}
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['falsify', 'cube-upper', '--config', config_file(config),
                                 '--witness-out', str(witness)])

    assert result.exit_code == 0
    assert not witness.exists()
    assert 'No violation found' in result.stderr


@pytest.mark.parametrize('name', ['nope', 'parabola-three-point'])
def test_falsify__bad_check_exits_two(config_file, name):
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['falsify', name, '--config', config_file()])

    assert result.exit_code == 2


def test_probe__catalog_bifunction_table():
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['probe', 'sum'])

    assert result.exit_code == 0
    for prop in ('nonneg_homogeneous', 'additive', 'antisymmetric', 'seq_upper_bounded'):
        assert prop in result.stdout


def test_probe__unknown_bifunction_exits_two():
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['probe', 'quotient'])

    assert result.exit_code == 2


def test_curve__csv_columns(config_file):
    '''
    Ensure the midpoint row of the cube along the geodesic from h = −2 to h = −1
    '''
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['curve', 'cube', '--config', config_file(), '--from=-2,0', '--to=-1,0'])

    assert result.exit_code == 0, result.stderr
    lines = result.stdout.splitlines()
    assert lines[0] == 't,lhs,rhs_phi,rhs_chord'
    assert len(lines) == 18
    assert [float(v) for v in lines[9].split(',')] == pytest.approx([0.5, -3.375, -4.5, -4.5])


def test_curve__writes_out_file(config_file, tmp_path):
    out = tmp_path / 'curve.csv'
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['curve', 'cube', '--config', config_file(), '--from=-2,0', '--to=-1,0',
                                 '--t-count', '5', '--out', str(out)])

    assert result.exit_code == 0
    assert len(out.read_text(encoding='utf8').splitlines()) == 6


@pytest.mark.parametrize('params', [
    ('nope', '--from=0,0', '--to=1,0'),
    ('cube', '--from=a,0', '--to=1,0'),
    ('cube', '--from=0,0', '--to=1,0', '--region', 'nope'),
])
def test_curve__bad_parameters_exit_two(config_file, params):
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['curve', '--config', config_file(), *params])

    assert result.exit_code == 2


@pytest.mark.slow
def test_audit_paper__all_scenarios_match():
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['audit-paper', '--format', 'json'])

    assert result.exit_code == 0, result.stdout
    assert json.loads(result.stdout)['status'] == 'ok'
