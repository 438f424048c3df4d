'''
Tests for the reusable CLI option sets in cli/params.py
'''
import logging
from unittest import mock

from click.testing import CliRunner
import pytest

from fixtures import USER_CONFIG
from geoconvex.cli import cli
from geoconvex.cli.params import context
from geoconvex.models import RunReport, RunStatus


EMPTY_REPORT = RunReport(version='0', config_digest='0' * 40, seed=0, status=RunStatus.OK)


def test_cli__global_options__verbose_flag_sets_logger_to_info_level():
    '''
    Ensure the --verbose flag correctly sets the logger level
    '''
    runner = CliRunner(mix_stderr=False)

    runner.invoke(cli, ['--verbose', 'probe', 'diff'])

    assert logging.getLogger('geoconvex').level == logging.INFO


def test_cli__global_options__debug_flag_sets_logger_to_debug_level():
    '''
    Ensure the --debug flag correctly sets the logger level
    '''
    runner = CliRunner(mix_stderr=False)

    runner.invoke(cli, ['--debug', 'probe', 'diff'])

    assert logging.getLogger('geoconvex').level == logging.DEBUG
    assert context.debug_level == 1


def test_cli__global_options__settings_file_is_read(tmp_path):
    settings = tmp_path / 'geoconvex.ini'
    settings.write_text(USER_CONFIG, encoding='utf8')
    runner = CliRunner(mix_stderr=False)

    runner.invoke(cli, ['--settings', str(settings), 'probe', 'diff'])

    assert context.defaults.tolerance.closed_form == 1e-7
    assert context.defaults.sampling.t_count == 9
    assert context.defaults.threads == 2


@mock.patch('geoconvex.cli.main.run_checks', return_value=EMPTY_REPORT)
def test_cli__run_options__set_overrides(mock_run_checks, config_file):
    '''
    Ensure the sampling and tolerance flags land in the run overrides passed to the runner
    '''
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, [
        'check', '--config', config_file(), '--seed', '3', '--tol', '1e-7', '--fd-step', '1e-4',
        '--samples', '9, 4', '--threads', '2',
    ])

    assert result.exit_code == 0, result.stderr
    overrides = mock_run_checks.call_args[0][2]
    assert overrides.seed == 3
    assert overrides.tolerance == {'closed_form': 1e-7, 'fd_step': 1e-4}
    assert overrides.sampling == {'counts': [9, 4]}
    assert overrides.threads == 2


@pytest.mark.parametrize('samples', ['a,4', '0,4', ','])
def test_cli__run_options__bad_samples(config_file, samples):
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['check', '--config', config_file(), '--samples', samples])

    assert result.exit_code == 2


def test_cli__run_options__threads_must_be_positive(config_file):
    runner = CliRunner(mix_stderr=False)

    result = runner.invoke(cli, ['check', '--config', config_file(), '--threads', '0'])

    assert result.exit_code == 2


@mock.patch('geoconvex.cli.main.run_checks', return_value=EMPTY_REPORT)
def test_cli__output_options__format(_, config_file):
    runner = CliRunner(mix_stderr=False)

    runner.invoke(cli, ['check', '--config', config_file(), '--format', 'json'])

    assert context.output.format == 'json'
