'''
When a command is called on the CLI, variables and state are passed down the subcommand chain using
`@click.pass_context`. Classes defined here serve as simple DTOs to encapsulate these parameters.

Also defined here are reuseable sets of command options, which enable common options to be mapped to
subcommands throughout the CLI (https://github.com/pallets/click/issues/108#issuecomment-280489786).
'''
from dataclasses import dataclass, field
import functools
import logging
from typing import Optional

import click
from peak.util.proxies import LazyProxy

from geoconvex.cli.utils import parse_samples
from geoconvex.config import get_default_user_config_filepath
from geoconvex.config.user_config import load_user_config
from geoconvex.models import UserDefaults
from geoconvex.runner import RunOverrides


logger = logging.getLogger('geoconvex')


context = LazyProxy(lambda: CliParams())  # pylint: disable=unnecessary-lambda


@dataclass
class CliParams:
    @dataclass
    class OutputParams:
        '''Where and how a report is written'''
        out: Optional[str] = field(default=None)
        format: str = field(default='text')

    _verbose: bool = field(default=False)
    _debug: bool = field(default=False)
    debug_level: int = field(default=0)

    settings_path: Optional[str] = field(default=None)
    _defaults: Optional[UserDefaults] = field(default=None)

    overrides: RunOverrides = field(default_factory=RunOverrides)
    output: OutputParams = field(default_factory=OutputParams)

    @property
    def debug(self) -> bool:
        return self._debug

    @debug.setter
    def debug(self, val: bool):
        self._debug = val
        self._verbose = True
        logger.setLevel(logging.DEBUG)
        logger.handlers[0].setFormatter(logging.Formatter('%(levelname)s: %(module)s:%(lineno)s - %(message)s'))

    @property
    def verbose(self) -> bool:
        return self._verbose

    @verbose.setter
    def verbose(self, val: bool):
        self._verbose = val
        logger.setLevel(logging.INFO)

    @property
    def defaults(self) -> UserDefaults:
        'User INI defaults, read on first use'
        if self._defaults is None:
            self._defaults = load_user_config(self.settings_path or get_default_user_config_filepath())
        return self._defaults


def global_options(func):
    '''
    Define a set of global CLI options which are applied to all subcommands
    '''
    @click.option('--settings', type=click.Path(exists=True, dir_okay=False),
                  help='Read user defaults from this INI file')
    @click.option('--verbose', '-v', is_flag=True, help='Display INFO level logging')
    @click.option('--debug', '-d', count=True, help='Display DEBUG level logging')
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = args[0]

        if ctx.obj is None:
            # Initialise the CliParams DTO on first call
            ctx.obj = context

        if kwargs.get('verbose'):
            ctx.obj.verbose = True
        if kwargs.get('debug'):
            ctx.obj.debug = True
            ctx.obj.debug_level = kwargs.get('debug')

        if kwargs.get('settings'):
            ctx.obj.settings_path = kwargs.get('settings')

        # These options have been consumed, so remove from kwargs
        for param in ('verbose', 'debug', 'settings'):
            del kwargs[param]

        return func(*args, **kwargs)

    return wrapper


def run_options(func):
    '''
    Define the reusable sampling and tolerance options, which take precedence over the run config
    '''
    @click.option('--seed', type=int, help='Seed for all sampling (default: the run config seed)')
    @click.option('--tol', type=float, help='Tolerance for closed-form comparisons')
    @click.option('--fd-step', type=float, help='Finite-difference step')
    @click.option('--samples', callback=parse_samples,
                  help='Grid counts per manifold factor, comma-separated, eg. "33,4"')
    @click.option('--threads', type=click.IntRange(min=1), help='Number of worker threads')
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = args[0]

        if ctx.obj is None:
            ctx.obj = context

        overrides = ctx.obj.overrides
        if kwargs.get('seed') is not None:
            overrides.seed = kwargs['seed']
        if kwargs.get('tol') is not None:
            overrides.tolerance['closed_form'] = kwargs['tol']
        if kwargs.get('fd_step') is not None:
            overrides.tolerance['fd_step'] = kwargs['fd_step']
        if kwargs.get('samples'):
            overrides.sampling['counts'] = kwargs['samples']
        if kwargs.get('threads'):
            overrides.threads = kwargs['threads']

        # These options have been consumed, so remove from kwargs
        for param in ('seed', 'tol', 'fd_step', 'samples', 'threads'):
            del kwargs[param]

        return func(*args, **kwargs)

    return wrapper


def output_options(func):
    '''
    Define the reusable report output options
    '''
    @click.option('--out', '-o', type=click.Path(dir_okay=False), help='Write the report to PATH')
    @click.option('--format', 'format_', type=click.Choice(['json', 'text']), default='text',
                  help='Report format (default: text)')
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = args[0]

        if ctx.obj is None:
            ctx.obj = context

        ctx.obj.output.out = kwargs.get('out')
        ctx.obj.output.format = kwargs.get('format_')

        # These options have been consumed, so remove from kwargs
        for param in ('out', 'format_'):
            del kwargs[param]

        return func(*args, **kwargs)

    return wrapper
