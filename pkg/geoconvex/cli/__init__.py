'''
Application CLI entry point. Uses the click library to configure commands, arguments, options and
help text.

This file contains the initial entry point function `cli`, and imports all commands from modules in
the current package.
'''
import logging

import click

from geoconvex import __title__, __version__
from geoconvex.cli.main import cli_audit, cli_check, cli_curve, cli_falsify, cli_probe
from geoconvex.cli.params import global_options


logger = logging.getLogger('geoconvex')
sh = logging.StreamHandler()
sh.setFormatter(logging.Formatter('%(message)s'))
logger.addHandler(sh)
logger.setLevel(logging.WARNING)


@click.group()
@click.version_option(__version__, prog_name=__title__)
@click.pass_context
@global_options
def cli(_):
    '''
    Sampled certification and falsification of geodesic φ-convexity
    '''
    # The interesting work is actually done in the `global_options` decorator.


cli.add_command(cli_audit)
cli.add_command(cli_check)
cli.add_command(cli_curve)
cli.add_command(cli_falsify)
cli.add_command(cli_probe)
