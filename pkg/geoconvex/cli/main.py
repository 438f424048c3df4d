'''
Module containing the top-level commands
'''
import logging
from typing import Optional

import click

from geoconvex.audit import run_audit
from geoconvex.cli.console import console
from geoconvex.cli.params import global_options, output_options, run_options
from geoconvex.cli.utils import emit_report, write_output
from geoconvex.config import load_run_config, validate_run_config
from geoconvex.runner import curve_data, falsify_check, probe_config, run_checks, witness_config
from geoconvex.utils import parse_floats


logger = logging.getLogger('geoconvex')


def _report_path(ctx: click.core.Context, default: Optional[str]=None) -> Optional[str]:
    return ctx.obj.output.out or default


@click.command(name='check')
@click.option('--config', '-c', 'config_path', required=True, help='Run config JSON file')
@click.option('--timings', is_flag=True, help='Include wall-clock seconds per check in the report')
@click.pass_context
@global_options
@run_options
@output_options
def cli_check(ctx: click.core.Context, config_path: str, timings: bool=False):
    '''
    Run every check in a run config.

    Exits 0 when every check matched its expectation, 1 on any mismatch and 2 when the config
    cannot be read.
    '''
    config = load_run_config(config_path)
    ctx.obj.overrides.timings = timings

    report = run_checks(config, ctx.obj.defaults, ctx.obj.overrides, progress=not ctx.obj.verbose)
    emit_report(report, ctx.obj.output.format, _report_path(ctx, config.output.get('report')))
    ctx.exit(report.exit_code)


@click.command(name='falsify', no_args_is_help=True)
@click.argument('name')
@click.option('--config', '-c', 'config_path', required=True, help='Run config JSON file')
@click.option('--witness-out', type=click.Path(dir_okay=False),
              help='Write a single-witness run config which re-validates the violation')
@click.pass_context
@global_options
@run_options
@output_options
def cli_falsify(ctx: click.core.Context, name: str, config_path: str, witness_out: Optional[str]=None):
    '''
    Search for a counterexample to one check by local grid refinement around its worst sample.

    NAME  Name of a check descriptor in the run config
    '''
    config = load_run_config(config_path)

    report = falsify_check(config, name, ctx.obj.defaults, ctx.obj.overrides)
    emit_report(report, ctx.obj.output.format, _report_path(ctx, config.output.get('report')))

    if witness_out:
        generated = witness_config(config, report.checks[0])
        if generated is None:
            console.print('No violation found, so no witness config was written')
        else:
            write_output(generated.as_json() + '\n', witness_out)

    ctx.exit(report.exit_code)


@click.command(name='probe', no_args_is_help=True)
@click.argument('phi')
@click.option('--config', '-c', 'config_path', help='Run config JSON file defining bifunctions')
@click.pass_context
@global_options
@run_options
@output_options
def cli_probe(ctx: click.core.Context, phi: str, config_path: Optional[str]=None):
    '''
    Probe the six bifunction properties of PHI on samples.

    PHI  A catalog bifunction (diff, sum, prod, cube_diff), or one defined in the run config
    '''
    config = load_run_config(config_path) if config_path else None

    probing = probe_config(config, phi)
    validate_run_config(probing)

    report = run_checks(probing, ctx.obj.defaults, ctx.obj.overrides)
    emit_report(report, ctx.obj.output.format, _report_path(ctx))
    ctx.exit(report.exit_code)


@click.command(name='curve', no_args_is_help=True)
@click.argument('function')
@click.option('--config', '-c', 'config_path', required=True, help='Run config JSON file')
@click.option('--from', 'start', required=True, help='Start point x, comma-separated coordinates')
@click.option('--to', 'end', required=True, help='End point y, comma-separated coordinates')
@click.option('--t-count', type=int, default=17, help='Points on the t-grid, including 0 and 1')
@click.option('--phi', default='diff', help='Bifunction of the φ bound (default: diff)')
@click.option('--region', help='Require both endpoints to lie in this region of the run config')
@click.option('--out', '-o', type=click.Path(dir_okay=False), help='Write the CSV to PATH')
@click.pass_context
@global_options
def cli_curve(_, function: str, config_path: str, start: str, end: str,
              t_count: int, phi: str, region: Optional[str]=None, out: Optional[str]=None):
    '''
    Write plot-ready CSV of f along the geodesic from x to y, with columns t, lhs, rhs_phi and
    rhs_chord.

    FUNCTION  Name of a function in the run config
    '''
    config = load_run_config(config_path)

    if function not in config.functions:
        raise click.BadParameter(f'no function "{function}" in the run config', param_hint='FUNCTION')
    if region is not None and region not in config.regions:
        raise click.BadParameter(f'no region "{region}" in the run config', param_hint='--region')

    try:
        x, y = parse_floats(start), parse_floats(end)
    except ValueError:
        raise click.BadParameter('points are comma-separated numbers')

    df = curve_data(config, function, x, y, t_count, phi=phi, region=region)
    write_output(df.to_csv(index=False, float_format='%.17g', lineterminator='\n'),
                 out or config.output.get('curve'))


@click.command(name='audit-paper')
@click.option('--timings', is_flag=True, help='Include wall-clock seconds per check in the report')
@click.pass_context
@global_options
@run_options
@output_options
def cli_audit(ctx: click.core.Context, timings: bool=False):
    '''
    Run the built-in audit suite: the helix example on the cylinder, sequential upper boundedness
    of sum and prod, the three-point inequality, and the restriction and epigraph characterizations.
    '''
    ctx.obj.overrides.timings = timings

    report = run_audit(ctx.obj.defaults, ctx.obj.overrides, progress=not ctx.obj.verbose)
    emit_report(report, ctx.obj.output.format, _report_path(ctx))
    ctx.exit(report.exit_code)
