'''
Print and text rendering utils for the CLI commands
'''
import logging
from typing import List, Optional

import click
from tabulate import tabulate

from geoconvex.cli.console import console
from geoconvex.models import CheckResult, ProbeReport, RunReport, RunStatus
from geoconvex.utils import render_value


logger = logging.getLogger('geoconvex')


def parse_samples(_, __, value: Optional[str]) -> Optional[List[int]]:
    'Click callback parsing --samples into one grid count per manifold factor'
    if not value:
        return None
    try:
        counts = [int(v.strip()) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter('expected comma-separated integers, eg. "33,4"')
    if not counts or any(c < 1 for c in counts):
        raise click.BadParameter('grid counts must be positive integers')
    return counts


def report_table(report: RunReport) -> str:
    'Render the per-check summary table of a run report'
    headers = ['Check', 'Kind', 'Expect', 'Status', 'Worst margin', 'Samples', 'Matched']
    rows = [
        [
            r.name, r.kind, r.expect.value, r.report.status.value, render_value(r.report.worst_margin),
            r.report.samples, render_value(r.matched),
        ]
        for r in report.checks
    ]
    if any(r.seconds is not None for r in report.checks):
        headers.append('Seconds')
        for row, r in zip(rows, report.checks):
            row.append(render_value(r.seconds, 3))

    return tabulate(rows, headers, tablefmt='fancy_outline', disable_numparse=True)


def probe_table(probes: List[ProbeReport]) -> str:
    headers = ['Property', 'Verdict', 'Margin', 'Samples', 'Witness']
    rows = [
        [
            p.property, p.verdict.value, render_value(p.margin), p.samples,
            ' '.join(f'{k}={render_value(v)}' for k, v in p.witness.items()),
        ]
        for p in probes
    ]
    return tabulate(rows, headers, tablefmt='fancy_outline', disable_numparse=True)


def check_details(result: CheckResult) -> List[str]:
    'Detail lines for one check: violation witness, measurements and notes'
    lines = [f'{result.name}:']
    report = result.report

    if report.violation:
        v = report.violation
        lines.append(
            f'  witness x={render_value(v.x, 17)} y={render_value(v.y, 17)} t={render_value(v.t, 17)} '
            f'lhs={render_value(v.lhs)} rhs={render_value(v.rhs)} margin={render_value(v.margin)}'
        )
    for key, value in report.measurements.items():
        lines.append(f'  {key} = {render_value(value)}')
    if report.margin_history:
        lines.append(f'  margin history {render_value(report.margin_history)}')
    for note in report.notes:
        lines.append(f'  - {note}')
    return lines


def report_text(report: RunReport) -> str:
    '''
    Human-readable rendering of a run report. Deterministic for a given report, so that text reports
    are as diff-able as JSON ones.
    '''
    lines = [
        f'geoconvex {report.version}  config {report.config_digest[:12]}  seed {report.seed}',
        report_table(report),
    ]
    for result in report.checks:
        if result.report.probes:
            lines.append(f'{result.name}:')
            lines.append(probe_table(result.report.probes))
        lines.extend(check_details(result))

    mismatched = [r.name for r in report.checks if not r.matched]
    if report.status is RunStatus.OK:
        lines.append(f'All {len(report.checks)} checks matched their expectations')
    else:
        lines.append(f'{len(mismatched)} checks did not match their expectations: {", ".join(mismatched)}')
    return '\n'.join(lines) + '\n'


def write_output(text: str, path: Optional[str]):
    '''
    Write report text to `path`, or to stdout when no path is given
    '''
    if path:
        with open(path, 'w', encoding='utf8', newline='\n') as f:
            f.write(text)
        logger.info('Wrote %s', path)
    else:
        click.echo(text, nl=False)


def emit_report(report: RunReport, fmt: str, path: Optional[str]=None):
    'Write a run report as JSON or text'
    if fmt == 'json':
        write_output(report.as_json() + '\n', path)
    else:
        write_output(report_text(report), path)

    if path and report.status is RunStatus.MISMATCH:
        console.print(f'[bold red]Mismatch:[/] see {path}')
