#!/usr/bin/env python3
"""Command line entry point.

    acx check <scenario> [--format human|records] [--seed N] [--samples N] [--out PATH]
    acx nijenhuis|levi|total-reality <scenario> [same options]
    acx list

<scenario> is a builtin name (see `acx list`) or the path of a TOML scenario file.
Exit codes: 0 when every check holds and the expectations match, 1 on a residual
breach, an expectation mismatch or any other error, 2 on a configuration error.
"""

import logging
import sys

import click

import constants as c
from exceptions import AcxError, ConfigError
from report import emit_report, write_report
from runner import run_scenario
from scenario import BUILTINS, builtin_scenario, resolve_scenario

logger = logging.getLogger(__name__)


def scenario_options(fn):
    options = [
        click.argument('scenario'),
        click.option('--format', 'fmt', type=click.Choice(c.FORMATS), default='human', show_default=True,
                     help='Aligned text summary or JSON Lines records.'),
        click.option('--seed', type=int, default=None, help='Override the scenario seed.'),
        click.option('--samples', type=int, default=None, help='Override the number of surface points.'),
        click.option('--out', type=click.Path(dir_okay=False), default=None,
                     help='Write the report here instead of stdout.'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _execute(mode: str, scenario: str, fmt: str, seed, samples, out) -> int:
    try:
        resolved = resolve_scenario(scenario).with_overrides(seed=seed, samples=samples)
        report = run_scenario(resolved, mode)
        data = emit_report(report, fmt)
        if out:
            write_report(data, out)
        else:
            click.echo(data, nl=False)
    except ConfigError as e:
        logger.error('Configuration error: %s', e)
        click.echo(f'error: {e}', err=True)
        return c.EXIT_CONFIG_ERROR
    except AcxError as e:
        logger.error('Run failed: %s', e)
        click.echo(f'error: {e}', err=True)
        return c.EXIT_CHECK_FAILED
    summary = report.summary
    if not summary['ok']:
        logger.warning('%s failed: breaches=%s verdict_matches=%s classification_matches=%s',
                       resolved.name, summary['breaches'], summary['verdict_matches'],
                       summary['classification_matches'])
        return c.EXIT_CHECK_FAILED
    return c.EXIT_OK


@click.group()
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              default='WARNING', show_default=True)
def cli(log_level: str):
    """Lifted almost complex structures and total reality of conormal bundles."""
    logging.basicConfig(level=log_level.upper(), stream=sys.stderr, force=True,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


@cli.command()
@scenario_options
def check(scenario, fmt, seed, samples, out):
    """Run every stage on a scenario."""
    sys.exit(_execute(c.MODE_CHECK, scenario, fmt, seed, samples, out))


@cli.command()
@scenario_options
def nijenhuis(scenario, fmt, seed, samples, out):
    """Structure validation and the Nijenhuis tensor against its bracket definition."""
    sys.exit(_execute(c.MODE_NIJENHUIS, scenario, fmt, seed, samples, out))


@cli.command()
@scenario_options
def levi(scenario, fmt, seed, samples, out):
    """Levi forms and their classification at each surface point."""
    sys.exit(_execute(c.MODE_LEVI, scenario, fmt, seed, samples, out))


@cli.command('total-reality')
@scenario_options
def total_reality(scenario, fmt, seed, samples, out):
    """Conormal tangent spaces against their image under the lifted structure."""
    sys.exit(_execute(c.MODE_TOTAL_REALITY, scenario, fmt, seed, samples, out))


@cli.command('list')
def list_builtins():
    """Print the builtin scenarios."""
    width = max(len(name) for name in BUILTINS)
    for name in BUILTINS:
        s = builtin_scenario(name)
        click.echo(f'{name.ljust(width)}  dim={s.dim}  {s.scenario.description}')


if __name__ == '__main__':
    cli()
