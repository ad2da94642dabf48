"""
CLI interface for linewalk.

Runs configured scenarios, lists presets and validates scenario files via
the `linewalk` command.

Exit codes: 0 on success, 1 for configuration errors, 2 for numerical
failures (stopping cap exceeded, chart or conjugation failure).

Author: linewalk developers
"""

from __future__ import annotations

import logging

import click

from linewalk import __version__
from linewalk.config import OUTPUT_DIR_ENV, load_config
from linewalk.errors import ConfigError, NumericalError, SystemValidationError

EXIT_CONFIG = 1
EXIT_NUMERIC = 2


@click.group()
@click.version_option(version=__version__, prog_name="linewalk")
@click.option("--verbose", "-v", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool):
    """linewalk: symmetric random walks on PL homeomorphism groups of the line.

    Build stationary measures, test recurrence and contraction, and find
    zero-drift coordinates from a JSON scenario file.

    Examples:

        linewalk run scenario.json

        linewalk presets

        linewalk validate scenario.json
    """
    if verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option(
    "--workers",
    "-w",
    type=click.IntRange(min=1),
    default=None,
    help="Worker threads (results do not depend on it).",
)
@click.option(
    "--output-dir",
    "-o",
    default=None,
    help=f"Artifact directory (overrides the config; default ${OUTPUT_DIR_ENV}).",
)
@click.option("--quiet", "-q", is_flag=True, help="Do not print the summary.")
def run(config_path: str, workers: int | None, output_dir: str | None, quiet: bool):
    """Run the scenario in CONFIG_PATH and write its artifacts.

    CONFIG_PATH: JSON scenario file.
    """
    from linewalk.core import Scenario

    try:
        config = load_config(config_path)
        if workers is not None:
            config.workers = workers
        if output_dir:
            config.output_dir = output_dir
        scenario = Scenario(config).run()
        paths = scenario.save()
    except (ConfigError, SystemValidationError) as e:
        click.echo(f" Config error: {e}", err=True)
        raise SystemExit(EXIT_CONFIG)
    except NumericalError as e:
        click.echo(f" Numerical failure: {e}", err=True)
        raise SystemExit(EXIT_NUMERIC)

    if not quiet:
        scenario.summary(print_output=True)
    click.echo(f" {len(paths)} artifacts written to: {config.output_dir}")


@main.command()
def presets():
    """List the built-in generator systems."""
    from linewalk.presets import presets as preset_table

    for name, description in preset_table().items():
        click.echo(f"  {name:<24} {description}")


@main.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
def validate(config_path: str):
    """Check a scenario file and its generator system without running it.

    CONFIG_PATH: JSON scenario file.
    """
    from linewalk.walkgroup import validate as validate_system

    try:
        config = load_config(config_path)
    except (ConfigError, SystemValidationError) as e:
        click.echo(f" Config error: {e}", err=True)
        raise SystemExit(EXIT_CONFIG)

    try:
        report = validate_system(config.build_system())
    except SystemValidationError as e:
        click.echo(f" Invalid system: {e}", err=True)
        raise SystemExit(EXIT_CONFIG)
    for _, row in report.to_frame().iterrows():
        click.echo(f"  [{row['Status']}] {row['Check']}: {row['Details']}")
    click.echo(f"\n  Config hash: {config.content_hash()}")
    if not report.passed:
        raise SystemExit(EXIT_CONFIG)


if __name__ == "__main__":
    main()
