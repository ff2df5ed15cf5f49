import json
import logging
import sys

import click

from . import __version__
from .config import SUITES, load_config
from .curvature import ResidualReport, evaluate_witness
from .exceptions import BusemannException, ConfigError
from .report import EXIT_ERROR, EXIT_PASS, dumps, exit_status, load_witness, write_report

LOGGER = logging.getLogger(__name__)


def _configure_logging(verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


@click.group()
@click.version_option(__version__)
def cli():
    """
    Sample curvature conditions, strainers, tangent cones and measures of
    model geodesic spaces.
    """


@cli.command()
@click.option(
    "--config", "config_path", required=True, type=click.Path(), help="Experiment file"
)
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Master seed")
@click.option("--out", type=click.Path(), default=None, help="Report path")
@click.option("--suite", type=click.Choice(SUITES), default=None, help="Suite to run")
@click.option(
    "--workers", type=click.IntRange(min=1), default=None, help="Worker threads"
)
@click.option("--verbose", "-v", is_flag=True, help="Log progress to stderr")
def run(config_path, seed, out, suite, workers, verbose):
    """
    Run a suite and write its JSON report.

    Exits 0 when every check passes, 1 on any violation and 2 on
    configuration or runtime errors.
    """
    from .suites import run as run_suite

    _configure_logging(verbose)
    try:
        config = load_config(config_path)
    except ConfigError as error:
        click.echo("Configuration error: {}".format(error), err=True)
        sys.exit(EXIT_ERROR)

    overrides = {"seed": seed, "out": out, "suite": suite}
    config = config._replace(**{k: v for k, v in overrides.items() if v is not None})

    try:
        report = run_suite(config, workers=workers)
        if config.out:
            write_report(report, config.out)
        else:
            click.echo(dumps(report))
    except (BusemannException, OSError, TypeError, ValueError) as error:
        click.echo("Run failed: {}".format(error), err=True)
        sys.exit(EXIT_ERROR)

    summary = report["summary"]
    click.echo(
        "{overall}: {pass} pass, {violation} violation, "
        "{inconclusive} inconclusive".format(**summary),
        err=True,
    )
    sys.exit(exit_status(report))


@cli.command()
@click.option(
    "--witness",
    "witness_path",
    required=True,
    type=click.Path(),
    help="Witness or report",
)
@click.option("--check", default=None, help="Check name when reading a report")
@click.option("--verbose", "-v", is_flag=True, help="Log progress to stderr")
def replay(witness_path, check, verbose):
    """
    Re-evaluate a stored witness and print its residual.
    """
    _configure_logging(verbose)
    try:
        witness = load_witness(witness_path, check)
        residual = evaluate_witness(witness)
    except (BusemannException, KeyError, TypeError) as error:
        click.echo("Replay failed: {}".format(error), err=True)
        sys.exit(EXIT_ERROR)

    result = ResidualReport(residual, witness, 1, witness.get("seed"))
    click.echo(
        json.dumps(
            {
                "check": witness.get("check"),
                "residual": float(result.worst_residual),
                "stored_residual": witness.get("residual"),
                "held": result.held,
            },
            sort_keys=True,
        )
    )
    sys.exit(EXIT_PASS)
