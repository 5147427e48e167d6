# backend/satlab/cli/main.py

from typing import Optional

import click

from satlab import __version__
from satlab.cli.commands import distance, estimates, experiments, formulas, runs, sequences
from satlab.cli.deps import AppState
from satlab.config import get_settings
from satlab.errors import SatlabError
from satlab.log import configure_logging


class SatlabGroup(click.Group):
    """Turns domain errors into the documented exit codes."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except SatlabError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)


@click.group(cls=SatlabGroup)
@click.version_option(__version__, prog_name="satlab")
@click.option("--log-level", default=None, help="Logging level (default SATLAB_LOG_LEVEL).")
@click.option("-v", "--verbose", is_flag=True, default=False, help="Shorthand for --log-level INFO.")
@click.option("--db", "database_url", default=None, help="Record the run in this registry URL.")
@click.option("--record", is_flag=True, default=False, help="Record the run in the default registry.")
@click.pass_context
def cli(
    ctx: click.Context,
    log_level: Optional[str],
    verbose: bool,
    database_url: Optional[str],
    record: bool,
):
    """SAT output strings, Kolmogorov bounds and statistical distance."""
    settings = get_settings()
    configure_logging("INFO" if verbose else log_level or settings.log_level)
    ctx.obj = AppState(
        database_url=database_url or settings.database_url,
        record=record or database_url is not None,
    )


# Register commands
cli.add_command(formulas.truth_table_cmd)
cli.add_command(formulas.plant_cmd)
cli.add_command(sequences.unrank_cmd)
cli.add_command(sequences.rank_cmd)
cli.add_command(sequences.figure1_cmd)
cli.add_command(sequences.bounds_cmd)
cli.add_command(distance.distance_cmd)
cli.add_command(estimates.kestimate_cmd)
cli.add_command(estimates.tail_check_cmd)
cli.add_command(experiments.scaling_cmd)
cli.add_command(experiments.distinguish_cmd)
cli.add_command(experiments.pipeline_cmd)
cli.add_command(runs.runs_cmd)


def main() -> None:
    cli(prog_name="satlab")


if __name__ == "__main__":
    main()
