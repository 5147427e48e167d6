# backend/satlab/cli/commands/runs.py

from typing import Optional

import click

from satlab.cli.deps import AppState, dumps, get_db
from satlab.db.base import init_db
from satlab.db.runs import list_runs
from satlab.schemas import ExperimentRunOut


@click.command("runs")
@click.option("--subcommand", default=None, help="Only runs of this subcommand.")
@click.option("--limit", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--json", "as_json", is_flag=True, default=False, help="One JSON object per run.")
@click.pass_obj
def runs_cmd(state: AppState, subcommand: Optional[str], limit: int, as_json: bool):
    """
    List recorded runs, newest first.
    """
    init_db(state.database_url)
    for db in get_db(state.database_url):
        rows = [ExperimentRunOut.model_validate(r) for r in list_runs(db, subcommand, limit)]
    for row in rows:
        if as_json:
            click.echo(dumps(row.model_dump(mode="json")))
        else:
            click.echo(
                f"{row.id}\t{row.subcommand}\t{row.status.value}\t"
                f"{row.started_at.isoformat(timespec='seconds')}\t"
                f"records={row.record_count if row.record_count is not None else '-'}"
                + (f"\terror={row.error_message}" if row.error_message else "")
            )
