# backend/satlab/cli/deps.py

import json
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Generator, Iterator, Optional

import click
from sqlalchemy.orm import Session

from satlab.config import FORMAT_VERSION
from satlab.db.base import get_session_factory, init_db
from satlab.db.runs import fail_run, finish_run, start_run
from satlab.schemas import OutputFormat, RunConfig

U64 = click.IntRange(0, 2**64 - 1)


@dataclass
class AppState:
    """Group-level options shared by every subcommand."""

    database_url: str
    record: bool = False


def get_db(database_url: str) -> Generator[Session, None, None]:
    """
    Provide a registry session.
    Closes the session afterwards.
    """
    db = get_session_factory(database_url)()
    try:
        yield db
    finally:
        db.close()


@contextmanager
def tracked(config: RunConfig) -> Iterator[list[str]]:
    """
    Record the run in the registry when --record is on.
    Callers append the output records they produced to the yielded list.
    """
    state: AppState = click.get_current_context().find_object(AppState)
    payloads: list[str] = []
    if state is None or not state.record:
        yield payloads
        return

    init_db(state.database_url)
    sessions = get_db(state.database_url)
    db = next(sessions)
    run = start_run(db, config)
    try:
        yield payloads
    except Exception as exc:
        fail_run(db, run, exc)
        raise
    else:
        finish_run(db, run, payloads)
    finally:
        sessions.close()


def output_options(default: OutputFormat) -> Callable:
    """--out and --format, shared by the commands that write results."""

    def decorate(fn: Callable) -> Callable:
        fn = click.option(
            "--format",
            "output_format",
            type=click.Choice([f.value for f in OutputFormat]),
            default=default.value,
            show_default=True,
            help="text (bare result), csv or json (both echo the run config).",
        )(fn)
        fn = click.option(
            "--out",
            "output_path",
            type=click.Path(dir_okay=False, writable=True),
            default=None,
            help="Write to this file instead of stdout.",
        )(fn)
        return fn

    return decorate


seed_option = click.option(
    "--seed", type=U64, default=0, show_default=True, help="Master seed (u64)."
)


def make_config(
    subcommand: str,
    parameters: dict[str, Any],
    output_format: str,
    output_path: Optional[str],
    seed: int = 0,
) -> RunConfig:
    return RunConfig(
        subcommand=subcommand,
        parameters=parameters,
        master_seed=seed,
        output_format=OutputFormat(output_format),
        output_path=output_path,
    )


def dumps(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def echo_header(config: RunConfig) -> str:
    return dumps({"format_version": FORMAT_VERSION, "config": config.model_dump(mode="json")})


def render_output(
    config: RunConfig,
    text: Optional[list[str]] = None,
    csv: Optional[list[str]] = None,
    payload: Any = None,
) -> list[str]:
    """
    Lay out a result in the requested format.
    csv starts with a '#' line holding the config echo; json wraps the payload.
    """
    fmt = config.output_format
    if fmt is OutputFormat.text:
        if text is not None:
            return text
        if csv is not None:
            return csv
        return [dumps(payload)]
    if fmt is OutputFormat.csv:
        if csv is None:
            raise click.UsageError(f"{config.subcommand} has no csv output; use json")
        return ["# " + echo_header(config)] + csv
    return [
        dumps(
            {
                "format_version": FORMAT_VERSION,
                "config": config.model_dump(mode="json"),
                "result": payload,
            }
        )
    ]


def write_lines(lines: list[str], output_path: Optional[str]) -> None:
    body = "".join(line + "\n" for line in lines)
    if output_path is None:
        click.echo(body, nl=False)
    else:
        Path(output_path).write_text(body, encoding="utf-8", newline="\n")
