# backend/satlab/cli/commands/distance.py

from typing import Optional

import click

from satlab.cli.deps import make_config, output_options, render_output, tracked, write_lines
from satlab.core.statdist import distance_record
from satlab.schemas import OutputFormat


@click.command("distance")
@click.argument("p1", type=float)
@click.argument("p2", type=float)
@click.option("--m", "m", type=click.IntRange(min=1), default=None, help="Trials for the packing count.")
@output_options(OutputFormat.text)
def distance_cmd(
    p1: float, p2: float, m: Optional[int], output_format: str, output_path: Optional[str]
):
    """
    Statistical distance between Bernoulli(P1) and Bernoulli(P2).
    """
    config = make_config("distance", {"p1": p1, "p2": p2, "m": m}, output_format, output_path)
    with tracked(config) as payloads:
        record = distance_record(p1, p2, m)
        text = f"distance={record.distance_rad:.6f}"
        if record.min_trials is not None:
            text += f" min_trials={record.min_trials}"
        if record.packing_count is not None:
            text += (
                f" packing_count={record.packing_count}"
                f" normalized_count={record.normalized_count:.6f}"
            )
        header = "p1,p2,m,distance_rad,min_trials,packing_count,normalized_count"
        values = [
            record.p1, record.p2, record.m, record.distance_rad,
            record.min_trials, record.packing_count, record.normalized_count,
        ]
        row = ",".join("" if v is None else f"{v:.10g}" if isinstance(v, float) else str(v) for v in values)
        lines = render_output(
            config,
            text=[text],
            csv=[header, row],
            payload=record.model_dump(mode="json"),
        )
        payloads.extend(lines)
    write_lines(lines, output_path)
