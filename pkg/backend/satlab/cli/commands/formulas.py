# backend/satlab/cli/commands/formulas.py

from pathlib import Path
from typing import Optional

import click

from satlab.cli.deps import make_config, output_options, render_output, tracked, write_lines
from satlab.core.formula import (
    Assignment,
    obfuscate_and_true,
    parse_formula,
    plant_dnf,
    render,
    truth_table,
)
from satlab.schemas import OutputFormat


@click.command("truth-table")
@click.argument("formula_text", required=False)
@click.option("--n", "num_vars", type=int, default=None, help="Declared variable count.")
@click.option(
    "--file",
    "formula_file",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Read the formula text from a file.",
)
@output_options(OutputFormat.text)
def truth_table_cmd(
    formula_text: Optional[str],
    num_vars: Optional[int],
    formula_file: Optional[str],
    output_format: str,
    output_path: Optional[str],
):
    """
    Print the 2**n output string of a formula and its ones count k.
    """
    if formula_file is not None:
        formula_text = Path(formula_file).read_text(encoding="utf-8").strip()
    if not formula_text:
        raise click.UsageError("give a formula or --file")

    config = make_config(
        "truth-table",
        {"formula": formula_text, "n": num_vars},
        output_format,
        output_path,
    )
    with tracked(config) as payloads:
        table = truth_table(parse_formula(formula_text, num_vars))
        payload = {"bits": table.bits, "k": table.ones_count, "n": table.n}
        lines = render_output(
            config,
            text=[f"{table.bits} k={table.ones_count}"],
            csv=["bits,k", f"{table.bits},{table.ones_count}"],
            payload=payload,
        )
        payloads.extend(lines)
    write_lines(lines, output_path)


@click.command("plant")
@click.argument("targets", nargs=-1, type=int, required=True)
@click.option("--n", "num_vars", type=int, required=True)
@click.option(
    "--obfuscate",
    is_flag=True,
    default=False,
    help="AND the DNF with a tautology over the same variables.",
)
@output_options(OutputFormat.text)
def plant_cmd(
    targets: tuple[int, ...],
    num_vars: int,
    obfuscate: bool,
    output_format: str,
    output_path: Optional[str],
):
    """
    Build the DNF that is true exactly on TARGETS (assignment integers).
    """
    config = make_config(
        "plant",
        {"targets": sorted(set(targets)), "n": num_vars, "obfuscate": obfuscate},
        output_format,
        output_path,
    )
    with tracked(config) as payloads:
        formula = plant_dnf([Assignment(t, num_vars) for t in targets], num_vars)
        if obfuscate:
            formula = obfuscate_and_true(formula)
        text = render(formula)
        lines = render_output(
            config,
            text=[text],
            payload={"formula": text, "size": formula.size, "n": num_vars},
        )
        payloads.extend(lines)
    write_lines(lines, output_path)
