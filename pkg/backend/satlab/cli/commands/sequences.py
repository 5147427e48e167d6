# backend/satlab/cli/commands/sequences.py

from typing import Optional

import click

from satlab.cli.deps import make_config, output_options, render_output, tracked, write_lines
from satlab.core.combinatorics import (
    figure1_csv,
    figure1_curve,
    k_complexity_bound,
    program1_length_bound,
    program2_length_bound,
    rank_k_ones,
    unrank_k_ones,
)
from satlab.core.complexity import ensemble_universal_prob_bound
from satlab.core.formula import formula_description_bits, parse_formula
from satlab.schemas import OutputFormat


@click.command("unrank")
@click.argument("length", type=int)
@click.argument("k", type=int)
@click.argument("index", type=int)
@output_options(OutputFormat.text)
def unrank_cmd(length: int, k: int, index: int, output_format: str, output_path: Optional[str]):
    """
    Print the INDEX-th (1-based) string of LENGTH bits with K ones.
    """
    config = make_config(
        "unrank", {"L": length, "k": k, "I": index}, output_format, output_path
    )
    with tracked(config) as payloads:
        bits = unrank_k_ones(length, k, index)
        lines = render_output(
            config,
            text=[bits],
            csv=["L,k,I,bits", f"{length},{k},{index},{bits}"],
            payload={"L": length, "k": k, "I": index, "bits": bits},
        )
        payloads.extend(lines)
    write_lines(lines, output_path)


@click.command("rank")
@click.argument("bits")
@output_options(OutputFormat.text)
def rank_cmd(bits: str, output_format: str, output_path: Optional[str]):
    """
    Print the lexicographic index of BITS among strings of its weight.
    """
    config = make_config("rank", {"bits": bits}, output_format, output_path)
    with tracked(config) as payloads:
        index = rank_k_ones(bits)
        lines = render_output(
            config,
            text=[str(index)],
            csv=["bits,I", f"{bits},{index}"],
            payload={"bits": bits, "I": index},
        )
        payloads.extend(lines)
    write_lines(lines, output_path)


@click.command("figure1")
@click.argument("k", type=int)
@click.argument("n_min", type=int)
@click.argument("n_max", type=int)
@output_options(OutputFormat.csv)
def figure1_cmd(k: int, n_min: int, n_max: int, output_format: str, output_path: Optional[str]):
    """
    Emit y = 2**n H(k / 2**n) for n in N_MIN..N_MAX as "n,y".
    """
    config = make_config(
        "figure1", {"k": k, "n_min": n_min, "n_max": n_max}, output_format, output_path
    )
    with tracked(config) as payloads:
        series = figure1_curve(k, n_min, n_max)
        rows = ["n,y"] + figure1_csv(series)
        lines = render_output(
            config,
            csv=rows,
            payload=[{"n": n, "y": y} for n, y in series],
        )
        payloads.extend(lines)
    write_lines(lines, output_path)


@click.command("bounds")
@click.option("--n", "n", type=int, required=True)
@click.option("--k", "k", type=int, required=True)
@click.option("--formula", "formula_text", default=None, help="Formula for the Program 1 bound.")
@output_options(OutputFormat.json)
def bounds_cmd(
    n: int, k: int, formula_text: Optional[str], output_format: str, output_path: Optional[str]
):
    """
    Description-length bounds for a 2**n string with K ones (constant c omitted).
    """
    config = make_config(
        "bounds", {"n": n, "k": k, "formula": formula_text}, output_format, output_path
    )
    with tracked(config) as payloads:
        payload = {
            "program2_bits": program2_length_bound(1 << n, k).bits_excluding_constant,
            "k_bound_bits": k_complexity_bound(n, k).bits_excluding_constant,
            "log2_p_bound": ensemble_universal_prob_bound(n, k),
            "uniform_log2_p": -float(1 << n),
            "constant_note": True,
        }
        if formula_text:
            formula = parse_formula(formula_text, n)
            payload["program1_bits"] = program1_length_bound(
                formula_description_bits(formula), n
            ).bits_excluding_constant
        text = [f"{key}={value}" for key, value in sorted(payload.items())]
        lines = render_output(config, text=text, payload=payload)
        payloads.extend(lines)
    write_lines(lines, output_path)
