# backend/satlab/cli/commands/experiments.py

from typing import Optional

import click

from satlab.cli.deps import (
    make_config,
    output_options,
    render_output,
    seed_option,
    tracked,
    write_lines,
)
from satlab.config import DEFAULT_GUARD, get_settings
from satlab.core.experiments import (
    EnsembleSpec,
    complexity_pipeline,
    distinguish_repetitions,
    fit_log2_slope,
    format_results,
    formula_bucket,
    oracle,
    scaling_csv,
    scaling_study,
)
from satlab.core.formula import parse_formula, truth_table
from satlab.errors import PreconditionError
from satlab.schemas import OutputFormat

max_m_option = click.option(
    "--max-m", type=click.IntRange(min=1), default=None, help="Trial budget per run (default 64 * 2**n)."
)
guard_option = click.option(
    "--guard", type=click.IntRange(min=1), default=DEFAULT_GUARD, show_default=True,
    help="Minimum paired draws before the rule may stop.",
)
workers_option = click.option(
    "--workers", type=click.IntRange(min=1), default=None, help="Worker processes for repetitions (default SATLAB_WORKERS)."
)


def _workers(workers: Optional[int]) -> int:
    return workers or get_settings().workers


def _ensemble(token: str, n: Optional[int]) -> EnsembleSpec:
    """A probability becomes an oracle; anything else is a formula forming a one-member bucket."""
    try:
        gamma = float(token)
    except ValueError:
        formula = parse_formula(token, n)
        table = truth_table(formula)
        return formula_bucket(
            formula.num_vars,
            table.ones_count,
            [formula],
            label=token,
            tables=table.as_array()[None, :],
        )
    return oracle(gamma)


@click.command("scaling")
@click.argument("n_min", type=click.IntRange(min=1))
@click.argument("n_max", type=click.IntRange(min=1))
@click.option("--reps", type=click.IntRange(min=1), default=1000, show_default=True)
@max_m_option
@guard_option
@workers_option
@seed_option
@output_options(OutputFormat.csv)
def scaling_cmd(
    n_min: int,
    n_max: int,
    reps: int,
    max_m: Optional[int],
    guard: int,
    workers: Optional[int],
    seed: int,
    output_format: str,
    output_path: Optional[str],
):
    """
    Median trials to separate Bernoulli(0) from Bernoulli(2**-n), n = N_MIN..N_MAX.
    """
    if n_min > n_max:
        raise PreconditionError(f"empty range n_min={n_min} > n_max={n_max}")
    # Worker count is left out of the echo: it never changes the numbers.
    config = make_config(
        "scaling",
        {"n_min": n_min, "n_max": n_max, "reps": reps, "max_m": max_m, "guard": guard},
        output_format,
        output_path,
        seed,
    )
    with tracked(config) as payloads:
        rows = scaling_study(
            range(n_min, n_max + 1), reps, seed, max_m, guard, _workers(workers)
        )
        payload: dict = {"rows": [r.model_dump(mode="json") for r in rows]}
        if len(rows) >= 2:
            slope, r2 = fit_log2_slope(rows)
            payload.update(log2_slope=slope, r2=r2)
        lines = render_output(config, csv=scaling_csv(rows), payload=payload)
        payloads.extend(lines)
    write_lines(lines, output_path)


@click.command("distinguish")
@click.argument("ensemble_a")
@click.argument("ensemble_b")
@click.option("--n", "num_vars", type=int, default=None, help="Variable count for formula ensembles.")
@click.option("--reps", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--max-m", type=click.IntRange(min=1), default=1 << 16, show_default=True)
@guard_option
@workers_option
@seed_option
@click.option(
    "--out",
    "output_path",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Write the JSON-lines results file here instead of stdout.",
)
def distinguish_cmd(
    ensemble_a: str,
    ensemble_b: str,
    num_vars: Optional[int],
    reps: int,
    max_m: int,
    guard: int,
    workers: Optional[int],
    seed: int,
    output_path: Optional[str],
):
    """
    Run the sequential rule on ENSEMBLE_A against ENSEMBLE_B.

    Each ensemble is a probability (an oracle) or a formula text (a one-member
    bucket). Output is JSON-lines: a header then one result per repetition.
    """
    config = make_config(
        "distinguish",
        {
            "a": ensemble_a,
            "b": ensemble_b,
            "n": num_vars,
            "reps": reps,
            "max_m": max_m,
            "guard": guard,
        },
        OutputFormat.json.value,
        output_path,
        seed,
    )
    with tracked(config) as payloads:
        spec_a = _ensemble(ensemble_a, num_vars)
        spec_b = _ensemble(ensemble_b, num_vars)
        results = distinguish_repetitions(
            spec_a, spec_b, reps, max_m, seed, guard=guard, workers=_workers(workers)
        )
        lines = format_results(results, config.model_dump(mode="json"), seed)
        payloads.extend(lines[1:])
    write_lines(lines, output_path)


@click.command("pipeline")
@click.argument("n", type=click.IntRange(min=1))
@click.option("--formulas", "num_formulas", type=click.IntRange(min=1), default=500, show_default=True)
@click.option("--size-budget", type=click.IntRange(min=1), default=None, help="Nodes per random formula (default 3n).")
@click.option("--reps", type=click.IntRange(min=1), default=51, show_default=True)
@max_m_option
@guard_option
@workers_option
@seed_option
@output_options(OutputFormat.json)
def pipeline_cmd(
    n: int,
    num_formulas: int,
    size_budget: Optional[int],
    reps: int,
    max_m: Optional[int],
    guard: int,
    workers: Optional[int],
    seed: int,
    output_format: str,
    output_path: Optional[str],
):
    """
    Bucket random formulas by k and sum P_U(E_k) * C(E_k) over the buckets.
    """
    config = make_config(
        "pipeline",
        {
            "n": n,
            "formulas": num_formulas,
            "size_budget": size_budget,
            "reps": reps,
            "max_m": max_m,
            "guard": guard,
        },
        output_format,
        output_path,
        seed,
    )
    with tracked(config) as payloads:
        report = complexity_pipeline(
            n, seed, num_formulas, size_budget, reps, max_m, guard, _workers(workers)
        )
        csv = ["k,gamma,members,log2_p_hat,median_trials,inconclusive,included"]
        csv.extend(
            f"{b.k},{b.gamma:.10g},{b.members},{b.log2_p_hat:.10g},"
            f"{'' if b.median_trials is None else f'{b.median_trials:g}'},"
            f"{b.inconclusive},{str(b.included).lower()}"
            for b in report.buckets
        )
        lines = render_output(config, csv=csv, payload=report.model_dump(mode="json"))
        payloads.extend(lines)
    write_lines(lines, output_path)
