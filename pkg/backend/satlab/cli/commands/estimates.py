# backend/satlab/cli/commands/estimates.py

from pathlib import Path
from typing import Optional

import click
import numpy as np

from satlab.cli.deps import (
    make_config,
    output_options,
    render_output,
    seed_option,
    tracked,
    write_lines,
)
from satlab.core.complexity import (
    DEFAULT_COMPRESSOR,
    as_bit_array,
    available_compressors,
    bernoulli_bits,
    compression_tail_check,
    get_compressor,
    k_estimate,
    kestimate_record,
)
from satlab.errors import PreconditionError
from satlab.schemas import OutputFormat

compressor_option = click.option(
    "--compressor",
    type=click.Choice(available_compressors()),
    default=DEFAULT_COMPRESSOR,
    show_default=True,
)


@click.command("kestimate")
@click.argument("input_path", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--bernoulli", "gamma", type=float, default=None, help="Sample Bernoulli(GAMMA) bits instead of reading a file.")
@click.option("--length", type=click.IntRange(min=1), default=1 << 16, show_default=True)
@click.option("--raw", is_flag=True, default=False, help="Treat the file as raw bytes, not '0'/'1' text.")
@compressor_option
@seed_option
@output_options(OutputFormat.json)
def kestimate_cmd(
    input_path: Optional[str],
    gamma: Optional[float],
    length: int,
    raw: bool,
    compressor: str,
    seed: int,
    output_format: str,
    output_path: Optional[str],
):
    """
    Compressed-length estimate of K for a file or a generated Bernoulli string.
    """
    if (input_path is None) == (gamma is None):
        raise click.UsageError("give exactly one of INPUT_PATH or --bernoulli")

    config = make_config(
        "kestimate",
        {
            "input": input_path,
            "bernoulli": gamma,
            "length": None if input_path else length,
            "raw": raw,
            "compressor": compressor,
        },
        output_format,
        output_path,
        seed,
    )
    with tracked(config) as payloads:
        if input_path is not None:
            data = Path(input_path).read_bytes()
            if raw:
                bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
            else:
                try:
                    text = data.decode("ascii")
                except UnicodeDecodeError:
                    raise PreconditionError(
                        "input is not a '0'/'1' text file; use --raw"
                    ) from None
                bits = as_bit_array("".join(text.split()))
        else:
            bits = bernoulli_bits(gamma, length, seed)
        est = k_estimate(bits, get_compressor(compressor))
        payload = kestimate_record(est)
        lines = render_output(
            config,
            text=[f"input_bits={est.input_bits} k_hat_bits={est.k_hat_bits} log2_p_hat={est.log2_p_hat:g}"],
            csv=[
                "input_bits,k_hat_bits,compressor,log2_p_hat",
                f"{est.input_bits},{est.k_hat_bits},{est.compressor},{est.log2_p_hat:g}",
            ],
            payload=payload,
        )
        payloads.extend(lines)
    write_lines(lines, output_path)


@click.command("tail-check")
@click.option("--samples", type=click.IntRange(min=100), default=10_000, show_default=True)
@click.option("--length", type=click.IntRange(min=1), default=4096, show_default=True)
@click.option("--threshold", type=click.IntRange(min=0), default=8, show_default=True)
@compressor_option
@seed_option
@output_options(OutputFormat.json)
def tail_check_cmd(
    samples: int,
    length: int,
    threshold: int,
    compressor: str,
    seed: int,
    output_format: str,
    output_path: Optional[str],
):
    """
    Fraction of uniform strings compressed by more than THRESHOLD bits.
    """
    config = make_config(
        "tail-check",
        {"samples": samples, "length": length, "threshold": threshold, "compressor": compressor},
        output_format,
        output_path,
        seed,
    )
    with tracked(config) as payloads:
        fraction = compression_tail_check(
            samples, length, threshold, get_compressor(compressor), seed
        )
        payload = {"fraction": fraction, "bound": 2.0**-threshold}
        lines = render_output(
            config,
            text=[f"fraction={fraction:g} bound={2.0 ** -threshold:g}"],
            csv=["fraction,bound", f"{fraction:g},{2.0 ** -threshold:g}"],
            payload=payload,
        )
        payloads.extend(lines)
    write_lines(lines, output_path)
