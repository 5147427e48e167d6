# backend/satlab/core/experiments.py

"""
Monte Carlo harness for the basic problem: tell two output distributions
apart, usually an ensemble against the unsatisfiable reference Bernoulli(0).

Every repetition draws from its own stream, derived from the master seed and
the repetition's coordinates, so results do not depend on scheduling or on
the number of workers.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np
from pydantic import ValidationError

from satlab.config import DEFAULT_GUARD, FORMAT_VERSION, MAX_BUCKET_VARS, MAX_PIPELINE_VARS
from satlab.core.complexity import ensemble_universal_prob_bound, sat_complexity_aggregate
from satlab.core.formula import Formula, constant_false, evaluate, random_formula, truth_table
from satlab.errors import PreconditionError, ResultsFormatError
from satlab.schemas import (
    BucketReport,
    ComplexityReport,
    Decision,
    EnsembleMode,
    ExperimentResult,
    FirstSuccessStats,
    ResultsHeader,
    ScalingRow,
    TrialRecord,
)

logger = logging.getLogger(__name__)

# Draws are taken in fixed-size blocks; the size is part of the stream contract.
BLOCK_SIZE = 512

T = TypeVar("T")


@dataclass(frozen=True)
class EnsembleSpec:
    mode: EnsembleMode
    label: str
    gamma: Optional[float] = None
    n: Optional[int] = None
    k: Optional[int] = None
    members: tuple[Formula, ...] = ()
    # One truth table per member, stacked; equals evaluate() on every input.
    tables: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def expected_gamma(self) -> float:
        if self.mode is EnsembleMode.oracle:
            return float(self.gamma)
        return self.k / (1 << self.n)


def oracle(gamma: float, label: Optional[str] = None) -> EnsembleSpec:
    if not 0.0 <= gamma <= 1.0:
        raise PreconditionError(f"gamma must be in [0, 1], got {gamma}")
    return EnsembleSpec(
        mode=EnsembleMode.oracle,
        label=label or f"oracle-{gamma:.6g}",
        gamma=float(gamma),
    )


def formula_bucket(
    n: int,
    k: int,
    members: Sequence[Formula],
    label: Optional[str] = None,
    tables: Optional[np.ndarray] = None,
) -> EnsembleSpec:
    """
    An ensemble E_k: formulas whose truth tables all have exactly k ones.
    Membership is checked against the exact tables, hence n <= 20.
    """
    if n > MAX_BUCKET_VARS:
        raise PreconditionError(
            f"n={n} exceeds bucket cap {MAX_BUCKET_VARS}; use an oracle instead"
        )
    members = tuple(members)
    if tables is None and members:
        tables = np.stack([truth_table(f).as_array() for f in members])
    for i, f in enumerate(members):
        if f.num_vars != n:
            raise PreconditionError(f"member {i} has n={f.num_vars}, bucket has n={n}")
        ones = int(tables[i].sum())
        if ones != k:
            raise PreconditionError(f"member {i} has k={ones}, bucket has k={k}")
    return EnsembleSpec(
        mode=EnsembleMode.formula_bucket,
        label=label or f"E_{k}",
        n=n,
        k=k,
        members=members,
        tables=tables,
    )


def sample_outputs(spec: EnsembleSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    if spec.mode is EnsembleMode.oracle:
        return (rng.random(size) < spec.gamma).astype(np.uint8)
    if spec.tables is None or len(spec.tables) == 0:
        raise PreconditionError(f"bucket {spec.label!r} is empty")
    which = rng.integers(len(spec.tables), size=size)
    inputs = rng.integers(1 << spec.n, size=size)
    return spec.tables[which, inputs].astype(np.uint8)


def sample_output(spec: EnsembleSpec, rng: np.random.Generator) -> int:
    """One draw: an oracle coin, or a random member on a random input."""
    return int(sample_outputs(spec, rng, 1)[0])


def sample_trials(spec: EnsembleSpec, num: int, seed: int) -> list[TrialRecord]:
    """Explicit trial log; bucket draws are evaluated formula by formula."""
    rng = np.random.default_rng(seed)
    records: list[TrialRecord] = []
    for index in range(num):
        if spec.mode is EnsembleMode.oracle:
            bit = int(rng.random() < spec.gamma)
            records.append(TrialRecord(ensemble=spec.label, index=index, output=bit))
            continue
        if not spec.members:
            raise PreconditionError(f"bucket {spec.label!r} is empty")
        member = spec.members[int(rng.integers(len(spec.members)))]
        value = int(rng.integers(1 << spec.n))
        records.append(
            TrialRecord(
                ensemble=spec.label,
                index=index,
                assignment=value,
                output=evaluate(member, value),
            )
        )
    return records


def build_bucket(
    n: int, num_formulas: int, size_budget: int, seed: int
) -> dict[int, EnsembleSpec]:
    """Generate random formulas and group them by the ones count of their tables."""
    if n > MAX_BUCKET_VARS:
        raise PreconditionError(f"n={n} exceeds bucket cap {MAX_BUCKET_VARS}")
    grouped: dict[int, list[tuple[Formula, np.ndarray]]] = {}
    for child in np.random.SeedSequence(seed).spawn(num_formulas):
        f = random_formula(n, size_budget, child)
        table = truth_table(f)
        grouped.setdefault(table.ones_count, []).append((f, table.as_array()))

    buckets: dict[int, EnsembleSpec] = {}
    for k in sorted(grouped):
        formulas = [f for f, _ in grouped[k]]
        tables = np.stack([t for _, t in grouped[k]])
        buckets[k] = formula_bucket(n, k, formulas, tables=tables)
    logger.info(
        "built %d buckets from %d formulas (n=%d, budget=%d)",
        len(buckets), num_formulas, n, size_budget,
    )
    return buckets


def derive_seed(master_seed: int, *coords: int) -> int:
    """A 64-bit seed for the repetition at `coords` under `master_seed`."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(coords))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def map_repetitions(fn: Callable[[int], T], count: int, workers: int = 1) -> list[T]:
    """
    [fn(0), ..., fn(count - 1)], in order. With workers > 1 the calls run in
    a process pool, so `fn` must be picklable (a module-level function or a
    partial of one).
    """
    if workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    chunk = max(1, count // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count), chunksize=chunk))


def _portable(spec: EnsembleSpec) -> EnsembleSpec:
    # Sampling only reads the tables; formula trees stay in this process.
    return replace(spec, members=()) if spec.members else spec


# --------------------------------------------------------------------------- #
# Distinguishing
# --------------------------------------------------------------------------- #


def sequential_distinguish(
    spec_a: EnsembleSpec,
    spec_b: EnsembleSpec,
    max_m: int,
    seed: int,
    guard: int = DEFAULT_GUARD,
) -> ExperimentResult:
    """
    Paired draws; after each pair compare the running frequencies with
    |pA - pB| >= dpA + dpB, dp = sqrt(p(1-p)/m), and pA != pB. Stop with
    "different" on the first pair (at or after `guard`) that satisfies it,
    else "inconclusive".
    """
    if max_m < 1:
        raise PreconditionError(f"max_m must be >= 1, got {max_m}")
    if guard < 1:
        raise PreconditionError(f"guard must be >= 1, got {guard}")
    stream_a, stream_b = np.random.SeedSequence(seed).spawn(2)
    rng_a, rng_b = np.random.default_rng(stream_a), np.random.default_rng(stream_b)

    config = {
        "a": spec_a.label,
        "b": spec_b.label,
        "max_m": max_m,
        "guard": guard,
        "block": BLOCK_SIZE,
    }
    ones_a = ones_b = 0
    done = 0
    while done < max_m:
        size = min(BLOCK_SIZE, max_m - done)
        cum_a = ones_a + np.cumsum(sample_outputs(spec_a, rng_a, size))
        cum_b = ones_b + np.cumsum(sample_outputs(spec_b, rng_b, size))
        m = np.arange(done + 1, done + size + 1, dtype=np.float64)
        p_a, p_b = cum_a / m, cum_b / m
        spread = np.sqrt(p_a * (1.0 - p_a) / m) + np.sqrt(p_b * (1.0 - p_b) / m)
        gap = np.abs(p_a - p_b)
        # Identical running frequencies never separate, even with zero spread.
        hit = (m >= guard) & (gap > 0.0) & (gap >= spread)
        if hit.any():
            i = int(np.argmax(hit))
            return ExperimentResult(
                decision=Decision.different,
                trials_used=done + i + 1,
                empirical_p={"a": float(p_a[i]), "b": float(p_b[i])},
                seed=seed,
                config=config,
            )
        ones_a, ones_b = int(cum_a[-1]), int(cum_b[-1])
        done += size

    return ExperimentResult(
        decision=Decision.inconclusive,
        trials_used=max_m,
        empirical_p={"a": ones_a / max_m, "b": ones_b / max_m},
        seed=seed,
        config=config,
    )


def _first_success(rep: int, gamma: float, max_m: int, seed: int) -> int:
    if gamma == 0.0:
        return max_m + 1
    rng = np.random.default_rng(derive_seed(seed, rep))
    return int(rng.geometric(gamma))


def first_success_trials(
    gamma: float, reps: int, max_m: int, seed: int, workers: int = 1
) -> FirstSuccessStats:
    """
    Waiting time for the first 1 from Bernoulli(gamma), one stream per
    repetition. Runs that reach max_m are censored and counted at max_m.
    """
    if reps < 1:
        raise PreconditionError(f"reps must be >= 1, got {reps}")
    if not 0.0 <= gamma <= 1.0:
        raise PreconditionError(f"gamma must be in [0, 1], got {gamma}")

    one = partial(_first_success, gamma=gamma, max_m=max_m, seed=seed)
    waits = np.array(map_repetitions(one, reps, workers), dtype=np.int64)
    censored = int(np.sum(waits > max_m))
    waits = np.minimum(waits, max_m)
    return FirstSuccessStats(
        mean=float(waits.mean()),
        median=float(np.median(waits)),
        reps=reps,
        censored=censored,
    )


def expected_search_cost(n: int, k: int) -> dict[str, float]:
    """
    Expected draws before the first 1, two ways: per sample (2**n / k, what
    the harness measures) and over the combined input-output space (2**(n+1) / k).
    """
    if not 1 <= k <= 1 << n:
        raise PreconditionError(f"need 1 <= k <= 2**n, got k={k}, n={n}")
    return {"per_sample": (1 << n) / k, "combined_space": (1 << (n + 1)) / k}


def _distinguish_once(
    rep: int,
    spec_a: EnsembleSpec,
    spec_b: EnsembleSpec,
    max_m: int,
    guard: int,
    seed: int,
    coords: tuple[int, ...],
) -> ExperimentResult:
    return sequential_distinguish(spec_a, spec_b, max_m, derive_seed(seed, *coords, rep), guard)


def distinguish_repetitions(
    spec_a: EnsembleSpec,
    spec_b: EnsembleSpec,
    reps: int,
    max_m: int,
    seed: int,
    coords: tuple[int, ...] = (),
    guard: int = DEFAULT_GUARD,
    workers: int = 1,
) -> list[ExperimentResult]:
    """Repetition r runs sequential_distinguish with derive_seed(seed, *coords, r)."""
    fn = partial(
        _distinguish_once,
        spec_a=_portable(spec_a),
        spec_b=_portable(spec_b),
        max_m=max_m,
        guard=guard,
        seed=seed,
        coords=tuple(coords),
    )
    return map_repetitions(fn, reps, workers)


def scaling_study(
    n_list: Iterable[int],
    reps: int,
    seed: int,
    max_m: Optional[int] = None,
    guard: int = DEFAULT_GUARD,
    workers: int = 1,
) -> list[ScalingRow]:
    """Median trials to separate Bernoulli(0) from Bernoulli(2**-n), per n."""
    ns = list(n_list)
    if not ns:
        raise PreconditionError("n_list must not be empty")
    if reps < 1:
        raise PreconditionError(f"reps must be >= 1, got {reps}")

    rows: list[ScalingRow] = []
    for n in ns:
        budget = max_m or 64 << n
        results = distinguish_repetitions(
            oracle(0.0, "E_0"),
            oracle(2.0**-n, f"gamma=2^-{n}"),
            reps,
            budget,
            seed,
            coords=(n,),
            guard=guard,
            workers=workers,
        )
        trials = np.array([r.trials_used for r in results], dtype=np.float64)
        row = ScalingRow(
            n=n,
            median_trials=float(np.median(trials)),
            mean_trials=float(trials.mean()),
            reps=reps,
        )
        logger.info("n=%d median=%.1f mean=%.1f", n, row.median_trials, row.mean_trials)
        rows.append(row)
    return rows


def fit_log2_slope(rows: Sequence[ScalingRow]) -> tuple[float, float]:
    """Least-squares slope of log2(median) against n, and its R^2."""
    if len(rows) < 2:
        raise PreconditionError("need at least two rows to fit a slope")
    x = np.array([r.n for r in rows], dtype=np.float64)
    y = np.log2([r.median_trials for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(residual**2) / total) if total > 0 else 1.0
    return float(slope), r2


def scaling_csv(rows: Sequence[ScalingRow]) -> list[str]:
    lines = ["n,median_trials,mean_trials,reps"]
    lines.extend(f"{r.n},{r.median_trials:g},{r.mean_trials:g},{r.reps}" for r in rows)
    return lines


# --------------------------------------------------------------------------- #
# Complexity pipeline
# --------------------------------------------------------------------------- #


def complexity_pipeline(
    n: int,
    seed: int,
    num_formulas: int = 500,
    size_budget: Optional[int] = None,
    reps: int = 51,
    max_m: Optional[int] = None,
    guard: int = DEFAULT_GUARD,
    workers: int = 1,
) -> ComplexityReport:
    """
    Sum over buckets of P_U(E_k) * C(E_k), with P_U(E_k) from the entropy bound
    and C(E_k) the median trials to separate E_k from the reference E_0.
    """
    if n > MAX_PIPELINE_VARS:
        raise PreconditionError(f"n={n} exceeds pipeline cap {MAX_PIPELINE_VARS}")
    budget = size_budget or 3 * n
    max_m = max_m or 64 << n
    buckets = build_bucket(n, num_formulas, budget, seed)
    reference = buckets.get(0) or formula_bucket(n, 0, [constant_false(n)])

    rows: list[BucketReport] = []
    terms: list[tuple[float, float]] = []
    for k, spec in buckets.items():
        results = distinguish_repetitions(
            reference, spec, reps, max_m, seed, coords=(1, k), guard=guard, workers=workers
        )
        inconclusive = sum(r.decision is Decision.inconclusive for r in results)
        log2_p = ensemble_universal_prob_bound(n, k)
        if k == 0:
            # The reference against itself never separates; C is undefined.
            rows.append(
                BucketReport(
                    k=k, gamma=0.0, members=len(spec.members), log2_p_hat=log2_p,
                    inconclusive=inconclusive, included=False,
                )
            )
            continue
        median = float(np.median([r.trials_used for r in results]))
        rows.append(
            BucketReport(
                k=k,
                gamma=k / (1 << n),
                members=len(spec.members),
                log2_p_hat=log2_p,
                median_trials=median,
                inconclusive=inconclusive,
            )
        )
        terms.append((log2_p, median))
        logger.debug("bucket k=%d: median=%.1f inconclusive=%d", k, median, inconclusive)

    aggregate = sat_complexity_aggregate(terms) if terms else 0.0
    logger.info("pipeline n=%d: %d buckets, aggregate=%.6g", n, len(rows), aggregate)
    return ComplexityReport(
        n=n,
        seed=seed,
        reference=reference.label,
        buckets=rows,
        aggregate=aggregate,
        config={
            "num_formulas": num_formulas,
            "size_budget": budget,
            "reps": reps,
            "max_m": max_m,
            "guard": guard,
            "block": BLOCK_SIZE,
        },
    )


# --------------------------------------------------------------------------- #
# Results files
# --------------------------------------------------------------------------- #


def _dumps(payload: dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def format_results(
    records: Iterable[ExperimentResult],
    config: Optional[dict[str, Any]] = None,
    master_seed: int = 0,
) -> list[str]:
    """JSON-lines: a header line then one result per line."""
    header = ResultsHeader(
        format_version=FORMAT_VERSION, config=config or {}, master_seed=master_seed
    )
    lines = [_dumps(header.model_dump(mode="json"))]
    lines.extend(_dumps(r.model_dump(mode="json")) for r in records)
    return lines


def persist_results(
    path: str | Path,
    records: Iterable[ExperimentResult],
    config: Optional[dict[str, Any]] = None,
    master_seed: int = 0,
) -> int:
    """Write a results file; returns the record count."""
    lines = format_results(records, config, master_seed)
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")
    return len(lines) - 1


def _read_lines(path: str | Path) -> list[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ResultsFormatError("missing header", line_number=1)
    return lines


def read_results_header(path: str | Path) -> ResultsHeader:
    line = _read_lines(path)[0]
    try:
        header = ResultsHeader.model_validate_json(line)
    except ValidationError as exc:
        raise ResultsFormatError(f"bad header: {exc.errors()[0]['msg']}", line_number=1) from exc
    if header.format_version != FORMAT_VERSION:
        raise ResultsFormatError(
            f"format_version {header.format_version} is not supported "
            f"(expected {FORMAT_VERSION})",
            line_number=1,
        )
    return header


def load_results(path: str | Path) -> list[ExperimentResult]:
    read_results_header(path)
    records: list[ExperimentResult] = []
    for number, line in enumerate(_read_lines(path)[1:], start=2):
        if not line.strip():
            continue
        try:
            records.append(ExperimentResult.model_validate_json(line))
        except ValidationError as exc:
            raise ResultsFormatError(
                f"bad record: {exc.errors()[0]['msg']}", line_number=number
            ) from exc
    return records
