# backend/tests/test_experiments.py

import json

import numpy as np
import pytest
from scipy import stats

from satlab.core.experiments import (
    BLOCK_SIZE,
    build_bucket,
    complexity_pipeline,
    derive_seed,
    distinguish_repetitions,
    expected_search_cost,
    first_success_trials,
    fit_log2_slope,
    format_results,
    formula_bucket,
    load_results,
    oracle,
    persist_results,
    read_results_header,
    sample_output,
    sample_outputs,
    sample_trials,
    scaling_csv,
    scaling_study,
    sequential_distinguish,
)
from satlab.core.formula import constant_false, parse_formula, plant_dnf, random_formula
from satlab.errors import PreconditionError, ResultsFormatError
from satlab.schemas import Decision, EnsembleMode, ExperimentResult, ScalingRow


class TestEnsembles:
    def test_oracle_constants(self):
        rng = np.random.default_rng(0)
        assert sample_outputs(oracle(0.0), rng, 1000).sum() == 0
        assert sample_outputs(oracle(1.0), rng, 1000).sum() == 1000
        assert sample_output(oracle(1.0), rng) == 1

    def test_oracle_validation(self):
        with pytest.raises(PreconditionError):
            oracle(-0.1)
        assert oracle(0.25).label == "oracle-0.25"
        assert oracle(0.25).mode is EnsembleMode.oracle

    def test_planted_bucket_rate(self):
        rng = np.random.default_rng(1)
        members = [plant_dnf(rng.choice(256, size=16, replace=False), 8) for _ in range(5)]
        spec = formula_bucket(8, 16, members)
        draws = sample_outputs(spec, np.random.default_rng(2), 100_000)
        gamma = 16 / 256
        sigma = np.sqrt(gamma * (1 - gamma) / 100_000)
        assert abs(draws.mean() - gamma) <= 3 * sigma
        assert spec.expected_gamma == gamma

    @pytest.mark.parametrize("k", [1, 4, 16, 100])
    def test_bucket_marginal_goodness_of_fit(self, k):
        rng = np.random.default_rng(100 + k)
        members = [plant_dnf(rng.choice(256, size=k, replace=False), 8) for _ in range(4)]
        draws = sample_outputs(formula_bucket(8, k, members), np.random.default_rng(k), 100_000)
        ones = int(draws.sum())
        gamma = k / 256
        _, p_value = stats.chisquare(
            [100_000 - ones, ones], f_exp=[100_000 * (1 - gamma), 100_000 * gamma]
        )
        assert p_value >= 0.001

    def test_bucket_rejects_wrong_k(self):
        with pytest.raises(PreconditionError, match="k="):
            formula_bucket(3, 2, [parse_formula("x0", 3)])

    def test_bucket_cap(self):
        with pytest.raises(PreconditionError):
            formula_bucket(21, 1, [])

    def test_empty_bucket_cannot_sample(self):
        with pytest.raises(PreconditionError, match="empty"):
            sample_outputs(formula_bucket(3, 1, []), np.random.default_rng(0), 4)

    def test_trial_log_agrees_with_formulas(self):
        f = parse_formula("x0 & x1", 2)
        records = sample_trials(formula_bucket(2, 1, [f]), 50, seed=4)
        assert [r.index for r in records] == list(range(50))
        assert all(r.output == int(r.assignment == 3) for r in records)
        oracle_records = sample_trials(oracle(1.0), 3, seed=4)
        assert [r.assignment for r in oracle_records] == [None] * 3
        assert [r.output for r in oracle_records] == [1, 1, 1]


class TestBuildBucket:
    def test_single_variables_land_in_half(self):
        buckets = build_bucket(4, 30, 1, seed=3)
        assert list(buckets) == [8]
        assert len(buckets[8].members) == 30

    def test_deterministic(self):
        a = build_bucket(5, 60, 12, seed=5)
        b = build_bucket(5, 60, 12, seed=5)
        assert {k: len(s.members) for k, s in a.items()} == {k: len(s.members) for k, s in b.items()}
        assert all(a[k].members == b[k].members for k in a)
        assert sum(len(s.members) for s in a.values()) == 60

    def test_members_match_bucket(self):
        for k, spec in build_bucket(4, 40, 9, seed=8).items():
            assert spec.k == k
            assert all(int(row.sum()) == k for row in spec.tables)


class TestSequentialDistinguish:
    def test_immediate_separation_waits_for_guard(self):
        result = sequential_distinguish(oracle(0.0), oracle(1.0), max_m=10, seed=0)
        assert result.decision is Decision.different
        assert result.trials_used == 8
        assert result.empirical_p == {"a": 0.0, "b": 1.0}

    def test_guard_is_configurable(self):
        result = sequential_distinguish(oracle(0.0), oracle(1.0), max_m=10, seed=0, guard=3)
        assert result.trials_used == 3

    def test_identical_oracles_are_inconclusive(self):
        result = sequential_distinguish(oracle(0.0), oracle(0.0), max_m=700, seed=1)
        assert result.decision is Decision.inconclusive
        assert result.trials_used == 700
        assert result.config["max_m"] == 700
        assert result.config["block"] == BLOCK_SIZE

    def test_small_gamma_median(self):
        trials = [
            sequential_distinguish(oracle(0.0), oracle(2**-5), 10**4, derive_seed(6, rep)).trials_used
            for rep in range(1000)
        ]
        assert 16 <= np.median(trials) <= 64

    def test_deterministic_per_seed(self):
        a = sequential_distinguish(oracle(0.1), oracle(0.3), 5000, seed=42)
        b = sequential_distinguish(oracle(0.1), oracle(0.3), 5000, seed=42)
        assert a == b

    def test_swap_symmetry(self):
        forward = [
            sequential_distinguish(oracle(0.0), oracle(0.05), 5000, derive_seed(7, r)).trials_used
            for r in range(400)
        ]
        backward = [
            sequential_distinguish(oracle(0.05), oracle(0.0), 5000, derive_seed(8, r)).trials_used
            for r in range(400)
        ]
        assert np.median(backward) == pytest.approx(np.median(forward), rel=0.3)

    def test_bucket_against_reference(self):
        reference = formula_bucket(3, 0, [parse_formula("x0 & !x0", 3)])
        spec = formula_bucket(3, 4, [parse_formula("x2", 3)])
        result = sequential_distinguish(reference, spec, 1000, seed=2)
        assert result.decision is Decision.different

    def test_rejects_bad_budget(self):
        with pytest.raises(PreconditionError):
            sequential_distinguish(oracle(0.0), oracle(1.0), 0, seed=0)

    def test_denser_buckets_separate_sooner(self):
        rng = np.random.default_rng(88)
        reference = formula_bucket(8, 0, [constant_false(8)])
        medians = {}
        for k in (1, 4, 16):
            members = [plant_dnf(rng.choice(256, size=k, replace=False), 8) for _ in range(5)]
            results = distinguish_repetitions(
                reference, formula_bucket(8, k, members), 101, 64 << 8, seed=9, coords=(k,)
            )
            medians[k] = np.median([r.trials_used for r in results])
        assert medians[1] > medians[4] > medians[16]


class TestRepetitions:
    def test_seeds_follow_coordinates(self):
        bucket = formula_bucket(3, 4, [parse_formula("x2", 3)])
        results = distinguish_repetitions(oracle(0.0), bucket, 5, 500, seed=3, coords=(2,))
        assert results[4] == sequential_distinguish(oracle(0.0), bucket, 500, derive_seed(3, 2, 4))

    def test_process_pool_matches_serial(self):
        bucket = formula_bucket(3, 4, [parse_formula("x2", 3), parse_formula("!x0", 3)])
        serial = distinguish_repetitions(oracle(0.0), bucket, 12, 500, seed=3)
        pooled = distinguish_repetitions(oracle(0.0), bucket, 12, 500, seed=3, workers=2)
        assert pooled == serial

    def test_long_formula_member_runs_in_pool(self):
        chain = parse_formula(" | ".join(f"x{i % 3}" for i in range(1500)), 3)
        bucket = formula_bucket(3, 7, [chain])
        results = distinguish_repetitions(oracle(0.0), bucket, 4, 100, seed=1, workers=2)
        assert all(r.decision is Decision.different for r in results)


class TestFirstSuccess:
    def test_certain(self):
        stats = first_success_trials(1.0, 20, 100, seed=0)
        assert stats.mean == 1.0 and stats.censored == 0

    def test_mean_matches_inverse_gamma(self):
        stats = first_success_trials(1 / 32, 10_000, 10**6, seed=1)
        assert stats.mean == pytest.approx(32, rel=0.10)

    def test_zero_is_censored(self):
        stats = first_success_trials(0.0, 10, 500, seed=0)
        assert stats.censored == 10
        assert stats.median == 500

    def test_workers_do_not_change_results(self):
        assert first_success_trials(0.1, 200, 1000, 3, workers=1) == first_success_trials(
            0.1, 200, 1000, 3, workers=4
        )

    def test_search_cost(self):
        assert expected_search_cost(5, 1) == {"per_sample": 32.0, "combined_space": 64.0}
        with pytest.raises(PreconditionError):
            expected_search_cost(3, 0)


class TestScaling:
    def test_small_study(self):
        rows = scaling_study([2, 3, 4], reps=51, seed=9)
        assert [r.n for r in rows] == [2, 3, 4]
        assert all(r.reps == 51 for r in rows)
        lines = scaling_csv(rows)
        assert lines[0] == "n,median_trials,mean_trials,reps"
        assert len(lines) == 4

    def test_workers_do_not_change_rows(self):
        one = scaling_study([3, 4], reps=40, seed=10, workers=1)
        many = scaling_study([3, 4], reps=40, seed=10, workers=3)
        assert one == many

    def test_fit(self):
        rows = [ScalingRow(n=n, median_trials=2.0**n, mean_trials=2.0**n, reps=1) for n in range(3, 8)]
        slope, r2 = fit_log2_slope(rows)
        assert slope == pytest.approx(1.0)
        assert r2 == pytest.approx(1.0)

    @pytest.mark.slow
    def test_exponential_trials(self):
        rows = scaling_study(range(4, 11), reps=1000, seed=2024, workers=4)
        slope, _ = fit_log2_slope(rows)
        assert 0.85 <= slope <= 1.15


class TestPipeline:
    def test_small_run(self):
        report = complexity_pipeline(3, seed=11, num_formulas=40, reps=11)
        assert report.n == 3
        assert report.config["size_budget"] == 9
        ks = [b.k for b in report.buckets]
        assert ks == sorted(ks)
        assert all(b.included == (b.k != 0) for b in report.buckets)
        assert report.aggregate >= 0.0
        for b in report.buckets:
            if b.included:
                assert b.median_trials is not None and b.median_trials >= 1

    def test_deterministic(self):
        a = complexity_pipeline(3, seed=12, num_formulas=30, reps=7)
        b = complexity_pipeline(3, seed=12, num_formulas=30, reps=7, workers=3)
        assert a == b

    def test_cap(self):
        with pytest.raises(PreconditionError):
            complexity_pipeline(13, seed=0)


class TestResultsFiles:
    def results(self):
        return [
            sequential_distinguish(oracle(0.0), oracle(0.5), 100, seed=s) for s in range(3)
        ]

    def test_persist_and_load(self, tmp_path):
        path = tmp_path / "out.jsonl"
        records = self.results()
        assert persist_results(path, records, {"note": "x"}, master_seed=5) == 3
        header = read_results_header(path)
        assert header.format_version == 1
        assert header.master_seed == 5
        assert load_results(path) == records

    def test_sorted_keys(self):
        lines = format_results(self.results(), {"b": 1, "a": 2}, 0)
        first = json.loads(lines[0])
        assert list(first) == sorted(first)
        assert lines[0].startswith('{"config":{"a":2,"b":1}')

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "old.jsonl"
        path.write_text('{"config":{},"format_version":2,"master_seed":0}\n', encoding="utf-8")
        with pytest.raises(ResultsFormatError, match="line 1"):
            load_results(path)

    def test_bad_record_reports_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        lines = format_results(self.results(), {}, 0)
        lines[2] = '{"decision":"maybe"}'
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(ResultsFormatError) as info:
            load_results(path)
        assert info.value.line_number == 3

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ResultsFormatError):
            read_results_header(path)

    def test_budget_invariant(self):
        with pytest.raises(ValueError):
            ExperimentResult(
                decision=Decision.different,
                trials_used=11,
                empirical_p={"a": 0.0, "b": 1.0},
                seed=0,
                config={"max_m": 10},
            )


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
    assert 0 <= derive_seed(2**64 - 1, 0) < 2**64


def test_random_formula_seed_sequences():
    ss = np.random.SeedSequence(0).spawn(2)
    assert random_formula(3, 7, ss[0]).size == 7
