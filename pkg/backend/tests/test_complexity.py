# backend/tests/test_complexity.py

import numpy as np
import pytest

from satlab.core.combinatorics import binary_entropy
from satlab.core.complexity import (
    Codec,
    available_compressors,
    bernoulli_bits,
    compression_tail_check,
    ensemble_universal_prob_bound,
    get_compressor,
    k_estimate,
    kestimate_record,
    pack_bits,
    sat_complexity_aggregate,
    uniform_bits,
    universal_probability,
    unpack_bits,
)
from satlab.errors import ContractViolationError, PreconditionError

LZMA = get_compressor("lzma")


class TestCompressors:
    def test_registry(self):
        assert available_compressors() == ["bz2", "lzma", "zlib"]
        with pytest.raises(PreconditionError, match="unknown compressor"):
            get_compressor("brotli")

    @pytest.mark.parametrize("name", ["bz2", "lzma", "zlib"])
    def test_round_trip(self, name):
        codec = get_compressor(name)
        data = pack_bits(uniform_bits(4096, 1))
        assert codec.decompress(codec.compress(data)) == data

    def test_pack_unpack(self):
        bits = bernoulli_bits(0.3, 1001, 5)
        assert len(pack_bits(bits)) == 126
        np.testing.assert_array_equal(unpack_bits(pack_bits(bits), 1001), bits)
        assert pack_bits("10000000") == b"\x80"


class TestKEstimate:
    def test_all_zeros_compress(self):
        L = 1 << 16
        est = k_estimate("0" * L, LZMA)
        assert est.input_bits == L
        assert est.k_hat_bits <= 0.02 * L

    def test_uniform_does_not_compress(self):
        L = 1 << 16
        est = k_estimate(uniform_bits(L, 3), LZMA)
        assert est.k_hat_bits >= L

    def test_self_append(self):
        x = uniform_bits(1 << 14, 9)
        single = k_estimate(x, LZMA).k_hat_bits
        double = k_estimate(np.concatenate([x, x]), LZMA).k_hat_bits
        assert double <= 2.2 * single

    def test_reverse_symmetry(self):
        x = bernoulli_bits(0.1, 1 << 16, 11)
        forward = k_estimate(x, LZMA).k_hat_bits
        backward = k_estimate(x[::-1], LZMA).k_hat_bits
        assert backward == pytest.approx(forward, rel=0.02)

    def test_complement_costs_the_same(self):
        x = bernoulli_bits(0.05, 1 << 14, 12)
        assert k_estimate(1 - x, LZMA) == k_estimate(x, LZMA)
        assert k_estimate("1" * 4096, LZMA) == k_estimate("0" * 4096, LZMA)

    @pytest.mark.parametrize("gamma", [0.05, 0.1, 0.25])
    def test_bernoulli_complement_rate(self, gamma):
        # K cannot tell Bernoulli(gamma) from Bernoulli(1 - gamma).
        L = 1 << 18
        seeds = range(21, 25)
        low = np.mean([k_estimate(bernoulli_bits(gamma, L, s), LZMA).k_hat_bits for s in seeds])
        high = np.mean([k_estimate(bernoulli_bits(1 - gamma, L, s), LZMA).k_hat_bits for s in seeds])
        assert high == pytest.approx(low, rel=0.02)

    @pytest.mark.parametrize("gamma", [0.05, 0.1, 0.25, 0.5])
    def test_bernoulli_rate_tracks_entropy(self, gamma):
        L = 1 << 18
        est = k_estimate(bernoulli_bits(gamma, L, 17), LZMA)
        rate = est.k_hat_bits / L
        h = binary_entropy(gamma)
        assert h - 0.02 <= rate <= h + 0.10

    def test_empty_input(self):
        with pytest.raises(PreconditionError):
            k_estimate("", LZMA)

    def test_broken_codec(self):
        broken = Codec("broken", lambda d: d, lambda d: d[:-1])
        with pytest.raises(ContractViolationError) as info:
            k_estimate("0101", broken)
        assert info.value.exit_code == 4

    def test_record(self):
        est = k_estimate("0" * 4096, LZMA)
        record = kestimate_record(est)
        assert set(record) == {"input_bits", "k_hat_bits", "compressor", "log2_p_hat"}
        assert record["log2_p_hat"] == -record["k_hat_bits"]
        assert universal_probability(est) == -est.k_hat_bits


class TestTailCheck:
    def test_uniform_strings_rarely_compress(self):
        assert compression_tail_check(200, 4096, 8, LZMA, seed=1) <= 2**-8

    def test_compressible_source_is_flagged(self):
        def zeros(rng, size):
            return np.zeros(size, dtype=np.uint8)

        assert compression_tail_check(100, 4096, 8, LZMA, seed=1, source=zeros) == 1.0

    def test_minimum_sample_count(self):
        with pytest.raises(PreconditionError):
            compression_tail_check(99, 64, 8, LZMA, seed=0)

    @pytest.mark.slow
    def test_full_size(self):
        assert compression_tail_check(10_000, 4096, 8, LZMA, seed=2) <= 2**-8


class TestAggregate:
    def test_weighted_sum(self):
        assert sat_complexity_aggregate([(-1.0, 4.0), (-2.0, 8.0)]) == pytest.approx(4.0)

    def test_tiny_probabilities(self):
        assert sat_complexity_aggregate([(-60.0, 2.0**60)]) == pytest.approx(1.0)

    def test_rejects_empty_and_negative(self):
        with pytest.raises(PreconditionError):
            sat_complexity_aggregate([])
        with pytest.raises(PreconditionError):
            sat_complexity_aggregate([(-1.0, -3.0)])

    def test_ensemble_bound(self):
        assert ensemble_universal_prob_bound(3, 1) == pytest.approx(-5.8485, abs=1e-4)
        # Fewer ones, shorter description, larger probability.
        assert ensemble_universal_prob_bound(10, 1) > ensemble_universal_prob_bound(10, 100)


class TestGenerators:
    def test_deterministic(self):
        np.testing.assert_array_equal(bernoulli_bits(0.2, 500, 4), bernoulli_bits(0.2, 500, 4))

    def test_rate(self):
        assert bernoulli_bits(0.25, 100_000, 8).mean() == pytest.approx(0.25, abs=0.01)

    def test_bad_gamma(self):
        with pytest.raises(PreconditionError):
            bernoulli_bits(1.2, 10, 0)
