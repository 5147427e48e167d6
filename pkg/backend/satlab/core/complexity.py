# backend/satlab/core/complexity.py

"""
Compression-based stand-in for Kolmogorov complexity.

K is uncomputable, so K_hat(x) is the compressed size of x in bits under a
lossless codec. Every statement built on it is a one-sided (upper) bound, and
probabilities stay in the log2 domain until the final aggregate.
"""

from __future__ import annotations

import bz2
import logging
import lzma
import zlib
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Protocol, Sequence, Union

import mpmath
import numpy as np

from satlab.core.combinatorics import k_complexity_bound
from satlab.errors import ContractViolationError, PreconditionError
from satlab.schemas import KEstimate

logger = logging.getLogger(__name__)

Bits = Union[str, np.ndarray]


class CompressorContract(Protocol):
    name: str

    def compress(self, data: bytes) -> bytes: ...

    def decompress(self, data: bytes) -> bytes: ...


@dataclass(frozen=True)
class Codec:
    """A stateless byte codec; safe for concurrent calls."""

    name: str
    _compress: Callable[[bytes], bytes]
    _decompress: Callable[[bytes], bytes]

    def compress(self, data: bytes) -> bytes:
        return self._compress(data)

    def decompress(self, data: bytes) -> bytes:
        return self._decompress(data)


# Raw LZMA2 carries no container header. lc=0 drops the previous-byte context,
# which only dilutes the adaptive bit models on i.i.d. input.
_LZMA_FILTERS = [{"id": lzma.FILTER_LZMA2, "preset": 6, "lc": 0, "lp": 0, "pb": 0}]

COMPRESSORS: dict[str, Codec] = {
    "lzma": Codec(
        "lzma",
        lambda d: lzma.compress(d, format=lzma.FORMAT_RAW, filters=_LZMA_FILTERS),
        lambda d: lzma.decompress(d, format=lzma.FORMAT_RAW, filters=_LZMA_FILTERS),
    ),
    "bz2": Codec("bz2", lambda d: bz2.compress(d, 9), bz2.decompress),
    "zlib": Codec("zlib", lambda d: zlib.compress(d, 9), zlib.decompress),
}

DEFAULT_COMPRESSOR = "lzma"


def available_compressors() -> list[str]:
    return sorted(COMPRESSORS)


def get_compressor(name: str) -> Codec:
    try:
        return COMPRESSORS[name]
    except KeyError:
        raise PreconditionError(
            f"unknown compressor {name!r}; choose from {', '.join(available_compressors())}"
        ) from None


# --------------------------------------------------------------------------- #
# Bitstrings
# --------------------------------------------------------------------------- #


def as_bit_array(x: Bits) -> np.ndarray:
    if isinstance(x, str):
        arr = np.frombuffer(x.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(x, dtype=np.uint8)
    if arr.size and arr.max() > 1:
        raise PreconditionError("bitstring must contain only 0 and 1")
    return arr


def pack_bits(x: Bits) -> bytes:
    """MSB-first packing; the bit length travels separately."""
    return np.packbits(as_bit_array(x)).tobytes()


def unpack_bits(data: bytes, length: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=length)


def bernoulli_bits(gamma: float, length: int, seed: int | np.random.SeedSequence) -> np.ndarray:
    if not 0.0 <= gamma <= 1.0:
        raise PreconditionError(f"gamma must be in [0, 1], got {gamma}")
    rng = np.random.default_rng(seed)
    return (rng.random(length) < gamma).astype(np.uint8)


def uniform_bits(length: int, seed: int | np.random.SeedSequence) -> np.ndarray:
    return bernoulli_bits(0.5, length, seed)


# --------------------------------------------------------------------------- #
# Estimates
# --------------------------------------------------------------------------- #


def k_estimate(x: Bits, c: CompressorContract) -> KEstimate:
    """
    Compressed size of x in bits, plus one flag byte.

    Strings with a majority of ones are complemented before compression and
    the flag byte records it, so x and its complement cost the same; the
    codecs themselves are not complement-symmetric.
    """
    bits = as_bit_array(x)
    if bits.size == 0:
        raise PreconditionError("cannot estimate the complexity of an empty string")
    flipped = 2 * int(bits.sum()) > bits.size
    data = pack_bits(1 - bits if flipped else bits)
    compressed = c.compress(data)
    if c.decompress(compressed) != data:
        raise ContractViolationError(f"compressor {c.name!r} failed the round trip")
    logger.debug(
        "%s: %d bits -> %d bytes (complemented=%s)", c.name, bits.size, len(compressed), flipped
    )
    return KEstimate(
        input_bits=int(bits.size),
        k_hat_bits=8 * (len(compressed) + 1),
        compressor=c.name,
    )


def kestimate_record(est: KEstimate) -> dict[str, Any]:
    """JSON record {input_bits, k_hat_bits, compressor, log2_p_hat}."""
    return est.model_dump(mode="json")


def universal_probability(k: KEstimate) -> float:
    """log2 P_hat(x) = -K_hat(x); 2**-65536 has no float representation."""
    return -float(k.k_hat_bits)


def ensemble_universal_prob_bound(n: int, k: int) -> float:
    """log2 lower bound -(2**n H(k/2**n) + n/2) on P_U(X_k); c omitted."""
    return -k_complexity_bound(n, k).bits_excluding_constant


def compression_tail_check(
    num_samples: int,
    length: int,
    threshold_k: int,
    c: CompressorContract,
    seed: int,
    source: Callable[[np.random.Generator, int], np.ndarray] | None = None,
) -> float:
    """
    Fraction of strings compressed by more than `threshold_k` bits.
    For uniform strings this should not exceed 2**-threshold_k.
    `source` replaces the uniform sampler (used to feed known-compressible input).
    """
    if num_samples < 100:
        raise PreconditionError(f"num_samples must be >= 100, got {num_samples}")
    if length < 1:
        raise PreconditionError(f"length must be positive, got {length}")
    rng = np.random.default_rng(seed)
    if source is None:
        def source(g: np.random.Generator, size: int) -> np.ndarray:
            return g.integers(0, 2, size=size, dtype=np.uint8)

    hits = 0
    for _ in range(num_samples):
        est = k_estimate(source(rng, length), c)
        if length - est.k_hat_bits > threshold_k:
            hits += 1
    fraction = hits / num_samples
    logger.info(
        "tail check: %d/%d strings compressed by more than %d bits (%s)",
        hits, num_samples, threshold_k, c.name,
    )
    return fraction


def sat_complexity_aggregate(buckets: Iterable[Sequence[float]]) -> float:
    """
    Sum of 2**log2_p * cost over buckets, in extended precision.
    The P_hat values are bounds and need not sum to 1.
    """
    items = list(buckets)
    if not items:
        raise PreconditionError("at least one bucket is required")
    with mpmath.workdps(50):
        total = mpmath.mpf(0)
        for log2_p, cost in items:
            if cost < 0:
                raise PreconditionError(f"bucket cost must be >= 0, got {cost}")
            total += mpmath.power(2, mpmath.mpf(log2_p)) * mpmath.mpf(cost)
        return float(total)
