# backend/satlab/core/combinatorics.py

"""
Binary entropy, exact binomials, fixed-weight string ranking and the
description-length bounds built on them.

All bounds leave out the unquantified additive constant c; the returned
BoundReport carries `constant_note=True` to say so.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np
from scipy.special import comb

from satlab.errors import PreconditionError
from satlab.schemas import BoundReport, KOnesIndex

_LN2 = math.log(2.0)


def binary_entropy(p: float) -> float:
    """H(p) in bits, with 0*log(0) taken as 0."""
    if not 0.0 <= p <= 1.0:
        raise PreconditionError(f"probability must be in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    # log1p keeps log(1 - p) accurate when p is tiny.
    return float(-p * np.log2(p) - (1.0 - p) * np.log1p(-p) / _LN2)


def scaled_entropy(L: int, k: int) -> float:
    """
    L * H(k / L) without forming the tiny ratio's cancellation:
    k*log2(L/k) + (L-k)*(-log2(1 - k/L)).
    """
    if not 0 <= k <= L:
        raise PreconditionError(f"need 0 <= k <= L, got k={k}, L={L}")
    if k == 0 or k == L:
        return 0.0
    ratio = k / L
    head = k * (math.log2(L) - math.log2(k))
    tail = (L - k) * (-math.log1p(-ratio) / _LN2)
    return head + tail


def binomial(L: int, k: int) -> int:
    if k < 0 or L < 0 or k > L:
        raise PreconditionError(f"need 0 <= k <= L, got k={k}, L={L}")
    return int(comb(L, k, exact=True))


def _index(L: int, k: int, I: int) -> KOnesIndex:
    if L < 1 or not 0 <= k <= L:
        raise PreconditionError(f"need L >= 1 and 0 <= k <= L, got L={L}, k={k}")
    total = binomial(L, k)
    if not 1 <= I <= total:
        raise PreconditionError(f"index I={I} out of range 1..{total}")
    return KOnesIndex(L=L, k=k, I=I)


def unrank_k_ones(L: int, k: int, I: int) -> str:
    """The I-th (1-based) length-L string with k ones, in lexicographic order."""
    _index(L, k, I)
    out: list[str] = []
    remaining_ones = k
    rank = I
    for position in range(L):
        rest = L - position - 1
        # Strings that put a '0' here come first.
        with_zero = int(comb(rest, remaining_ones, exact=True))
        if rank <= with_zero:
            out.append("0")
        else:
            rank -= with_zero
            remaining_ones -= 1
            out.append("1")
    return "".join(out)


def rank_k_ones(s: str) -> int:
    """Inverse of unrank_k_ones."""
    if not s or set(s) - {"0", "1"}:
        raise PreconditionError(f"not a non-empty bitstring: {s!r}")
    remaining_ones = s.count("1")
    rank = 1
    L = len(s)
    for position, ch in enumerate(s):
        if ch == "1":
            rank += int(comb(L - position - 1, remaining_ones, exact=True))
            remaining_ones -= 1
    return rank


def enumerate_k_ones(L: int, k: int) -> Iterator[str]:
    """Program 2's enumeration, literally: all weight-k strings in order."""
    if L < 1 or not 0 <= k <= L:
        raise PreconditionError(f"need L >= 1 and 0 <= k <= L, got L={L}, k={k}")

    def extend(prefix: str, ones_left: int) -> Iterator[str]:
        room = L - len(prefix)
        if room == 0:
            yield prefix
            return
        if room > ones_left:
            yield from extend(prefix + "0", ones_left)
        if ones_left > 0:
            yield from extend(prefix + "1", ones_left - 1)

    yield from extend("", k)


def program1_length_bound(formula_size_bits: float, n: int) -> BoundReport:
    """l(p) = c + log 2**n + l(formula); also an upper bound on K."""
    if formula_size_bits < 0 or n < 0:
        raise PreconditionError("formula size and n must be non-negative")
    return BoundReport(bits_excluding_constant=n + formula_size_bits)


def program2_length_bound(L: int, k: int) -> BoundReport:
    """l(p) = c + log L + log C(L, k)."""
    if L < 1:
        raise PreconditionError(f"L must be positive, got {L}")
    # math.log2 accepts arbitrarily large ints.
    bits = math.log2(L) + math.log2(binomial(L, k))
    return BoundReport(bits_excluding_constant=bits)


def k_complexity_bound(n: int, k: int) -> BoundReport:
    """K(x | 2**n) <= 2**n H(k / 2**n) + n/2 + c."""
    if n < 0:
        raise PreconditionError(f"n must be non-negative, got {n}")
    return BoundReport(bits_excluding_constant=scaled_entropy(1 << n, k) + n / 2)


def figure1_curve(k: int, n_min: int, n_max: int) -> list[tuple[int, float]]:
    """y(n) = 2**n H(k / 2**n) for n_min..n_max; grows with slope ~k."""
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    if n_min > n_max:
        raise PreconditionError(f"empty range n_min={n_min} > n_max={n_max}")
    if n_min < 4 or k > 1 << (n_min - 4):
        raise PreconditionError(
            f"k={k} is not small against 2**n_min; need k <= 2**(n_min-4)"
        )
    return [(n, scaled_entropy(1 << n, k)) for n in range(n_min, n_max + 1)]


def figure1_csv(series: list[tuple[int, float]]) -> list[str]:
    return [f"{n},{y:.6g}" for n, y in series]
