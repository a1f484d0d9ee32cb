"""Code-length primitives shared by every cost formula.

All lengths are in bits (base-2 logarithms).
"""
from __future__ import annotations

import math

from scipy.special import betaln

#: Normalising constant of Rissanen's universal prior for integers.
RISSANEN_C0 = 2.865064
LOG2_C0 = math.log2(RISSANEN_C0)

_LN2 = math.log(2.0)
# Below this many factors the binomial is summed term by term; above it the
# log-beta route is accurate to well under 1e-9 relative.
_DIRECT_SUM_LIMIT = 64


def universal_int_code_len(n: int) -> float:
    """Length of Rissanen's universal code for the positive integer ``n``."""
    if n < 1:
        raise ValueError(f"universal code needs n >= 1, got {n}")
    bits = LOG2_C0
    term = math.log2(n)
    while term > 0:
        bits += term
        term = math.log2(term)
    return bits


def log2_binomial(n: int, k: int) -> float:
    """log2 C(n, k) without forming the binomial itself."""
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"log2_binomial needs 0 <= k <= n, got n={n}, k={k}")
    k = min(k, n - k)
    if k == 0:
        return 0.0
    if k <= _DIRECT_SUM_LIMIT:
        return math.fsum(math.log2((n - i) / (k - i)) for i in range(k))
    return -(math.log(n + 1) + float(betaln(n - k + 1, k + 1))) / _LN2


def weak_composition_code_len(total: int, parts: int) -> float:
    """Index of a weak composition of ``total`` into ``parts`` ordered parts."""
    if parts < 1:
        raise ValueError(f"weak composition needs parts >= 1, got {parts}")
    if total < 0:
        raise ValueError(f"weak composition needs total >= 0, got {total}")
    return log2_binomial(total + parts - 1, parts - 1)


def prefix_code_cost(ones: int, zeros: int) -> float:
    """Bits to transmit ``ones`` 1s and ``zeros`` 0s with an optimal prefix code.

    A symbol that never occurs needs no codeword, so zero counts cost nothing.
    """
    if ones < 0 or zeros < 0:
        raise ValueError("symbol counts must be non-negative")
    total = ones + zeros
    bits = 0.0
    if ones:
        bits -= ones * math.log2(ones / total)
    if zeros:
        bits -= zeros * math.log2(zeros / total)
    return bits


def log2_or_zero(count: int) -> float:
    """log2 of a count, with the empty count costing nothing."""
    return math.log2(count) if count > 0 else 0.0
