"""Exponent-tuple combinatorics for F2[x1..xq]: weight vectors, orderings,
degree enumeration, spike counting and the mu/alpha arithmetic.

A monomial x1^a1...xq^aq is represented by its exponent tuple (a1,...,aq).
A weight vector is the tuple (w1, w2, ...) where wj counts the variables
whose exponent has bit j-1 set; trailing zeros are trimmed.  Reports print
weight vectors 1-indexed, matching the internal tuple layout.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Iterator, Sequence


def weight_vector(a: Sequence[int]) -> tuple[int, ...]:
    """Weight vector of an exponent tuple: wj = #{i : bit j-1 of a_i set}."""
    m = max(a, default=0)
    out = []
    b = 0
    while m >> b:
        out.append(sum((ai >> b) & 1 for ai in a))
        b += 1
    return tuple(out)


def deg_omega(w: Sequence[int]) -> int:
    """Degree of a weight vector: sum of 2^(j-1) * wj."""
    return sum(wj << j for j, wj in enumerate(w))


def alpha(n: int) -> int:
    """Number of ones in the binary expansion of n."""
    if n < 0:
        raise ValueError("alpha expects n >= 0")
    return bin(n).count("1")


@lru_cache(maxsize=None)
def mu(n: int) -> int:
    """Least number of terms of the form 2^d - 1 (d >= 1) summing to n.

    mu(0) = 0 by convention (the empty sum).
    """
    if n < 0:
        raise ValueError("mu expects n >= 0")
    if n == 0:
        return 0
    best = n  # n copies of 1 always work
    d = 1
    while (1 << d) - 1 <= n:
        best = min(best, 1 + mu(n - ((1 << d) - 1)))
        d += 1
    return best


def enumerate_exponents(q: int, n: int) -> Iterator[tuple[int, ...]]:
    """Yield every q-tuple of non-negative integers summing to n.

    Plain lexicographic order on the tuples; exactly C(n+q-1, q-1) of them.
    The stream never materializes the full list.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if n < 0:
        raise ValueError("n must be >= 0")

    def rec(prefix: tuple[int, ...], rest: int, slots: int) -> Iterator[tuple[int, ...]]:
        if slots == 1:
            yield prefix + (rest,)
            return
        for v in range(rest + 1):
            yield from rec(prefix + (v,), rest - v, slots - 1)

    return rec((), n, q)


def count_exponents(q: int, n: int) -> int:
    """Number of monomials of degree n in q variables (exact, no overflow)."""
    return comb(n + q - 1, q - 1)


def sort_key(a: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Key realizing the (weight, exponent) order: compare weight vectors
    left-lexicographically first, exponent tuples break ties.

    Weight vectors of different lengths compare with the shorter one padded
    by zeros on the right, which plain tuple comparison already does once
    trailing zeros are trimmed.
    """
    return (weight_vector(a), tuple(a))


def compare(a: Sequence[int], b: Sequence[int]) -> int:
    """Total order on equal-degree monomials: -1, 0 or 1 as a <, =, > b."""
    if sum(a) != sum(b):
        raise ValueError("compare expects monomials of equal degree")
    ka, kb = sort_key(a), sort_key(b)
    return (ka > kb) - (ka < kb)


def is_spike(a: Sequence[int]) -> bool:
    """True iff every exponent is of the form 2^m - 1 (zero allowed)."""
    return all(ai & (ai + 1) == 0 for ai in a)


def count_spikes(q: int, n: int) -> int:
    """Number of degree-n spikes in q variables.

    A spike has every exponent 2^m - 1, so adding 1 to each exponent gives q
    powers of two summing to q + n.  Enumerate the multisets of powers
    (non-increasing sequences) and weight each by the multinomial counting
    its arrangements over the q variables.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    target = q + n

    # rec(remaining, slots, max_pow): arrangements of `slots` powers of two,
    # each <= 2^max_pow, summing to `remaining`.  The comb(slots, c) factors
    # along a branch compose to the multinomial q!/prod(c_m!).
    def rec(remaining: int, slots: int, max_pow: int) -> int:
        if slots == 0:
            return 1 if remaining == 0 else 0
        if remaining < slots:  # every slot needs at least 2^0
            return 0
        total = 0
        p = min(max_pow, remaining.bit_length() - 1)
        while p >= 0:
            v = 1 << p
            half_cap = (v >> 1) if p > 0 else 0
            for c in range(1, slots + 1):
                if c * v > remaining:
                    break
                rest = remaining - c * v
                left = slots - c
                if rest > left * half_cap:
                    continue
                sub = rec(rest, left, p - 1)
                if sub:
                    total += sub * comb(slots, c)
            p -= 1
        return total

    return rec(target, q, target.bit_length() - 1)
