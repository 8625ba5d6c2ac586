"""Steenrod squares on monomials of F2[x1..xq] via Cartan's formula and
Lucas' theorem, plus the hit columns they generate.

Polynomials over F2 are sets of exponent tuples (presence = coefficient 1);
adding a monomial twice removes it.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence


def binom_odd(e: int, i: int) -> bool:
    """C(e, i) mod 2 by Lucas: odd iff the bits of i sit inside e's."""
    return 0 <= i <= e and (i & (e - i)) == 0


def _sq_impl(k: int, m: tuple[int, ...]) -> frozenset[tuple[int, ...]]:
    if k == 0:
        return frozenset((m,))
    # split on the first variable with positive exponent
    j = next((idx for idx, e in enumerate(m) if e > 0), None)
    if j is None:
        return frozenset()  # Sq^k(1) = 0 for k > 0
    e = m[j]
    rest = m[:j] + (0,) + m[j + 1 :]
    out: set[tuple[int, ...]] = set()
    for i in range(k + 1):
        if not binom_odd(e, i):
            continue
        for sub in _sq(k - i, rest):
            # sub keeps slot j at zero, so distinct i never collide
            out.add(sub[:j] + (e + i,) + sub[j + 1 :])
    return frozenset(out)


_sq = lru_cache(maxsize=None)(_sq_impl)


def configure_memo(maxsize: int | None) -> None:
    """Rebind the square memo with an LRU bound (None = unbounded)."""
    global _sq
    _sq = lru_cache(maxsize=maxsize)(_sq_impl)


def sq_on_monomial(k: int, m: Sequence[int]) -> set[tuple[int, ...]]:
    """Support of Sq^k applied to the monomial with exponent tuple m.

    Sq^0 is the identity; the result is empty whenever k exceeds the degree
    and is the exponent doubling when k equals it.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    return set(_sq(k, tuple(m)))


def hit_column(b: Sequence[int], k: int) -> list[tuple[int, ...]]:
    """Sorted exponent tuples in the support of Sq^k(x^b)."""
    return sorted(expand_square(b, k))


def expand_square(b: Sequence[int], k: int) -> list[tuple[int, ...]]:
    """Iterative Cartan expansion of Sq^k(x^b): every way of distributing k
    over the variables with all per-variable binomials odd.

    Distinct distributions give distinct output monomials, so no parity
    collapsing occurs.  This is the form used by the streaming elimination
    driver; it agrees with sq_on_monomial (tested).
    """
    q = len(b)
    if k == 0:
        return [tuple(b)]
    suffix = [0] * (q + 1)
    for j in range(q - 1, -1, -1):
        suffix[j] = suffix[j + 1] + b[j]
    out: list[tuple[int, ...]] = []
    cur = list(b)

    def rec(j: int, rem: int) -> None:
        if rem > suffix[j]:
            return
        if j == q - 1:
            if binom_odd(b[j], rem):
                cur[j] = b[j] + rem
                out.append(tuple(cur))
                cur[j] = b[j]
            return
        e = b[j]
        for i in range(min(rem, e) + 1):
            if i == 0 or (i & (e - i)) == 0:
                cur[j] = e + i
                rec(j + 1, rem - i)
        cur[j] = e

    rec(0, k)
    return out
