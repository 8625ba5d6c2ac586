"""Dense brute-force reference implementations used only in tests.

These share the monomial and Steenrod-square modules with the optimized
pipeline but deliberately not its linear algebra, so the two routes fail
independently.  Guards keep the sizes honest.
"""

from __future__ import annotations

from typing import Sequence

from .monomials import count_exponents, enumerate_exponents, sort_key
from .steenrod import binom_odd, sq_on_monomial

DENSE_GUARD = 20_000
INVARIANT_GUARD = 20


class DenseSpace:
    """Textbook elimination over the full monomial basis of (P_q)_n.

    Rows are position sets; the pivot is the smallest position (largest
    monomial in the descending order).
    """

    def __init__(self, q: int, n: int):
        total = count_exponents(q, n)
        if total > DENSE_GUARD:
            raise ValueError(f"dense oracle guard exceeded: {total} > {DENSE_GUARD}")
        self.q = q
        self.n = n
        self.monos = sorted(enumerate_exponents(q, n), key=sort_key, reverse=True)
        self.index = {m: i for i, m in enumerate(self.monos)}
        self.rows: dict[int, set[int]] = {}  # pivot position -> row support
        for p in range(n.bit_length()):
            k = 1 << p
            for b in enumerate_exponents(q, n - k):
                self._insert({self.index[m] for m in sq_on_monomial(k, b)})

    def _insert(self, row: set[int]) -> None:
        while row:
            lead = min(row)
            stored = self.rows.get(lead)
            if stored is None:
                self.rows[lead] = row
                return
            row = row ^ stored

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return len(self.monos) - self.rank

    def admissible(self) -> list[int]:
        return [i for i in range(len(self.monos)) if i not in self.rows]

    def decompose(self, monos: Sequence[Sequence[int]]) -> frozenset[int]:
        """Admissible-position support of a polynomial, fully reduced."""
        row: set[int] = set()
        for m in monos:
            row ^= {self.index[tuple(m)]}
        out: set[int] = set()
        while row:
            lead = min(row)
            stored = self.rows.get(lead)
            if stored is None:
                out.add(lead)
                row.remove(lead)
            else:
                row ^= stored
        return frozenset(out)


def dense_qp_dim(q: int, n: int) -> int:
    """dim (QP_q)_n by materializing every hit column and eliminating."""
    return DenseSpace(q, n).dim


def apply_rho_monomials(j: int, q: int, monos) -> frozenset[tuple[int, ...]]:
    """Action of the j-th group generator on a polynomial support set:
    adjacent swap for j < q, the transvection x_q -> x_q + x_{q-1} at j = q."""
    out: set[tuple[int, ...]] = set()
    for m in monos:
        if j < q:
            t = list(m)
            t[j - 1], t[j] = t[j], t[j - 1]
            out ^= {tuple(t)}
        else:
            e = m[q - 1]
            for i in range(e + 1):
                if binom_odd(e, i):
                    t = list(m)
                    t[q - 2] += i
                    t[q - 1] = e - i
                    out ^= {tuple(t)}
    return frozenset(out)


def dense_invariant_dim(q: int, n: int) -> int:
    """Dimension of the joint fixed space of all q group generators on the
    admissible basis, by exhaustive enumeration of coordinate vectors."""
    ds = DenseSpace(q, n)
    d = ds.dim
    if d > INVARIANT_GUARD:
        raise ValueError(f"invariant oracle guard exceeded: dim {d} > {INVARIANT_GUARD}")
    if d == 0:
        return 0
    adm = ds.admissible()
    coord = {pos: c for c, pos in enumerate(adm)}
    # residual masks of (rho_j - id) on each admissible basis class
    residuals: list[list[int]] = []
    for j in range(1, q + 1):
        per_basis = []
        for pos in adm:
            moved = apply_rho_monomials(j, q, [ds.monos[pos]])
            support = ds.decompose(list(moved)) ^ frozenset([pos])
            mask = 0
            for s in support:
                mask |= 1 << coord[s]
            per_basis.append(mask)
        residuals.append(per_basis)
    count = 0
    for v in range(1, 1 << d):
        ok = True
        for per_basis in residuals:
            acc = 0
            vv = v
            while vv:
                low = vv & -vv
                acc ^= per_basis[low.bit_length() - 1]
                vv ^= low
            if acc:
                ok = False
                break
        if ok:
            count += 1
    dim = (count + 1).bit_length() - 1
    if (1 << dim) - 1 != count:
        raise AssertionError("fixed vectors do not form a subspace")
    return dim
