"""The halving homomorphism between degree spaces, its kernel and the
odd-doubling lift.

On monomial classes the map sends an all-odd exponent tuple a to (a-1)/2
and everything else to zero; it is surjective from degree n onto degree
(n-q)/2, so the source dimension splits as kernel + target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .gf2 import BitMatrix, nullspace
from .qpspace import DegreeSpace


def kameko_image(a: Sequence[int]) -> tuple[int, ...] | None:
    """(a1-1)/2, ..., (aq-1)/2 when every exponent is odd, else None."""
    if any((e & 1) == 0 for e in a):
        return None
    return tuple((e - 1) >> 1 for e in a)


def psi_lift(monos: Iterable[Sequence[int]]) -> set[tuple[int, ...]]:
    """Monomial-wise section e -> 2e + 1 of the halving map."""
    out: set[tuple[int, ...]] = set()
    for m in monos:
        t = tuple(2 * int(e) + 1 for e in m)
        out.symmetric_difference_update((t,))
    return out


@dataclass
class KamekoKernel:
    src: DegreeSpace
    tgt: DegreeSpace
    rank: int
    basis: list[int]  # bitsets over src admissible coordinates
    support: np.ndarray = field(default=None)  # sorted admissible coords

    @property
    def dim(self) -> int:
        return len(self.basis)

    def support_by_weight(self) -> dict[tuple[int, ...], np.ndarray]:
        """Kernel-support coordinates grouped by monomial weight vector."""
        out: dict[tuple[int, ...], list[int]] = {}
        adm = self.src.admissible
        for coord in self.support:
            w = self.src.weight_of(int(adm[coord]))
            out.setdefault(w, []).append(int(coord))
        return {w: np.array(v, dtype=np.int32) for w, v in out.items()}


def build_kameko_matrix(src: DegreeSpace, tgt: DegreeSpace) -> BitMatrix:
    """Bit matrix of the halving map: one column per source admissible
    monomial, rows over target admissible coordinates."""
    if tgt.n * 2 + src.q != src.n:
        raise ValueError("target degree must be (source degree - q) / 2")
    nrows = tgt.dim
    ncols = src.dim
    rows = [0] * nrows
    adm = src.admissible
    for c in range(ncols):
        a = src.monomial(int(adm[c]))
        u = kameko_image(a)
        if u is None:
            continue
        pos = tgt.position_of(u)
        for r in tgt.reduce_positions(np.array([pos], dtype=np.int64)):
            rows[int(r)] |= 1 << c
    return BitMatrix(rows, ncols)


def kernel_basis(src: DegreeSpace, tgt: DegreeSpace) -> KamekoKernel:
    """Kernel of the halving map as coordinate vectors over the source
    admissible basis.  Surjectivity (rank = dim tgt) is asserted, and every
    basis vector is checked to map to the zero class."""
    if tgt.dim == 0:
        # no constraints: the kernel is the whole source space
        basis = [1 << c for c in range(src.dim)]
        kk = KamekoKernel(src, tgt, 0, basis)
        kk.support = np.arange(src.dim, dtype=np.int32)
        return kk
    L = build_kameko_matrix(src, tgt)
    rank, basis = nullspace(L)
    if rank != tgt.dim:
        raise AssertionError(f"halving map not surjective: rank {rank} != {tgt.dim}")
    if rank + len(basis) != src.dim:
        raise AssertionError("rank/nullity mismatch")
    support_bits = 0
    for v in basis:
        support_bits |= v
    support = []
    while support_bits:
        low = support_bits & -support_bits
        support.append(low.bit_length() - 1)
        support_bits ^= low
    kk = KamekoKernel(src, tgt, rank, basis, np.array(support, dtype=np.int32))
    _check_kernel_membership(kk, L)
    return kk


def _check_kernel_membership(kk: KamekoKernel, L: BitMatrix) -> None:
    for v in kk.basis:
        if L.mul_vec(v) != 0:
            raise AssertionError("kernel vector does not map to zero")
