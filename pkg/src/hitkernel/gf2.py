"""Bit-packed exact linear algebra over F2.

Rows are Python ints used as bitsets (bit i = column i).  The pivot of a
nonzero row is its lowest set bit; combined with the descending monomial
order used by the degree spaces this makes the pivot the largest monomial
of a hit element, so non-pivot columns are exactly the admissible ones.

Checkpoints serialize a pivot map as a little-endian, length-prefixed
binary dump, bit-exact across platforms.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

CHECKPOINT_MAGIC = b"HKPM"
CHECKPOINT_VERSION_BLOCKS = 1  # rows stored as packed 64-bit blocks
CHECKPOINT_VERSION_SPARSE = 2  # rows stored as sorted uint32 column indices


def lsb(x: int) -> int:
    """Index of the lowest set bit of a nonzero int."""
    return (x & -x).bit_length() - 1


def row_from_columns(cols: Iterable[int]) -> int:
    r = 0
    for c in cols:
        r ^= 1 << c
    return r


def row_columns(r: int) -> list[int]:
    """Sorted column indices of the set bits."""
    out = []
    while r:
        low = r & -r
        out.append(low.bit_length() - 1)
        r ^= low
    return out


@dataclass
class BitMatrix:
    """A sequence of bitset rows sharing a common column count."""

    rows: list[int]
    ncols: int

    def __post_init__(self) -> None:
        mask = (1 << self.ncols) - 1
        for r in self.rows:
            if r & ~mask:
                raise ValueError("row has bits beyond ncols")

    def mul_vec(self, v: int) -> int:
        """Matrix times column vector; returns result bitset over rows."""
        out = 0
        for i, r in enumerate(self.rows):
            if (r & v).bit_count() & 1:
                out |= 1 << i
        return out


class PivotMap:
    """Online pivot store: pivot column -> reduced row whose lowest set bit
    is that column.  Leading bits are unique keys; full back-substitution is
    applied lazily, on demand."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, row: int) -> int:
        """Reduce a row against the stored pivots (no insertion)."""
        if row >> self.ncols:
            raise ValueError("row has bits beyond ncols")
        rows = self.rows
        while row:
            p = lsb(row)
            pr = rows.get(p)
            if pr is None:
                break
            row ^= pr
        return row

    def insert(self, row: int) -> int | None:
        """Reduce a row online and keep it if a new pivot appears.

        Returns the new pivot column, or None when the row reduced to zero.
        """
        row = self.reduce(row)
        if not row:
            return None
        p = lsb(row)
        self.rows[p] = row
        return p

    def back_substitute(self) -> None:
        """Fully reduce every stored row so no tail bit is a pivot key.

        Processes pivots from highest to lowest, so any pivot row referenced
        by a tail bit is already fully reduced when it is substituted in.
        """
        for p in sorted(self.rows, reverse=True):
            row = self.rows[p]
            acc = 1 << p
            tail = row ^ acc
            while tail:
                low = tail & -tail
                tail ^= low
                tr = self.rows.get(low.bit_length() - 1)
                if tr is None:
                    acc ^= low
                else:
                    acc ^= tr ^ low  # tr's tail is already pivot-free
            self.rows[p] = acc

    def decompose(self, row: int) -> int:
        """Full back-substitution of an arbitrary row: XOR out pivots until
        only non-pivot columns survive."""
        rows = self.rows
        out = 0
        while row:
            low = row & -row
            p = low.bit_length() - 1
            pr = rows.get(p)
            if pr is None:
                out ^= low
                row ^= low
            else:
                row ^= pr
        return out


def online_reduce(row: int, pm: PivotMap) -> tuple[int, int | None]:
    """Reduce a row against pm; nonzero survivors are inserted as new pivots.

    Returns (reduced row, new pivot column or None).
    """
    reduced = pm.reduce(row)
    if reduced:
        pm.rows[lsb(reduced)] = reduced
        return reduced, lsb(reduced)
    return 0, None


def rank(M: BitMatrix) -> int:
    pm = PivotMap(M.ncols)
    for r in M.rows:
        pm.insert(r)
    return len(pm)


def nullspace(M: BitMatrix) -> tuple[int, list[int]]:
    """Rank and a nullspace basis of M over F2.

    Basis vectors are bitsets over the column space; each free column
    contributes one vector whose lowest set bit pattern is distinct, so the
    basis is linearly independent and rank + len(basis) = ncols.
    """
    pm = PivotMap(M.ncols)
    for r in M.rows:
        pm.insert(r)
    pm.back_substitute()
    pivot_set = set(pm.rows)
    # Transposed sweep: free column f picks up bit p for every reduced pivot
    # row p whose tail contains f.
    acc: dict[int, int] = {}
    for p, row in pm.rows.items():
        tail = row ^ (1 << p)
        while tail:
            low = tail & -tail
            tail ^= low
            f = low.bit_length() - 1
            acc[f] = acc.get(f, 0) ^ (1 << p)
    basis = [
        (1 << f) | acc.get(f, 0) for f in range(M.ncols) if f not in pivot_set
    ]
    return len(pivot_set), basis


def solve_stacked(blocks: Sequence[BitMatrix]) -> tuple[int, list[int]]:
    """Nullspace of the vertical concatenation of the given blocks."""
    if not blocks:
        raise ValueError("need at least one block")
    ncols = blocks[0].ncols
    rows: list[int] = []
    for b in blocks:
        if b.ncols != ncols:
            raise ValueError("blocks must share ncols")
        rows.extend(b.rows)
    return nullspace(BitMatrix(rows, ncols))


def _pack_row_blocks(row: int, nblocks: int) -> bytes:
    return row.to_bytes(nblocks * 8, "little")


def save_pivot_map(path: str, pm: PivotMap) -> None:
    """Version-1 checkpoint: per pivot, key then its packed 64-bit blocks."""
    nblocks = (pm.ncols + 63) // 64
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<HQQ", CHECKPOINT_VERSION_BLOCKS, pm.ncols, len(pm.rows)))
        for p in sorted(pm.rows):
            fh.write(struct.pack("<QQ", p, nblocks))
            fh.write(_pack_row_blocks(pm.rows[p], nblocks))


def load_pivot_map(path: str) -> PivotMap:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError("not a pivot-map checkpoint")
        version, ncols, count = struct.unpack("<HQQ", fh.read(18))
        if version != CHECKPOINT_VERSION_BLOCKS:
            raise ValueError(f"unsupported pivot-map checkpoint version {version}")
        pm = PivotMap(ncols)
        for _ in range(count):
            p, nblocks = struct.unpack("<QQ", fh.read(16))
            row = int.from_bytes(fh.read(nblocks * 8), "little")
            pm.rows[p] = row
    return pm
