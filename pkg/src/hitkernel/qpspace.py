"""Streaming construction of the admissible-monomial basis of (QP_q)_n.

All degree-n monomials are indexed in descending (weight, exponent) order,
so the leading (lowest-index) entry of a hit row is its largest monomial
and the non-pivot positions are exactly the admissible monomials.  Hit rows
Sq^{2^p}(x^b) are streamed and reduced online against a sparse pivot pool;
full back-substitution into admissible coordinates is performed on demand
and cached densely.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .monomials import count_exponents, weight_vector
from .steenrod import binom_odd

ENGINE_MAGIC = b"HKDS"
ENGINE_VERSION = 2  # sparse rows: sorted uint32 column indices

_BATCH_ROWS = 2048
_DEFAULT_MEM_SOFT = 512 * 1024 * 1024
_DEFAULT_MEM_HARD = 0  # 0 = unlimited


class MemoryBudgetError(RuntimeError):
    """Hard memory threshold breached; a checkpoint was written if possible."""


def _rss_bytes() -> int:
    try:
        import psutil

        return psutil.Process().memory_info().rss
    except Exception:  # pragma: no cover
        return 0


def _enum_exponent_array(q: int, n: int) -> np.ndarray:
    """All degree-n exponent tuples as a uint8 array (lex order)."""
    if n > 255:
        raise NotImplementedError("engine supports n <= 255")
    if q == 1:
        return np.array([[n]], dtype=np.uint8)
    blocks = []
    for v in range(n + 1):
        sub = _enum_exponent_array(q - 1, n - v)
        head = np.full((sub.shape[0], 1), v, dtype=np.uint8)
        blocks.append(np.hstack((head, sub)))
    return np.vstack(blocks)


def _encode(exps: np.ndarray) -> np.ndarray:
    q = exps.shape[1]
    shifts = (np.uint64(1) << (np.uint64(8) * np.arange(q, dtype=np.uint64)))
    return (exps.astype(np.uint64) * shifts).sum(axis=1, dtype=np.uint64)


def _expand_codes(b: tuple[int, ...], k: int, out: list[int]) -> None:
    """Codes of the monomials in Sq^k(x^b), appended to out.

    Same Cartan/Lucas expansion as steenrod.expand_square, emitting packed
    exponent codes (8 bits per variable) for the engine's index lookup.
    """
    q = len(b)
    suffix = [0] * (q + 1)
    for j in range(q - 1, -1, -1):
        suffix[j] = suffix[j + 1] + b[j]
    base = 0
    for j in range(q):
        base |= b[j] << (8 * j)

    def rec(j: int, rem: int, code: int) -> None:
        if rem > suffix[j]:
            return
        if j == q - 1:
            e = b[j]
            if rem <= e and (rem & (e - rem)) == 0:
                out.append(code + (rem << (8 * j)))
            return
        e = b[j]
        rec(j + 1, rem, code)
        top = min(rem, e)
        for i in range(1, top + 1):
            if (i & (e - i)) == 0:
                rec(j + 1, rem - i, code + (i << (8 * j)))

    rec(0, k, base)


def _iter_tuples(q: int, n: int) -> Iterable[tuple[int, ...]]:
    if q == 1:
        yield (n,)
        return
    for v in range(n + 1):
        for rest in _iter_tuples(q - 1, n - v):
            yield (v,) + rest


class DegreeSpace:
    """Indexed, weight-sorted monomial list of (P_q)_n with the sparse pivot
    pool and the admissible-index set (a basis of (QP_q)_n)."""

    def __init__(self, q: int, n: int):
        if q < 1 or q > 8:
            raise NotImplementedError("engine supports 1 <= q <= 8")
        self.q = q
        self.n = n
        self.total = count_exponents(q, n)
        exps = _enum_exponent_array(q, n)
        nbits = max(1, n.bit_length())
        wcols = [((exps >> j) & 1).sum(axis=1).astype(np.uint8) for j in range(nbits)]
        keys = [255 - exps[:, c] for c in range(q - 1, -1, -1)]
        keys += [255 - wcols[j] for j in range(nbits - 1, -1, -1)]
        perm = np.lexsort(tuple(keys))
        self.exps = np.ascontiguousarray(exps[perm])
        self.weights = np.column_stack([w[perm] for w in wcols]) if nbits else np.zeros((self.total, 0), np.uint8)
        codes = _encode(self.exps)
        self._code_order = np.argsort(codes, kind="stable").astype(np.int32)
        self._codes_sorted = codes[self._code_order]
        n_ = self.total
        self.pivot_start = np.full(n_, -1, dtype=np.int64)
        self.pivot_len = np.zeros(n_, dtype=np.int32)
        self.buf = np.empty(1 << 16, dtype=np.int32)
        self._work = np.zeros((n_ + 63) >> 6, dtype=np.uint64)
        self.cursor = 0
        self.num_pivots = 0
        self.checkpoints: list[str] = []
        # set after elimination
        self.admissible: np.ndarray | None = None
        self.adm_index: np.ndarray | None = None
        # dense back-substitution cache
        self._memo: np.ndarray | None = None
        self._memo_slot: np.ndarray | None = None

    # ----- index helpers -------------------------------------------------

    def positions_from_codes(self, codes: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._codes_sorted, codes)
        if np.any(idx >= self._codes_sorted.size) or np.any(self._codes_sorted[idx] != codes):
            raise AssertionError("monomial outside degree space")  # degrees always match
        return self._code_order[idx]

    def position_of(self, mono: Sequence[int]) -> int:
        code = 0
        for j, e in enumerate(mono):
            code |= int(e) << (8 * j)
        return int(self.positions_from_codes(np.array([code], dtype=np.uint64))[0])

    def monomial(self, pos: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.exps[pos])

    def weight_of(self, pos: int) -> tuple[int, ...]:
        row = self.weights[pos]
        return tuple(int(v) for v in np.trim_zeros(row, "b"))

    # ----- elimination ---------------------------------------------------

    def _grow(self, need: int) -> None:
        cap = self.buf.size
        while cap - self.cursor < need:
            cap = cap * 2 if cap < (1 << 28) else cap + (1 << 26)
        if cap != self.buf.size:
            self.buf = np.resize(self.buf, cap)

    def commit_batch(self, flat: np.ndarray, offs: np.ndarray) -> None:
        done = 0
        nrows = offs.size - 1
        while done < nrows:
            done, self.cursor, added, need = _kernels.reduce_batch(
                flat, offs, done, self.buf, self.cursor, self.pivot_start, self.pivot_len, self._work
            )
            self.num_pivots += added
            if done < nrows:
                self._grow(int(need) + 64)

    def finalize(self) -> None:
        self.buf = self.buf[: self.cursor].copy()
        adm_mask = self.pivot_start < 0
        self.admissible = np.nonzero(adm_mask)[0].astype(np.int32)
        adm_index = np.full(self.total, -1, dtype=np.int32)
        adm_index[self.admissible] = np.arange(self.admissible.size, dtype=np.int32)
        self.adm_index = adm_index

    @property
    def dim(self) -> int:
        if self.admissible is None:
            raise RuntimeError("degree space not finalized")
        return int(self.admissible.size)

    # ----- reduction to admissible coordinates ---------------------------

    @property
    def _nwords(self) -> int:
        return max(1, (self.dim + 63) >> 6)

    def ensure_memo(self, progress: Callable[[str, int, int], None] | None = None) -> None:
        """Back-substitute every pivot row into dense admissible words."""
        if self._memo is not None:
            return
        pivots_desc = np.nonzero(self.pivot_start >= 0)[0][::-1].astype(np.int64)
        npiv = pivots_desc.size
        self._memo = np.zeros((npiv, self._nwords), dtype=np.uint64)
        self._memo_slot = np.full(self.total, -1, dtype=np.int32)
        base = 0
        chunk = 65536
        for lo in range(0, npiv, chunk):
            base = _kernels.sweep_chunk(
                pivots_desc[lo : lo + chunk],
                self.buf,
                self.pivot_start,
                self.pivot_len,
                self._memo,
                self._memo_slot,
                self.adm_index,
                base,
            )
            if progress:
                progress("back-substitute", min(lo + chunk, npiv), npiv)

    def reduce_positions(self, positions: np.ndarray | Sequence[int]) -> np.ndarray:
        """Admissible coordinates (sorted, int32) of an XOR of monomial
        positions, after full back-substitution."""
        self.ensure_memo()
        entries = np.asarray(positions, dtype=np.int64)
        words = _kernels.fold_positions(
            entries, self._memo, self._memo_slot, self.adm_index, self._nwords
        )
        return self._words_to_coords(words)

    def _words_to_coords(self, words: np.ndarray) -> np.ndarray:
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")
        return np.nonzero(bits[: self.dim])[0].astype(np.int32)

    def reduce_monomials(self, monos: Iterable[Sequence[int]]) -> np.ndarray:
        """Reduce a polynomial given as exponent tuples (XOR support)."""
        support: set[tuple[int, ...]] = set()
        for m in monos:
            t = tuple(int(e) for e in m)
            if t in support:
                support.discard(t)
            else:
                support.add(t)
        if not support:
            return np.empty(0, dtype=np.int32)
        codes = []
        for t in support:
            if sum(t) != self.n:
                raise ValueError("polynomial is not homogeneous of this degree")
            code = 0
            for j, e in enumerate(t):
                code |= e << (8 * j)
            codes.append(code)
        pos = self.positions_from_codes(np.array(codes, dtype=np.uint64))
        return self.reduce_positions(pos)

    # ----- structure -----------------------------------------------------

    def weight_table(self) -> list[tuple[tuple[int, ...], int]]:
        """Per-weight admissible counts, descending in the weight order."""
        if self.admissible is None:
            raise RuntimeError("degree space not finalized")
        rows = self.weights[self.admissible]
        uniq, counts = np.unique(rows, axis=0, return_counts=True)
        entries = [
            (tuple(int(v) for v in np.trim_zeros(u, "b")), int(c))
            for u, c in zip(uniq, counts)
        ]
        entries.sort(key=lambda e: e[0], reverse=True)
        return entries

    def spike_positions(self) -> np.ndarray:
        e16 = self.exps.astype(np.int16)
        return np.nonzero(((e16 & (e16 + 1)) == 0).all(axis=1))[0].astype(np.int32)

    def admissible_coords_by_weight(self) -> dict[tuple[int, ...], np.ndarray]:
        """Admissible coordinates grouped by weight vector."""
        out: dict[tuple[int, ...], list[int]] = {}
        for coord, pos in enumerate(self.admissible):
            out.setdefault(self.weight_of(int(pos)), []).append(coord)
        return {w: np.array(v, dtype=np.int32) for w, v in out.items()}

    def release_pool(self) -> None:
        """Drop the sparse pivot pool once the dense cache exists."""
        if self._memo is None:
            raise RuntimeError("build the back-substitution cache first")
        self.buf = np.empty(0, dtype=np.int32)


def build_degree_space(
    q: int,
    n: int,
    *,
    threads: int = 1,
    mem_soft: int = _DEFAULT_MEM_SOFT,
    mem_hard: int = _DEFAULT_MEM_HARD,
    checkpoint: str | None = None,
    progress: Callable[[str, int, int], None] | None = None,
) -> DegreeSpace:
    """Stream every hit column Sq^{2^p}(x^b) in degree n and reduce online.

    A soft memory-threshold breach writes a checkpoint and continues; a hard
    breach writes a checkpoint and raises MemoryBudgetError.  If `checkpoint`
    names an existing file for the same (q, n) the build resumes from it.
    """
    ds = DegreeSpace(q, n)
    start_p, start_b = 0, 0
    if checkpoint:
        resumed = _try_load_checkpoint(ds, checkpoint)
        if resumed is not None:
            start_p, start_b = resumed

    powers = []
    p = 0
    while (1 << p) <= n:
        powers.append(p)
        p += 1

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    soft_tripped = False
    try:
        for p_idx in range(start_p, len(powers)):
            k = 1 << powers[p_idx]
            d = n - k
            total_b = count_exponents(q, d)
            skip = start_b if p_idx == start_p else 0
            done_b = skip
            gen = _iter_tuples(q, d)
            for _ in range(skip):
                next(gen)
            while True:
                batch = []
                for b in gen:
                    batch.append(b)
                    if len(batch) >= _BATCH_ROWS:
                        break
                if not batch:
                    break
                codes: list[int] = []
                offs = [0]
                if pool is not None:
                    for chunk_codes in pool.map(_expand_worker, [(b, k) for b in batch]):
                        codes.extend(chunk_codes)
                        offs.append(len(codes))
                else:
                    for b in batch:
                        _expand_codes(b, k, codes)
                        offs.append(len(codes))
                flat = ds.positions_from_codes(np.array(codes, dtype=np.uint64)).astype(np.int32)
                ds.commit_batch(flat, np.array(offs, dtype=np.int64))
                done_b += len(batch)
                if progress:
                    progress(f"Sq^{k}", done_b, total_b)
                if mem_soft or mem_hard:
                    rss = _rss_bytes()
                    if mem_hard and rss > mem_hard:
                        if checkpoint:
                            _save_checkpoint(ds, checkpoint, p_idx, done_b)
                            ds.checkpoints.append(checkpoint)
                        raise MemoryBudgetError(
                            f"live heap {rss} exceeds hard threshold {mem_hard}"
                        )
                    if mem_soft and rss > mem_soft and checkpoint and not soft_tripped:
                        _save_checkpoint(ds, checkpoint, p_idx, done_b)
                        ds.checkpoints.append(checkpoint)
                        soft_tripped = True
            start_b = 0
    finally:
        if pool is not None:
            pool.shutdown()

    ds.finalize()
    if checkpoint:
        _save_checkpoint(ds, checkpoint, len(powers), 0)
        if checkpoint not in ds.checkpoints:
            ds.checkpoints.append(checkpoint)
    return ds


def _expand_worker(args: tuple[tuple[int, ...], int]) -> list[int]:
    b, k = args
    out: list[int] = []
    _expand_codes(b, k, out)
    return out


def _save_checkpoint(ds: DegreeSpace, path: str, p_idx: int, b_count: int) -> None:
    pivots_desc = np.nonzero(ds.pivot_start >= 0)[0][::-1]
    with open(path, "wb") as fh:
        fh.write(ENGINE_MAGIC)
        fh.write(
            struct.pack(
                "<HIIQQII",
                ENGINE_VERSION,
                ds.q,
                ds.n,
                ds.total,
                pivots_desc.size,
                p_idx,
                b_count,
            )
        )
        for p in pivots_desc:
            s = ds.pivot_start[p]
            ln = int(ds.pivot_len[p])
            fh.write(struct.pack("<II", int(p), ln))
            fh.write(ds.buf[s : s + ln].astype("<u4").tobytes())


def _try_load_checkpoint(ds: DegreeSpace, path: str) -> tuple[int, int] | None:
    import os

    if not os.path.exists(path):
        return None
    with open(path, "rb") as fh:
        if fh.read(4) != ENGINE_MAGIC:
            raise ValueError("not a degree-space checkpoint")
        version, q, n, total, count, p_idx, b_count = struct.unpack("<HIIQQII", fh.read(34))
        if version != ENGINE_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        if (q, n, total) != (ds.q, ds.n, ds.total):
            raise ValueError("checkpoint does not match this degree space")
        need = 0
        rows = []
        for _ in range(count):
            p, ln = struct.unpack("<II", fh.read(8))
            data = np.frombuffer(fh.read(4 * ln), dtype="<u4").astype(np.int32)
            rows.append((p, data))
            need += ln
        ds._grow(need)
        for p, data in rows:
            ds.pivot_start[p] = ds.cursor
            ds.pivot_len[p] = data.size
            ds.buf[ds.cursor : ds.cursor + data.size] = data
            ds.cursor += data.size
        ds.num_pivots = count
    return p_idx, b_count


def reduce_to_admissible(f: Iterable[Sequence[int]], ds: DegreeSpace) -> list[int]:
    """Coordinates of [f] in the admissible basis (sorted, mod 2)."""
    return [int(c) for c in ds.reduce_monomials(f)]


def weight_decomposition(ds: DegreeSpace) -> dict[tuple[int, ...], int]:
    """Admissible counts per weight vector (the weight grading partitions
    the basis)."""
    return {w: c for w, c in ds.weight_table()}
