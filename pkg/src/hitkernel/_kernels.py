"""Inner loops of the streaming elimination engine.

Pivot tails are sorted int32 position arrays pooled in one growing buffer.
Row reduction scatters the incoming row into a dense 64-bit work row and
XORs pivot tails in while the leading bit advances monotonically; fully
reduced rows are packed dense over the admissible coordinates.  Everything
here is numba-jitted when numba is available and falls back to equivalent
numpy code otherwise.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


_DEBRUIJN_MULT = np.uint64(0x03F79D71B4CB0A89)
_DEBRUIJN_TABLE = np.zeros(64, dtype=np.int64)
for _i in range(64):
    _DEBRUIJN_TABLE[((1 << _i) * 0x03F79D71B4CB0A89 % (1 << 64)) >> 58] = _i
assert len(set(((1 << _i) * 0x03F79D71B4CB0A89 % (1 << 64)) >> 58 for _i in range(64))) == 64


@njit(cache=True)
def _ctz(w):
    """Index of the lowest set bit of a nonzero uint64."""
    low = w & (~w + np.uint64(1))
    return _DEBRUIJN_TABLE[(low * _DEBRUIJN_MULT) >> np.uint64(58)]


@njit(cache=True)
def _popcount(w):
    w = w - ((w >> np.uint64(1)) & np.uint64(0x5555555555555555))
    w = (w & np.uint64(0x3333333333333333)) + ((w >> np.uint64(2)) & np.uint64(0x3333333333333333))
    w = (w + (w >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (w * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True)
def reduce_batch(flat, offs, start_row, buf, cursor, pivot_start, pivot_len, work):
    """Reduce rows flat[offs[i]:offs[i+1]] online against the pivot pool,
    inserting survivors as new pivots.

    `work` is a zeroed dense scratch row over all columns; it is left zeroed
    on return.  Returns (rows_done, new_cursor, new_pivots, need) where a
    nonzero `need` reports a survivor that did not fit the pool buffer; the
    caller grows the buffer by at least `need` and resumes from rows_done
    (the interrupted row restarts from its original entries, which is
    idempotent).
    """
    one = np.uint64(1)
    nrows = offs.size - 1
    nwords = work.size
    cap = buf.size
    added = 0
    i = start_row
    while i < nrows:
        o1, o2 = offs[i], offs[i + 1]
        if o2 == o1:
            i += 1
            continue
        minpos = np.int64(nwords) << 6
        for j in range(o1, o2):
            t = np.int64(flat[j])
            work[t >> 6] ^= one << np.uint64(t & 63)
            if t < minpos:
                minpos = t
        wi = minpos >> 6
        while wi < nwords:
            w = work[wi]
            if w == np.uint64(0):
                wi += 1
                continue
            lead = (wi << 6) + _ctz(w)
            s = pivot_start[lead]
            if s >= 0:
                ln = pivot_len[lead]
                for j in range(s, s + ln):
                    t = np.int64(buf[j])
                    work[t >> 6] ^= one << np.uint64(t & 63)
                continue  # lead bit cancelled; rescan the same word
            cnt = np.int64(0)
            for ww in range(wi, nwords):
                cnt += np.int64(_popcount(work[ww]))
            if cursor + cnt > cap:
                for ww in range(wi, nwords):
                    work[ww] = np.uint64(0)
                return i, cursor, added, cnt
            k = cursor
            for ww in range(wi, nwords):
                w2 = work[ww]
                while w2 != np.uint64(0):
                    buf[k] = np.int32((ww << 6) + _ctz(w2))
                    k += 1
                    w2 &= w2 - np.uint64(1)
                work[ww] = np.uint64(0)
            pivot_start[lead] = cursor
            pivot_len[lead] = np.int32(cnt)
            cursor = k
            added += 1
            break
        i += 1
    return i, cursor, added, np.int64(0)


@njit(cache=True)
def sweep_chunk(positions, buf, pivot_start, pivot_len, memo, memo_slot, adm_index, base_slot):
    """Back-substitute a chunk of pivot positions (given in decreasing
    order) into dense admissible-coordinate words.

    Tail entries are strictly larger positions, so their memo rows are
    already complete when a pivot is processed.
    """
    nwords = memo.shape[1]
    slot = base_slot
    for idx in range(positions.size):
        p = positions[idx]
        s = pivot_start[p]
        ln = pivot_len[p]
        row = memo[slot]
        for w in range(nwords):
            row[w] = np.uint64(0)
        for j in range(s + 1, s + ln):  # skip the leading entry p itself
            t = buf[j]
            ts = memo_slot[t]
            if ts >= 0:
                other = memo[ts]
                for w in range(nwords):
                    row[w] ^= other[w]
            else:
                a = adm_index[t]
                row[a >> 6] ^= np.uint64(1) << np.uint64(a & 63)
        memo_slot[p] = slot
        slot += 1
    return slot


@njit(cache=True)
def fold_positions(entries, memo, memo_slot, adm_index, nwords):
    """XOR the admissible decompositions of the given positions together."""
    out = np.zeros(nwords, dtype=np.uint64)
    for idx in range(entries.size):
        t = entries[idx]
        ts = memo_slot[t]
        if ts >= 0:
            row = memo[ts]
            for w in range(nwords):
                out[w] ^= row[w]
        else:
            a = adm_index[t]
            if a >= 0:
                out[a >> 6] ^= np.uint64(1) << np.uint64(a & 63)
    return out


if not HAVE_NUMBA:  # numpy fallbacks keep semantics at reduced speed

    def reduce_batch(flat, offs, start_row, buf, cursor, pivot_start, pivot_len, work):  # noqa: F811
        nrows = offs.size - 1
        cap = buf.size
        added = 0
        i = start_row
        while i < nrows:
            seg = flat[offs[i] : offs[i + 1]]
            if seg.size == 0:
                i += 1
                continue
            row = np.sort(seg)
            while row.size > 0:
                lead = int(row[0])
                s = pivot_start[lead]
                if s < 0:
                    if cursor + row.size > cap:
                        return i, cursor, added, int(row.size)
                    buf[cursor : cursor + row.size] = row
                    pivot_start[lead] = cursor
                    pivot_len[lead] = row.size
                    cursor += row.size
                    added += 1
                    break
                row = np.setxor1d(row, buf[s : s + pivot_len[lead]]).astype(np.int32)
            i += 1
        return i, cursor, added, 0

    def sweep_chunk(positions, buf, pivot_start, pivot_len, memo, memo_slot, adm_index, base_slot):  # noqa: F811
        slot = base_slot
        for p in positions:
            s = pivot_start[p]
            ln = pivot_len[p]
            row = memo[slot]
            row[:] = 0
            for t in buf[s + 1 : s + ln]:
                ts = memo_slot[t]
                if ts >= 0:
                    row ^= memo[ts]
                else:
                    a = adm_index[t]
                    row[a >> 6] ^= np.uint64(1) << np.uint64(a & 63)
            memo_slot[p] = slot
            slot += 1
        return slot

    def fold_positions(entries, memo, memo_slot, adm_index, nwords):  # noqa: F811
        out = np.zeros(nwords, dtype=np.uint64)
        for t in np.asarray(entries):
            ts = memo_slot[t]
            if ts >= 0:
                out ^= memo[ts]
            else:
                a = adm_index[t]
                if a >= 0:
                    out[a >> 6] ^= np.uint64(1) << np.uint64(a & 63)
        return out
