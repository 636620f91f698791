"""Compiled inner loops.

All kernels are ``nogil`` so the thread-pool drivers in :mod:`phkit.kernels`
get real parallelism. Index conventions are zero-based throughout, except
that counting-sort *values* live in ``1..maxvalue`` as in the original
Julia routine.
"""

import numpy as np
from numba import njit

WARP = 32


# --------------------------------------------------------------------------
# GF(2) sparse products
# --------------------------------------------------------------------------


@njit(nogil=True, cache=True)
def prodsum_columns(lo, hi, nrows, dp, di, cp, ci, ep, ei):
    """Columns ``lo..hi-1`` of ``D + C @ E`` over GF(2), all in CSC form.

    Returns (per-column counts, concatenated sorted row indices).
    """
    ncol = hi - lo
    counts = np.zeros(ncol, np.int64)
    parity = np.zeros(nrows, np.uint8)
    stamp = np.full(nrows, -1, np.int64)
    touched = np.empty(nrows, np.int64)
    cap = 64
    out = np.empty(cap, np.int64)
    n = 0
    for j in range(lo, hi):
        nt = 0
        for p in range(dp[j], dp[j + 1]):
            r = di[p]
            if stamp[r] != j:
                stamp[r] = j
                parity[r] = 0
                touched[nt] = r
                nt += 1
            parity[r] ^= 1
        for q in range(ep[j], ep[j + 1]):
            k = ei[q]
            for p in range(cp[k], cp[k + 1]):
                r = ci[p]
                if stamp[r] != j:
                    stamp[r] = j
                    parity[r] = 0
                    touched[nt] = r
                    nt += 1
                parity[r] ^= 1
        cnt = 0
        for t in range(nt):
            r = touched[t]
            if parity[r] == 1:
                touched[cnt] = r
                cnt += 1
        if cnt > 0:
            rows = np.sort(touched[:cnt])
            if n + cnt > cap:
                newcap = max(2 * cap, n + cnt)
                grown = np.empty(newcap, np.int64)
                grown[:n] = out[:n]
                out = grown
                cap = newcap
            out[n:n + cnt] = rows
            n += cnt
        counts[j - lo] = cnt
    return counts, out[:n].copy()


@njit(nogil=True, cache=True)
def unit_upper_solve(n, ap, ai, bp, bi, ncols):
    """Back-substitution for ``A X = B`` with ``A`` unit upper-triangular."""
    x = np.zeros(n, np.uint8)
    counts = np.zeros(ncols, np.int64)
    cap = 64
    out = np.empty(cap, np.int64)
    buf = np.empty(n, np.int64)
    total = 0
    for j in range(ncols):
        top = -1
        for p in range(bp[j], bp[j + 1]):
            r = bi[p]
            x[r] ^= 1
            if r > top:
                top = r
        cnt = 0
        for k in range(top, -1, -1):
            if x[k] == 1:
                x[k] = 0
                buf[cnt] = k
                cnt += 1
                # last entry of column k is the diagonal
                for p in range(ap[k], ap[k + 1] - 1):
                    x[ai[p]] ^= 1
        if total + cnt > cap:
            newcap = max(2 * cap, total + cnt)
            grown = np.empty(newcap, np.int64)
            grown[:total] = out[:total]
            out = grown
            cap = newcap
        for t in range(cnt):
            out[total + t] = buf[cnt - 1 - t]
        total += cnt
        counts[j] = cnt
    return counts, out[:total].copy()


# --------------------------------------------------------------------------
# Sorting permutations
# --------------------------------------------------------------------------


@njit(nogil=True, cache=True)
def radix_argsort_u64(keys):
    """Stable LSD radix argsort of uint64 keys, 8-bit digits.

    Digit positions on which every key agrees are skipped, so bounded keys
    cost only as many passes as they have significant bytes.
    """
    n = keys.shape[0]
    hist = np.zeros((8, 256), np.int64)
    for i in range(n):
        k = keys[i]
        for d in range(8):
            hist[d, (k >> np.uint64(8 * d)) & np.uint64(255)] += 1
    perm = np.arange(n)
    ks = keys.copy()
    perm2 = np.empty(n, np.int64)
    ks2 = np.empty(n, np.uint64)
    offsets = np.empty(256, np.int64)
    for d in range(8):
        trivial = False
        for b in range(256):
            if hist[d, b] == n:
                trivial = True
                break
        if trivial:
            continue
        acc = 0
        for b in range(256):
            offsets[b] = acc
            acc += hist[d, b]
        shift = np.uint64(8 * d)
        for i in range(n):
            k = ks[i]
            b = (k >> shift) & np.uint64(255)
            o = offsets[b]
            ks2[o] = k
            perm2[o] = perm[i]
            offsets[b] = o + 1
        ks, ks2 = ks2, ks
        perm, perm2 = perm2, perm
    return perm


@njit(nogil=True, cache=True)
def merge_argsort(v):
    """Stable bottom-up merge sort permutation; keys travel with their indices."""
    n = v.shape[0]
    perm = np.arange(n)
    keys = v.copy()
    pbuf = np.empty(n, np.int64)
    kbuf = np.empty_like(keys)
    run = 32
    for lo in range(0, n, run):
        hi = min(lo + run, n)
        for i in range(lo + 1, hi):
            idx = perm[i]
            key = keys[i]
            j = i
            while j > lo and keys[j - 1] > key:
                perm[j] = perm[j - 1]
                keys[j] = keys[j - 1]
                j -= 1
            perm[j] = idx
            keys[j] = key
    width = run
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            a = lo
            b = mid
            o = lo
            while a < mid and b < hi:
                if keys[b] < keys[a]:
                    pbuf[o] = perm[b]
                    kbuf[o] = keys[b]
                    b += 1
                else:
                    pbuf[o] = perm[a]
                    kbuf[o] = keys[a]
                    a += 1
                o += 1
            while a < mid:
                pbuf[o] = perm[a]
                kbuf[o] = keys[a]
                a += 1
                o += 1
            while b < hi:
                pbuf[o] = perm[b]
                kbuf[o] = keys[b]
                b += 1
                o += 1
        perm, pbuf = pbuf, perm
        keys, kbuf = kbuf, keys
        width *= 2
    return perm


# --------------------------------------------------------------------------
# Per-column counting-sort ranks
# --------------------------------------------------------------------------


@njit(nogil=True, cache=True)
def same_order_full(colptr, v, maxvalue):
    """Reference version: prefix sums over the whole value range per column."""
    numcols = colptr.shape[0] - 1
    z = np.empty(v.shape[0], np.int64)
    x = np.zeros(maxvalue + 1, np.int64)
    y = np.zeros(maxvalue + 2, np.int64)
    for j in range(numcols):
        x[:] = 0
        for i in range(colptr[j], colptr[j + 1]):
            x[v[i]] += 1
        y[1] = colptr[j]
        for i in range(1, maxvalue + 1):
            y[i + 1] = y[i] + x[i]
        for i in range(colptr[j], colptr[j + 1]):
            u = v[i]
            z[i] = y[u]
            y[u] += 1
    return z


@njit(nogil=True, cache=True)
def same_order_range(colptr, v, x):
    """Range-limited version; ``x`` is scratch of length maxvalue+1 that
    must be all-zero on entry and is left all-zero on exit."""
    numcols = colptr.shape[0] - 1
    z = np.empty(v.shape[0], np.int64)
    for j in range(numcols):
        start = colptr[j]
        stop = colptr[j + 1]
        if start == stop:
            continue
        for i in range(start, stop):
            x[v[i]] += 1
        maxv = v[start]
        minv = maxv
        for i in range(start + 1, stop):
            if v[i] > maxv:
                maxv = v[i]
            elif v[i] < minv:
                minv = v[i]
        prevsum = start
        for i in range(minv, maxv + 1):
            s = prevsum + x[i]
            x[i] = prevsum
            prevsum = s
        for i in range(start, stop):
            u = v[i]
            z[i] = x[u]
            x[u] += 1
        for i in range(minv, maxv + 1):
            x[i] = 0
    return z


# --------------------------------------------------------------------------
# Stream compaction and start weights
# --------------------------------------------------------------------------


@njit(nogil=True, cache=True)
def popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(nogil=True, cache=True)
def _ballot(col, j0, m):
    votes = np.uint64(0)
    for lane in range(WARP):
        j = j0 + lane
        if j < m and col[j] != 0:
            votes |= np.uint64(1) << np.uint64(lane)
    return votes


@njit(nogil=True, cache=True)
def support_counts(st, lo, hi, lens):
    """``st`` is the transposed input: row ``i`` of ``st`` is column ``i``."""
    m = st.shape[1]
    for i in range(lo, hi):
        col = st[i]
        supplen = 0
        for j0 in range(0, m, WARP):
            supplen += popcount64(_ballot(col, j0, m))
        lens[i] = supplen


@njit(nogil=True, cache=True)
def support_fill(st, lo, hi, colptr, out):
    m = st.shape[1]
    for i in range(lo, hi):
        col = st[i]
        base = colptr[i]
        supplen = 0
        for j0 in range(0, m, WARP):
            votes = _ballot(col, j0, m)
            if votes == 0:
                continue
            for lane in range(WARP):
                bit = np.uint64(1) << np.uint64(lane)
                if votes & bit:
                    lidx = popcount64(votes & (bit - np.uint64(1)))
                    out[base + supplen + lidx] = j0 + lane
            supplen += popcount64(votes)


@njit(nogil=True, cache=True)
def weights_cotriangle(st, sp, si, lo, hi, w):
    for i in range(lo, hi):
        wt = 0
        row_i = st[i]
        for jp in range(sp[i], sp[i + 1]):
            j = si[jp]
            for kp in range(sp[j], sp[j + 1]):
                k = si[kp]
                if k != i and row_i[k] != 0:
                    wt += 1
        w[i] = wt


@njit(nogil=True, cache=True)
def weights_degree(st, sp, si, lo, hi, w):
    for i in range(lo, hi):
        wt = 0
        for jp in range(sp[i], sp[i + 1]):
            if si[jp] != i:
                wt += 1
        w[i] = wt
