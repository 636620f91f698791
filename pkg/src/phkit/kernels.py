"""Performance kernels with sequential references.

Each parallel routine partitions its outer loop into contiguous chunks, one
per worker thread; workers write disjoint output regions and the caller
assembles the pieces in chunk order, so results never depend on the worker
count or on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _jit
from .core import SparseBoolMatrix
from .errors import DataError, ShapeError, UnknownPredicateError

WORKERS_ENV = "PHKIT_WORKERS"


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise DataError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return 1


def chunk_bounds(n: int, workers: int) -> list[tuple[int, int]]:
    """Split ``range(n)`` into at most ``workers`` contiguous, near-equal chunks."""
    workers = max(1, min(int(workers), max(n, 1)))
    edges = np.linspace(0, n, workers + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def balanced_bounds(weights: np.ndarray, workers: int) -> list[tuple[int, int]]:
    """Contiguous chunks with roughly equal total weight."""
    n = weights.size
    workers = max(1, min(int(workers), max(n, 1)))
    if n == 0 or workers == 1:
        return [(0, n)]
    cum = np.cumsum(weights, dtype=np.float64)
    total = cum[-1]
    if total == 0:
        return chunk_bounds(n, workers)
    targets = total * np.arange(1, workers) / workers
    cuts = np.searchsorted(cum, targets, side="left") + 1
    edges = np.concatenate(([0], np.clip(cuts, 0, n), [n]))
    edges = np.maximum.accumulate(edges)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def _run_chunks(fn: Callable, bounds, workers: int) -> list:
    if workers <= 1 or len(bounds) <= 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in bounds]
        return [f.result() for f in futures]


# --------------------------------------------------------------------------
# sortperm
# --------------------------------------------------------------------------


def sort_keys_u64(v: np.ndarray) -> np.ndarray:
    """Order-preserving map of integer, boolean or finite float keys to uint64."""
    v = np.asarray(v)
    if v.dtype.kind == "b":
        return v.astype(np.uint64)
    if v.dtype.kind == "u":
        return v.astype(np.uint64)
    if v.dtype.kind == "i":
        return v.astype(np.int64).view(np.uint64) ^ np.uint64(1 << 63)
    if v.dtype.kind == "f":
        f = v.astype(np.float64)
        if np.isnan(f).any():
            raise DataError("cannot sort NaN keys")
        f = f + 0.0  # -0.0 and 0.0 must compare equal
        u = f.view(np.uint64)
        neg = (u >> np.uint64(63)).astype(bool)
        return np.where(neg, ~u, u | np.uint64(1 << 63))
    raise DataError(f"unsupported key dtype {v.dtype}")


def sortperm_radix(v) -> np.ndarray:
    """Stable sorting permutation by LSD radix sort (zero-based).

    >>> (sortperm_radix([7, 3, 8, 4, 2]) + 1).tolist()
    [5, 2, 4, 1, 3]
    """
    keys = sort_keys_u64(np.asarray(v).ravel())
    return _jit.radix_argsort_u64(keys)


def sortperm_merge(v) -> np.ndarray:
    """Stable sorting permutation by merge sort (zero-based)."""
    a = np.asarray(v).ravel()
    if a.dtype.kind == "f":
        a = a.astype(np.float64)
        if np.isnan(a).any():
            raise DataError("cannot sort NaN keys")
    elif a.dtype.kind in "iub":
        a = a.astype(np.int64) if a.dtype != np.uint64 else a
    else:
        raise DataError(f"unsupported key dtype {a.dtype}")
    return _jit.merge_argsort(a)


def sortperm(v, algorithm: str = "radix") -> np.ndarray:
    if algorithm == "radix":
        return sortperm_radix(v)
    if algorithm == "merge":
        return sortperm_merge(v)
    raise ValueError(f"unknown sort algorithm {algorithm!r}")


# --------------------------------------------------------------------------
# integers in same order by column
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SegmentedVector:
    """Integer values ``v`` split into segments by zero-based ``colptr``."""

    colptr: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        cp = np.asarray(self.colptr, dtype=np.int64)
        v = np.asarray(self.v, dtype=np.int64)
        if cp.size == 0 or cp[0] != 0 or cp[-1] != v.size or np.any(np.diff(cp) < 0):
            raise DataError("colptr must be nondecreasing from 0 to len(v)")
        object.__setattr__(self, "colptr", cp)
        object.__setattr__(self, "v", v)


def _check_values(seg: SegmentedVector, maxvalue: int) -> None:
    if seg.v.size and (seg.v.min() < 1 or seg.v.max() > maxvalue):
        raise DataError(f"values must lie in 1..{maxvalue}")


def integers_in_same_order_by_column(seg: SegmentedVector, maxvalue: int,
                                     range_limited: bool = True,
                                     scratch: np.ndarray | None = None) -> np.ndarray:
    """Stable counting-sort positions within each segment.

    ``z[i]`` is the position entry ``i`` would occupy if its segment were
    stably sorted by value, expressed as an absolute index into ``v``. The
    range-limited path touches only ``min..max`` of each segment and returns
    ``scratch`` to all-zero before moving on.
    """
    _check_values(seg, maxvalue)
    if not range_limited:
        return _jit.same_order_full(seg.colptr, seg.v, int(maxvalue))
    if scratch is None:
        scratch = np.zeros(maxvalue + 1, np.int64)
    elif scratch.shape[0] < maxvalue + 1 or scratch.dtype != np.int64:
        raise DataError("scratch must be int64 with length >= maxvalue+1")
    return _jit.same_order_range(seg.colptr, seg.v, scratch)


# --------------------------------------------------------------------------
# segmented nonzero compaction
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Support:
    """Ascending nonzero row indices of each column, CSC style."""

    colptr: np.ndarray
    indices: np.ndarray

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.colptr)

    def column(self, i: int) -> np.ndarray:
        return self.indices[self.colptr[i]:self.colptr[i + 1]]


def _transposed(s) -> np.ndarray:
    s = np.asarray(s)
    if s.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {s.shape}")
    return np.ascontiguousarray(s.T)


def segmented_nonzero_compaction(s, workers: int = 1, *, _st=None) -> Support:
    """Row indices of the nonzeros of every column of the dense matrix ``s``.

    Each column is scanned in 32-wide strides; within a stride the nonzero
    flags form a bitmask and each hit finds its output slot by counting the
    set bits below it.
    """
    st = _transposed(s) if _st is None else _st
    ncols = st.shape[0]
    lens = np.zeros(ncols, np.int64)
    bounds = chunk_bounds(ncols, workers)

    def count(lo, hi):
        _jit.support_counts(st, lo, hi, lens)

    _run_chunks(count, bounds, workers)
    colptr = np.zeros(ncols + 1, np.int64)
    np.cumsum(lens, out=colptr[1:])
    out = np.empty(int(colptr[-1]), np.int64)

    def fill(lo, hi):
        _jit.support_fill(st, lo, hi, colptr, out)

    _run_chunks(fill, bounds, workers)
    return Support(colptr, out)


# --------------------------------------------------------------------------
# start weights
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightInput:
    """Square integer matrix whose nonzero pattern drives the weights."""

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ShapeError(f"weight input must be square, got shape {s.shape}")
        object.__setattr__(self, "s", s)

    @property
    def m(self) -> int:
        return self.s.shape[0]


# name -> kernel(st, supp_colptr, supp_indices, lo, hi, w)
PREDICATES = {
    # pairs (j in supp(i), k in supp(j)) with k != i and s[k, i] != 0
    "cotriangle": _jit.weights_cotriangle,
    # off-diagonal support size
    "degree": _jit.weights_degree,
}


def column_weights(s: WeightInput, predicate: str = "cotriangle", workers: int = 1) -> np.ndarray:
    """Per-column start weights, computed in two parallel phases: support
    extraction, then per-column counting under ``predicate``."""
    try:
        kernel = PREDICATES[predicate]
    except KeyError:
        raise UnknownPredicateError(f"unknown weight predicate {predicate!r}; "
                                    f"choose from {sorted(PREDICATES)}") from None
    st = _transposed(s.s)
    supp = segmented_nonzero_compaction(None, workers, _st=st)
    w = np.zeros(s.m, np.int64)
    bounds = chunk_bounds(s.m, workers)

    def run(lo, hi):
        kernel(st, supp.colptr, supp.indices, lo, hi, w)

    _run_chunks(run, bounds, workers)
    return w


def column_weights_reference(s: WeightInput, predicate: str = "cotriangle") -> np.ndarray:
    """Plain triple loop over the dense matrix; the oracle for :func:`column_weights`."""
    a = np.asarray(s.s)
    m = a.shape[0]
    supp = [np.flatnonzero(a[:, i]).tolist() for i in range(m)]
    w = np.zeros(m, np.int64)
    for i in range(m):
        if predicate == "cotriangle":
            w[i] = sum(1 for j in supp[i] for k in supp[j] if k != i and a[k, i] != 0)
        elif predicate == "degree":
            w[i] = sum(1 for j in supp[i] if j != i)
        else:
            raise UnknownPredicateError(predicate)
    return w


# --------------------------------------------------------------------------
# blockprodsum
# --------------------------------------------------------------------------


def blockprodsum(dblk: SparseBoolMatrix, c: SparseBoolMatrix, e: SparseBoolMatrix,
                 workers: int = 1, balance: str = "columns") -> SparseBoolMatrix:
    """``dblk + c @ e`` over GF(2) with a master/workers column split.

    Workers each own a contiguous block of output columns and return raw
    (counts, rows) pieces; the master concatenates them and rebuilds the
    column pointer array by a running sum, shifting each piece past the
    nonzeros of the pieces before it.
    """
    if c.nrows != dblk.nrows or c.ncols != e.nrows or e.ncols != dblk.ncols:
        raise ShapeError(f"blockprodsum shapes: D{dblk.shape} + C{c.shape} E{e.shape}")
    q = e.ncols
    if balance == "columns":
        bounds = chunk_bounds(q, workers)
    elif balance == "nnz":
        # estimated work per output column: entries of E times mean column size of C
        est = np.diff(e.colptr) * max(1.0, c.nnz / max(c.ncols, 1)) + np.diff(dblk.colptr)
        bounds = balanced_bounds(est, workers)
    else:
        raise ValueError(f"unknown balance mode {balance!r}")

    def work(lo, hi):
        return _jit.prodsum_columns(lo, hi, c.nrows, dblk.colptr, dblk.rowval,
                                    c.colptr, c.rowval, e.colptr, e.rowval)

    pieces = _run_chunks(work, bounds, workers)
    colptr = np.zeros(q + 1, np.int64)
    offset = 0
    for (lo, hi), (counts, _) in zip(bounds, pieces):
        colptr[lo + 1:hi + 1] = offset + np.cumsum(counts)
        offset = int(colptr[hi])
    rowval = (np.concatenate([rows for _, rows in pieces]) if pieces
              else np.zeros(0, np.int64))
    return SparseBoolMatrix(dblk.nrows, q, colptr, rowval)
