"""Reduction by repeated Schur complements over filtration-compatible Morse fields.

Each round pairs off a set of rows and columns of the working matrix E whose
square submatrix A is upper-unitriangular, records those pairs as pivots, and
replaces E by the Schur complement ``Dblk + C A^-1 B`` on the rest. Rounds
repeat until E has no nonzero column.
"""

from __future__ import annotations

import time
from contextlib import nullcontext
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .core import PivotSet, ReductionResult, SparseBoolMatrix, upper_tri_solve
from .errors import EmptyFieldError, ShapeError
from .kernels import blockprodsum, sortperm
from .reduce import bitset_rows


@dataclass(frozen=True)
class MorseField:
    """Pivot pairs ``(row, col)`` sorted by column."""

    pairs: tuple

    @property
    def rows(self) -> np.ndarray:
        return np.array([r for r, _ in self.pairs], dtype=np.int64)

    @property
    def cols(self) -> np.ndarray:
        return np.array([c for _, c in self.pairs], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class SchurBlocks:
    """``E`` split by a field: A = E[P, Q], B = E[P, Q'], C = E[P', Q], Dblk = E[P', Q']."""

    A: SparseBoolMatrix
    B: SparseBoolMatrix
    C: SparseBoolMatrix
    Dblk: SparseBoolMatrix
    rest_rows: np.ndarray
    rest_cols: np.ndarray


def select_morse_field(e: SparseBoolMatrix, row_births, col_births) -> MorseField:
    """Equal-birth apparent pairs of ``e``.

    ``(i, j)`` is taken when i is the lowest nonzero of column j, j is the
    leftmost nonzero of row i, and both carry the same birth. Distinct
    columns have distinct lows and each row has one leftmost entry, so the
    pairs use every row and column once; sorted by column, each pair's row
    has no entry in an earlier field column, which makes A upper-unitriangular.
    With no such pair, the first nonzero column and its low are returned.
    """
    if e.nnz == 0:
        raise EmptyFieldError("matrix has no nonzero entry to pivot on")
    row_births = np.asarray(row_births)
    col_births = np.asarray(col_births)
    lows = e.lows()
    left = np.full(e.nrows, e.ncols, dtype=np.int64)
    np.minimum.at(left, e.rowval, e.column_indices())
    safe = np.maximum(lows, 0)
    cols = np.flatnonzero((lows >= 0) & (left[safe] == np.arange(e.ncols))
                          & (row_births[safe] == col_births))
    if cols.size == 0:
        cols = np.flatnonzero(lows >= 0)[:1]
    return MorseField(tuple(zip(lows[cols].tolist(), cols.tolist())))


def _complement(n: int, taken: np.ndarray) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[taken] = False
    return np.flatnonzero(mask)


def partition(e: SparseBoolMatrix, field: MorseField) -> SchurBlocks:
    p, q = field.rows, field.cols
    rp, rq = _complement(e.nrows, p), _complement(e.ncols, q)
    return SchurBlocks(e.submatrix(p, q), e.submatrix(p, rq), e.submatrix(rp, q),
                       e.submatrix(rp, rq), rp, rq)


def schur_complement(blocks: SchurBlocks, workers: int = 1) -> SparseBoolMatrix:
    """``Dblk + C (A^-1 B)`` over GF(2)."""
    a, b, c, d = blocks.A, blocks.B, blocks.C, blocks.Dblk
    if a.nrows != a.ncols or b.nrows != a.nrows or c.ncols != a.ncols \
            or c.nrows != d.nrows or b.ncols != d.ncols:
        raise ShapeError(f"nonconforming Schur blocks A{a.shape} B{b.shape} C{c.shape} D{d.shape}")
    return blockprodsum(d, c, upper_tri_solve(a, b), workers)


def filtration_order(births, weights, sort: str = "radix") -> np.ndarray:
    """Stable order by (birth, descending weight, index)."""
    births = np.asarray(births)
    weights = np.asarray(weights)
    if weights.shape != births.shape:
        raise ShapeError(f"{weights.size} weights for {births.size} entries")
    by_weight = sortperm(-weights.astype(np.int64) if weights.dtype.kind in "iub" else -weights, sort)
    return by_weight[sortperm(births[by_weight], sort)]


def reorder_rows_cols(e: SparseBoolMatrix, row_births, col_births,
                      row_weights, col_weights, sort: str = "radix") -> tuple[np.ndarray, np.ndarray]:
    """Row and column permutations that move heavier entries first within
    each birth class; never moves an entry across birth classes."""
    if len(row_births) != e.nrows or len(col_births) != e.ncols:
        raise ShapeError("births must match the matrix shape")
    return (filtration_order(row_births, row_weights, sort),
            filtration_order(col_births, col_weights, sort))


class _NullTimer:
    def stage(self, name):
        return nullcontext()


def morse_reduce_matrix(e: SparseBoolMatrix, row_births, col_births, *,
                        cleared: Optional[Mapping[int, int]] = None, workers: int = 1,
                        timer=None) -> ReductionResult:
    """Reduce ``e`` by Schur rounds, tracking ``V`` so that ``e V = R``.

    The pivot set equals the column algorithm's. ``cleared`` maps columns
    known to vanish to their killing chain (as a bitset), as in
    :func:`phkit.reduce.ph_col`. ``log`` records the shape and nonzero count
    of the working matrix at the start of each round.
    """
    timer = timer or _NullTimer()
    row_births = np.asarray(row_births)
    col_births = np.asarray(col_births)
    cleared = cleared or {}
    n_rows, n_cols = e.shape
    r_cols: dict[int, np.ndarray] = {}
    v_cols: dict[int, np.ndarray] = {}
    for j, chain in cleared.items():
        r_cols[j] = np.zeros(0, np.int64)
        v_cols[j] = bitset_rows(chain, n_cols)

    col_ids = _complement(n_cols, np.array(sorted(cleared), dtype=np.int64))
    row_ids = np.arange(n_rows, dtype=np.int64)
    work = e.select_columns(col_ids)
    vrest = SparseBoolMatrix.from_columns(n_cols, ([j] for j in col_ids.tolist()))
    pivots = []
    log = {"shape": [], "nnz": [], "field_size": [], "field_seconds": 0.0, "schur_seconds": 0.0}

    while True:
        counts = work.column_counts()
        for t in np.flatnonzero(counts == 0).tolist():
            j = int(col_ids[t])
            r_cols[j] = np.zeros(0, np.int64)
            v_cols[j] = vrest.column(t).copy()
        nz = np.flatnonzero(counts > 0)
        if nz.size == 0:
            break
        if nz.size < counts.size:
            work, vrest, col_ids = work.select_columns(nz), vrest.select_columns(nz), col_ids[nz]
        used = np.unique(work.rowval)
        if used.size < work.nrows:
            work = work.submatrix(used, np.arange(work.ncols))
            row_ids = row_ids[used]
        log["shape"].append(work.shape)
        log["nnz"].append(work.nnz)

        t0 = time.perf_counter()
        with timer.stage("field"):
            field = select_morse_field(work, row_births[row_ids], col_births[col_ids])
            blocks = partition(work, field)
        t1 = time.perf_counter()
        log["field_size"].append(len(field))
        # columns paired now are final: earlier rounds left them zero outside these rows
        for p, q in field.pairs:
            j = int(col_ids[q])
            r_cols[j] = row_ids[work.column(q)]
            v_cols[j] = vrest.column(q).copy()
            pivots.append((int(row_ids[p]), j))
        with timer.stage("schur"):
            x = upper_tri_solve(blocks.A, blocks.B)
            new_work = blockprodsum(blocks.Dblk, blocks.C, x, workers)
            vrest = blockprodsum(vrest.select_columns(blocks.rest_cols),
                                 vrest.select_columns(field.cols), x, workers)
        log["field_seconds"] += t1 - t0
        log["schur_seconds"] += time.perf_counter() - t1
        work = new_work
        row_ids, col_ids = row_ids[blocks.rest_rows], col_ids[blocks.rest_cols]

    R = SparseBoolMatrix.from_columns(n_rows, (np.sort(r_cols[j]) for j in range(n_cols)))
    V = SparseBoolMatrix.from_columns(n_cols, (np.sort(v_cols[j]) for j in range(n_cols)))
    log["rounds"] = len(log["nnz"])
    return ReductionResult(R, V, PivotSet(frozenset(pivots)), log=log)


def morse_reduce(fc, dim: int, *, workers: int = 1, vertex_weights=None,
                 sort: str = "radix") -> ReductionResult:
    """Schur-round reduction of the dimension-``dim`` boundary block of ``fc``.

    Pivots are reported in the block's own indexing even when
    ``vertex_weights`` reorders it.
    """
    from .simplicial import boundary_operator

    d = boundary_operator(fc, dim)
    row_births, col_births = fc.births[dim - 1], fc.births[dim]
    if vertex_weights is None:
        return morse_reduce_matrix(d, row_births, col_births, workers=workers)
    w = np.asarray(vertex_weights)
    ro = filtration_order(row_births, w[fc.simplices[dim - 1]].sum(axis=1), sort)
    co = filtration_order(col_births, w[fc.simplices[dim]].sum(axis=1), sort)
    res = morse_reduce_matrix(d.permute(ro, co), row_births[ro], col_births[co], workers=workers)
    res.pivots = PivotSet(frozenset((int(ro[r]), int(co[c])) for r, c in res.pivots.pairs))
    res.row_order, res.col_order = ro, co
    return res
