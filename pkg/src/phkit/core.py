"""Column-compressed sparse matrices over GF(2).

A :class:`SparseBoolMatrix` stores only the positions of its nonzero entries;
every stored entry is implicitly 1. All operations return canonical matrices
(row indices strictly increasing within each column), so two matrices are
equal exactly when their ``colptr`` and ``rowval`` arrays are equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import _jit
from .errors import IndexRangeError, ShapeError, StructureError

_INDEX = np.int64


def _frozen(a) -> np.ndarray:
    arr = np.ascontiguousarray(a, dtype=_INDEX)
    if arr.flags.writeable:
        arr = arr.view()
        arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SparseBoolMatrix:
    """GF(2) matrix in compressed sparse column form."""

    nrows: int
    ncols: int
    colptr: np.ndarray
    rowval: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nrows", int(self.nrows))
        object.__setattr__(self, "ncols", int(self.ncols))
        object.__setattr__(self, "colptr", _frozen(self.colptr))
        object.__setattr__(self, "rowval", _frozen(self.rowval))

    # -- construction ---------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseBoolMatrix":
        return cls(nrows, ncols, np.zeros(ncols + 1, _INDEX), np.zeros(0, _INDEX))

    @classmethod
    def identity(cls, n: int) -> "SparseBoolMatrix":
        return cls(n, n, np.arange(n + 1, dtype=_INDEX), np.arange(n, dtype=_INDEX))

    @classmethod
    def from_dense(cls, dense) -> "SparseBoolMatrix":
        a = np.asarray(dense)
        if a.ndim != 2:
            raise ShapeError(f"expected a 2-d array, got shape {a.shape}")
        nz = (a.astype(np.int64) % 2) != 0
        rows, cols = np.nonzero(nz.T)  # column-major scan
        colptr = np.zeros(a.shape[1] + 1, _INDEX)
        np.cumsum(np.bincount(rows, minlength=a.shape[1]), out=colptr[1:])
        return cls(a.shape[0], a.shape[1], colptr, cols)

    @classmethod
    def from_columns(cls, nrows: int, columns: Iterable[Iterable[int]]) -> "SparseBoolMatrix":
        """Build from per-column row lists that are already sorted and distinct."""
        cols = [np.asarray(c, dtype=_INDEX) for c in columns]
        colptr = np.zeros(len(cols) + 1, _INDEX)
        if cols:
            np.cumsum([len(c) for c in cols], out=colptr[1:])
            rowval = np.concatenate(cols) if colptr[-1] else np.zeros(0, _INDEX)
        else:
            rowval = np.zeros(0, _INDEX)
        return cls(nrows, len(cols), colptr, rowval)

    # -- inspection -----------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.colptr[-1])

    def column(self, j: int) -> np.ndarray:
        return self.rowval[self.colptr[j]:self.colptr[j + 1]]

    def column_counts(self) -> np.ndarray:
        return np.diff(self.colptr)

    def column_indices(self) -> np.ndarray:
        """Column index of every stored entry, aligned with ``rowval``."""
        return np.repeat(np.arange(self.ncols, dtype=_INDEX), self.column_counts())

    def lows(self) -> np.ndarray:
        """Lowest nonzero row of every column, ``-1`` for zero columns."""
        counts = self.column_counts()
        out = np.full(self.ncols, -1, _INDEX)
        nz = counts > 0
        out[nz] = self.rowval[self.colptr[1:][nz] - 1]
        return out

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.nrows, self.ncols), dtype=np.uint8)
        a[self.rowval, self.column_indices()] = 1
        return a

    def triplets(self) -> list[tuple[int, int]]:
        return list(zip(self.rowval.tolist(), self.column_indices().tolist()))

    def is_zero(self) -> bool:
        return self.nnz == 0

    def check(self) -> None:
        """Raise :class:`StructureError` unless the CSC invariants hold."""
        cp, rv = self.colptr, self.rowval
        if cp.shape != (self.ncols + 1,):
            raise StructureError("colptr must have length ncols+1")
        if cp[0] != 0 or cp[-1] != rv.shape[0]:
            raise StructureError("colptr must start at 0 and end at len(rowval)")
        if np.any(np.diff(cp) < 0):
            raise StructureError("colptr must be nondecreasing")
        if rv.size:
            if rv.min() < 0 or rv.max() >= self.nrows:
                raise StructureError("row index out of range")
            steps = np.diff(rv)
            starts = np.zeros(rv.size, dtype=bool)
            starts[cp[:-1][np.diff(cp) > 0]] = True
            if np.any(steps[~starts[1:]] <= 0):
                raise StructureError("row indices must strictly increase within a column")

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseBoolMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.colptr, other.colptr)
            and np.array_equal(self.rowval, other.rowval)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"SparseBoolMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"

    # -- slicing --------------------------------------------------------

    def select_columns(self, cols) -> "SparseBoolMatrix":
        cols = np.asarray(cols, dtype=_INDEX)
        starts = self.colptr[cols]
        counts = self.colptr[cols + 1] - starts
        colptr = np.zeros(cols.size + 1, _INDEX)
        np.cumsum(counts, out=colptr[1:])
        total = int(colptr[-1])
        if total == 0:
            return SparseBoolMatrix(self.nrows, cols.size, colptr, np.zeros(0, _INDEX))
        offs = np.arange(total, dtype=_INDEX) - np.repeat(colptr[:-1], counts)
        rowval = self.rowval[np.repeat(starts, counts) + offs]
        return SparseBoolMatrix(self.nrows, cols.size, colptr, rowval)

    def submatrix(self, rows, cols) -> "SparseBoolMatrix":
        """Rows and columns picked (and ordered) by the given index arrays."""
        rows = np.asarray(rows, dtype=_INDEX)
        cols = np.asarray(cols, dtype=_INDEX)
        sub = self.select_columns(cols)
        rowmap = np.full(self.nrows, -1, _INDEX)
        rowmap[rows] = np.arange(rows.size, dtype=_INDEX)
        newrows = rowmap[sub.rowval]
        keep = newrows >= 0
        colidx = sub.column_indices()[keep]
        newrows = newrows[keep]
        monotone = rows.size < 2 or bool(np.all(np.diff(rows) > 0))
        if not monotone:
            order = np.lexsort((newrows, colidx))
            newrows, colidx = newrows[order], colidx[order]
        return _from_sorted_entries(rows.size, cols.size, newrows, colidx)

    def permute(self, row_order, col_order) -> "SparseBoolMatrix":
        """``M[row_order][:, col_order]``: new row ``a`` is old row ``row_order[a]``."""
        return self.submatrix(row_order, col_order)

    def transpose(self) -> "SparseBoolMatrix":
        cols = self.column_indices()
        order = np.lexsort((cols, self.rowval))
        return _from_sorted_entries(self.ncols, self.nrows, cols[order], self.rowval[order])

    @property
    def T(self) -> "SparseBoolMatrix":
        return self.transpose()


def _from_sorted_entries(nrows, ncols, rows, cols) -> SparseBoolMatrix:
    """CSC from entries already sorted column-major with no duplicates."""
    colptr = np.zeros(ncols + 1, _INDEX)
    if rows.size:
        np.cumsum(np.bincount(cols, minlength=ncols), out=colptr[1:])
    return SparseBoolMatrix(nrows, ncols, colptr, np.asarray(rows, dtype=_INDEX))


def _canonical(nrows: int, ncols: int, rows: np.ndarray, cols: np.ndarray) -> SparseBoolMatrix:
    """Sort entries column-major and cancel duplicates in pairs."""
    if rows.size == 0:
        return SparseBoolMatrix.zeros(nrows, ncols)
    keys = cols.astype(_INDEX) * max(nrows, 1) + rows.astype(_INDEX)
    keys.sort(kind="stable")
    # runs of equal keys survive iff their length is odd
    boundary = np.flatnonzero(np.diff(keys)) + 1
    starts = np.concatenate(([0], boundary))
    lengths = np.diff(np.concatenate((starts, [keys.size])))
    kept = keys[starts[lengths % 2 == 1]]
    return _from_sorted_entries(nrows, ncols, kept % max(nrows, 1), kept // max(nrows, 1))


# -- operations ---------------------------------------------------------


def matrix_from_triplets(nrows: int, ncols: int, entries) -> SparseBoolMatrix:
    """Canonical matrix from ``(row, col)`` pairs; repeated pairs cancel mod 2."""
    arr = np.asarray(list(entries) if not isinstance(entries, np.ndarray) else entries,
                     dtype=_INDEX).reshape(-1, 2)
    rows, cols = arr[:, 0], arr[:, 1]
    bad = (rows < 0) | (rows >= nrows) | (cols < 0) | (cols >= ncols)
    if np.any(bad):
        r, c = arr[np.argmax(bad)]
        raise IndexRangeError(f"entry ({r}, {c}) outside a {nrows}x{ncols} matrix")
    return _canonical(nrows, ncols, rows, cols)


def gf2_add(a: SparseBoolMatrix, b: SparseBoolMatrix) -> SparseBoolMatrix:
    if a.shape != b.shape:
        raise ShapeError(f"cannot add {a.shape} and {b.shape}")
    rows = np.concatenate((a.rowval, b.rowval))
    cols = np.concatenate((a.column_indices(), b.column_indices()))
    return _canonical(a.nrows, a.ncols, rows, cols)


def prodsum(d: Optional[SparseBoolMatrix], c: SparseBoolMatrix, e: SparseBoolMatrix,
            lo: int = 0, hi: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """Columns ``lo:hi`` of ``d + c @ e`` as raw (counts, rowval) arrays."""
    if d is None:
        d = SparseBoolMatrix.zeros(c.nrows, e.ncols)
    hi = e.ncols if hi is None else hi
    return _jit.prodsum_columns(lo, hi, c.nrows, d.colptr, d.rowval,
                                c.colptr, c.rowval, e.colptr, e.rowval)


def gf2_multiply(a: SparseBoolMatrix, b: SparseBoolMatrix) -> SparseBoolMatrix:
    if a.ncols != b.nrows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    counts, rowval = prodsum(None, a, b)
    colptr = np.zeros(b.ncols + 1, _INDEX)
    np.cumsum(counts, out=colptr[1:])
    return SparseBoolMatrix(a.nrows, b.ncols, colptr, rowval)


def is_unit_upper_triangular(a: SparseBoolMatrix) -> bool:
    if a.nrows != a.ncols:
        return False
    return bool(np.array_equal(a.lows(), np.arange(a.ncols)))


def upper_tri_solve(a: SparseBoolMatrix, b: SparseBoolMatrix) -> SparseBoolMatrix:
    """Solve ``a @ X = b`` for unit upper-triangular ``a`` by back-substitution."""
    if not is_unit_upper_triangular(a):
        raise StructureError("left operand must be square, upper-triangular, with unit diagonal")
    if a.ncols != b.nrows:
        raise ShapeError(f"cannot solve {a.shape} against {b.shape}")
    counts, rowval = _jit.unit_upper_solve(a.nrows, a.colptr, a.rowval,
                                           b.colptr, b.rowval, b.ncols)
    colptr = np.zeros(b.ncols + 1, _INDEX)
    np.cumsum(counts, out=colptr[1:])
    return SparseBoolMatrix(a.nrows, b.ncols, colptr, rowval)


def low(m: SparseBoolMatrix, j: int) -> Optional[int]:
    """Row of the lowest nonzero in column ``j``; ``None`` for a zero column."""
    if not 0 <= j < m.ncols:
        raise IndexRangeError(f"column {j} outside 0..{m.ncols - 1}")
    start, stop = m.colptr[j], m.colptr[j + 1]
    return int(m.rowval[stop - 1]) if stop > start else None


def antitranspose(m: SparseBoolMatrix) -> SparseBoolMatrix:
    """Transpose across the anti-diagonal: out[i, j] = m[ncols-1-j, nrows-1-i]."""
    rows = m.ncols - 1 - m.column_indices()
    cols = m.nrows - 1 - m.rowval
    order = np.lexsort((rows, cols))
    return _from_sorted_entries(m.ncols, m.nrows, rows[order], cols[order])


# -- pivots and decompositions -------------------------------------------


@dataclass(frozen=True)
class PivotSet:
    """Set of (row, column) pivots with distinct rows and distinct columns."""

    pairs: frozenset

    def __post_init__(self):
        pairs = frozenset((int(r), int(c)) for r, c in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        rows = [r for r, _ in pairs]
        cols = [c for _, c in pairs]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise StructureError("pivot rows and columns must be pairwise distinct")

    @classmethod
    def from_lows(cls, lows) -> "PivotSet":
        lows = np.asarray(lows)
        cols = np.flatnonzero(lows >= 0)
        return cls(frozenset(zip(lows[cols].tolist(), cols.tolist())))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs, key=lambda p: (p[1], p[0])))

    def __contains__(self, item) -> bool:
        return tuple(item) in self.pairs

    def rows(self) -> set:
        return {r for r, _ in self.pairs}

    def columns(self) -> set:
        return {c for _, c in self.pairs}

    def by_row(self) -> dict:
        return {r: c for r, c in self.pairs}

    def by_column(self) -> dict:
        return {c: r for r, c in self.pairs}


@dataclass
class ReductionResult:
    """Outcome ``D V = R`` of a reduction.

    ``mode`` is ``"homology"`` or ``"cohomology"``; in cohomology mode the
    matrices describe the antitransposed input and ``pivots`` has already been
    mapped back to the original (row, column) frame. ``row_order`` and
    ``col_order``, when present, record the permutation the backend applied
    before reducing, so ``R`` and ``V`` refer to ``D.permute(row_order, col_order)``.
    """

    R: SparseBoolMatrix
    V: SparseBoolMatrix
    pivots: PivotSet
    mode: str = "homology"
    row_order: Optional[np.ndarray] = None
    col_order: Optional[np.ndarray] = None
    log: dict = field(default_factory=dict)

    def reduced_input(self, d: SparseBoolMatrix) -> SparseBoolMatrix:
        """The matrix this result decomposes, given the original input ``d``."""
        m = d
        if self.row_order is not None or self.col_order is not None:
            ro = np.arange(d.nrows) if self.row_order is None else self.row_order
            co = np.arange(d.ncols) if self.col_order is None else self.col_order
            m = d.permute(ro, co)
        if self.mode == "cohomology":
            m = antitranspose(m)
        return m


def is_reduced(r: SparseBoolMatrix) -> bool:
    lows = r.lows()
    lows = lows[lows >= 0]
    return lows.size == np.unique(lows).size
