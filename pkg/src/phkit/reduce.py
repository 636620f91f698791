"""Standard persistence reductions and persistence-diagram extraction.

Working columns are held as Python integers used as GF(2) bitsets: adding
two columns is one XOR, and the lowest nonzero row is ``bit_length() - 1``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import PivotSet, ReductionResult, SparseBoolMatrix, antitranspose
from .errors import UnsupportedModeError
from .simplicial import FilteredComplex, boundary_operator

BACKENDS = ("col", "row", "morse")


# --------------------------------------------------------------------------
# bitset conversion
# --------------------------------------------------------------------------


def to_bitsets(m: SparseBoolMatrix) -> list[int]:
    cols = []
    cp, rv = m.colptr.tolist(), m.rowval.tolist()
    for j in range(m.ncols):
        x = 0
        for r in rv[cp[j]:cp[j + 1]]:
            x |= 1 << r
        cols.append(x)
    return cols


def bitset_rows(x: int, nbits: int) -> np.ndarray:
    if x == 0:
        return np.zeros(0, np.int64)
    if x.bit_count() <= 16:
        rows = []
        while x:
            lowbit = x & -x
            rows.append(lowbit.bit_length() - 1)
            x ^= lowbit
        return np.array(rows, dtype=np.int64)
    raw = np.frombuffer(x.to_bytes((nbits + 7) // 8, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(raw, bitorder="little")).astype(np.int64)


def from_bitsets(nrows: int, cols: Sequence[int]) -> SparseBoolMatrix:
    return SparseBoolMatrix.from_columns(nrows, (bitset_rows(x, nrows) for x in cols))


def rows_to_bitset(rows) -> int:
    x = 0
    for r in np.asarray(rows).tolist():
        x |= 1 << r
    return x


# --------------------------------------------------------------------------
# Algorithms 1 and 2
# --------------------------------------------------------------------------


def _finish(d: SparseBoolMatrix, R: list[int], V: list[int]) -> ReductionResult:
    Rm = from_bitsets(d.nrows, R)
    return ReductionResult(Rm, from_bitsets(d.ncols, V), PivotSet.from_lows(Rm.lows()))


def ph_col(d: SparseBoolMatrix, cleared: Optional[Mapping[int, int]] = None) -> ReductionResult:
    """Column algorithm: left to right, add the earlier column sharing the
    current low until the low is new or the column vanishes.

    ``cleared`` maps column indices known to reduce to zero to the chain
    (bitset) that kills them; those columns are skipped.
    """
    cleared = cleared or {}
    R = to_bitsets(d)
    V = [1 << j for j in range(d.ncols)]
    owner: dict[int, int] = {}
    for i in range(d.ncols):
        if i in cleared:
            R[i], V[i] = 0, cleared[i]
            continue
        x, v = R[i], V[i]
        while x:
            lo = x.bit_length() - 1
            j = owner.get(lo)
            if j is None:
                owner[lo] = i
                break
            x ^= R[j]
            v ^= V[j]
        R[i], V[i] = x, v
    return _finish(d, R, V)


def ph_row(d: SparseBoolMatrix, cleared: Optional[Mapping[int, int]] = None) -> ReductionResult:
    """Row algorithm: bottom row first, clear every column whose low is that
    row against the leftmost such column."""
    cleared = cleared or {}
    R = to_bitsets(d)
    V = [1 << j for j in range(d.ncols)]
    buckets: dict[int, list[int]] = defaultdict(list)
    for j in range(d.ncols):
        if j in cleared:
            R[j], V[j] = 0, cleared[j]
        elif R[j]:
            buckets[R[j].bit_length() - 1].append(j)
    for i in range(d.nrows - 1, -1, -1):
        indices = buckets.pop(i, None)
        if not indices or len(indices) == 1:
            continue
        indices.sort()
        p = indices[0]
        rp, vp = R[p], V[p]
        for j in indices[1:]:
            R[j] ^= rp
            V[j] ^= vp
            if R[j]:
                buckets[R[j].bit_length() - 1].append(j)
    return _finish(d, R, V)


# --------------------------------------------------------------------------
# clearing
# --------------------------------------------------------------------------


def clearing_chains(previous: ReductionResult) -> dict[int, int]:
    """Columns of the next block that the previous block's pivots clear.

    Every nonzero column of ``previous.R`` with low ``j`` lies in the kernel of
    the next block and has ``j`` as its last entry, so it is a valid
    upper-unitriangular V-column for next-block column ``j``.
    """
    chains = {}
    R = previous.R
    lows = R.lows()
    for c in np.flatnonzero(lows >= 0).tolist():
        chains[int(lows[c])] = rows_to_bitset(R.column(c))
    return chains


def clear_compress(boundaries: Mapping[int, SparseBoolMatrix],
                   pivots: Mapping[int, PivotSet]) -> dict[int, SparseBoolMatrix]:
    """Zero the columns of each ``boundaries[k]`` indexed by a pivot row of
    the dimension k+1 reduction, then drop them from the column set.

    Returns the cleared matrices (same shapes, cleared columns zero). The
    diagram is unchanged because cleared columns always reduce to zero.
    """
    out = {}
    for k, d in boundaries.items():
        rows = pivots[k + 1].rows() if (k + 1) in pivots else set()
        if not rows:
            out[k] = d
            continue
        keep = np.array([j not in rows for j in range(d.ncols)], dtype=bool)
        counts = np.where(keep, np.diff(d.colptr), 0)
        sub = d.select_columns(np.flatnonzero(keep))
        colptr = np.zeros(d.ncols + 1, np.int64)
        np.cumsum(counts, out=colptr[1:])
        out[k] = SparseBoolMatrix(d.nrows, d.ncols, colptr, sub.rowval)
    return out


# --------------------------------------------------------------------------
# diagrams
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PersistencePair:
    dim: int
    birth: float
    death: float
    birth_simplex: Optional[tuple] = None
    death_simplex: Optional[tuple] = None

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.death)

    def key(self) -> tuple:
        return (self.dim, self.birth, self.death)


@dataclass
class PersistenceDiagram:
    pairs: list
    maxdim: int
    reductions: dict = field(default_factory=dict, repr=False, compare=False)
    generators: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.pairs = sorted(self.pairs, key=lambda p: (p.key(), p.birth_simplex or (), p.death_simplex or ()))

    def keys(self) -> list[tuple]:
        return [p.key() for p in self.pairs]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return self.maxdim == other.maxdim and self.keys() == other.keys()

    def in_dim(self, dim: int) -> list:
        return [p for p in self.pairs if p.dim == dim]

    def __len__(self) -> int:
        return len(self.pairs)

    def betti(self, dim: int, eps: float) -> int:
        return betti_curve(self, dim, eps)


def betti_curve(pd: PersistenceDiagram, dim: int, eps: float) -> int:
    """Number of bars of dimension ``dim`` alive at ``eps`` (birth <= eps < death)."""
    return sum(1 for p in pd.pairs if p.dim == dim and p.birth <= eps < p.death)


# --------------------------------------------------------------------------
# driver
# --------------------------------------------------------------------------


class _NullTimer:
    def stage(self, name):
        return nullcontext()


def _block_orders(fc: FilteredComplex, vertex_weights, sort: str, timer) -> Optional[list]:
    if vertex_weights is None:
        return None
    from .morse import filtration_order

    w = np.asarray(vertex_weights)
    orders = []
    with timer.stage("sort"):
        for k in range(fc.top_dim + 1):
            simplex_w = w[fc.simplices[k]].sum(axis=1) if fc.ncells(k) else np.zeros(0, w.dtype)
            orders.append(filtration_order(fc.births[k], simplex_w, sort))
    return orders


def _reduce_block(d: SparseBoolMatrix, row_births, col_births, backend: str,
                  cleared: dict, workers: int, timer) -> ReductionResult:
    if backend in ("col", "row"):
        with timer.stage("reduce"):
            return ph_col(d, cleared) if backend == "col" else ph_row(d, cleared)
    if backend == "morse":
        from .morse import morse_reduce_matrix

        return morse_reduce_matrix(d, row_births, col_births, cleared=cleared,
                                   workers=workers, timer=timer)
    raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")


def reduce_complex(fc: FilteredComplex, backend: str = "col", *, cohomology: bool = False,
                   clear: bool = False, workers: int = 1, vertex_weights=None,
                   sort: str = "radix", row_sort: str = "range",
                   timer=None) -> dict[int, ReductionResult]:
    """Reduce every boundary block needed for dimensions ``0..fc.maxdim``.

    Returned pivots are always expressed in the complex's own (row, column)
    indexing, whatever permutation or antitransposition the backend used.
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    timer = timer or _NullTimer()
    top = min(fc.maxdim + 1, fc.top_dim)
    dims = list(range(1, top + 1))
    with timer.stage("complex"):
        boundaries = {k: boundary_operator(fc, k, row_sort) for k in dims}
    orders = _block_orders(fc, vertex_weights, sort, timer)

    results: dict[int, ReductionResult] = {}
    sequence = dims if cohomology else list(reversed(dims))
    previous = None
    for k in sequence:
        d = boundaries[k]
        row_births, col_births = fc.births[k - 1], fc.births[k]
        ro = co = None
        if orders is not None:
            ro, co = orders[k - 1], orders[k]
            d = d.permute(ro, co)
            row_births, col_births = row_births[ro], col_births[co]
        if cohomology:
            d = antitranspose(d)
            row_births, col_births = col_births[::-1], row_births[::-1]
        cleared = clearing_chains(previous) if (clear and previous is not None) else {}
        res = _reduce_block(d, row_births, col_births, backend, cleared, workers, timer)
        # map pivots back to the complex's indexing
        pairs = []
        for r, c in res.pivots.pairs:
            if cohomology:
                r, c = d.ncols - 1 - c, d.nrows - 1 - r
            if ro is not None:
                r, c = int(ro[r]), int(co[c])
            pairs.append((r, c))
        res.pivots = PivotSet(frozenset(pairs))
        res.mode = "cohomology" if cohomology else "homology"
        res.row_order, res.col_order = ro, co
        results[k] = res
        previous = res
    return results


def diagram_from_reductions(fc: FilteredComplex, results: Mapping[int, ReductionResult],
                            keep_zero: bool = False) -> PersistenceDiagram:
    """Finite pairs from pivots; infinite pairs from simplices that are
    neither a pivot row nor a nonzero reduced column."""
    maxdim = fc.maxdim
    births_of = {k: set() for k in range(fc.top_dim + 2)}
    deaths_of = {k: set() for k in range(fc.top_dim + 2)}
    pairs = []

    def simplex(k, i):
        return tuple(int(v) for v in fc.simplices[k][i])

    for k, res in results.items():
        for r, c in res.pivots.pairs:
            births_of[k - 1].add(r)
            deaths_of[k].add(c)
            if k - 1 > maxdim:
                continue
            if not keep_zero and fc.births[k - 1][r] == fc.births[k][c]:
                continue
            pairs.append(PersistencePair(k - 1, fc.value(k - 1, r), fc.value(k, c),
                                         simplex(k - 1, r), simplex(k, c)))
    for k in range(min(maxdim, fc.top_dim) + 1):
        for i in range(fc.ncells(k)):
            if i not in births_of[k] and i not in deaths_of[k]:
                pairs.append(PersistencePair(k, fc.value(k, i), math.inf, simplex(k, i), None))
    return PersistenceDiagram(pairs, maxdim, dict(results))


def persist(fc: FilteredComplex, backend: str = "col", *, cohomology: bool = False,
            clear: bool = False, keep_zero: bool = False, generators: bool = False,
            workers: int = 1, vertex_weights=None, sort: str = "radix",
            row_sort: str = "range", timer=None) -> PersistenceDiagram:
    """Persistence diagram of ``fc`` in dimensions ``0..fc.maxdim``.

    ``backend`` is ``"col"``, ``"row"`` or ``"morse"``. ``cohomology`` reduces
    antitransposed blocks in ascending dimension; ``clear`` skips columns
    already known to vanish. ``vertex_weights`` reorders simplices of equal
    birth (heavier first); it changes the work done, never the diagram.
    """
    timer = timer or _NullTimer()
    if generators and cohomology:
        raise UnsupportedModeError("generators require homology mode; cohomology reductions "
                                   "do not yield cycle representatives")
    results = reduce_complex(fc, backend, cohomology=cohomology, clear=clear, workers=workers,
                             vertex_weights=vertex_weights, sort=sort, row_sort=row_sort,
                             timer=timer)
    with timer.stage("extract"):
        pd = diagram_from_reductions(fc, results, keep_zero)
        if generators:
            shown = {(p.dim, p.birth_simplex) for p in pd.pairs}
            pd.generators = {key: g for key, g in extract_generators(results, fc).items()
                             if (key[0], tuple(int(v) for v in fc.simplices[key[0]][key[1]])) in shown}
    return pd


def persist_cohomology(fc: FilteredComplex, backend: str = "col", **kwargs) -> PersistenceDiagram:
    """Same diagram as :func:`persist`, computed from antitransposed blocks."""
    return persist(fc, backend, cohomology=True, **kwargs)


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Generator:
    """Cycle representing the bar born at ``birth_index`` in dimension ``dim``.

    ``cycle`` holds positions of ``dim``-simplices (a GF(2) chain with zero
    boundary). For bars that die, ``bounding_chain`` holds positions of
    ``dim+1``-simplices whose boundary has its lowest entry at the birth
    simplex; it is the V-column of the death simplex.
    """

    dim: int
    birth_index: int
    cycle: tuple
    death_index: Optional[int] = None
    bounding_chain: Optional[tuple] = None


def _v_column(res: ReductionResult, original_col: int) -> np.ndarray:
    co = res.col_order
    if co is None:
        return res.V.column(original_col).copy()
    inv = np.empty_like(co)
    inv[co] = np.arange(co.size)
    return np.sort(co[res.V.column(int(inv[original_col]))])


def extract_generators(results: Mapping[int, ReductionResult],
                       fc: FilteredComplex) -> dict[tuple, Generator]:
    """Generators keyed by ``(dim, birth simplex position)`` for every bar.

    V-columns of positive simplices are cycles; this only holds for homology
    reductions.
    """
    for res in results.values():
        if res.mode != "homology":
            raise UnsupportedModeError("generators cannot be read from a cohomology reduction")
    out = {}
    for k in range(min(fc.maxdim, fc.top_dim) + 1):
        deaths_here = results[k].pivots.columns() if k in results else set()
        killer = results[k + 1].pivots.by_row() if (k + 1) in results else {}
        for i in range(fc.ncells(k)):
            if i in deaths_here:
                continue
            cycle = (i,) if k == 0 else tuple(_v_column(results[k], i).tolist())
            j = killer.get(i)
            bounding = tuple(_v_column(results[k + 1], j).tolist()) if j is not None else None
            out[(k, i)] = Generator(k, i, cycle, j, bounding)
    return out
