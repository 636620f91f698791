"""Filtered Vietoris-Rips complexes and their boundary operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import SparseBoolMatrix
from .errors import DataError, IndexRangeError
from .ingest import CanonicalFiltration
from .kernels import SegmentedVector, integers_in_same_order_by_column


@dataclass(frozen=True)
class Simplex:
    vertices: tuple
    birth: int
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass
class FilteredComplex:
    """Simplices grouped by dimension, each block in filtration order.

    ``simplices[k]`` is an ``(n_k, k+1)`` array of increasing vertex indices
    and ``births[k]`` their birth ranks; ``values[rank]`` is the real
    filtration value of a rank. Within a block simplices are sorted by birth
    rank, ties broken lexicographically. Homology is reported in dimensions
    ``0..maxdim``; the block of dimension ``maxdim+1`` (if present) exists so
    that the deaths of top-dimensional classes can be found.
    """

    simplices: list
    births: list
    values: np.ndarray
    maxdim: int
    labels: tuple = ()
    _keys: dict = field(default_factory=dict, repr=False)

    @property
    def top_dim(self) -> int:
        return len(self.simplices) - 1

    @property
    def nvertices(self) -> int:
        return self.ncells(0)

    def ncells(self, dim: int) -> int:
        if 0 <= dim <= self.top_dim:
            return self.simplices[dim].shape[0]
        return 0

    def __len__(self) -> int:
        return sum(s.shape[0] for s in self.simplices)

    def simplex(self, dim: int, i: int) -> Simplex:
        rank = int(self.births[dim][i])
        return Simplex(tuple(int(v) for v in self.simplices[dim][i]), rank, float(self.values[rank]))

    def value(self, dim: int, i: int) -> float:
        return float(self.values[self.births[dim][i]])

    def keys(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        """Sorted lexicographic keys of a block and the positions they came from."""
        if dim not in self._keys:
            self._keys[dim] = _sorted_keys(self.simplices[dim], self.nvertices)
        return self._keys[dim]

    def index_of(self, vertices: Sequence[int]) -> int:
        """Position of a simplex inside its dimension block."""
        dim = len(vertices) - 1
        if dim > self.top_dim:
            raise KeyError(tuple(vertices))
        skeys, pos = self.keys(dim)
        key = _encode(np.asarray([sorted(vertices)], dtype=np.int64), self.nvertices)
        at = int(np.searchsorted(skeys, key[0]))
        if at >= skeys.size or skeys[at] != key[0]:
            raise KeyError(tuple(vertices))
        return int(pos[at])

    def check(self) -> None:
        """Raise :class:`DataError` unless the complex is closed and filtration-ordered."""
        for k in range(self.top_dim + 1):
            s, b = self.simplices[k], self.births[k]
            if s.shape[0] and np.any(np.diff(s, axis=1) <= 0):
                raise DataError(f"dimension {k}: vertices must be strictly increasing")
            order = np.lexsort(tuple(s[:, c] for c in range(k, -1, -1)) + (b,))
            if not np.array_equal(order, np.arange(s.shape[0])):
                raise DataError(f"dimension {k}: block is not in (birth, lexicographic) order")
            if k == 0:
                continue
            for r in range(k + 1):
                faces = np.delete(s, r, axis=1)
                for face, birth in zip(faces, b):
                    try:
                        at = self.index_of(face)
                    except KeyError:
                        raise DataError(f"face {tuple(face)} missing") from None
                    if self.births[k - 1][at] > birth:
                        raise DataError(f"face {tuple(face)} born after its cofacet")

    @classmethod
    def from_simplices(cls, simplices: Iterable, maxdim: Optional[int] = None,
                       labels: Sequence[str] = ()) -> "FilteredComplex":
        """Build from ``(vertices, value)`` pairs describing a closed complex.

        Vertices are relabelled to ``0..n-1`` in sorted order. ``maxdim``
        defaults to the top dimension present.
        """
        items = [(tuple(sorted(int(v) for v in verts)), float(val)) for verts, val in simplices]
        if not items:
            return cls([np.zeros((0, 1), np.int64)], [np.zeros(0, np.int64)], np.zeros(1), 0)
        names = sorted({v for verts, _ in items for v in verts})
        relabel = {v: i for i, v in enumerate(names)}
        values = np.unique([val for _, val in items])
        top = max(len(verts) for verts, _ in items) - 1
        blocks = [[] for _ in range(top + 1)]
        for verts, val in items:
            blocks[len(verts) - 1].append(([relabel[v] for v in verts],
                                           int(np.searchsorted(values, val))))
        simp, births = [], []
        for k, block in enumerate(blocks):
            s = np.array([v for v, _ in block], dtype=np.int64).reshape(-1, k + 1)
            b = np.array([r for _, r in block], dtype=np.int64)
            order = np.lexsort(tuple(s[:, c] for c in range(k, -1, -1)) + (b,))
            simp.append(s[order])
            births.append(b[order])
        fc = cls(simp, births, values, top if maxdim is None else int(maxdim), tuple(labels))
        fc.check()
        return fc


def _encode(s: np.ndarray, m: int) -> np.ndarray:
    m = max(m, 1)
    k1 = s.shape[1]
    if float(m) ** k1 >= 2.0 ** 62:
        raise DataError(f"{m} vertices is too many to index {k1 - 1}-simplices")
    key = np.zeros(s.shape[0], dtype=np.int64)
    for c in range(k1):
        key = key * m + s[:, c]
    return key


def _sorted_keys(s: np.ndarray, m: int):
    key = _encode(s, m)
    pos = np.argsort(key, kind="stable")
    return key[pos], pos


def _cliques(adj_upper: list[int], top: int) -> list[list[tuple]]:
    """All cliques with at most top+1 vertices, grouped by dimension."""
    out = [[] for _ in range(top + 1)]
    stack = [((v,), adj_upper[v]) for v in range(len(adj_upper) - 1, -1, -1)]
    while stack:
        verts, common = stack.pop()
        out[len(verts) - 1].append(verts)
        if len(verts) > top:
            continue
        mask = common
        while mask:
            lowbit = mask & -mask
            u = lowbit.bit_length() - 1
            mask ^= lowbit
            stack.append((verts + (u,), common & adj_upper[u]))
    return out


def build_vr_complex(filt: CanonicalFiltration, maxdim: int = 1) -> FilteredComplex:
    """Vietoris-Rips complex on every included edge, through dimension maxdim+1.

    A simplex is born at the largest rank among its edges; vertices are born
    at rank 0.
    """
    if maxdim < 0:
        raise DataError("maxdim must be nonnegative")
    rank = filt.rank
    m = rank.shape[0]
    top = maxdim + 1
    adj_upper = []
    for v in range(m):
        nbrs = np.flatnonzero(rank[v, v + 1:] > 0) + v + 1
        mask = 0
        for u in nbrs.tolist():
            mask |= 1 << u
        adj_upper.append(mask)
    groups = _cliques(adj_upper, top)
    simp, births = [], []
    for k in range(top + 1):
        s = np.array(sorted(groups[k]), dtype=np.int64).reshape(-1, k + 1)
        if k == 0:
            b = np.zeros(s.shape[0], np.int64)
        else:
            b = np.zeros(s.shape[0], np.int64)
            for a, c in combinations(range(k + 1), 2):
                np.maximum(b, rank[s[:, a], s[:, c]], out=b)
        order = np.lexsort(tuple(s[:, c] for c in range(k, -1, -1)) + (b,))
        simp.append(s[order])
        births.append(b[order])
    return FilteredComplex(simp, births, np.asarray(filt.value_of_rank, dtype=np.float64),
                           maxdim, tuple(filt.labels))


def facet_rows(fc: FilteredComplex, dim: int) -> np.ndarray:
    """``(n_dim, dim+1)`` positions of each simplex's facets in block ``dim-1``,
    in vertex-deletion order (not sorted)."""
    s = fc.simplices[dim]
    skeys, pos = fc.keys(dim - 1)
    out = np.empty((s.shape[0], dim + 1), dtype=np.int64)
    for r in range(dim + 1):
        faces = np.delete(s, r, axis=1)
        key = _encode(faces, fc.nvertices)
        at = np.searchsorted(skeys, key)
        if s.shape[0] and (np.any(at >= skeys.size) or np.any(skeys[np.minimum(at, skeys.size - 1)] != key)):
            raise DataError(f"dimension {dim}: a facet is missing from the complex")
        out[:, r] = pos[at] if s.shape[0] else 0
    return out


def boundary_operator(fc: FilteredComplex, dim: int, row_sort: str = "range") -> SparseBoolMatrix:
    """Boundary matrix from ``dim``-simplices (columns) to ``(dim-1)``-simplices (rows).

    ``row_sort`` picks how row indices are put in order within each column:
    ``"range"`` (range-limited counting ranks), ``"full"`` (full-range counting
    ranks), or ``"numpy"``.
    """
    if not 1 <= dim <= fc.top_dim:
        raise IndexRangeError(f"boundary dimension {dim} outside 1..{fc.top_dim}")
    nrows, ncols = fc.ncells(dim - 1), fc.ncells(dim)
    rows = facet_rows(fc, dim)
    colptr = np.arange(ncols + 1, dtype=np.int64) * (dim + 1)
    if row_sort == "numpy":
        rowval = np.sort(rows, axis=1).ravel()
    elif row_sort in ("range", "full"):
        flat = rows.ravel()
        z = integers_in_same_order_by_column(SegmentedVector(colptr, flat + 1), max(nrows, 1),
                                             range_limited=(row_sort == "range"))
        rowval = np.empty_like(flat)
        rowval[z] = flat
    else:
        raise ValueError(f"unknown row_sort {row_sort!r}")
    return SparseBoolMatrix(nrows, ncols, colptr, rowval)
