"""Loading point clouds and distance matrices, and ranking distances."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DataError, ParseError
from .kernels import sortperm


@dataclass(frozen=True)
class PointCloud:
    """``coords`` is dims x npoints; one label per point."""

    coords: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coords, dtype=np.float64))
        if not np.all(np.isfinite(c)):
            raise DataError("point coordinates must be finite")
        labels = tuple(self.labels) or tuple(str(i + 1) for i in range(c.shape[1]))
        if len(labels) != c.shape[1]:
            raise DataError(f"{len(labels)} labels for {c.shape[1]} points")
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "labels", labels)

    @property
    def dims(self) -> int:
        return self.coords.shape[0]

    @property
    def npoints(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    d: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DataError(f"distance matrix must be square, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise DataError("distance matrix entries must be finite")
        if np.any(d < 0):
            raise DataError("distances must be nonnegative")
        if np.any(np.diag(d) != 0):
            raise DataError("distance matrix diagonal must be zero")
        if not np.array_equal(d, d.T):
            i, j = np.argwhere(d != d.T)[0]
            raise DataError(f"distance matrix not symmetric at ({i + 1}, {j + 1})")
        labels = tuple(self.labels) or tuple(str(i + 1) for i in range(d.shape[0]))
        if len(labels) != d.shape[0]:
            raise DataError(f"{len(labels)} labels for {d.shape[0]} points")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class CanonicalFiltration:
    """Integer ranks of the pairwise distances.

    ``rank[i, j]`` is in ``1..nvals`` for every included pair and 0 on the
    diagonal and for pairs beyond the threshold. ``value_of_rank[0]`` is the
    vertex birth value 0.0; ``value_of_rank[r]`` recovers the distance of rank r.
    """

    rank: np.ndarray
    nvals: int
    value_of_rank: np.ndarray
    labels: tuple = field(default=())

    @property
    def m(self) -> int:
        return self.rank.shape[0]


def _read_rows(path) -> list[list[str]]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            return [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"{path} is not valid UTF-8") from exc


def _parse_float(cell: str, row: int, col: int, path) -> float:
    try:
        x = float(cell)
    except ValueError:
        raise ParseError(f"cannot parse {cell!r} as a number", row=row, column=col, path=path) from None
    if not math.isfinite(x):
        raise ParseError(f"non-finite value {cell!r}", row=row, column=col, path=path)
    return x


def read_point_cloud_csv(path, rowsare: str = "points", columns: Optional[Sequence[int]] = None,
                         header: bool = False, label_column: Optional[int] = None) -> PointCloud:
    """Read a CSV point cloud.

    ``columns`` and ``label_column`` are one-based file column numbers. With
    ``rowsare="points"`` each selected row is a point; with ``"dimensions"``
    each row is a coordinate axis and the selected columns are points.
    """
    if rowsare not in ("points", "dimensions"):
        raise DataError(f"rowsare must be 'points' or 'dimensions', got {rowsare!r}")
    rows = _read_rows(path)
    first = 1
    if header and rows:
        rows = rows[1:]
        first = 2
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    for k, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", row=first + k, path=path)
    cols = list(columns) if columns else [c for c in range(1, width + 1) if c != label_column]
    for c in cols + ([label_column] if label_column else []):
        if not 1 <= c <= width:
            raise DataError(f"column {c} outside 1..{width}")
    data = np.array([[_parse_float(row[c - 1].strip(), first + k, c, path) for c in cols]
                     for k, row in enumerate(rows)])
    raw_labels = [row[label_column - 1] for row in rows] if label_column else []
    if rowsare == "points":
        labels = sanitize_labels(raw_labels) if raw_labels else ()
        return PointCloud(data.T, labels)
    if raw_labels:
        raise DataError("label_column is only meaningful when rows are points")
    return PointCloud(data)


def read_distance_matrix_csv(path) -> DistanceMatrix:
    """Full symmetric m x m grid of reals, no header."""
    rows = _read_rows(path)
    m = len(rows)
    for k, row in enumerate(rows):
        if len(row) != m:
            raise ParseError(f"expected {m} fields in a {m}x{m} matrix, found {len(row)}",
                             row=k + 1, path=path)
    d = np.array([[_parse_float(cell.strip(), k + 1, c + 1, path) for c, cell in enumerate(row)]
                  for k, row in enumerate(rows)], dtype=np.float64).reshape(m, m)
    return DistanceMatrix(d)


def sanitize_labels(raw: Sequence[str], fallback_base: int = 1) -> list[str]:
    """Replace labels that are not pure ASCII with their one-based row number."""
    out = []
    for k, label in enumerate(raw):
        text = str(label)
        out.append(text if text.isascii() else str(fallback_base + k))
    return out


def latlon2euc(latlon, rowsare: str = "points") -> np.ndarray:
    """Degrees latitude/longitude to points on the unit sphere, 3 x npoints.

    Axis convention: x = cos(lat)cos(lon), y = cos(lat)sin(lon), z = sin(lat).
    """
    a = np.asarray(latlon, dtype=np.float64)
    if rowsare == "dimensions":
        a = a.T
    elif rowsare != "points":
        raise DataError(f"rowsare must be 'points' or 'dimensions', got {rowsare!r}")
    a = np.atleast_2d(a)
    if a.shape[1] != 2:
        raise DataError(f"expected latitude/longitude pairs, got shape {a.shape}")
    lat, lon = np.radians(a[:, 0]), np.radians(a[:, 1])
    if np.any(np.abs(a[:, 0]) > 90):
        raise DataError("latitude outside [-90, 90]")
    return np.vstack((np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)))


def distance_matrix(pc: PointCloud) -> DistanceMatrix:
    """Euclidean pairwise distances."""
    if pc.npoints < 1:
        raise DataError("need at least one point")
    if pc.npoints == 1:
        return DistanceMatrix(np.zeros((1, 1)), pc.labels)
    return DistanceMatrix(squareform(pdist(pc.coords.T)), pc.labels)


def order_canonical_form(d: DistanceMatrix, upperlim: float = math.inf, strict: bool = False,
                         sort: str = "radix") -> CanonicalFiltration:
    """Rank the strictly-upper-triangle distances, equal values sharing a rank.

    Pairs farther apart than ``upperlim`` (or at exactly ``upperlim`` when
    ``strict``) are excluded and get rank 0.
    """
    m = d.m
    iu, ju = np.triu_indices(m, k=1)
    vals = d.d[iu, ju]
    keep = vals < upperlim if strict else vals <= upperlim
    iu, ju, vals = iu[keep], ju[keep], vals[keep]
    rank = np.zeros((m, m), dtype=np.int64)
    if vals.size == 0:
        return CanonicalFiltration(rank, 0, np.zeros(1), d.labels)
    perm = sortperm(vals, sort)
    ordered = vals[perm]
    newclass = np.empty(ordered.size, dtype=bool)
    newclass[0] = True
    newclass[1:] = ordered[1:] != ordered[:-1]
    sorted_rank = np.cumsum(newclass)
    ranks = np.empty_like(sorted_rank)
    ranks[perm] = sorted_rank
    rank[iu, ju] = ranks
    rank[ju, iu] = ranks
    value_of_rank = np.concatenate(([0.0], ordered[newclass]))
    return CanonicalFiltration(rank, int(sorted_rank[-1]), value_of_rank, d.labels)
