"""Synthetic datasets, stage timing, and baseline-versus-optimized benchmark reports."""

from __future__ import annotations

import json
import math
import resource
import statistics
import sys
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.sparse import csgraph

from .core import SparseBoolMatrix
from .errors import BenchmarkMismatch, DataError
from .ingest import DistanceMatrix, PointCloud, distance_matrix, order_canonical_form
from .kernels import WeightInput, blockprodsum, column_weights
from .reduce import PersistenceDiagram, persist
from .simplicial import build_vr_complex

STAGES = ("ingest", "rank", "complex", "weights", "sort", "field", "schur", "reduce", "extract")
TOGGLES = ("radix_sort", "range_limited_counting", "parallel_weights",
           "parallel_blockprodsum", "clear_compress", "cohomology")
KINDS = ("circle", "sphere", "clusters", "random_metric", "grid")


# --------------------------------------------------------------------------
# datasets
# --------------------------------------------------------------------------


def generate_dataset(kind: str, n: int, seed: int = 0, *, jitter: float = 0.05, k: int = 2,
                     separation: float = 10.0, spread: float = 0.1,
                     dim: int = 2) -> Union[PointCloud, DistanceMatrix]:
    """Seeded synthetic input.

    circle: n evenly spaced points on the unit circle, each angle perturbed by
    ``jitter`` times a standard normal. sphere: n uniform points on the unit
    2-sphere. clusters: k Gaussian blobs of standard deviation ``spread``
    whose centres sit ``separation`` apart on a line. random_metric: shortest
    path closure of random positive edge weights (a distance matrix).
    grid: the first n points of a square integer lattice.
    """
    if n < 1:
        raise DataError("dataset size must be at least 1")
    rng = np.random.default_rng(seed)
    if kind == "circle":
        theta = 2 * np.pi * np.arange(n) / n + jitter * rng.standard_normal(n)
        return PointCloud(np.vstack((np.cos(theta), np.sin(theta))))
    if kind == "sphere":
        x = rng.standard_normal((3, n))
        return PointCloud(x / np.linalg.norm(x, axis=0))
    if kind == "clusters":
        if k < 1:
            raise DataError("need at least one cluster")
        which = np.arange(n) % k
        centres = np.zeros((dim, k))
        centres[0] = separation * np.arange(k)
        return PointCloud(centres[:, which] + spread * rng.standard_normal((dim, n)))
    if kind == "random_metric":
        w = rng.uniform(0.5, 1.5, (n, n))
        w = np.triu(w, 1)
        w = w + w.T
        d = csgraph.shortest_path(w, method="FW", directed=False)
        d = (d + d.T) / 2
        np.fill_diagonal(d, 0.0)
        return DistanceMatrix(d)
    if kind == "grid":
        side = math.ceil(math.sqrt(n))
        idx = np.arange(n)
        return PointCloud(np.vstack((idx % side, idx // side)).astype(float))
    raise DataError(f"unknown dataset kind {kind!r}; choose from {KINDS}")


# --------------------------------------------------------------------------
# timing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StageTiming:
    stage: str
    seconds: float
    nnz: int = 0

    def __post_init__(self):
        if self.seconds < 0:
            raise ValueError("stage time must be nonnegative")


class StageTimer:
    """Accumulates wall time per named stage. Nested stages are charged to
    the innermost one only, so stages never overlap."""

    def __init__(self):
        self.seconds: dict[str, float] = {}
        self.nnz: dict[str, int] = {}
        self._stack: list[list] = []

    @contextmanager
    def stage(self, name: str):
        if self._stack:
            outer = self._stack[-1]
            outer[1] += time.perf_counter() - outer[0]
        frame = [time.perf_counter(), 0.0]
        self._stack.append(frame)
        try:
            yield
        finally:
            now = time.perf_counter()
            self._stack.pop()
            self.seconds[name] = self.seconds.get(name, 0.0) + frame[1] + now - frame[0]
            if self._stack:
                self._stack[-1][0] = now

    def add_nnz(self, name: str, count: int) -> None:
        self.nnz[name] = self.nnz.get(name, 0) + int(count)

    def timings(self) -> list[StageTiming]:
        return [StageTiming(s, self.seconds[s], self.nnz.get(s, 0))
                for s in STAGES if s in self.seconds]


def calibrate_overhead(iterations: int = 20000) -> float:
    """Mean cost in seconds of entering and leaving one empty stage."""
    timer = StageTimer()
    t0 = time.perf_counter()
    for _ in range(iterations):
        with timer.stage("noop"):
            pass
    return (time.perf_counter() - t0) / iterations


# --------------------------------------------------------------------------
# pipeline
# --------------------------------------------------------------------------


@dataclass
class BenchConfig:
    kind: str = "circle"
    n: int = 100
    seed: int = 0
    maxdim: int = 1
    upperlim: float = math.inf
    backend: str = "morse"
    toggles: dict = field(default_factory=lambda: {t: True for t in TOGGLES})
    workers: int = 4
    repetitions: int = 3
    weight_predicate: str = "cotriangle"

    def __post_init__(self):
        if self.repetitions < 3:
            raise DataError("repetitions must be at least 3 (medians are reported)")
        unknown = set(self.toggles) - set(TOGGLES)
        if unknown:
            raise DataError(f"unknown toggles {sorted(unknown)}; choose from {TOGGLES}")
        if self.kind not in KINDS:
            raise DataError(f"unknown dataset kind {self.kind!r}; choose from {KINDS}")


def run_pipeline(cfg: BenchConfig, toggles: dict, timer: StageTimer) -> PersistenceDiagram:
    """Dataset to diagram with each optimization switched by ``toggles``."""
    on = {t: bool(toggles.get(t, False)) for t in TOGGLES}
    sort = "radix" if on["radix_sort"] else "merge"
    with timer.stage("ingest"):
        data = generate_dataset(cfg.kind, cfg.n, cfg.seed)
        dm = data if isinstance(data, DistanceMatrix) else distance_matrix(data)
    with timer.stage("rank"):
        filt = order_canonical_form(dm, cfg.upperlim, sort=sort)
    with timer.stage("complex"):
        fc = build_vr_complex(filt, cfg.maxdim)
    timer.add_nnz("complex", len(fc))
    with timer.stage("weights"):
        w = column_weights(WeightInput(filt.rank), cfg.weight_predicate,
                           cfg.workers if on["parallel_weights"] else 1)
    return persist(fc, cfg.backend, cohomology=on["cohomology"], clear=on["clear_compress"],
                   workers=cfg.workers if on["parallel_blockprodsum"] else 1,
                   vertex_weights=w, sort=sort,
                   row_sort="range" if on["range_limited_counting"] else "full", timer=timer)


def _peak_rss_mb() -> float:
    kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return kb / (1024 * 1024) if sys.platform == "darwin" else kb / 1024


def _summarize(runs: list[dict]) -> dict:
    out = {}
    for s in STAGES + ("total",):
        vals = [r.get(s, 0.0) for r in runs]
        if any(s in r for r in runs) or s == "total":
            out[s] = {"median": statistics.median(vals), "min": min(vals), "max": max(vals)}
    return out


def _measure(cfg: BenchConfig, toggles: dict, reference: Optional[PersistenceDiagram]):
    # warmup run, discarded; it also fixes the reference diagram
    pd = run_pipeline(cfg, toggles, StageTimer())
    if reference is not None and pd != reference:
        raise BenchmarkMismatch(f"variant {toggles} disagrees with the baseline diagram")
    runs = []
    for _ in range(cfg.repetitions):
        timer = StageTimer()
        t0 = time.perf_counter()
        got = run_pipeline(cfg, toggles, timer)
        total = time.perf_counter() - t0
        if got != pd:
            raise BenchmarkMismatch(f"variant {toggles} is not reproducible across repetitions")
        runs.append({**timer.seconds, "total": total})
    return pd, _summarize(runs)


def run_benchmark(cfg: BenchConfig) -> dict:
    """Time the all-off baseline and the configured variant on the same input.

    Raises :class:`BenchmarkMismatch` before reporting anything if the two
    diagrams differ.
    """
    baseline_toggles = {t: False for t in TOGGLES}
    variant_toggles = {t: bool(cfg.toggles.get(t, False)) for t in TOGGLES}
    base_pd, base = _measure(cfg, baseline_toggles, None)
    _, variant = _measure(cfg, variant_toggles, base_pd)
    speedup = {}
    for s, stats in base.items():
        if s in variant and variant[s]["median"] > 0:
            speedup[s] = stats["median"] / variant[s]["median"]
    return {
        "config": {**asdict(cfg), "upperlim": "inf" if math.isinf(cfg.upperlim) else cfg.upperlim},
        "diagram_pairs": len(base_pd),
        "diagrams_equal": True,
        "baseline": base,
        "variant": variant,
        "speedup": speedup,
        "peak_rss_mb": _peak_rss_mb(),
        "timer_overhead_seconds": calibrate_overhead(2000),
    }


def random_sparse(nrows: int, ncols: int, density: float, rng) -> SparseBoolMatrix:
    nnz = rng.binomial(nrows * ncols, density)
    flat = rng.choice(nrows * ncols, size=nnz, replace=False)
    rows, cols = flat % nrows, flat // nrows
    order = np.lexsort((rows, cols))
    rows, cols = rows[order], cols[order]
    colptr = np.zeros(ncols + 1, np.int64)
    np.cumsum(np.bincount(cols, minlength=ncols), out=colptr[1:])
    return SparseBoolMatrix(nrows, ncols, colptr, rows.astype(np.int64))


def workers_sweep(workers=(1, 2, 4, 8), size: int = 2000, density: float = 0.003,
                  seed: int = 0, repetitions: int = 3) -> dict:
    """Median blockprodsum time per worker count on one random instance;
    every worker count must reproduce the single-worker output exactly."""
    rng = np.random.default_rng(seed)
    d = random_sparse(size, size, density, rng)
    c = random_sparse(size, size, density, rng)
    e = random_sparse(size, size, density, rng)
    reference = blockprodsum(d, c, e, 1)
    rows = []
    for w in workers:
        times = []
        blockprodsum(d, c, e, w)
        for _ in range(repetitions):
            t0 = time.perf_counter()
            out = blockprodsum(d, c, e, w)
            times.append(time.perf_counter() - t0)
            if out != reference:
                raise BenchmarkMismatch(f"blockprodsum with {w} workers differs from 1 worker")
        rows.append({"workers": w, "median": statistics.median(times),
                     "min": min(times), "max": max(times)})
    return {"size": size, "density": density, "output_nnz": reference.nnz, "rows": rows}


SUITES = {
    "quick": [
        dict(kind="circle", n=60, maxdim=1),
        dict(kind="clusters", n=40, maxdim=1),
        dict(kind="random_metric", n=24, maxdim=1),
    ],
    "full": [
        dict(kind="circle", n=300, maxdim=1),
        dict(kind="sphere", n=60, maxdim=2),
        dict(kind="clusters", n=200, maxdim=1),
        dict(kind="random_metric", n=60, maxdim=1),
        dict(kind="grid", n=100, maxdim=1),
    ],
}


def run_suite(name: str, backend: str = "morse", workers: int = 4, repetitions: int = 3,
              sweep: Optional[tuple] = None) -> dict:
    if name not in SUITES:
        raise DataError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    reports = [run_benchmark(BenchConfig(backend=backend, workers=workers,
                                         repetitions=repetitions, **entry))
               for entry in SUITES[name]]
    out = {"suite": name, "benchmarks": reports}
    if sweep:
        out["workers_sweep"] = workers_sweep(sweep, size=800 if name == "quick" else 3000,
                                             repetitions=repetitions)
    return out


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

REPORT_KEYS = {"config", "diagram_pairs", "diagrams_equal", "baseline", "variant", "speedup",
               "peak_rss_mb", "timer_overhead_seconds"}


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=1, sort_keys=True) + "\n"


def report_from_json(text: str) -> dict:
    """Parse and validate a suite report produced by :func:`report_to_json`."""
    data = json.loads(text)
    if not isinstance(data, dict) or "benchmarks" not in data or "suite" not in data:
        raise DataError("report must have 'suite' and 'benchmarks'")
    for b in data["benchmarks"]:
        missing = REPORT_KEYS - set(b)
        if missing:
            raise DataError(f"benchmark entry missing {sorted(missing)}")
        for side in ("baseline", "variant"):
            for stage, stats in b[side].items():
                if set(stats) != {"median", "min", "max"}:
                    raise DataError(f"{side}.{stage} must carry median/min/max")
    return data


def report_to_text(suite: dict) -> str:
    lines = [f"suite: {suite['suite']}"]
    for b in suite["benchmarks"]:
        cfg = b["config"]
        lines.append("")
        lines.append(f"{cfg['kind']} n={cfg['n']} maxdim={cfg['maxdim']} backend={cfg['backend']} "
                     f"workers={cfg['workers']} reps={cfg['repetitions']} "
                     f"pairs={b['diagram_pairs']} peak_rss={b['peak_rss_mb']:.1f}MB")
        lines.append(f"{'stage':<10}{'baseline (s)':>14}{'optimized (s)':>15}{'speedup':>10}")
        for s in STAGES + ("total",):
            if s not in b["baseline"] and s not in b["variant"]:
                continue
            base = b["baseline"].get(s, {}).get("median", 0.0)
            var = b["variant"].get(s, {}).get("median", 0.0)
            sp = b["speedup"].get(s)
            lines.append(f"{s:<10}{base:>14.4f}{var:>15.4f}{(f'{sp:.2f}x' if sp else '-'):>10}")
    if "workers_sweep" in suite:
        sw = suite["workers_sweep"]
        lines.append("")
        lines.append(f"blockprodsum {sw['size']}x{sw['size']} density={sw['density']} "
                     f"output nnz={sw['output_nnz']}")
        lines.append(f"{'workers':<10}{'median (s)':>12}{'min (s)':>12}{'max (s)':>12}")
        for r in sw["rows"]:
            lines.append(f"{r['workers']:<10}{r['median']:>12.4f}{r['min']:>12.4f}{r['max']:>12.4f}")
    return "\n".join(lines) + "\n"
