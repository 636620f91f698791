import time

import numpy as np
import pytest

from phkit import bench
from phkit.bench import (BenchConfig, StageTimer, StageTiming, calibrate_overhead,
                         generate_dataset, report_from_json, report_to_json, report_to_text,
                         run_benchmark, workers_sweep)
from phkit.errors import BenchmarkMismatch, DataError
from phkit.ingest import DistanceMatrix, distance_matrix, order_canonical_form
from phkit.reduce import PersistenceDiagram, PersistencePair, betti_curve, persist
from phkit.simplicial import build_vr_complex


def test_circle_without_jitter_is_square():
    x = generate_dataset("circle", 4, jitter=0.0).coords
    assert np.allclose(x, [[1, 0, -1, 0], [0, 1, 0, -1]], atol=1e-15)


@pytest.mark.parametrize("kind", bench.KINDS)
def test_same_seed_same_bytes(kind):
    a, b = generate_dataset(kind, 30, seed=7), generate_dataset(kind, 30, seed=7)
    get = (lambda d: d.d) if isinstance(a, DistanceMatrix) else (lambda d: d.coords)
    assert get(a).tobytes() == get(b).tobytes()


def test_random_metric_is_a_metric():
    d = generate_dataset("random_metric", 25, seed=3).d
    assert np.allclose(d, d.T) and not np.diag(d).any()
    assert np.all(d[:, :, None] <= d[:, None, :] + d.T[None, :, :] + 1e-12)


def test_dataset_errors():
    with pytest.raises(DataError):
        generate_dataset("torus", 5)
    with pytest.raises(DataError):
        generate_dataset("circle", 0)


def test_two_clusters_have_two_components_over_wide_range():
    pc = generate_dataset("clusters", 30, seed=1, k=2, separation=10, spread=0.1)
    fc = build_vr_complex(order_canonical_form(distance_matrix(pc)), 0)
    pd = persist(fc)
    for eps in (1.0, 3.0, 5.0, 8.0):
        assert betti_curve(pd, 0, eps) == 2
    assert betti_curve(pd, 0, 12.0) == 1


def test_stage_timing_rejects_negative():
    with pytest.raises(ValueError):
        StageTiming("rank", -1.0)


def test_nested_stages_do_not_overlap():
    timer = StageTimer()
    with timer.stage("reduce"):
        time.sleep(0.02)
        with timer.stage("schur"):
            time.sleep(0.03)
    assert 0.015 < timer.seconds["reduce"] < 0.03
    assert timer.seconds["schur"] >= 0.03
    assert [t.stage for t in timer.timings()] == ["schur", "reduce"]


def test_timer_overhead_below_one_percent_of_10ms():
    assert calibrate_overhead() < 0.01 * 0.010


def test_benchmark_reports_medians_and_equal_diagrams():
    cfg = BenchConfig(kind="circle", n=30, repetitions=3, workers=2)
    rep = run_benchmark(cfg)
    assert rep["diagrams_equal"] and rep["diagram_pairs"] > 0
    for side in ("baseline", "variant"):
        for stats in rep[side].values():
            assert stats["min"] <= stats["median"] <= stats["max"]
    assert "total" in rep["speedup"] and rep["peak_rss_mb"] > 0


def test_benchmark_aborts_on_mismatch(monkeypatch):
    real = bench.run_pipeline

    def broken(cfg, toggles, timer):
        pd = real(cfg, toggles, timer)
        if toggles.get("radix_sort"):
            return PersistenceDiagram(list(pd.pairs) + [PersistencePair(0, 0.0, 0.5)], pd.maxdim)
        return pd

    monkeypatch.setattr(bench, "run_pipeline", broken)
    with pytest.raises(BenchmarkMismatch):
        run_benchmark(BenchConfig(kind="circle", n=12))


def test_config_validation():
    with pytest.raises(DataError):
        BenchConfig(repetitions=2)
    with pytest.raises(DataError):
        BenchConfig(toggles={"warp_drive": True})


def test_workers_sweep_is_consistent():
    sw = workers_sweep((1, 2, 4), size=300, density=0.01, repetitions=3)
    assert [r["workers"] for r in sw["rows"]] == [1, 2, 4]
    assert sw["output_nnz"] > 0


def test_report_json_round_trip():
    suite = {"suite": "quick", "benchmarks": [run_benchmark(BenchConfig(kind="grid", n=16))]}
    text = report_to_json(suite)
    assert report_from_json(text) == suite
    assert "suite: quick" in report_to_text(suite)
    with pytest.raises(DataError):
        report_from_json('{"suite": "quick", "benchmarks": [{}]}')
