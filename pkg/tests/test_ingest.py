import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phkit.errors import DataError, ParseError
from phkit.ingest import (DistanceMatrix, PointCloud, distance_matrix, latlon2euc,
                          order_canonical_form, read_distance_matrix_csv, read_point_cloud_csv,
                          sanitize_labels)


def test_read_points_selected_columns(tmp_path):
    p = tmp_path / "cities.csv"
    p.write_text("name,country,lat,lon\nA,X,34.983,63.1333\nB,Y,10,20\nC,Z,-5,7\n", encoding="utf-8")
    pc = read_point_cloud_csv(p, columns=[3, 4], header=True, label_column=1)
    assert pc.coords.shape == (2, 3)
    assert pc.labels == ("A", "B", "C")
    assert pc.coords[:, 1].tolist() == [10.0, 20.0]


def test_read_single_point(tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("0,0\n")
    assert read_point_cloud_csv(p).coords.shape == (2, 1)


def test_read_rows_as_dimensions(tmp_path):
    p = tmp_path / "dims.csv"
    p.write_text("0,1,2\n5,6,7\n")
    pc = read_point_cloud_csv(p, rowsare="dimensions")
    assert pc.coords.shape == (2, 3)
    assert pc.coords[:, 2].tolist() == [2.0, 7.0]


def test_parse_error_names_row_and_column(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,abc\n")
    with pytest.raises(ParseError) as err:
        read_point_cloud_csv(p)
    assert err.value.row == 2 and err.value.column == 2
    assert "row 2" in str(err.value) and "column 2" in str(err.value)


def test_ragged_rows_and_missing_file(tmp_path):
    p = tmp_path / "ragged.csv"
    p.write_text("1,2\n3\n")
    with pytest.raises(ParseError):
        read_point_cloud_csv(p)
    with pytest.raises(DataError, match="nope.csv"):
        read_point_cloud_csv(tmp_path / "nope.csv")


def test_read_distance_matrix(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("0,1,2\n1,0,3\n2,3,0\n")
    assert read_distance_matrix_csv(p).d[1, 2] == 3.0
    p.write_text("0,1\n2,0\n")
    with pytest.raises(DataError, match="symmetric"):
        read_distance_matrix_csv(p)


def test_sanitize_labels():
    assert sanitize_labels(["Qal eh-ye", "Chaghcharan"]) == ["Qal eh-ye", "Chaghcharan"]
    assert sanitize_labels(["a", "b", "c", "d", "αβγ"]) == ["a", "b", "c", "d", "5"]
    assert sanitize_labels([]) == []


def test_latlon_examples():
    out = latlon2euc([[34.983, 63.1333]])[:, 0]
    assert np.allclose(out, [0.370265, 0.730885, 0.573333], atol=1e-5)
    assert np.allclose(latlon2euc([[0, 0]])[:, 0], [1, 0, 0], atol=1e-15)
    assert np.allclose(latlon2euc([[90, 123]])[:, 0], [0, 0, 1], atol=1e-12)
    with pytest.raises(DataError):
        latlon2euc([[91, 0]])


@settings(max_examples=200, deadline=None)
@given(st.floats(-90, 90), st.floats(-720, 720))
def test_latlon_unit_norm(lat, lon):
    v = latlon2euc([[lat, lon]])[:, 0]
    assert abs(np.linalg.norm(v) - 1) < 1e-12


def test_distance_matrix_examples():
    assert distance_matrix(PointCloud(np.array([[0, 3], [0, 4]], float))).d[0, 1] == 5.0
    assert distance_matrix(PointCloud(np.zeros((2, 1)))).d.shape == (1, 1)
    rng = np.random.default_rng(0)
    x = rng.random((3, 10))
    d = distance_matrix(PointCloud(x)).d
    for i in range(10):
        for j in range(10):
            assert math.isclose(d[i, j], math.sqrt(sum((x[k, i] - x[k, j]) ** 2 for k in range(3))),
                                rel_tol=1e-12, abs_tol=1e-15)


def test_distance_matrix_validation():
    with pytest.raises(DataError):
        DistanceMatrix(np.array([[0, -1], [-1, 0]]))
    with pytest.raises(DataError):
        DistanceMatrix(np.array([[1.0]]))
    with pytest.raises(DataError):
        PointCloud(np.array([[np.nan]]))


def _dm(upper, m):
    d = np.zeros((m, m))
    d[np.triu_indices(m, 1)] = upper
    return DistanceMatrix(d + d.T)


def test_rank_examples():
    f = order_canonical_form(_dm([0.5, 0.2, 0.9], 3))
    assert [f.rank[0, 1], f.rank[0, 2], f.rank[1, 2]] == [2, 1, 3]
    assert f.nvals == 3
    g = order_canonical_form(_dm([0.7] * 6, 4))
    assert set(g.rank[np.triu_indices(4, 1)].tolist()) == {1}


def test_threshold_inclusive_and_strict():
    d = _dm([0.1, 0.15, 0.2], 3)
    f = order_canonical_form(d, 0.15)
    assert f.rank[0, 1] > 0 and f.rank[0, 2] > 0 and f.rank[1, 2] == 0
    g = order_canonical_form(d, 0.15, strict=True)
    assert g.rank[0, 2] == 0


@pytest.mark.parametrize("sort", ["radix", "merge"])
def test_rank_matches_comparison_oracle(sort):
    rng = np.random.default_rng(3)
    for _ in range(1000):
        m = int(rng.integers(2, 31))
        vals = rng.integers(0, 20, m * (m - 1) // 2).astype(float) / 4
        d = _dm(vals, m)
        f = order_canonical_form(d, sort=sort)
        iu = np.triu_indices(m, 1)
        uniq = sorted(set(vals.tolist()))
        expect = [uniq.index(v) + 1 for v in vals.tolist()]
        assert f.rank[iu].tolist() == expect
        assert np.array_equal(f.rank, f.rank.T)
        assert np.all(f.value_of_rank[f.rank[iu]] == d.d[iu])
        assert np.all(np.diff(f.value_of_rank[1:]) > 0)
