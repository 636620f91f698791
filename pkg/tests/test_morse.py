import numpy as np
import pytest

from oracles import dense_gf2_inverse, dense_gf2_product
from phkit.core import (SparseBoolMatrix, gf2_add, gf2_multiply, is_reduced,
                        is_unit_upper_triangular, upper_tri_solve)
from phkit.errors import EmptyFieldError, ShapeError
from phkit.ingest import PointCloud, distance_matrix, order_canonical_form
from phkit.morse import (SchurBlocks, filtration_order, morse_reduce, morse_reduce_matrix,
                         partition, reorder_rows_cols, schur_complement, select_morse_field)
from phkit.reduce import persist, ph_col
from phkit.simplicial import FilteredComplex, boundary_operator, build_vr_complex


def sp(a):
    return SparseBoolMatrix.from_dense(a)


def random_filtered_matrix(rng, r, c, density):
    """Random matrix with nondecreasing row and column births such that every
    entry's row birth is at most its column birth (filtration-compatible)."""
    rb = np.sort(rng.integers(0, 4, r))
    cb = np.sort(rng.integers(0, 4, c))
    a = (rng.random((r, c)) < density) & (rb[:, None] <= cb[None, :])
    return sp(a), rb, cb


def test_field_identity_pattern():
    e = SparseBoolMatrix.identity(5)
    f = select_morse_field(e, np.zeros(5), np.zeros(5))
    assert f.pairs == tuple((i, i) for i in range(5))


def test_field_fallback_and_empty():
    e = sp([[0, 1, 1], [0, 0, 1], [0, 0, 0]])
    f = select_morse_field(e, np.zeros(3), np.ones(3))
    assert f.pairs == ((0, 1),)
    with pytest.raises(EmptyFieldError):
        select_morse_field(SparseBoolMatrix.zeros(3, 3), np.zeros(3), np.zeros(3))


def test_field_blocks_are_invertible():
    rng = np.random.default_rng(0)
    for _ in range(500):
        e, rb, cb = random_filtered_matrix(rng, *rng.integers(1, 25, 2), rng.random() * 0.4)
        if e.nnz == 0:
            continue
        f = select_morse_field(e, rb, cb)
        a = partition(e, f).A
        assert is_unit_upper_triangular(a)
        assert upper_tri_solve(a, a) == SparseBoolMatrix.identity(len(f))
        assert len({r for r, _ in f.pairs}) == len(f) == len({c for _, c in f.pairs})


def test_schur_examples():
    rng = np.random.default_rng(1)
    b = sp(rng.random((3, 4)) < 0.5)
    c = sp(rng.random((5, 3)) < 0.5)
    d = sp(rng.random((5, 4)) < 0.5)
    eye = SparseBoolMatrix.identity(3)
    rest = (np.arange(5), np.arange(4))
    assert schur_complement(SchurBlocks(eye, b, c, d, *rest)) == gf2_add(d, gf2_multiply(c, b))
    zero_c = SparseBoolMatrix.zeros(5, 3)
    assert schur_complement(SchurBlocks(eye, b, zero_c, d, *rest)) == d
    with pytest.raises(ShapeError):
        schur_complement(SchurBlocks(eye, b, c, SparseBoolMatrix.zeros(4, 4), *rest))


def test_schur_matches_dense_oracle():
    rng = np.random.default_rng(2)
    for _ in range(300):
        p, r, q = rng.integers(1, 21), rng.integers(0, 21), rng.integers(0, 21)
        a = np.triu(rng.random((p, p)) < 0.3, 1).astype(np.uint8)
        np.fill_diagonal(a, 1)
        b = (rng.random((p, q)) < 0.3).astype(np.uint8)
        c = (rng.random((r, p)) < 0.3).astype(np.uint8)
        d = (rng.random((r, q)) < 0.3).astype(np.uint8)
        expect = (d + dense_gf2_product(c, dense_gf2_product(dense_gf2_inverse(a), b))) % 2
        blocks = SchurBlocks(sp(a), sp(b), sp(c), sp(d), np.arange(r), np.arange(q))
        for w in (1, 3):
            assert np.array_equal(schur_complement(blocks, w).to_dense(), expect)


def test_zero_matrix_has_no_rounds():
    res = morse_reduce_matrix(SparseBoolMatrix.zeros(4, 3), np.zeros(4), np.zeros(3))
    assert len(res.pivots) == 0 and res.log["rounds"] == 0
    assert res.V == SparseBoolMatrix.identity(3)


def test_triangle_pivots_match_column_algorithm():
    fc = FilteredComplex.from_simplices([((0,), 0), ((1,), 0), ((2,), 0), ((0, 1), 1),
                                         ((0, 2), 2), ((1, 2), 3), ((0, 1, 2), 4)])
    for dim in (1, 2):
        assert morse_reduce(fc, dim).pivots == ph_col(boundary_operator(fc, dim)).pivots


def test_matrix_reduction_matches_column_algorithm():
    rng = np.random.default_rng(3)
    for _ in range(300):
        r, c = rng.integers(0, 30, 2)
        e, rb, cb = random_filtered_matrix(rng, r, c, rng.random() * 0.3)
        res = morse_reduce_matrix(e, rb, cb, workers=int(rng.integers(1, 4)))
        assert res.pivots == ph_col(e).pivots
        assert gf2_multiply(e, res.V) == res.R
        assert is_unit_upper_triangular(res.V) and is_reduced(res.R)
        shapes = res.log["shape"]
        assert all(s1[0] > s2[0] and s1[1] > s2[1] for s1, s2 in zip(shapes, shapes[1:]))
        assert res.log["rounds"] <= max(c, 0)


def test_reorder_examples():
    births = np.array([0, 0, 1, 1, 1])
    assert filtration_order(births, np.ones(5)).tolist() == [0, 1, 2, 3, 4]
    assert filtration_order(np.zeros(3, int), np.array([3, 1, 2])).tolist() == [0, 2, 1]
    e = SparseBoolMatrix.zeros(5, 3)
    ro, co = reorder_rows_cols(e, births, np.zeros(3, int), np.arange(5), np.array([3, 1, 2]))
    assert ro.tolist() == [1, 0, 4, 3, 2] and co.tolist() == [0, 2, 1]
    with pytest.raises(ShapeError):
        filtration_order(births, np.ones(4))


@pytest.mark.parametrize("sort", ["radix", "merge"])
def test_reorder_is_birth_monotone_bijection(sort):
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(0, 40))
        births = np.sort(rng.integers(0, 5, n))
        w = rng.integers(-3, 10, n)
        p = filtration_order(births, w, sort)
        assert sorted(p.tolist()) == list(range(n))
        assert np.all(np.diff(births[p]) >= 0)
        inv = np.empty_like(p)
        inv[p] = np.arange(n)
        assert np.array_equal(p[inv], np.arange(n))
        key = sorted(range(n), key=lambda i: (births[i], -w[i], i))
        assert p.tolist() == key


def test_reordering_never_changes_the_diagram():
    rng = np.random.default_rng(5)
    for _ in range(50):
        m = int(rng.integers(3, 11))
        fc = build_vr_complex(order_canonical_form(distance_matrix(PointCloud(rng.random((2, m))))), 2)
        base = persist(fc, "morse")
        for _ in range(3):
            w = rng.integers(0, 100, m)
            assert persist(fc, "morse", vertex_weights=w) == base
            res = morse_reduce(fc, 1, vertex_weights=w)
            ro, co = res.row_order, res.col_order
            permuted = ph_col(boundary_operator(fc, 1).permute(ro, co)).pivots
            assert set(res.pivots.pairs) == {(int(ro[r]), int(co[c])) for r, c in permuted.pairs}
