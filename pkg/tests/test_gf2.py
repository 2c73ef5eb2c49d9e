import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecclab import gf2


def _rand_bits(rng, *shape):
    return (rng.random(shape) < 0.5).astype(np.uint8)


def test_matvec_identity_examples():
    H = np.array([[1, 1, 1, 0, 1, 0, 0],
                  [1, 1, 0, 1, 0, 1, 0],
                  [1, 0, 1, 1, 0, 0, 1]], dtype=np.uint8)
    c = np.array([1, 0, 0, 0, 1, 1, 1], dtype=np.uint8)
    assert list(gf2.matvec(H, c)) == [0, 0, 0]
    assert list(gf2.matvec(H, np.zeros(7, dtype=np.uint8))) == [0, 0, 0]
    e2 = np.zeros(7, dtype=np.uint8)
    e2[2] = 1
    assert list(gf2.matvec(H, e2)) == list(H[:, 2])


def test_matvec_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        gf2.matvec(np.eye(3, dtype=np.uint8), np.zeros(4, dtype=np.uint8))


def test_matvec_linearity_fuzz():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        rows, cols = rng.integers(1, 9, size=2)
        a = _rand_bits(rng, rows, cols)
        x = _rand_bits(rng, cols)
        y = _rand_bits(rng, cols)
        lhs = gf2.matvec(a, x ^ y)
        rhs = gf2.matvec(a, x) ^ gf2.matvec(a, y)
        assert np.array_equal(lhs, rhs)


def _rank_by_minors(a):
    """Brute-force rank via nonzero determinant minors (exponential; <=6x6)."""
    from itertools import combinations

    a = np.asarray(a, dtype=np.uint8)
    rows, cols = a.shape
    for r in range(min(rows, cols), 0, -1):
        for ri in combinations(range(rows), r):
            for ci in combinations(range(cols), r):
                sub = a[np.ix_(ri, ci)].astype(np.float64)
                if round(abs(np.linalg.det(sub))) % 2 == 1:
                    return r
    return 0


def test_rank_examples():
    H = np.array([[1, 1, 1, 0, 1, 0, 0],
                  [1, 1, 0, 1, 0, 1, 0],
                  [1, 0, 1, 1, 0, 0, 1]], dtype=np.uint8)
    assert gf2.rank(H) == 3
    assert gf2.rank(np.zeros((3, 7), dtype=np.uint8)) == 0
    assert gf2.rank(np.eye(4, dtype=np.uint8)) == 4


def test_rank_against_minor_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(60):
        rows = int(rng.integers(1, 7))
        cols = int(rng.integers(1, 7))
        a = _rand_bits(rng, rows, cols)
        assert gf2.rank(a) == _rank_by_minors(a)


def test_solve_identity():
    x = gf2.solve(np.eye(3, dtype=np.uint8), np.array([1, 0, 1], dtype=np.uint8))
    assert list(x) == [1, 0, 1]


def test_solve_parity_identity_block():
    H = np.array([[1, 1, 1, 0, 1, 0, 0],
                  [1, 1, 0, 1, 0, 1, 0],
                  [1, 0, 1, 1, 0, 0, 1]], dtype=np.uint8)
    sub = H[:, 4:]
    x = gf2.solve(sub, np.array([1, 0, 0], dtype=np.uint8))
    assert list(x) == [1, 0, 0]


def test_solve_inconsistent_returns_none():
    a = np.array([[1, 1], [1, 1]], dtype=np.uint8)
    b = np.array([0, 1], dtype=np.uint8)
    assert gf2.solve(a, b) is None


def test_solve_roundtrip_fuzz():
    rng = np.random.default_rng(23)
    n_solved = 0
    for _ in range(300):
        rows = int(rng.integers(1, 8))
        cols = int(rng.integers(1, 8))
        a = _rand_bits(rng, rows, cols)
        b = _rand_bits(rng, rows)
        x = gf2.solve(a, b)
        if x is not None:
            n_solved += 1
            assert np.array_equal(gf2.matvec(a, x), b)
    assert n_solved > 50


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.randoms(use_true_random=False))
def test_solve_agrees_with_exhaustive(rows, cols, rnd):
    a = np.array([[rnd.randint(0, 1) for _ in range(cols)] for _ in range(rows)],
                 dtype=np.uint8)
    b = np.array([rnd.randint(0, 1) for _ in range(rows)], dtype=np.uint8)
    x = gf2.solve(a, b)
    solvable = any(
        np.array_equal(gf2.matvec(a, np.array([(v >> i) & 1 for i in range(cols)],
                                               dtype=np.uint8)), b)
        for v in range(1 << cols)
    )
    assert (x is not None) == solvable


def test_in_span():
    rows = np.array([[1, 0, 1], [0, 1, 1]], dtype=np.uint8)
    assert gf2.in_span(rows, np.array([1, 1, 0], dtype=np.uint8))
    assert not gf2.in_span(rows, np.array([1, 1, 1], dtype=np.uint8))


def test_matrix_text_roundtrip():
    rng = np.random.default_rng(3)
    m = _rand_bits(rng, 5, 9)
    assert np.array_equal(gf2.matrix_from_text(gf2.matrix_to_text(m)), m)
    with pytest.raises(ValueError):
        gf2.matrix_from_text("not a matrix")
