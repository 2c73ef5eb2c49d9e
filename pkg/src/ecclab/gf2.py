"""Dense linear algebra over GF(2) on numpy uint8 arrays.

Vectors are 1-D arrays of {0,1}, matrices 2-D, both dtype uint8.
Addition is XOR, multiplication is AND; everything here is mod 2.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_vector",
    "as_matrix",
    "matvec",
    "matmul",
    "rank",
    "solve",
    "row_reduce",
    "in_span",
    "matrix_to_text",
    "matrix_from_text",
]


def as_vector(bits) -> np.ndarray:
    """Coerce a bit sequence to a 1-D uint8 array of {0,1}."""
    v = np.asarray(bits, dtype=np.uint8)
    if v.ndim != 1:
        raise ValueError(f"expected 1-D bit vector, got shape {v.shape}")
    if v.size and v.max() > 1:
        raise ValueError("bit vector entries must be 0 or 1")
    return v


def as_matrix(bits) -> np.ndarray:
    """Coerce a nested bit sequence to a 2-D uint8 array of {0,1}."""
    m = np.asarray(bits, dtype=np.uint8)
    if m.ndim != 2:
        raise ValueError(f"expected 2-D bit matrix, got shape {m.shape}")
    if m.size and m.max() > 1:
        raise ValueError("bit matrix entries must be 0 or 1")
    return m


def matvec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Matrix-vector product A @ x over GF(2)."""
    a = as_matrix(a)
    x = as_vector(x)
    if a.shape[1] != x.size:
        raise ValueError(f"dimension mismatch: matrix is {a.shape[0]}x{a.shape[1]}, vector has length {x.size}")
    return (a @ x.astype(np.int64) & 1).astype(np.uint8)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product A @ B over GF(2)."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return (a.astype(np.int64) @ b.astype(np.int64) & 1).astype(np.uint8)


def row_reduce(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2).

    Returns (rref matrix, pivot column indices). Input is not modified.
    """
    m = as_matrix(a).copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hits = np.nonzero(m[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        others = np.nonzero(m[:, c])[0]
        others = others[others != r]
        if others.size:
            m[others] ^= m[r]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a: np.ndarray) -> int:
    """GF(2) row rank via Gaussian elimination."""
    return len(row_reduce(a)[1])


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Solve A @ x = b over GF(2).

    Returns one solution with all free variables set to 0, or None when the
    system is inconsistent. The solution is unique iff A has full column rank.
    """
    a = as_matrix(a)
    b = as_vector(b)
    if a.shape[0] != b.size:
        raise ValueError(f"dimension mismatch: matrix is {a.shape[0]}x{a.shape[1]}, rhs has length {b.size}")
    aug = np.concatenate([a, b[:, None]], axis=1)
    red, pivots = row_reduce(aug)
    ncols = a.shape[1]
    if ncols in pivots:
        return None  # pivot in the rhs column: 0 = 1 row
    x = np.zeros(ncols, dtype=np.uint8)
    for r, c in enumerate(pivots):
        x[c] = red[r, ncols]
    return x


def in_span(rows: np.ndarray, v: np.ndarray) -> bool:
    """True iff v lies in the GF(2) span of the given row vectors."""
    rows = as_matrix(rows)
    v = as_vector(v)
    base = rank(rows)
    return rank(np.vstack([rows, v[None, :]])) == base


def matrix_to_text(a: np.ndarray) -> str:
    """Serialize: first line "rows cols", then one line of bits per row."""
    a = as_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    for row in a:
        lines.append(" ".join(str(int(b)) for b in row))
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> np.ndarray:
    """Parse the format written by matrix_to_text."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except Exception as exc:
        raise ValueError(f"bad matrix header {lines[0]!r}") from exc
    if len(lines) - 1 != rows:
        raise ValueError(f"expected {rows} matrix rows, found {len(lines) - 1}")
    m = np.zeros((rows, cols), dtype=np.uint8)
    for i, ln in enumerate(lines[1:]):
        bits = [int(t) for t in ln.split()]
        if len(bits) != cols:
            raise ValueError(f"row {i} has {len(bits)} entries, expected {cols}")
        m[i] = bits
    return as_matrix(m)
