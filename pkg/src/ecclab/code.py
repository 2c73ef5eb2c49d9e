"""Systematic linear block codes over GF(2) with exact syndrome-decode semantics.

Every code here is in standard form: H = [P | I] with the parity bits stored
in the trailing n-k codeword positions, and G = [I | P^T] so the first k
codeword bits equal the dataword. Decoding follows plain syndrome decoding:
a nonzero syndrome that matches an H column flips that bit, whether or not
the flip is the right thing to do. Miscorrections are therefore reproduced
bit-exactly, which is the whole point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox

from . import gf2

__all__ = [
    "CodeSpec",
    "DecodeResult",
    "from_parity",
    "hamming_parity_bits",
    "hamming_sec",
    "random_sec",
    "repetition",
    "bounded_distance_code",
    "encode",
    "decode",
    "decode_many",
    "canonical_equal",
    "save_code",
    "load_code",
    "NO_ERROR",
    "CORRECTED",
    "UNCORRECTABLE_SILENT",
]

NO_ERROR = "no-error"
CORRECTED = "corrected"
UNCORRECTABLE_SILENT = "uncorrectable-silent"

# vectorized decode outcome codes
_OUT_NO_ERROR = 0
_OUT_CORRECTED = 1
_OUT_SILENT = 2


def _syndrome_int(bits: np.ndarray) -> int:
    """Pack syndrome bits into an int, row 0 as the most significant bit."""
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def _int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


@dataclass(frozen=True)
class CodeSpec:
    """An (n, k, d) systematic linear block code.

    H is the (n-k, n) parity-check matrix in standard form [P | I]; G is the
    k x n generator [I | P^T]. `d` is stored as declared by the constructor.
    `syndrome_table`, when present, maps syndrome ints to the tuple of
    positions a bounded-distance decoder flips (used for repetition and
    small multi-error-correcting codes); SEC codes decode straight from the
    H columns.
    """

    n: int
    k: int
    d: int
    H: np.ndarray
    G: np.ndarray
    name: str
    syndrome_table: dict[int, tuple[int, ...]] | None = field(default=None, repr=False)

    def __post_init__(self):
        H = gf2.as_matrix(self.H)
        if H.shape != (self.n - self.k, self.n):
            raise ValueError(f"H shape {H.shape} does not match (n-k, n)=({self.n - self.k}, {self.n})")
        p = self.n - self.k
        if not np.array_equal(H[:, self.k:], np.eye(p, dtype=np.uint8)):
            raise ValueError("H is not in standard form [P | I]")
        if self.d == 3:
            cols = [_syndrome_int(H[:, j]) for j in range(self.n)]
            if 0 in cols:
                raise ValueError("SEC code requires nonzero H columns")
            if len(set(cols)) != self.n:
                raise ValueError("SEC code requires pairwise distinct H columns")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "G", gf2.as_matrix(self.G))

    @property
    def parity_bits(self) -> int:
        return self.n - self.k

    @property
    def P(self) -> np.ndarray:
        """The (n-k, k) data-column block of H."""
        return self.H[:, : self.k]

    def column_ints(self) -> np.ndarray:
        """All n H columns packed as ints (row 0 = MSB)."""
        p = self.n - self.k
        weights = (1 << np.arange(p - 1, -1, -1)).astype(np.int64)
        return self.H.astype(np.int64).T @ weights

    def correction_lut(self) -> np.ndarray:
        """Map syndrome int -> corrected bit position, or -1 for no match."""
        p = self.n - self.k
        lut = np.full(1 << p, -1, dtype=np.int64)
        if self.syndrome_table is not None:
            for s, positions in self.syndrome_table.items():
                if len(positions) == 1:
                    lut[s] = positions[0]
        else:
            cols = self.column_ints()
            lut[cols] = np.arange(self.n)
        return lut

    def flip_mask_lut(self) -> np.ndarray:
        """Map syndrome int -> uint64 bitmask of flipped positions (n <= 64 only)."""
        if self.n > 64:
            raise ValueError("flip-mask decode table requires n <= 64")
        p = self.n - self.k
        lut = np.zeros(1 << p, dtype=np.uint64)
        if self.syndrome_table is not None:
            for s, positions in self.syndrome_table.items():
                m = 0
                for pos in positions:
                    m |= 1 << pos
                lut[s] = m
        else:
            cols = self.column_ints()
            lut[cols] = np.uint64(1) << np.arange(self.n, dtype=np.uint64)
        return lut


@dataclass(frozen=True)
class DecodeResult:
    dataword_out: np.ndarray
    syndrome: np.ndarray
    corrected_position: int | None
    outcome: str
    corrected_positions: tuple[int, ...] = ()


def from_parity(P, d: int = 3, name: str | None = None,
                syndrome_table: dict[int, tuple[int, ...]] | None = None) -> CodeSpec:
    """Build a standard-form code from its (n-k, k) data-column block."""
    P = gf2.as_matrix(P)
    p, k = P.shape
    n = k + p
    H = np.concatenate([P, np.eye(p, dtype=np.uint8)], axis=1)
    G = np.concatenate([np.eye(k, dtype=np.uint8), P.T], axis=1)
    if name is None:
        name = f"({n},{k},{d})"
    return CodeSpec(n=n, k=k, d=d, H=H, G=G, name=name, syndrome_table=syndrome_table)


def hamming_parity_bits(k: int) -> int:
    """Smallest p with 2^p - p - 1 >= k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    p = 2
    while (1 << p) - p - 1 < k:
        p += 1
    return p


def _weight2_syndromes(p: int) -> list[int]:
    return [v for v in range(1, 1 << p) if bin(v).count("1") >= 2]


def hamming_sec(k: int) -> CodeSpec:
    """Single-error-correcting Hamming code for a k-bit dataword.

    Uses the k lexicographically smallest weight->=2 syndromes as data
    columns (shortening drops the largest ones), placed in descending
    order. For k=4 this reproduces the classic (7,4,3) demonstration code.
    """
    p = hamming_parity_bits(k)
    chosen = sorted(_weight2_syndromes(p))[:k]
    cols = sorted(chosen, reverse=True)
    P = np.stack([_int_to_bits(c, p) for c in cols], axis=1)
    return from_parity(P, d=3, name=f"HSC({k + p},{k},3)")


def random_sec(k: int, seed: int) -> CodeSpec:
    """SEC code whose data columns are a uniform random draw of weight->=2 syndromes."""
    p = hamming_parity_bits(k)
    avail = np.array(_weight2_syndromes(p), dtype=np.int64)
    rng = Generator(Philox(key=seed))
    cols = avail[rng.permutation(avail.size)[:k]]
    P = np.stack([_int_to_bits(int(c), p) for c in cols], axis=1)
    return from_parity(P, d=3, name=f"RSEC({k + p},{k},3)#{seed}")


def repetition(r: int) -> CodeSpec:
    """(r, 1, r) repetition code; decoding is majority vote via syndrome table."""
    if r < 3 or r % 2 == 0:
        raise ValueError("repetition length must be odd and >= 3")
    P = np.ones((r - 1, 1), dtype=np.uint8)
    if r == 3:
        return from_parity(P, d=3, name="REP(3,1,3)")
    H = np.concatenate([P, np.eye(r - 1, dtype=np.uint8)], axis=1)
    table = _build_syndrome_table(H, (r - 1) // 2)
    return from_parity(P, d=r, name=f"REP({r},1,{r})", syndrome_table=table)


def bounded_distance_code(P, d: int, name: str) -> CodeSpec:
    """Multi-error-correcting code decoded by an exhaustive syndrome table.

    Corrects up to floor((d-1)/2) errors; only supported for n <= 16 since
    the table is built by enumerating all low-weight error patterns.
    """
    P = gf2.as_matrix(P)
    p, k = P.shape
    n = k + p
    if n > 16:
        raise ValueError("syndrome-table decoding is limited to n <= 16")
    H = np.concatenate([P, np.eye(p, dtype=np.uint8)], axis=1)
    table = _build_syndrome_table(H, (d - 1) // 2)
    return from_parity(P, d=d, name=name, syndrome_table=table)


def _build_syndrome_table(H: np.ndarray, t: int) -> dict[int, tuple[int, ...]]:
    """Syndrome int -> minimum-weight error pattern, for weights 1..t."""
    from itertools import combinations

    n = H.shape[1]
    col_ints = [_syndrome_int(H[:, j]) for j in range(n)]
    table: dict[int, tuple[int, ...]] = {}
    for w in range(1, t + 1):
        for positions in combinations(range(n), w):
            s = 0
            for pos in positions:
                s ^= col_ints[pos]
            if s != 0 and s not in table:
                table[s] = positions
    return table


def encode(spec: CodeSpec, d) -> np.ndarray:
    """Encode dataword(s): accepts a length-k vector or an (N, k) batch."""
    arr = np.asarray(d, dtype=np.uint8)
    if arr.shape[-1] != spec.k:
        raise ValueError(f"dataword length {arr.shape[-1]} != k={spec.k}")
    return (arr.astype(np.int64) @ spec.G.astype(np.int64) & 1).astype(np.uint8)


def decode(spec: CodeSpec, c_prime) -> DecodeResult:
    """Syndrome-decode one received codeword."""
    c = gf2.as_vector(c_prime)
    if c.size != spec.n:
        raise ValueError(f"codeword length {c.size} != n={spec.n}")
    syndrome = gf2.matvec(spec.H, c)
    s_int = _syndrome_int(syndrome)
    if s_int == 0:
        return DecodeResult(c[: spec.k].copy(), syndrome, None, NO_ERROR)
    if spec.syndrome_table is not None:
        positions = spec.syndrome_table.get(s_int)
    else:
        hits = np.nonzero(spec.column_ints() == s_int)[0]
        positions = (int(hits[0]),) if hits.size else None
    if positions is None:
        return DecodeResult(c[: spec.k].copy(), syndrome, None, UNCORRECTABLE_SILENT)
    out = c.copy()
    for pos in positions:
        out[pos] ^= 1
    single = positions[0] if len(positions) == 1 else None
    return DecodeResult(out[: spec.k], syndrome, single, CORRECTED, tuple(positions))


def decode_many(spec: CodeSpec, C: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized decode of an (N, n) batch.

    Returns (datawords_out (N, k), outcome codes (N,), corrected position
    (N,), -1 where no single-bit correction happened). Outcome codes are
    0=no-error, 1=corrected, 2=uncorrectable-silent.
    """
    C = np.asarray(C, dtype=np.uint8)
    if C.ndim != 2 or C.shape[1] != spec.n:
        raise ValueError(f"batch shape {C.shape} != (N, {spec.n})")
    p = spec.n - spec.k
    weights = (1 << np.arange(p - 1, -1, -1)).astype(np.int64)
    s_int = (C.astype(np.int64) @ spec.H.T.astype(np.int64) & 1) @ weights

    out = C[:, : spec.k].copy()
    outcomes = np.zeros(C.shape[0], dtype=np.int8)
    corrected = np.full(C.shape[0], -1, dtype=np.int64)
    nonzero = s_int != 0
    if not nonzero.any():
        return out, outcomes, corrected

    if spec.syndrome_table is None:
        lut = spec.correction_lut()
        pos = lut[s_int]
        hit = nonzero & (pos >= 0)
        outcomes[hit] = _OUT_CORRECTED
        outcomes[nonzero & ~hit] = _OUT_SILENT
        corrected[hit] = pos[hit]
        data_hit = hit & (pos < spec.k)
        rows = np.nonzero(data_hit)[0]
        out[rows, pos[data_hit]] ^= 1
        return out, outcomes, corrected

    # table decode: apply full flip masks (n <= 16 by construction)
    mask_lut = spec.flip_mask_lut()
    masks = mask_lut[s_int]
    hit = nonzero & (masks != 0)
    outcomes[hit] = _OUT_CORRECTED
    outcomes[nonzero & ~hit] = _OUT_SILENT
    bitcols = (masks[:, None] >> np.arange(spec.k, dtype=np.uint64)) & np.uint64(1)
    out ^= bitcols.astype(np.uint8)
    single = hit & (np.bitwise_count(masks) == 1)
    if single.any():
        corrected[single] = np.log2(masks[single].astype(np.float64)).astype(np.int64)
    return out, outcomes, corrected


def _normalize_standard_form(spec: CodeSpec) -> np.ndarray:
    """Return the data block of H with parity rows reordered to the identity."""
    p = spec.n - spec.k
    parity = spec.H[:, spec.k:]
    order = np.argmax(parity, axis=0)  # column j of parity is a unit vector
    perm = np.empty(p, dtype=np.int64)
    for j in range(p):
        perm[j] = np.nonzero(parity[:, j])[0][0]
    return spec.H[perm][:, : spec.k]


def canonical_equal(a: CodeSpec, b: CodeSpec) -> bool:
    """Position-by-position equality of data columns after renormalizing parity order."""
    if (a.n, a.k) != (b.n, b.k):
        raise ValueError(f"shape mismatch: ({a.n},{a.k}) vs ({b.n},{b.k})")
    return bool(np.array_equal(_normalize_standard_form(a), _normalize_standard_form(b)))


def save_code(spec: CodeSpec, path) -> None:
    with open(path, "w") as f:
        f.write(f"{spec.n} {spec.k} {spec.d}\n")
        f.write(gf2.matrix_to_text(spec.H))


def load_code(path) -> CodeSpec:
    with open(path) as f:
        text = f.read()
    lines = text.splitlines()
    n, k, d = (int(t) for t in lines[0].split())
    H = gf2.matrix_from_text("\n".join(lines[1:]))
    P = H[:, :k]
    name = f"({n},{k},{d})"
    if d == 3:
        return from_parity(P, d=3, name=name)
    if n <= 16 or (k == 1 and d == n):
        if k == 1 and d == n:
            return repetition(n)
        return bounded_distance_code(P, d=d, name=name)
    return from_parity(P, d=d, name=name)
