"""Monte-Carlo engine: drive bursts through encode -> inject -> decode -> check
and aggregate post-correction error-count histograms.

Work is sharded into fixed-size chunks of bursts; every chunk draws from its
own counter-based stream, so histograms are bit-identical for any worker
count or evaluation order. Hot paths use float32 matmuls (exact for these
small integer sums) so BLAS does the heavy lifting.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import errmodel
from .code import CodeSpec
from .errmodel import ErrorModelParams, counter_rng

__all__ = ["ErrorCountHistogram", "simulate_histogram", "ber_curve"]

CHUNK = 4096
_STREAM_INJECT = errmodel._STREAM_INJECT


@dataclass(frozen=True)
class ErrorCountHistogram:
    """Counts of bursts observed with exactly n post-correction bit errors."""

    counts: np.ndarray  # index n -> number of bursts, length word_bits + 1
    total_words: int
    word_bits: int

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (self.word_bits + 1,):
            raise ValueError(f"counts length {c.shape} != word_bits+1 = {self.word_bits + 1}")
        if int(c.sum()) != self.total_words:
            raise ValueError("histogram counts do not sum to total_words")
        object.__setattr__(self, "counts", c)

    def probabilities(self) -> np.ndarray:
        return self.counts / self.total_words

    def nonzero_bins(self) -> dict[int, int]:
        return {int(n): int(c) for n, c in enumerate(self.counts) if c}

    def observed_ber(self) -> float:
        """Expected fraction of post-correction bits in error."""
        ns = np.arange(self.word_bits + 1)
        return float((self.counts * ns).sum() / (self.total_words * self.word_bits))

    def to_csv(self) -> str:
        lines = ["errors,count"]
        for n, c in self.nonzero_bins().items():
            lines.append(f"{n},{c}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, word_bits: int) -> "ErrorCountHistogram":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "errors,count":
            raise ValueError("histogram CSV must start with an 'errors,count' header")
        counts = np.zeros(word_bits + 1, dtype=np.int64)
        for ln in lines[1:]:
            n_s, c_s = ln.split(",")
            counts[int(n_s)] = int(c_s)
        return cls(counts=counts, total_words=int(counts.sum()), word_bits=word_bits)


def _gf2_matmul_f32(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a @ b) mod 2 via float32 BLAS; exact while inner dim < 2^24."""
    prod = a.astype(np.float32) @ b.astype(np.float32)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def _simulate_chunk(spec: CodeSpec | None, params: ErrorModelParams, burst_bits: int,
                    chunk_index: int, start: int, n_bursts: int, seed: int) -> np.ndarray:
    patterns = errmodel.gen_pattern_batch(params.pattern, burst_bits, 0, n_bursts, chunk_index)
    word_indices = np.arange(start, start + n_bursts, dtype=np.int64)
    rng = counter_rng(seed, chunk_index, 0, _STREAM_INJECT)

    if spec is None:
        mask = errmodel.charged_mask_many(patterns, params.layout, word_indices)
        flips = (rng.random(patterns.shape) < params.rber) & (mask == 1)
        err_per_burst = flips.sum(axis=1, dtype=np.int64)
        return np.bincount(err_per_burst, minlength=burst_bits + 1)

    ndw = burst_bits // spec.k
    D = patterns.reshape(n_bursts * ndw, spec.k)
    C = _gf2_matmul_f32(D, spec.G)
    anti = params.layout.anti_flags(word_indices)
    anti_rows = np.repeat(anti, ndw)
    mask = C ^ anti_rows[:, None].astype(np.uint8)
    flips = (rng.random(C.shape) < params.rber) & (mask == 1)
    C_err = C ^ flips.astype(np.uint8)

    D_out = _decode_data_batch(spec, C_err)
    err = (D_out ^ D).sum(axis=1, dtype=np.int64)
    err_per_burst = err.reshape(n_bursts, ndw).sum(axis=1)
    return np.bincount(err_per_burst, minlength=burst_bits + 1)


def _decode_data_batch(spec: CodeSpec, C: np.ndarray) -> np.ndarray:
    """Post-correction data bits for an (N, n) batch (fast path of decode_many)."""
    p = spec.n - spec.k
    syn_bits = _gf2_matmul_f32(C, spec.H.T)
    weights = (1 << np.arange(p - 1, -1, -1)).astype(np.int64)
    s_int = syn_bits.astype(np.int64) @ weights
    out = C[:, : spec.k].copy()
    if spec.syndrome_table is None:
        lut = spec.correction_lut()
        pos = lut[s_int]
        hit = pos >= 0
        data_hit = hit & (pos < spec.k)
        rows = np.nonzero(data_hit)[0]
        out[rows, pos[data_hit]] ^= 1
        return out
    mask_lut = spec.flip_mask_lut()
    masks = mask_lut[s_int]
    bitcols = (masks[:, None] >> np.arange(spec.k, dtype=np.uint64)) & np.uint64(1)
    return out ^ bitcols.astype(np.uint8)


DEFAULT_WORDS = 100000  # enough reads for the histogram to estimate the PMF


def simulate_histogram(spec: CodeSpec | None, params: ErrorModelParams, burst_bits: int,
                       n_words: int = DEFAULT_WORDS, seed: int = 0,
                       workers: int = 1) -> ErrorCountHistogram:
    """Simulate n_words bursts and histogram their post-correction error counts.

    spec=None models a chip without ECC (identity transfer). With a code, the
    burst is split into contiguous datawords that never straddle the burst
    boundary, each encoded/injected/decoded independently; the burst error
    count is the sum over its datawords.
    """
    if n_words < 1:
        raise ValueError("n_words must be >= 1")
    if spec is not None and burst_bits % spec.k != 0:
        raise ValueError(f"burst_bits={burst_bits} is not a multiple of k={spec.k}")

    jobs = []
    start = 0
    chunk_index = 0
    while start < n_words:
        n = min(CHUNK, n_words - start)
        jobs.append((chunk_index, start, n))
        start += n
        chunk_index += 1

    def run(job):
        ci, st, n = job
        return _simulate_chunk(spec, params, burst_bits, ci, st, n, seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]

    counts = np.zeros(burst_bits + 1, dtype=np.int64)
    for part in parts:
        counts += part
    return ErrorCountHistogram(counts=counts, total_words=n_words, word_bits=burst_bits)


def ber_curve(spec: CodeSpec | None, params_base: ErrorModelParams, rber_grid,
              burst_bits: int, n_words: int, seed: int, workers: int = 1):
    """Observed post-correction BER at each pre-correction error rate."""
    grid = list(rber_grid)
    if not grid:
        raise ValueError("rber grid must be nonempty")
    out = []
    for rber in grid:
        params = ErrorModelParams(rber=float(rber), pattern=params_base.pattern,
                                  layout=params_base.layout)
        hist = simulate_histogram(spec, params, burst_bits, n_words, seed, workers=workers)
        out.append((float(rber), hist.observed_ber()))
    return out
