"""Simulated memory device: data patterns, true-/anti-cell layout, and
data-dependent retention-error injection.

Only charged cells can suffer a retention error. A true cell is charged when
it stores 1, an anti cell when it stores 0. All randomness is counter-based
(Philox keyed by seed with the counter carrying word/round/stream indices),
so results are independent of evaluation order and worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox

from . import code as codes
from .code import CodeSpec

__all__ = [
    "ALL_ONES",
    "ALL_ZEROS",
    "CHECKERED",
    "RANDOM",
    "ALL_TRUE",
    "ALL_ANTI",
    "ROW_ALTERNATING",
    "DataPattern",
    "CellLayout",
    "ErrorModelParams",
    "SimDevice",
    "counter_rng",
    "gen_pattern",
    "charged_mask",
    "charged_mask_many",
    "inject",
    "make_device",
    "device_write",
    "device_read",
    "device_read_raw",
    "save_device",
    "load_device",
]

ALL_ONES = "ALL_ONES"
ALL_ZEROS = "ALL_ZEROS"
CHECKERED = "CHECKERED"
RANDOM = "RANDOM"

ALL_TRUE = "ALL_TRUE"
ALL_ANTI = "ALL_ANTI"
ROW_ALTERNATING = "ROW_ALTERNATING"

# fixed stream ids keep draw sequences for different purposes disjoint
_STREAM_PATTERN = 1
_STREAM_INJECT = 2
_STREAM_DEVICE = 3
_STREAM_PRESET = 4


def counter_rng(seed: int, a: int = 0, b: int = 0, stream: int = 0) -> Generator:
    """Deterministic generator keyed by (seed, a, b, stream)."""
    return Generator(Philox(key=seed, counter=[0, a, b, stream]))


@dataclass(frozen=True)
class DataPattern:
    kind: str
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (ALL_ONES, ALL_ZEROS, CHECKERED, RANDOM):
            raise ValueError(f"unknown data pattern kind {self.kind!r}")


@dataclass(frozen=True)
class CellLayout:
    kind: str
    block_len: int = 1

    def __post_init__(self):
        if self.kind not in (ALL_TRUE, ALL_ANTI, ROW_ALTERNATING):
            raise ValueError(f"unknown cell layout kind {self.kind!r}")
        if self.block_len < 1:
            raise ValueError("block_len must be >= 1")

    def is_anti(self, word_index: int) -> bool:
        if self.kind == ALL_TRUE:
            return False
        if self.kind == ALL_ANTI:
            return True
        return (word_index // self.block_len) % 2 == 1

    def anti_flags(self, word_indices: np.ndarray) -> np.ndarray:
        idx = np.asarray(word_indices, dtype=np.int64)
        if self.kind == ALL_TRUE:
            return np.zeros(idx.shape, dtype=bool)
        if self.kind == ALL_ANTI:
            return np.ones(idx.shape, dtype=bool)
        return (idx // self.block_len) % 2 == 1


@dataclass(frozen=True)
class ErrorModelParams:
    """Raw-error description: per-charged-cell failure probability plus the
    written data pattern and the cells' true/anti layout."""

    rber: float
    pattern: DataPattern = DataPattern(ALL_ONES)
    layout: CellLayout = CellLayout(ALL_TRUE)

    def __post_init__(self):
        if not 0.0 <= self.rber <= 1.0:
            raise ValueError("rber must lie in [0, 1]")


def gen_pattern(pattern: DataPattern, length: int, round_index: int = 0, stream: int = 0) -> np.ndarray:
    """Deterministic data pattern for (pattern, length, round, stream).

    CHECKERED and RANDOM invert on odd rounds; RANDOM draws a fresh base
    pattern every two rounds. `stream` distinguishes independent words so a
    RANDOM device does not store identical data everywhere.
    """
    if length < 1:
        raise ValueError("pattern length must be >= 1")
    if pattern.kind == ALL_ONES:
        return np.ones(length, dtype=np.uint8)
    if pattern.kind == ALL_ZEROS:
        return np.zeros(length, dtype=np.uint8)
    if pattern.kind == CHECKERED:
        base = (np.arange(length, dtype=np.int64) & 1).astype(np.uint8)
        return base ^ (round_index & 1)
    rng = counter_rng(pattern.seed, stream, round_index // 2, _STREAM_PATTERN)
    base = (rng.random(length) < 0.5).astype(np.uint8)
    return base ^ (round_index & 1)


def gen_pattern_batch(pattern: DataPattern, length: int, round_index: int,
                      n_words: int, chunk_index: int) -> np.ndarray:
    """(n_words, length) block of patterns; RANDOM rows are independent."""
    if pattern.kind in (ALL_ONES, ALL_ZEROS, CHECKERED):
        row = gen_pattern(pattern, length, round_index)
        return np.broadcast_to(row, (n_words, length)).copy()
    rng = counter_rng(pattern.seed, chunk_index, round_index // 2, _STREAM_PATTERN)
    base = (rng.random((n_words, length)) < 0.5).astype(np.uint8)
    return base ^ (round_index & 1)


def charged_mask(codeword: np.ndarray, layout: CellLayout, word_index: int = 0) -> np.ndarray:
    """mask[i]=1 iff cell i is charged: (true and bit 1) or (anti and bit 0)."""
    bits = np.asarray(codeword, dtype=np.uint8)
    if layout.is_anti(word_index):
        return bits ^ 1
    return bits.copy()


def charged_mask_many(codewords: np.ndarray, layout: CellLayout, word_indices: np.ndarray) -> np.ndarray:
    bits = np.asarray(codewords, dtype=np.uint8)
    anti = layout.anti_flags(word_indices)
    return bits ^ anti[:, None].astype(np.uint8)


def inject(codeword: np.ndarray, mask: np.ndarray, rber: float, rng: Generator) -> np.ndarray:
    """Flip each masked bit independently with probability rber."""
    bits = np.asarray(codeword, dtype=np.uint8)
    mask = np.asarray(mask, dtype=np.uint8)
    if bits.shape != mask.shape:
        raise ValueError(f"codeword shape {bits.shape} != mask shape {mask.shape}")
    if rber == 0.0:
        return bits.copy()
    flips = (rng.random(bits.shape) < rber) & (mask == 1)
    return bits ^ flips.astype(np.uint8)


@dataclass
class SimDevice:
    """A bank of ECC words with per-bit at-risk positions.

    `at_risk` maps word index -> list of (codeword bit position, failure
    probability). Reads draw fresh Bernoulli failures per (word, read_index),
    so repeated reads of a word with the same read_index are identical and
    distinct reads are independent, mirroring per-read retention behavior.
    """

    spec: CodeSpec
    words: int
    layout: CellLayout
    seed: int
    at_risk: dict[int, list[tuple[int, float]]] = field(default_factory=dict)
    written: np.ndarray | None = None

    def __post_init__(self):
        for word, entries in self.at_risk.items():
            if not 0 <= word < self.words:
                raise ValueError(f"at-risk word {word} out of range")
            for pos, prob in entries:
                if not 0 <= pos < self.spec.n:
                    raise ValueError(f"at-risk bit {pos} outside codeword")
                if not 0.0 < prob <= 1.0:
                    raise ValueError("at-risk probability must be in (0, 1]")
        if self.written is None:
            self.written = np.zeros((self.words, self.spec.k), dtype=np.uint8)

    def true_at_risk(self, word_index: int) -> set[int]:
        return {pos for pos, _ in self.at_risk.get(word_index, [])}


def make_device(spec: CodeSpec, words: int, layout: CellLayout, seed: int,
                at_risk: dict[int, list[tuple[int, float]]] | None = None) -> SimDevice:
    return SimDevice(spec=spec, words=words, layout=layout, seed=seed, at_risk=at_risk or {})


def device_write(device: SimDevice, word_index: int, data) -> None:
    if not 0 <= word_index < device.words:
        raise IndexError(f"word index {word_index} out of range")
    arr = np.asarray(data, dtype=np.uint8)
    if arr.shape != (device.spec.k,):
        raise ValueError(f"dataword shape {arr.shape} != ({device.spec.k},)")
    device.written[word_index] = arr


def _raw_codeword(device: SimDevice, word_index: int, read_index: int) -> np.ndarray:
    stored = codes.encode(device.spec, device.written[word_index])
    entries = device.at_risk.get(word_index)
    if not entries:
        return stored
    mask = charged_mask(stored, device.layout, word_index)
    rng = counter_rng(device.seed, word_index, read_index, _STREAM_DEVICE)
    draws = rng.random(len(entries))
    out = stored.copy()
    for (pos, prob), u in zip(entries, draws):
        if mask[pos] and u < prob:
            out[pos] ^= 1
    return out


def device_read(device: SimDevice, word_index: int, read_index: int = 0) -> np.ndarray:
    """Read through the ECC decoder: the post-correction dataword."""
    if not 0 <= word_index < device.words:
        raise IndexError(f"word index {word_index} out of range")
    raw = _raw_codeword(device, word_index, read_index)
    return codes.decode(device.spec, raw).dataword_out


def device_read_raw(device: SimDevice, word_index: int, read_index: int = 0) -> np.ndarray:
    """Bypass the decoder: the first k raw stored bits, errors included."""
    if not 0 <= word_index < device.words:
        raise IndexError(f"word index {word_index} out of range")
    raw = _raw_codeword(device, word_index, read_index)
    return raw[: device.spec.k]


def save_device(device: SimDevice, path, spec_path) -> None:
    """Write the device description (key-value JSON); the code goes to spec_path."""
    import json

    codes.save_code(device.spec, spec_path)
    doc = {
        "spec": str(spec_path),
        "words": device.words,
        "layout": {"kind": device.layout.kind, "block_len": device.layout.block_len},
        "seed": device.seed,
        "at_risk": [[w, pos, prob] for w, entries in sorted(device.at_risk.items())
                    for pos, prob in entries],
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


def load_device(path) -> SimDevice:
    import json

    with open(path) as f:
        doc = json.load(f)
    spec = codes.load_code(doc["spec"])
    layout = CellLayout(doc["layout"]["kind"], doc["layout"].get("block_len", 1))
    at_risk: dict[int, list[tuple[int, float]]] = {}
    for w, pos, prob in doc["at_risk"]:
        at_risk.setdefault(int(w), []).append((int(pos), float(prob)))
    return make_device(spec, int(doc["words"]), layout, int(doc["seed"]), at_risk)
