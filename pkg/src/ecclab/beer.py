"""Recovery of an unknown standard-form SEC parity-check matrix from
miscorrection profiles.

A test pattern charges a chosen set of data bits (true-cell convention:
charged = 1). Once encoded, the codeword's charged cells are the charged
data bits plus whichever parity bits the code sets to 1. Any subset of
charged cells can fail together; a discharged data bit j is "miscorrectable"
under the pattern exactly when some failing subset's syndrome equals H
column j. Because the charged parity cells contribute unit-vector columns,
that condition reduces to membership of column j in the GF(2) span of the
charged cells' columns, which is what both the profiler and the search use.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import code as codes
from . import errmodel
from .code import CodeSpec
from .errmodel import CellLayout, ALL_TRUE, counter_rng

__all__ = [
    "ProfilePattern",
    "MiscorrectionProfile",
    "RecoveryResult",
    "charged_patterns",
    "possible_miscorrections",
    "exact_profile",
    "simulate_experiment",
    "extract_profile",
    "merge_profiles",
    "recover",
]

_STREAM_BEER = 11
ENUMERATION_CAP_LOG2 = 20


@dataclass(frozen=True)
class ProfilePattern:
    charged: frozenset[int]
    miscorrectable: frozenset[int]
    ambiguous: frozenset[int]

    def __post_init__(self):
        if self.miscorrectable & self.charged:
            raise ValueError("miscorrectable bits must lie outside the charged set")
        if self.ambiguous != self.charged:
            raise ValueError("ambiguous set must equal the charged set")


@dataclass(frozen=True)
class MiscorrectionProfile:
    k: int
    patterns: tuple[ProfilePattern, ...]

    def __post_init__(self):
        for pat in self.patterns:
            for s in (pat.charged, pat.miscorrectable):
                if any(not 0 <= b < self.k for b in s):
                    raise ValueError("profile bit index outside dataword")

    def to_json(self) -> str:
        doc = {
            "k": self.k,
            "patterns": [
                {
                    "charged": sorted(p.charged),
                    "miscorrectable": sorted(p.miscorrectable),
                    "ambiguous": sorted(p.ambiguous),
                }
                for p in self.patterns
            ],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MiscorrectionProfile":
        doc = json.loads(text)
        pats = tuple(
            ProfilePattern(
                charged=frozenset(p["charged"]),
                miscorrectable=frozenset(p["miscorrectable"]),
                ambiguous=frozenset(p["ambiguous"]),
            )
            for p in doc["patterns"]
        )
        return cls(k=int(doc["k"]), patterns=pats)


@dataclass(frozen=True)
class RecoveryResult:
    solutions: tuple[CodeSpec, ...]
    unique: bool
    nodes: int
    elapsed: float
    diagnosis: str = ""


def charged_patterns(k: int, weights) -> list[np.ndarray]:
    """All datawords whose popcount is in `weights` (charged bits written as 1)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ws = sorted(set(weights))
    if any(w < 0 or w > k for w in ws):
        raise ValueError("pattern weights must lie in [0, k]")
    out = []
    for w in ws:
        for positions in combinations(range(k), w):
            v = np.zeros(k, dtype=np.uint8)
            v[list(positions)] = 1
            out.append(v)
    return out


class _SpanBasis:
    """Row-echelon basis of syndrome ints for O(p) membership checks."""

    def __init__(self, vectors=()):
        self.by_lead: dict[int, int] = {}
        for v in vectors:
            self.add(v)

    def add(self, v: int) -> None:
        v = self.reduce(v)
        if v:
            self.by_lead[v.bit_length() - 1] = v

    def reduce(self, v: int) -> int:
        while v:
            b = self.by_lead.get(v.bit_length() - 1)
            if b is None:
                break
            v ^= b
        return v

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0


def _charged_column_span(col_ints, charged_positions) -> _SpanBasis:
    """Span of the charged cells' columns (data columns plus parity units)."""
    return _SpanBasis(int(col_ints[pos]) for pos in charged_positions)


def _codeword_charged(spec: CodeSpec, pattern: np.ndarray, layout: CellLayout,
                      word_index: int) -> np.ndarray:
    cw = codes.encode(spec, pattern)
    return errmodel.charged_mask(cw, layout, word_index)


def possible_miscorrections(spec: CodeSpec, pattern, layout: CellLayout = CellLayout(ALL_TRUE),
                            word_index: int = 0, method: str = "auto",
                            cap_log2: int = ENUMERATION_CAP_LOG2) -> tuple[set[int], set[int]]:
    """Which data bits can miscorrect under this pattern, and which are ambiguous.

    Enumerates error subsets of the charged cells directly when their count is
    within the cap; beyond it (or with method="span") uses the equivalent
    span-membership shortcut. method="enumerate" rejects charged sets over
    the cap instead of falling back.
    """
    pattern = np.asarray(pattern, dtype=np.uint8)
    if pattern.size != spec.k:
        raise ValueError(f"pattern length {pattern.size} != k={spec.k}")
    mask = _codeword_charged(spec, pattern, layout, word_index)
    charged = np.nonzero(mask)[0]
    ambiguous = {int(b) for b in charged if b < spec.k}
    col_ints = spec.column_ints()

    if method not in ("auto", "enumerate", "span"):
        raise ValueError(f"unknown method {method!r}")
    use_enum = method == "enumerate" or (method == "auto" and charged.size <= cap_log2)
    if method == "enumerate" and charged.size > cap_log2:
        raise ValueError(
            f"charged set of {charged.size} cells exceeds the enumeration cap "
            f"of 2^{cap_log2} subsets")

    discharged_data = [j for j in range(spec.k) if not mask[j]]
    if use_enum:
        syn = _subset_syndromes(col_ints[charged])
        sizes = _subset_sizes(charged.size)
        reachable = set(syn[sizes >= 2].tolist())
        misc = {j for j in discharged_data if int(col_ints[j]) in reachable}
    else:
        basis = _charged_column_span(col_ints, charged)
        misc = {j for j in discharged_data if basis.contains(int(col_ints[j]))}
    return misc, ambiguous


def _subset_syndromes(cols: np.ndarray) -> np.ndarray:
    """Syndrome of every subset of the given columns, indexed by bitmask."""
    m = cols.size
    syn = np.zeros(1 << m, dtype=np.int64)
    for b in range(m):
        half = 1 << b
        syn[half: half * 2] = syn[:half] ^ int(cols[b])
    return syn


def _subset_sizes(m: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << m, dtype=np.uint64)).astype(np.int64)


def exact_profile(spec: CodeSpec, patterns, layout: CellLayout = CellLayout(ALL_TRUE)) -> MiscorrectionProfile:
    """Noise-free miscorrection profile straight from the enumeration oracle."""
    entries = []
    for pat in patterns:
        misc, amb = possible_miscorrections(spec, pat, layout)
        entries.append(ProfilePattern(charged=frozenset(amb),
                                      miscorrectable=frozenset(misc),
                                      ambiguous=frozenset(amb)))
    return MiscorrectionProfile(k=spec.k, patterns=tuple(entries))


def simulate_experiment(spec: CodeSpec, patterns, rber: float, trials: int, seed: int,
                        layout: CellLayout = CellLayout(ALL_TRUE)):
    """Yield (pattern, observed post-correction words) for each test pattern.

    Models the retention experiment: every charged cell of every trial word
    fails independently with probability rber; reads come back through the
    decoder. Deterministic in (seed, pattern index).
    """
    for idx, pat in enumerate(patterns):
        pat = np.asarray(pat, dtype=np.uint8)
        cw = codes.encode(spec, pat)
        mask = errmodel.charged_mask(cw, layout, 0)
        rng = counter_rng(seed, idx, 0, _STREAM_BEER)
        flips = (rng.random((trials, spec.n)) < rber) & (mask[None, :] == 1)
        received = cw[None, :] ^ flips.astype(np.uint8)
        observed, _, _ = codes.decode_many(spec, received)
        yield pat, observed


def extract_profile(experiment, threshold: float,
                    layout: CellLayout = CellLayout(ALL_TRUE)) -> MiscorrectionProfile:
    """Threshold-filter observed post-correction errors into a profile.

    `experiment` yields (pattern, observed words) pairs; a bit outside the
    pattern's charged set is marked miscorrectable when its error frequency
    exceeds threshold x trials. Errors inside the charged set are ambiguous.
    """
    entries = []
    k = None
    for pat, observed in experiment:
        pat = np.asarray(pat, dtype=np.uint8)
        k = pat.size
        observed = np.asarray(observed, dtype=np.uint8)
        trials = observed.shape[0]
        freq = (observed ^ pat[None, :]).sum(axis=0, dtype=np.int64)
        charged = frozenset(int(b) for b in np.nonzero(pat if layout.kind == ALL_TRUE else 1 - pat)[0])
        misc = frozenset(int(j) for j in range(k)
                         if j not in charged and freq[j] > threshold * trials)
        entries.append(ProfilePattern(charged=charged, miscorrectable=misc, ambiguous=charged))
    if k is None:
        raise ValueError("experiment yielded no patterns")
    return MiscorrectionProfile(k=k, patterns=tuple(entries))


def merge_profiles(profiles) -> MiscorrectionProfile:
    """Union profiles from multiple devices; conflicting observations are rejected."""
    profiles = list(profiles)
    if not profiles:
        raise ValueError("nothing to merge")
    k = profiles[0].k
    seen: dict[frozenset, ProfilePattern] = {}
    for prof in profiles:
        if prof.k != k:
            raise ValueError("profiles disagree on dataword length")
        for pat in prof.patterns:
            prev = seen.get(pat.charged)
            if prev is None:
                seen[pat.charged] = pat
            elif prev.miscorrectable != pat.miscorrectable:
                raise ValueError(
                    f"conflicting observations for charged set {sorted(pat.charged)}")
    ordered = tuple(seen[c] for c in sorted(seen, key=lambda s: (len(s), sorted(s))))
    return MiscorrectionProfile(k=k, patterns=ordered)


# ---------------------------------------------------------------------------
# constraint search
# ---------------------------------------------------------------------------


def _pattern_span(cols: list[int], charged) -> _SpanBasis:
    """Span of a pattern's charged cells: its data columns plus the unit
    columns of whichever parity cells the encode charges (the set bits of
    the data columns' XOR)."""
    basis = _SpanBasis(cols[b] for b in charged)
    parity_value = 0
    for b in charged:
        parity_value ^= cols[b]
    while parity_value:
        low = parity_value & -parity_value
        basis.add(low)
        parity_value ^= low
    return basis


def _general_pattern_ok(cols: list[int], pattern: ProfilePattern, assigned_upto: int) -> bool:
    """Exact span check of one pattern against fully assigned charged columns."""
    basis = _pattern_span(cols, pattern.charged)
    for j in range(assigned_upto):
        if j in pattern.charged:
            continue
        if basis.contains(cols[j]) != (j in pattern.miscorrectable):
            return False
    return True


def recover(profile: MiscorrectionProfile, exhaustive: bool = False,
            parity_bits: int | None = None, max_solutions: int | None = None) -> RecoveryResult:
    """Search for every standard-form SEC code matching the profile.

    Data columns are assigned in increasing bit order, candidate syndromes in
    increasing integer value, so solutions come out in a deterministic order.
    With exhaustive=False the search stops after two solutions, which is
    enough to decide uniqueness.

    Parity-bit order is not externally observable: relabeling the parity rows
    of a solution yields an equivalent code with an identical profile. The
    search therefore counts solutions up to that relabeling, admitting only
    the canonical representative whose parity rows appear in first-use order
    across the data columns.
    """
    t0 = time.perf_counter()
    k = profile.k
    p = parity_bits if parity_bits is not None else codes.hamming_parity_bits(k)
    pool = [v for v in range(1, 1 << p) if bin(v).count("1") >= 2]
    if len(pool) < k:
        raise ValueError(f"{p} parity bits admit only {len(pool)} data columns, need {k}")
    limit = max_solutions if max_solutions is not None else (None if exhaustive else 2)

    one_charged: dict[int, ProfilePattern] = {}
    pair_charged: list[ProfilePattern] = []
    general: list[ProfilePattern] = []
    for pat in profile.patterns:
        if len(pat.charged) == 0:
            if pat.miscorrectable:
                return RecoveryResult((), False, 0, time.perf_counter() - t0,
                                      "profile inconsistent with any standard-form SEC code: "
                                      "an all-discharged pattern cannot miscorrect")
            continue
        if len(pat.charged) == 1:
            one_charged[next(iter(pat.charged))] = pat
        elif len(pat.charged) == 2:
            pair_charged.append(pat)
        else:
            general.append(pat)

    # patterns checked against bit m: those fully charged below m, plus those
    # whose largest charged bit is m (which then constrain all earlier bits)
    pairs_watch_lt = [[] for _ in range(k)]
    pairs_watch_eq = [[] for _ in range(k)]
    for pat in pair_charged:
        hi = max(pat.charged)
        for m in range(hi + 1, k):
            pairs_watch_lt[m].append(pat)
        pairs_watch_eq[hi].append(pat)
    general_watch_eq = [[] for _ in range(k)]
    general_watch_lt = [[] for _ in range(k)]
    for pat in general:
        hi = max(pat.charged)
        general_watch_eq[hi].append(pat)
        for m in range(hi + 1, k):
            general_watch_lt[m].append(pat)

    # weight feasibility from 1-CHARGED rows: a column of weight w can explain
    # at most 2^w - w - 1 miscorrectable bits
    min_weight = [2] * k
    for b, pat in one_charged.items():
        need = len(pat.miscorrectable)
        w = 2
        while (1 << w) - w - 1 < need:
            w += 1
        min_weight[b] = w

    def pair_ok(pat: ProfilePattern, cols: list[int], j: int) -> bool:
        a, b = sorted(pat.charged)
        m = cols[a] ^ cols[b]
        off = ~m
        cj = cols[j]
        possible = (cj & off) == 0 or ((cj ^ cols[a]) & off) == 0
        return possible == (j in pat.miscorrectable)

    cols: list[int] = [0] * k
    used: set[int] = set()
    solutions: list[CodeSpec] = []
    nodes = 0

    def ok_after_assign(j: int) -> bool:
        cj = cols[j]
        for i in range(j):
            pat = one_charged.get(i)
            if pat is not None and ((cj & ~cols[i]) == 0) != (j in pat.miscorrectable):
                return False
        pat_j = one_charged.get(j)
        if pat_j is not None:
            for i in range(j):
                if ((cols[i] & ~cj) == 0) != (i in pat_j.miscorrectable):
                    return False
        for pat in pairs_watch_lt[j]:
            if not pair_ok(pat, cols, j):
                return False
        for pat in pairs_watch_eq[j]:
            for i in range(j + 1):
                if i not in pat.charged and not pair_ok(pat, cols, i):
                    return False
        for pat in general_watch_lt[j]:
            if max(pat.charged) < j:  # fully assigned: constrain the new bit
                if _pattern_span(cols, pat.charged).contains(cj) != (j in pat.miscorrectable):
                    return False
        for pat in general_watch_eq[j]:
            if not _general_pattern_ok(cols, pat, j + 1):
                return False
        return True

    def verify(spec: CodeSpec) -> bool:
        for pat in profile.patterns:
            v = np.zeros(k, dtype=np.uint8)
            v[sorted(pat.charged)] = 1
            misc, _ = possible_miscorrections(spec, v, method="span")
            if misc != set(pat.miscorrectable):
                return False
        return True

    def canonical_split(cand: int, atoms: tuple) -> tuple | None:
        """Refine the interchangeable-row partition by cand, or None unless
        cand is the canonical representative under the remaining symmetry.

        Rows inside an atom are mutually relabelable so far; the canonical
        choice charges the leading rows of each atom. Row r maps to bit
        p-1-r, so within an atom [lo, hi) the charged bits must form the
        high-order contiguous block.
        """
        out = []
        for lo, hi in atoms:
            width = hi - lo
            mask = ((1 << width) - 1) << (p - hi)
            x = cand & mask
            if x:
                t = bin(x).count("1")
                if x != ((1 << t) - 1) << (p - lo - t):
                    return None
                if t > 1:
                    out.append((lo, lo + t))
                if hi - (lo + t) > 1:
                    out.append((lo + t, hi))
            elif width > 1:
                out.append((lo, hi))
        return tuple(out)

    def search(j: int, atoms: tuple) -> bool:
        """Returns True when the solution limit was hit."""
        nonlocal nodes
        if j == k:
            P = np.stack([codes._int_to_bits(c, p) for c in cols], axis=1)
            spec = codes.from_parity(P, d=3, name=f"({k + p},{k},3)")
            if verify(spec):
                solutions.append(spec)
                if limit is not None and len(solutions) >= limit:
                    return True
            return False
        wmin = min_weight[j]
        for cand in pool:
            if cand in used or bin(cand).count("1") < wmin:
                continue
            new_atoms = canonical_split(cand, atoms)
            if new_atoms is None:
                continue
            cols[j] = cand
            nodes += 1
            used.add(cand)
            if ok_after_assign(j):
                if search(j + 1, new_atoms):
                    used.discard(cand)
                    return True
            used.discard(cand)
        return False

    aborted = search(0, ((0, p),))
    elapsed = time.perf_counter() - t0
    diagnosis = "" if solutions else \
        "profile inconsistent with any standard-form SEC code"
    unique = len(solutions) == 1 and not aborted
    return RecoveryResult(tuple(solutions), unique, nodes, elapsed, diagnosis)
