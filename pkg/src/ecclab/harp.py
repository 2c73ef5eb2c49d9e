"""Post-correction error analysis and profiler simulation.

A raw error at data bit i passes straight through the decoder on
uncorrectable patterns (a "direct" error); the decoder's own mistaken flip
lands errors on bits that never failed ("indirect" errors). This module
provides an exhaustive oracle over pre-correction error subsets (which bits
can appear at risk, and how many at once) plus round-based simulations of
the Naive / BEEP / HARP-U / HARP-A / HARP-A+BEEP profiling algorithms, all
sharing identical words, at-risk sets, data patterns, and failure draws so
coverage numbers are directly comparable.

Data-bit sets are tracked as uint64 bitmasks, which limits the fast engine
to k <= 64 datawords; the analysis oracle itself has no such limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import beep as beep_mod
from . import code as codes
from . import errmodel
from .code import CodeSpec
from .errmodel import CellLayout, DataPattern, SimDevice, counter_rng, ALL_TRUE

__all__ = [
    "NAIVE",
    "BEEP",
    "HARP_U",
    "HARP_A",
    "HARP_A_PLUS_BEEP",
    "ALL_ALGORITHMS",
    "AtRiskAnalysis",
    "ProfilerRun",
    "analyze_at_risk",
    "secondary_ecc_bound",
    "make_population",
    "run_profiler",
    "simulate_profilers",
    "rounds_to_percentile_complete",
    "case_study_ber",
]

NAIVE = "NAIVE"
BEEP = "BEEP"
HARP_U = "HARP_U"
HARP_A = "HARP_A"
HARP_A_PLUS_BEEP = "HARP_A_PLUS_BEEP"
ALL_ALGORITHMS = (NAIVE, BEEP, HARP_U, HARP_A, HARP_A_PLUS_BEEP)

ENUMERATION_CAP = 20
_STREAM_FAIL = 21
_STREAM_PRESET = errmodel._STREAM_PRESET
_U0 = np.uint64(0)
_U1 = np.uint64(1)
_CHUNK = 4096


@dataclass(frozen=True)
class AtRiskAnalysis:
    pre_set: frozenset[int]
    direct: frozenset[int]
    indirect: frozenset[int]
    post_set: frozenset[int]
    max_simultaneous: int


@dataclass
class ProfilerRun:
    algorithm: str
    rounds: int
    coverage_direct: np.ndarray          # aggregate direct coverage after each round
    coverage_indirect: np.ndarray        # aggregate indirect coverage after each round
    first_direct_complete: np.ndarray    # per word: first round covering its direct set
    discovered_direct: np.ndarray        # per word uint64 mask, end of run
    discovered_post: np.ndarray          # per word uint64 mask of profiled at-risk bits
    max_simultaneous_after: np.ndarray   # per word, with this run's profile repaired
    repair_history: np.ndarray | None = None  # (rounds+1, words) profiled-bit masks


# ---------------------------------------------------------------------------
# exhaustive at-risk oracle
# ---------------------------------------------------------------------------


def _oracle_arrays(spec: CodeSpec, pos: np.ndarray, active: np.ndarray):
    """Subset enumeration over per-word at-risk slots.

    pos: (W, m) codeword positions (-1 for inactive slots, which cannot fail).
    Returns dict with per-subset post-correction data-error masks E (W, 2^m)
    plus per-word direct/indirect/post masks and max simultaneous counts.
    """
    W, m = pos.shape
    if m > ENUMERATION_CAP:
        raise ValueError(f"at-risk set of {m} bits exceeds the enumeration cap of {ENUMERATION_CAP}")
    k = spec.k
    if k > 64:
        raise ValueError("bitmask oracle requires k <= 64")
    col_all = spec.column_ints()
    safe_pos = np.where(active, pos, 0)
    colint = np.where(active, col_all[safe_pos], 0).astype(np.int64)
    # shifts run under np.where for masked-out lanes too, so keep them < 64
    databit = np.where(active & (pos >= 0) & (pos < k),
                       _U1 << safe_pos.clip(0, 63).astype(np.uint64), _U0)
    guarded_pos = np.where(active, pos, -2)  # never matches a correction index

    n_sub = 1 << m
    syn = np.zeros((W, n_sub), dtype=np.int64)
    dm = np.zeros((W, n_sub), dtype=np.uint64)
    for b in range(m):
        half = 1 << b
        syn[:, half: 2 * half] = syn[:, :half] ^ colint[:, b: b + 1]
        dm[:, half: 2 * half] = dm[:, :half] | databit[:, b: b + 1]

    lut = spec.correction_lut()
    corr = lut[syn]
    corr_in_s = np.zeros((W, n_sub), dtype=bool)
    idx = np.arange(n_sub)
    for b in range(m):
        sel = ((idx >> b) & 1) == 1
        corr_in_s[:, sel] |= corr[:, sel] == guarded_pos[:, b: b + 1]

    corr_is_data = (corr >= 0) & (corr < k)
    corrbit = np.where(corr_is_data, _U1 << corr.clip(0, 63).astype(np.uint64), _U0)
    E = dm ^ corrbit  # removes a corrected raw error, adds a miscorrected bit

    true_direct = np.bitwise_or.reduce(databit, axis=1)
    miscbit = np.where(corr_is_data & ~corr_in_s, corrbit, _U0)
    true_indirect = np.bitwise_or.reduce(miscbit, axis=1)
    true_post = np.bitwise_or.reduce(E, axis=1)
    sizes = np.bitwise_count(E).astype(np.int64)
    return {
        "E": E,
        "direct": true_direct,
        "indirect": true_indirect,
        "post": true_post,
        "max_simultaneous": sizes.max(axis=1),
    }


def _mask_to_set(mask: int) -> frozenset[int]:
    out = set()
    mask = int(mask)
    while mask:
        b = mask & -mask
        out.add(b.bit_length() - 1)
        mask ^= b
    return frozenset(out)


def analyze_at_risk(spec: CodeSpec, pre_set, pattern=None,
                    layout: CellLayout = CellLayout(ALL_TRUE)) -> AtRiskAnalysis:
    """Exhaustively classify the post-correction risk of a pre-correction set.

    pattern=None considers every error subset (any data pattern could charge
    any combination); a fixed dataword pattern restricts failures to the
    cells its codeword charges.
    """
    positions = sorted(set(int(b) for b in pre_set))
    if any(not 0 <= b < spec.n for b in positions):
        raise ValueError("pre-correction positions must lie inside the codeword")
    if len(positions) > ENUMERATION_CAP:
        raise ValueError(f"at-risk set of {len(positions)} bits exceeds the enumeration cap "
                         f"of {ENUMERATION_CAP}")
    if not positions:
        return AtRiskAnalysis(frozenset(), frozenset(), frozenset(), frozenset(), 0)
    pos = np.array([positions], dtype=np.int64)
    if pattern is None:
        active = np.ones_like(pos, dtype=bool)
    else:
        cw = codes.encode(spec, np.asarray(pattern, dtype=np.uint8))
        mask = errmodel.charged_mask(cw, layout, 0)
        active = np.array([[bool(mask[b]) for b in positions]])
    res = _oracle_arrays(spec, pos, active)
    return AtRiskAnalysis(
        pre_set=frozenset(positions),
        direct=_mask_to_set(res["direct"][0]),
        indirect=_mask_to_set(res["indirect"][0]),
        post_set=_mask_to_set(res["post"][0]),
        max_simultaneous=int(res["max_simultaneous"][0]),
    )


def secondary_ecc_bound(spec: CodeSpec, pre_set, repaired=(), pattern=None) -> int:
    """Worst-case simultaneous post-correction errors left after repairs.

    This is the correction capability a secondary (rank-level) code needs to
    safely absorb everything the profile missed.
    """
    positions = sorted(set(int(b) for b in pre_set))
    if not positions:
        return 0
    analysis_pos = np.array([positions], dtype=np.int64)
    if pattern is None:
        active = np.ones_like(analysis_pos, dtype=bool)
    else:
        cw = codes.encode(spec, np.asarray(pattern, dtype=np.uint8))
        mask = errmodel.charged_mask(cw, CellLayout(ALL_TRUE), 0)
        active = np.array([[bool(mask[b]) for b in positions]])
    res = _oracle_arrays(spec, analysis_pos, active)
    repaired_mask = _U0
    for b in repaired:
        if int(b) < spec.k:
            repaired_mask |= _U1 << np.uint64(int(b))
    remaining = res["E"][0] & ~repaired_mask
    return int(np.bitwise_count(remaining).max())


# ---------------------------------------------------------------------------
# profiler simulation
# ---------------------------------------------------------------------------


def make_population(spec: CodeSpec, words: int, n_errors: int, p_bit: float,
                    seed: int, layout: CellLayout = CellLayout(ALL_TRUE)) -> SimDevice:
    """Device with n_errors random distinct at-risk positions per word."""
    if not 0 <= n_errors <= spec.n:
        raise ValueError("n_errors out of range")
    at_risk: dict[int, list[tuple[int, float]]] = {}
    if n_errors and p_bit > 0:
        start = 0
        chunk_index = 0
        while start < words:
            n = min(_CHUNK, words - start)
            rng = counter_rng(seed, chunk_index, 0, _STREAM_PRESET)
            order = np.argsort(rng.random((n, spec.n)), axis=1)[:, :n_errors]
            for i in range(n):
                at_risk[start + i] = [(int(pos), p_bit) for pos in sorted(order[i])]
            start += n
            chunk_index += 1
    return errmodel.make_device(spec, words, layout, seed, at_risk)


def _device_arrays(device: SimDevice):
    """Rectangular (pos, prob) arrays for the vectorized engine."""
    m = max((len(v) for v in device.at_risk.values()), default=0)
    W = device.words
    pos = np.full((W, max(m, 1)), -1, dtype=np.int64)
    prob = np.zeros((W, max(m, 1)), dtype=np.float64)
    for w, entries in device.at_risk.items():
        for slot, (p_, pr) in enumerate(entries):
            pos[w, slot] = p_
            prob[w, slot] = pr
    return pos, prob


def rounds_to_percentile_complete(run: ProfilerRun, percentile: float = 99.0) -> float:
    """Smallest round count covering the direct sets of `percentile`% of words.

    Returns inf when the run's horizon was too short.
    """
    fc = run.first_direct_complete
    need = np.ceil(len(fc) * percentile / 100.0)
    reached = fc >= 0
    if reached.sum() < need:
        return float("inf")
    done = np.sort(fc[reached])
    return float(done[int(need) - 1])


def run_profiler(algorithm: str, device: SimDevice, rounds: int,
                 pattern: DataPattern = DataPattern(errmodel.RANDOM),
                 seed: int = 0, record_repair_history: bool = False) -> ProfilerRun:
    """Simulate one profiling algorithm over the whole device population."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    runs = simulate_profilers(device, [algorithm], rounds, pattern, seed,
                              record_repair_history=record_repair_history)
    return runs[algorithm]


def simulate_profilers(device: SimDevice, algorithms, rounds: int,
                       pattern: DataPattern = DataPattern(errmodel.RANDOM),
                       seed: int = 0, record_repair_history: bool = False) -> dict[str, ProfilerRun]:
    """Simulate several profilers against identical words, draws, and patterns.

    Every algorithm sees the same per-round failure draws: a cell marked
    at-risk either would or would not fail in a given round, and each
    algorithm's written pattern only determines whether the cell is charged
    and the failure therefore manifests.
    """
    spec = device.spec
    if spec.k > 64:
        raise ValueError("profiler engine requires k <= 64 datawords")
    algorithms = list(algorithms)
    for a in algorithms:
        if a not in ALL_ALGORITHMS:
            raise ValueError(f"unknown profiling algorithm {a!r}")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")

    W = device.words
    pos, prob = _device_arrays(device)
    m = pos.shape[1]
    active = pos >= 0
    oracle = _oracle_arrays(spec, pos, active)
    true_direct = oracle["direct"]
    true_indirect = oracle["indirect"]
    total_direct = int(np.bitwise_count(true_direct).sum())
    total_indirect = int(np.bitwise_count(true_indirect).sum())

    col_all = spec.column_ints()
    colint = np.where(active, col_all[np.where(active, pos, 0)], 0).astype(np.int64)
    databit = np.where(active & (pos < spec.k),
                       _U1 << np.where(active, pos, 0).clip(0, 63).astype(np.uint64), _U0)
    lut = spec.correction_lut()
    k = spec.k

    state: dict[str, dict] = {}
    for algo in algorithms:
        st = {
            "direct": np.zeros(W, dtype=np.uint64),
            "post": np.zeros(W, dtype=np.uint64),
            "indirect_found": np.zeros(W, dtype=np.uint64),
            "first_complete": np.where(true_direct == 0, 0, -1).astype(np.int64),
            "cov_direct": np.zeros(rounds + 1, dtype=np.float64),
            "cov_indirect": np.zeros(rounds + 1, dtype=np.float64),
            "history": np.zeros((rounds + 1, W), dtype=np.uint64) if record_repair_history else None,
        }
        if algo in (BEEP, HARP_A_PLUS_BEEP):
            st["beep_states"] = [beep_mod.BeepState(spec=spec) for _ in range(W)]
            st["beep_targets"] = np.zeros(W, dtype=np.int64)
        state[algo] = st

    def profile_mask(algo: str, st: dict) -> np.ndarray:
        if algo == NAIVE or algo == BEEP:
            return st["post"]
        if algo == HARP_U:
            return st["direct"]
        return st["direct"] | st["indirect_found"]

    def update_coverage(algo: str, st: dict, r: int) -> None:
        got_d = int(np.bitwise_count(st["direct"] & true_direct).sum())
        st["cov_direct"][r] = got_d / total_direct if total_direct else 1.0
        found_ind = (profile_mask(algo, st) | st["post"]) & true_indirect
        got_i = int(np.bitwise_count(found_ind).sum())
        st["cov_indirect"][r] = got_i / total_indirect if total_indirect else 1.0
        newly = (st["first_complete"] < 0) & ((st["direct"] & true_direct) == true_direct)
        st["first_complete"][newly] = r
        if st["history"] is not None:
            st["history"][r] = profile_mask(algo, st)

    for algo in algorithms:
        update_coverage(algo, state[algo], 0)

    predict_cache: dict[tuple, int] = {}

    def predicted_indirect(direct_mask: int) -> int:
        """Data bits reachable by miscorrections of known direct-error subsets."""
        key = (direct_mask,)
        got = predict_cache.get(key)
        if got is not None:
            return got
        bits = sorted(_mask_to_set(direct_mask))
        acc = 0
        n_sub = 1 << len(bits)
        for s_mask in range(1, n_sub):
            syn = 0
            t = s_mask
            while t:
                b = t & -t
                syn ^= int(col_all[bits[b.bit_length() - 1]])
                t ^= b
            c = int(lut[syn]) if syn else -1
            if 0 <= c < k:
                in_s = any(bits[i] == c for i in range(len(bits)) if (s_mask >> i) & 1)
                if not in_s:
                    acc |= 1 << c
        predict_cache[key] = acc
        return acc

    chunk_bounds = list(range(0, W, _CHUNK)) + [W]

    for r in range(1, rounds + 1):
        # shared failure draws for this round
        u = np.empty((W, m), dtype=np.float64)
        for ci in range(len(chunk_bounds) - 1):
            lo, hi = chunk_bounds[ci], chunk_bounds[ci + 1]
            rng = counter_rng(device.seed ^ seed, ci, r, _STREAM_FAIL)
            u[lo:hi] = rng.random((hi - lo, m))
        would_fail = (u < prob) & active

        # shared data patterns (per word)
        pat_rows = np.empty((W, k), dtype=np.uint8)
        for ci in range(len(chunk_bounds) - 1):
            lo, hi = chunk_bounds[ci], chunk_bounds[ci + 1]
            pat_rows[lo:hi] = errmodel.gen_pattern_batch(pattern, k, r - 1, hi - lo, ci)

        codewords = (pat_rows.astype(np.float32) @ spec.G.astype(np.float32)).astype(np.int64) & 1
        anti = device.layout.anti_flags(np.arange(W))
        charged_cw = (codewords.astype(np.uint8) ^ anti[:, None].astype(np.uint8))
        charged_slot = np.take_along_axis(charged_cw, np.where(active, pos, 0), axis=1) == 1
        failing = would_fail & charged_slot & active

        syn = np.zeros(W, dtype=np.int64)
        dm = np.zeros(W, dtype=np.uint64)
        for b in range(m):
            syn ^= np.where(failing[:, b], colint[:, b], 0)
            dm |= np.where(failing[:, b], databit[:, b], _U0)
        corr = lut[syn]
        corr_in_s = np.zeros(W, dtype=bool)
        for b in range(m):
            corr_in_s |= failing[:, b] & (corr == pos[:, b])
        corr_is_data = (corr >= 0) & (corr < k)
        corrbit = np.where(corr_is_data, _U1 << corr.clip(0, 63).astype(np.uint64), _U0)
        post = dm ^ corrbit

        for algo in algorithms:
            st = state[algo]
            if algo == NAIVE:
                st["post"] |= post
                st["direct"] = st["post"] & true_direct
            elif algo == HARP_U:
                st["direct"] |= dm
                st["post"] |= dm
            elif algo == HARP_A:
                prev = st["direct"].copy()
                st["direct"] |= dm
                changed = np.nonzero(prev != st["direct"])[0]
                for w in changed:
                    st["indirect_found"][w] = np.uint64(predicted_indirect(int(st["direct"][w])))
                st["post"] = st["direct"] | st["indirect_found"]
            elif algo in (BEEP, HARP_A_PLUS_BEEP):
                _beep_round(spec, device, st, algo, r, u, pos, prob, pat_rows,
                            col_all, lut, true_direct, predicted_indirect)
            update_coverage(algo, st, r)

    runs = {}
    for algo in algorithms:
        st = state[algo]
        repaired = profile_mask(algo, st)
        remaining = oracle["E"] & ~repaired[:, None]
        max_sim = np.bitwise_count(remaining).max(axis=1).astype(np.int64)
        runs[algo] = ProfilerRun(
            algorithm=algo,
            rounds=rounds,
            coverage_direct=st["cov_direct"],
            coverage_indirect=st["cov_indirect"],
            first_direct_complete=st["first_complete"],
            discovered_direct=st["direct"],
            discovered_post=repaired,
            max_simultaneous_after=max_sim,
            repair_history=st["history"],
        )
    return runs


def _beep_round(spec, device, st, algo, r, u, pos, prob, pat_rows, col_all, lut,
                true_direct, predicted_indirect):
    """One round of the BEEP(-assisted) profiler, word by word.

    BEEP reads through the decoder only. Until a word shows its first
    post-correction error it is tested with the shared random pattern; after
    that, patterns are crafted around the pre-correction errors learned from
    localization. HARP-A+BEEP behaves like HARP-A until the word's direct
    set is fully identified, then switches to BEEP crafting.
    """
    k = spec.k
    W = device.words
    anti = device.layout.anti_flags(np.arange(W))
    for w in range(W):
        slots = pos[w] >= 0
        beep_state = st["beep_states"][w]
        harp_mode = algo == HARP_A_PLUS_BEEP and (st["direct"][w] & true_direct[w]) != true_direct[w]
        crafting = (algo == BEEP and st["post"][w] != 0) or \
                   (algo == HARP_A_PLUS_BEEP and not harp_mode)
        if crafting:
            beep_state.known_at_risk = set(_mask_to_set(int(st["direct"][w]))) | beep_state.known_at_risk
            target = int(st["beep_targets"][w])
            written = None
            for probe in range(k):
                cand = beep_mod.craft_pattern(beep_state, (target + probe) % k)
                if cand is not None:
                    written = cand
                    st["beep_targets"][w] = (target + probe + 1) % k
                    break
            if written is None:
                written = pat_rows[w]
        else:
            written = pat_rows[w]

        cw = codes.encode(spec, written)
        charge = cw ^ np.uint8(anti[w])
        failing_positions = [int(pos[w, b]) for b in range(pos.shape[1])
                             if slots[b] and u[w, b] < prob[w, b] and charge[pos[w, b]] == 1]
        syn = 0
        for p_ in failing_positions:
            syn ^= int(col_all[p_])
        corr = int(lut[syn]) if syn else -1
        post_mask = 0
        for p_ in failing_positions:
            if p_ < k:
                post_mask |= 1 << p_
        if 0 <= corr < k:
            post_mask ^= 1 << corr

        if harp_mode:  # HARP-A active phase: raw reads
            dm = 0
            for p_ in failing_positions:
                if p_ < k:
                    dm |= 1 << p_
            before = int(st["direct"][w])
            st["direct"][w] = np.uint64(before | dm)
            if int(st["direct"][w]) != before:
                st["indirect_found"][w] = np.uint64(predicted_indirect(int(st["direct"][w])))
            st["post"][w] = st["direct"][w] | st["indirect_found"][w]
            continue

        if post_mask:
            st["post"][w] |= np.uint64(post_mask)
            st["direct"][w] |= np.uint64(post_mask) & true_direct[w]
            observed = written.copy()
            for b in _mask_to_set(post_mask):
                observed[b] ^= 1
            found = beep_mod.localize(spec, written, observed)
            if found is not None:
                beep_state.known_at_risk.update(found)
                for p_ in found:
                    if p_ < k:
                        st["direct"][w] |= np.uint64(1 << p_)
            if algo == HARP_A_PLUS_BEEP:
                st["indirect_found"][w] = np.uint64(
                    predicted_indirect(int(st["direct"][w]))) | (st["post"][w] & ~true_direct[w])
                st["post"][w] = st["post"][w] | st["direct"][w] | st["indirect_found"][w]


def case_study_ber(spec: CodeSpec, profilers, words: int, n_errors: int, p_bit: float,
                   rounds: int, seed: int,
                   pattern: DataPattern = DataPattern(errmodel.RANDOM)) -> dict:
    """Data-retention BER left after repair, before and after secondary ECC.

    For each profiler and round: repair every bit the profiler has flagged so
    far, then report (a) the fraction of data bits for which some error
    subset still produces a post-correction error and (b) the fraction at
    risk even with a single-error-correcting secondary code per on-die word
    (only subsets yielding two or more unrepaired simultaneous errors
    survive it).
    """
    device = make_population(spec, words, n_errors, p_bit, seed)
    runs = simulate_profilers(device, profilers, rounds, pattern, seed,
                              record_repair_history=True)
    pos, _prob = _device_arrays(device)
    oracle = _oracle_arrays(spec, pos, pos >= 0)
    E = oracle["E"]
    total_bits = words * spec.k
    out = {}
    for algo, run in runs.items():
        before = np.zeros(rounds + 1, dtype=np.float64)
        after = np.zeros(rounds + 1, dtype=np.float64)
        for r in range(rounds + 1):
            repaired = run.repair_history[r][:, None]
            remaining = E & ~repaired
            at_risk = np.bitwise_or.reduce(remaining, axis=1)
            before[r] = int(np.bitwise_count(at_risk).sum()) / total_bits
            multi = remaining.copy()
            multi[np.bitwise_count(remaining) < 2] = _U0
            survivor = np.bitwise_or.reduce(multi, axis=1)
            after[r] = int(np.bitwise_count(survivor).sum()) / total_bits
        out[algo] = {"before": before, "after": after}
    return out
