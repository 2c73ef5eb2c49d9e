"""Bit-exact pre-correction error localization through miscorrections.

Given the parity-check matrix, a miscorrection at data bit j reveals the
error syndrome H[:,j] of the unknown raw codeword. The data portion of that
codeword is visible (systematic code, known written data), which leaves one
linear equation per parity bit; H has full rank, so the raw codeword - and
with it the exact pre-correction error set, parity bits included - follows
uniquely. Test patterns are crafted so that plausible failures produce
exactly such miscorrections.

True-cell convention throughout: charged cells store 1 and can only decay
1 -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import code as codes
from . import errmodel
from .code import CodeSpec
from .errmodel import SimDevice, counter_rng

__all__ = ["BeepState", "craft_pattern", "localize", "profile_codeword"]

_STREAM_CRAFT = 17


@dataclass
class BeepState:
    spec: CodeSpec
    known_at_risk: set[int] = field(default_factory=set)
    pass_index: int = 0

    def __post_init__(self):
        for pos in self.known_at_risk:
            if not 0 <= pos < self.spec.n:
                raise ValueError(f"at-risk position {pos} outside codeword")


def _bit_row(spec: CodeSpec, pos: int) -> np.ndarray:
    """Row r with r . d == codeword bit `pos` for dataword d."""
    if pos < spec.k:
        row = np.zeros(spec.k, dtype=np.uint8)
        row[pos] = 1
        return row
    return spec.H[pos - spec.k, : spec.k].copy()


def _solve_bit_constraints(spec: CodeSpec, constraints: dict[int, int],
                           fill: np.ndarray | None = None) -> np.ndarray | None:
    """Dataword satisfying codeword-bit equalities, or None if unsat.

    Unconstrained degrees of freedom take the values of `fill` (all zeros by
    default), letting callers choose between sparse and exploratory patterns.
    """
    from . import gf2

    rows = np.stack([_bit_row(spec, pos) for pos in sorted(constraints)])
    rhs = np.array([constraints[pos] for pos in sorted(constraints)], dtype=np.uint8)
    if fill is None:
        return gf2.solve(rows, rhs)
    shifted = rhs ^ (rows.astype(np.int64) @ fill & 1).astype(np.uint8)
    y = gf2.solve(rows, shifted)
    return None if y is None else fill ^ y


def craft_pattern(state: BeepState, target_bit: int) -> np.ndarray | None:
    """Craft a dataword that exposes failures of `target_bit` as miscorrections.

    The pattern charges the target and discharges its immediate codeword
    neighbors (worst-case coupling), while arranging that the target failing
    together with plausible co-failures drives the syndrome onto a discharged
    data bit, where a flip is unambiguous. Co-failures come from the known
    at-risk set once it is populated and from every other position before
    that. Any cell not yet identified may still turn out to be at risk, so
    unconstrained bits are filled from a deterministic half-charged pattern
    to keep exposing unknown cells. When the neighbor constraint cannot be
    met the crafting retries without it; None means the bit is skipped for
    this pass.
    """
    spec = state.spec
    if not 0 <= target_bit < spec.k:
        raise ValueError(f"target bit {target_bit} is not a data bit")
    col_ints = spec.column_ints()
    lut = spec.correction_lut()
    known = sorted(b for b in state.known_at_risk if b != target_bit)
    rng = counter_rng(spec.n * 131071 + spec.k, target_bit, state.pass_index, _STREAM_CRAFT)
    fill = (rng.random(spec.k) < 0.5).astype(np.uint8)
    if known:
        combos = [(m,) for m in known]
        combos += [(a, b) for i, a in enumerate(known) for b in known[i + 1:]]
    else:
        combos = [(m,) for m in range(spec.n) if m != target_bit]

    neighbor_constraints = {target_bit: 1}
    for nb in (target_bit - 1, target_bit + 1):
        if 0 <= nb < spec.n:
            neighbor_constraints[nb] = 0

    for with_neighbors in (True, False):
        base = dict(neighbor_constraints) if with_neighbors else {target_bit: 1}
        for combo in combos:
            syndrome = int(col_ints[target_bit])
            for m in combo:
                syndrome ^= int(col_ints[m])
            j = int(lut[syndrome]) if syndrome else -1
            if j < 0 or j >= spec.k or j in combo:
                continue
            wanted = dict(base)
            if any(wanted.get(m, 1) != 1 for m in combo) or wanted.get(j, 0) != 0:
                continue  # conflicts with the neighbor constraints
            for m in combo:
                wanted[m] = 1
            wanted[j] = 0
            d = _solve_bit_constraints(spec, wanted, fill)
            if d is not None:
                return d
    return None


def localize(spec: CodeSpec, written, observed,
             return_partial: bool = False) -> frozenset[int] | None:
    """Recover the exact pre-correction error set from one miscorrected read.

    Returns the set of codeword positions (parity bits included) that failed,
    or None when the read carries no usable syndrome information: identical
    words, no consistent decoder-flip candidate, or several equally
    consistent candidates (ambiguous, so nothing is learned).

    With return_partial=True, a read whose every data-flip hypothesis is
    inconsistent but that is explainable without any decoder data flip
    yields the observed differing bits: in that case they are exactly the
    raw data errors (the parity failures stay unknown and are not guessed).
    """
    written = np.asarray(written, dtype=np.uint8)
    observed = np.asarray(observed, dtype=np.uint8)
    if written.shape != (spec.k,) or observed.shape != (spec.k,):
        raise ValueError("written/observed must be k-bit datawords")
    diff = np.nonzero(written ^ observed)[0]
    if diff.size == 0:
        return None

    # a charged cell can only decay 1 -> 0, so an observed 0 -> 1 transition
    # must be the decoder's flip
    contradicting = [int(j) for j in diff if written[j] == 0]
    if len(contradicting) > 1:
        return None
    if len(contradicting) == 1:
        return _solve_flip(spec, written, observed, contradicting[0])

    # every differing bit decayed 1 -> 0, so each is equally a plausible raw
    # error; a data-flip hypothesis competes against the no-data-flip
    # explanation (raw data errors plus some parity decay that left the
    # syndrome on a parity column or zero)
    no_flip = _no_flip_consistent(spec, written, observed)
    consistent = []
    for j in (int(x) for x in diff):
        sol = _solve_flip(spec, written, observed, j)
        if sol is not None:
            consistent.append(sol)
            if len(consistent) > 1:
                return None
    if len(consistent) == 1:
        return None if no_flip else consistent[0]
    if not consistent and no_flip and return_partial:
        return frozenset(int(x) for x in diff)
    return None


def _no_flip_consistent(spec: CodeSpec, written: np.ndarray, observed: np.ndarray) -> bool:
    """Could the observation arise with the decoder never flipping a data bit?

    That happens when the raw data errors plus some decay of charged parity
    cells leave the syndrome at zero or on a parity column.
    """
    p = spec.n - spec.k
    stored = codes.encode(spec, written)
    stored_parity = stored[spec.k:]
    base = (spec.P.astype(np.int64) @ observed & 1).astype(np.uint8) ^ stored_parity
    base_int = 0
    for b in base:
        base_int = (base_int << 1) | int(b)
    charged_units = 0
    for r in range(p):
        if stored_parity[r]:
            charged_units |= 1 << (p - 1 - r)
    targets = [0] + [1 << j for j in range(p)]
    return any((base_int ^ t) & ~charged_units == 0 for t in targets)


def _solve_flip(spec: CodeSpec, written: np.ndarray, observed: np.ndarray,
                j: int) -> frozenset[int] | None:
    """Error set implied by assuming the decoder flipped data bit j."""
    p = spec.n - spec.k
    syndrome = spec.H[:, j]
    raw_data = observed.copy()
    raw_data[j] ^= 1
    # H = [P | I]: syndrome = P @ raw_data + raw_parity
    raw_parity = (syndrome ^ (spec.P.astype(np.int64) @ raw_data & 1)).astype(np.uint8)
    raw = np.concatenate([raw_data, raw_parity])
    stored = codes.encode(spec, written)
    error_positions = np.nonzero(raw ^ stored)[0]
    if error_positions.size == 0:
        return None
    # every failure must be a charged cell decaying
    if not np.all(stored[error_positions] == 1):
        return None
    return frozenset(int(x) for x in error_positions)


def profile_codeword(spec: CodeSpec, device: SimDevice, word_index: int,
                     passes: int = 1, trials_per_pattern: int = 2) -> tuple[set[int], bool]:
    """Profile one device word with crafted patterns and localization.

    Iterates over data-bit targets (multiple passes re-craft with everything
    learned so far), accumulates localized pre-correction error positions,
    and reports whether the recovered set matches the word's true at-risk
    set exactly.
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    state = BeepState(spec=spec, known_at_risk=set())
    read_index = 0
    for pass_index in range(passes):
        state.pass_index = pass_index
        for target in range(spec.k):
            pattern = craft_pattern(state, target)
            if pattern is None:
                continue
            errmodel.device_write(device, word_index, pattern)
            for _ in range(trials_per_pattern):
                observed = errmodel.device_read(device, word_index, read_index)
                read_index += 1
                if not np.array_equal(observed, pattern):
                    found = localize(spec, pattern, observed, return_partial=True)
                    if found is not None:
                        state.known_at_risk.update(found)
    return state.known_at_risk, state.known_at_risk == device.true_at_risk(word_index)
