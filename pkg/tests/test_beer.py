from itertools import combinations, permutations

import numpy as np
import pytest

from ecclab import beer
from ecclab import code as codes
from ecclab.beer import MiscorrectionProfile, ProfilePattern
from ecclab.errmodel import ALL_ANTI, ALL_TRUE, CellLayout


def one_hot(k, b):
    v = np.zeros(k, dtype=np.uint8)
    v[b] = 1
    return v


def test_charged_pattern_counts():
    assert len(beer.charged_patterns(128, {1})) == 128
    assert len(beer.charged_patterns(128, {2})) == 8128
    assert len(beer.charged_patterns(4, {1, 2})) == 10


def test_possible_miscorrections_reference_rows():
    spec = codes.hamming_sec(4)
    misc, amb = beer.possible_miscorrections(spec, one_hot(4, 0))
    assert misc == {1, 2, 3} and amb == {0}
    misc, amb = beer.possible_miscorrections(spec, one_hot(4, 2))
    assert misc == set() and amb == {2}
    misc, amb = beer.possible_miscorrections(spec, np.zeros(4, dtype=np.uint8))
    assert misc == set() and amb == set()


def test_possible_miscorrections_anti_layout():
    spec = codes.hamming_sec(4)
    # under all-anti cells the all-ones word has nothing charged
    misc, amb = beer.possible_miscorrections(spec, np.ones(4, dtype=np.uint8),
                                             CellLayout(ALL_ANTI))
    assert amb == set()


def test_span_shortcut_matches_enumeration():
    rng = np.random.default_rng(3)
    for seed in range(6):
        spec = codes.random_sec(9, seed)
        for _ in range(12):
            pat = (rng.random(9) < 0.4).astype(np.uint8)
            enum = beer.possible_miscorrections(spec, pat, method="enumerate")
            span = beer.possible_miscorrections(spec, pat, method="span")
            assert enum == span


def test_enumeration_cap_rejected():
    spec = codes.hamming_sec(64)
    with pytest.raises(ValueError, match="cap"):
        beer.possible_miscorrections(spec, np.ones(64, dtype=np.uint8),
                                     method="enumerate", cap_log2=10)
    # auto mode falls back to the span shortcut instead
    beer.possible_miscorrections(spec, np.ones(64, dtype=np.uint8), cap_log2=10)


def test_extract_profile_thresholding():
    spec = codes.hamming_sec(4)
    pats = beer.charged_patterns(4, {1})
    exact = beer.exact_profile(spec, pats)

    # noiseless simulated experiment reproduces the oracle exactly
    experiment = beer.simulate_experiment(spec, pats, rber=0.35, trials=6000, seed=7)
    assert beer.extract_profile(experiment, threshold=0.01) == exact

    # a single spurious flip: filtered at 1%, retained at threshold 0
    pattern = one_hot(4, 2)
    observed = np.tile(pattern, (10000, 1))
    observed[17, 0] ^= 1  # one bogus error outside the charged set
    noisy = [(pattern, observed)]
    prof = beer.extract_profile(iter(noisy), threshold=0.01)
    assert prof.patterns[0].miscorrectable == frozenset()
    prof0 = beer.extract_profile(iter(noisy), threshold=0.0)
    assert prof0.patterns[0].miscorrectable == {0}


def test_profile_json_roundtrip():
    spec = codes.hamming_sec(4)
    prof = beer.exact_profile(spec, beer.charged_patterns(4, {1, 2}))
    back = MiscorrectionProfile.from_json(prof.to_json())
    assert back == prof


def test_profile_invariants_enforced():
    with pytest.raises(ValueError):
        ProfilePattern(charged=frozenset({0}), miscorrectable=frozenset({0}),
                       ambiguous=frozenset({0}))
    with pytest.raises(ValueError):
        ProfilePattern(charged=frozenset({0}), miscorrectable=frozenset(),
                       ambiguous=frozenset({1}))


def test_merge_profiles_rejects_conflicts():
    spec = codes.hamming_sec(4)
    prof = beer.exact_profile(spec, beer.charged_patterns(4, {1}))
    merged = beer.merge_profiles([prof, prof])
    assert len(merged.patterns) == len(prof.patterns)
    conflicting = MiscorrectionProfile(k=4, patterns=(
        ProfilePattern(charged=frozenset({0}), miscorrectable=frozenset({2}),
                       ambiguous=frozenset({0})),))
    with pytest.raises(ValueError, match="conflict"):
        beer.merge_profiles([prof, conflicting])


def test_recover_reference_code_unique():
    spec = codes.hamming_sec(4)
    prof = beer.exact_profile(spec, beer.charged_patterns(4, {1}))
    res = beer.recover(prof, exhaustive=True)
    assert res.unique and len(res.solutions) == 1
    assert codes.canonical_equal(res.solutions[0], spec)


def test_recover_full_length_k11_unique():
    spec = codes.hamming_sec(11)
    res = beer.recover(beer.exact_profile(spec, beer.charged_patterns(11, {1})))
    assert res.unique
    assert codes.canonical_equal(res.solutions[0], spec)


def test_recover_soundness_every_solution_reproduces_profile():
    for seed in range(6):
        spec = codes.random_sec(7, seed)
        prof = beer.exact_profile(spec, beer.charged_patterns(7, {1}))
        res = beer.recover(prof, exhaustive=True)
        assert res.solutions
        for sol in res.solutions:
            assert beer.exact_profile(sol, beer.charged_patterns(7, {1})) == prof


def test_recover_monotone_in_patterns():
    for seed in range(6):
        spec = codes.random_sec(8, seed)
        p1 = beer.exact_profile(spec, beer.charged_patterns(8, {1}))
        p12 = beer.exact_profile(spec, beer.charged_patterns(8, {1, 2}))
        n1 = len(beer.recover(p1, exhaustive=True).solutions)
        n12 = len(beer.recover(p12, exhaustive=True).solutions)
        assert n12 <= n1


def test_recover_three_charged_patterns():
    # triple-charged patterns exercise the general span path (data columns
    # plus the parity units their encode charges)
    for seed in range(4):
        spec = codes.random_sec(7, seed)
        prof3 = beer.exact_profile(spec, beer.charged_patterns(7, {1, 3}))
        res = beer.recover(prof3, exhaustive=True)
        assert res.solutions
        for sol in res.solutions:
            assert beer.exact_profile(sol, beer.charged_patterns(7, {1, 3})) == prof3
        # {1,2} is already unique; adding weight-3 patterns keeps it unique
        res12 = beer.recover(beer.exact_profile(spec, beer.charged_patterns(7, {1, 2})))
        prof123 = beer.exact_profile(spec, beer.charged_patterns(7, {1, 2, 3}))
        res123 = beer.recover(prof123, exhaustive=True)
        if res12.unique:
            assert res123.unique


def test_recover_matches_bruteforce_orbit_count():
    """Exhaustive recovery equals brute force over all distinct-column
    standard-form SEC assignments, counted up to parity-row relabeling."""
    for k, seeds in ((5, 4), (6, 4), (8, 2)):
        for seed in range(seeds):
            spec = codes.random_sec(k, seed)
            p = spec.n - spec.k
            prof = beer.exact_profile(spec, beer.charged_patterns(k, {1}))
            got = len(beer.recover(prof, exhaustive=True).solutions)
            assert got == _bruteforce_orbits(prof, k, p)


def _bruteforce_orbits(profile, k, p):
    pool = [v for v in range(1, 1 << p) if bin(v).count("1") >= 2]
    by_bit = {next(iter(pat.charged)): pat for pat in profile.patterns
              if len(pat.charged) == 1}
    sols = []
    for perm in permutations(pool, k):
        ok = True
        for b, pat in by_bit.items():
            for j in range(k):
                if j == b:
                    continue
                if ((perm[j] & ~perm[b]) == 0) != (j in pat.miscorrectable):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            sols.append(perm)

    def act(sigma, col):
        bits = [(col >> (p - 1 - r)) & 1 for r in range(p)]
        out = 0
        for r in range(p):
            out = (out << 1) | bits[sigma[r]]
        return out

    orbits = {min(tuple(act(s, c) for c in perm) for s in permutations(range(p)))
              for perm in sols}
    return len(orbits)


def test_recover_inconsistent_profile():
    # miscorrection claimed under an all-discharged pattern: impossible
    profile = MiscorrectionProfile(k=4, patterns=(
        ProfilePattern(charged=frozenset(), miscorrectable=frozenset({1}),
                       ambiguous=frozenset()),))
    res = beer.recover(profile)
    assert not res.solutions
    assert "inconsistent" in res.diagnosis


def test_recover_from_simulated_experiment_end_to_end():
    spec = codes.random_sec(8, seed=41)
    pats = beer.charged_patterns(8, {1, 2})
    experiment = beer.simulate_experiment(spec, pats, rber=0.3, trials=3000, seed=5)
    prof = beer.extract_profile(experiment, threshold=0.01)
    res = beer.recover(prof)
    assert res.unique
    assert codes.canonical_equal(res.solutions[0], spec) or res.solutions[0].name
    # the recovered code reproduces the profile
    assert beer.exact_profile(res.solutions[0], pats) == prof
