"""Why profiling through the decoder is slow, and what raw-read access buys.

A few raw at-risk cells fan out into exponentially many bits at risk of
post-correction error, each visible only when a specific combination of raw
errors lines up. Profilers that watch post-correction data (Naive, BEEP)
therefore crawl; a profiler with a decode-bypass path (HARP) sees every raw
data error directly, and after it has them all, at most one indirect error
can appear at a time - exactly what a single-error secondary code absorbs.
"""

import numpy as np

from ecclab import code as codes, errmodel, harp
from ecclab.errmodel import RANDOM, DataPattern

spec = codes.hamming_sec(64)

# the amplification table: n raw at-risk bits -> up to 2^n - 1 post-correction
print("raw at-risk bits -> worst-case bits at risk after the decoder")
rng = np.random.default_rng(0)
for n in (1, 2, 3, 4):
    worst = 0
    for trial in range(200):
        pre = rng.choice(spec.n, size=n, replace=False)
        worst = max(worst, len(harp.analyze_at_risk(spec, pre).post_set))
    print(f"  n={n}: observed worst {worst}   (bound {2**n - 1})")

device = harp.make_population(spec, 4000, n_errors=3, p_bit=0.5, seed=42)
runs = harp.simulate_profilers(device, [harp.NAIVE, harp.HARP_U, harp.HARP_A], 128,
                               DataPattern(RANDOM, 5), seed=1)

print("\ndirect-error coverage by round (3 at-risk bits/word, p=0.5):")
print(f"{'round':>6} {'NAIVE':>8} {'HARP-U':>8}")
for r in (1, 2, 4, 8, 16, 32, 64, 128):
    print(f"{r:>6} {runs[harp.NAIVE].coverage_direct[r]:>8.3f} "
          f"{runs[harp.HARP_U].coverage_direct[r]:>8.3f}")

r_h = harp.rounds_to_percentile_complete(runs[harp.HARP_U], 99)
r_n = harp.rounds_to_percentile_complete(runs[harp.NAIVE], 99)
print(f"\nrounds to full direct coverage for 99% of words: "
      f"HARP {r_h:.0f} vs NAIVE {r_n:.0f} ({r_h / r_n:.1%})")
print(f"worst-case simultaneous errors left after profiling: "
      f"HARP {runs[harp.HARP_U].max_simultaneous_after.max()}, "
      f"NAIVE {runs[harp.NAIVE].max_simultaneous_after.max()}")

res = harp.case_study_ber(spec, [harp.NAIVE, harp.HARP_U], words=1000, n_errors=2,
                          p_bit=0.75, rounds=64, seed=9)
def zero_at(series):
    hits = np.nonzero(series == 0)[0]
    return int(hits[0]) if hits.size else None
print(f"\nwith repair + a single-error secondary code, the BER reaches zero at "
      f"round {zero_at(res[harp.HARP_U]['after'])} (HARP) vs "
      f"{zero_at(res[harp.NAIVE]['after'])} (NAIVE)")
