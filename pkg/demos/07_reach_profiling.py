"""Retention-failure profiling analytics: budgets, longevity, and reach.

How many raw bit errors a system can tolerate, how long a profile stays
valid, what a profiling round costs, and why profiling at a slightly longer
refresh interval (or hotter) finds weak cells far faster at the price of
false positives.
"""

import numpy as np

from ecclab import reach

# error budgets: tolerable raw BER for a 1e-15 uncorrectable-rate target
print("tolerable raw bit error rate at UBER target 1e-15:")
for label, w, k in (("no ECC (64-bit)", 64, 0), ("SECDED (72,64)", 72, 1),
                    ("double-correcting", 72, 2)):
    print(f"  {label:<18} {reach.tolerable_rber(w, k, 1e-15):.2e}")
print("  (the binomial-tail model gives 5.3e-9 for SECDED; datasheet-style")
print("   tables often quote 3.8e-9 - the model value is what this library reports)")

# profile longevity: how long until accumulating new failures exhausts it
hours = reach.longevity(65, 25, 0.73)
print(f"\nwith 65 tolerable failures, 25 missed, 0.73 new/hour: reprofile "
      f"every {hours:.1f} h ({hours / 24:.1f} days)")

# profiling runtime: one round over a 32 GB module at 1.024 s intervals
t = reach.profile_runtime(1.024, reach.rdwr_seconds(32.0), n_dp=6, n_it=6)
print(f"one profiling round, 32 GB @ 1.024 s, 6 patterns x 6 iterations: "
      f"{t / 60:.2f} min")
print(f"system throughput at 9.1% profiling overhead: "
      f"{reach.ipc_real(2.0, 0.091):.3f} IPC (ideal 2.0)")

# reach profiling: coverage / false positives / runtime tradeoff
pop = reach.make_population(5000, seed=1)
target = (1.0, 0.0)
print("\nprofiling a synthetic 5000-cell population (target 1.0 s):")
print(f"{'reach':>7} {'iters':>6} {'coverage':>9} {'FPR':>6} {'runtime':>9}")
for t_reach, iters in ((1.0, 16), (1.0, 128), (1.25, 4), (1.25, 16), (1.5, 4)):
    out = reach.evaluate_reach(pop, target, (t_reach, 0.0), iterations=iters, seed=2)
    print(f"{t_reach:>7.2f} {iters:>6} {out.coverage:>9.3f} "
          f"{out.false_positive_rate:>6.2f} {out.runtime_seconds:>8.0f}s")
print("longer reach -> fewer iterations for the same coverage, more false positives")
