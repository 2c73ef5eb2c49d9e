"""Bit-exact pre-correction error localization through the known H matrix.

Once the parity-check matrix is known, a miscorrection pins the raw
codeword: the flipped bit names the syndrome, the visible data bits fill in
k coordinates, and full rank does the rest - parity-bit errors included,
even though parity cells can never be read directly.
"""

import numpy as np

from ecclab import beep, code as codes, harp

spec = codes.hamming_sec(4)
written = np.array([1, 0, 0, 0], dtype=np.uint8)
stored = codes.encode(spec, written)
raw = stored.copy()
raw[5] ^= 1
raw[6] ^= 1
observed = codes.decode(spec, raw).dataword_out
print(f"written {list(written)} -> stored {list(stored)}")
print(f"parity cells 5 and 6 leak -> chip returns {list(observed)}")
found = beep.localize(spec, written, observed)
print(f"localize() recovers the raw error set: {sorted(found)}  (both parity bits!)")

# profiling a whole word: crafted patterns expose every at-risk cell
spec127 = codes.hamming_sec(120)
device = harp.make_population(spec127, 4, n_errors=4, p_bit=1.0, seed=3)
print(f"\nprofiling four {spec127.name} words with 4 planted at-risk cells each:")
for w in range(4):
    recovered, success = beep.profile_codeword(spec127, device, w, passes=1,
                                               trials_per_pattern=1)
    print(f"  word {w}: true {sorted(device.true_at_risk(w))} -> "
          f"recovered {sorted(recovered)}  exact={success}")

state = beep.BeepState(spec=spec)
pattern = beep.craft_pattern(state, 0)
print(f"\ncrafted pattern for target bit 0 on (7,4,3): {list(pattern)}")
print("(charges the target, discharges its neighbor, and makes a miscorrection",
      "reachable if the target fails alongside a parity cell)")
