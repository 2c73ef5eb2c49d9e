"""Systematic SEC codes and what a decoder does with uncorrectable errors.

Walks the classic (7,4,3) code through encode / correct / miscorrect, then
shows the same machinery on the (71,64,3) code used by real on-die ECC.
"""

import numpy as np

from ecclab import code as codes

spec = codes.hamming_sec(4)
print("The (7,4,3) single-error-correcting Hamming code, standard form [P | I]:")
print("H =")
print(spec.H)
print("G =")
print(spec.G)

d = np.array([1, 0, 0, 0], dtype=np.uint8)
c = codes.encode(spec, d)
print(f"\nencode({list(d)}) -> {list(c)}   (first k bits are the data: systematic)")

# a single bit flip is corrected
bad = c.copy()
bad[2] ^= 1
r = codes.decode(spec, bad)
print(f"flip bit 2:  syndrome {list(r.syndrome)} -> corrected at {r.corrected_position}, "
      f"data {list(r.dataword_out)}")

# two flipped parity bits: the syndrome lands on an innocent data bit
bad = c.copy()
bad[5] ^= 1
bad[6] ^= 1
r = codes.decode(spec, bad)
print(f"flip bits 5,6: syndrome {list(r.syndrome)} -> decoder flips bit "
      f"{r.corrected_position}, data {list(r.dataword_out)}  <- miscorrection!")
print("The written data was", list(d), "but the chip returns", list(r.dataword_out))
print("This is why uncorrectable errors are worse than no correction at all.\n")

big = codes.hamming_sec(64)
print(f"Scaled up: {big.name} has {big.n - big.k} parity bits for 64 data bits.")
rng = np.random.default_rng(1)
words = (rng.random((4, 64)) < 0.5).astype(np.uint8)
enc = codes.encode(big, words)
noise = np.zeros_like(enc)
noise[:, [3, 40]] = 1  # two raw errors per word
dec, outcomes, corrected = codes.decode_many(big, enc ^ noise)
wrong = (dec != words).sum(axis=1)
print("two raw errors per word -> post-correction data errors per word:", wrong)
