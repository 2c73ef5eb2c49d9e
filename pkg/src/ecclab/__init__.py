"""ecclab: a simulation laboratory for memory chips with opaque on-die ECC.

Subpackages cover dense GF(2) linear algebra (gf2), systematic block codes
with exact miscorrection semantics (code), data-dependent retention-error
injection (errmodel), Monte-Carlo observable simulation (einsim),
statistical scheme inference (ein), parity-check-matrix recovery from
miscorrection profiles (beer), bit-exact pre-correction error localization
(beep), profiling-algorithm studies (harp), and retention-failure
profiling analytics (reach).
"""

from . import beep, beer, code, ein, einsim, errmodel, gf2, harp, reach

__all__ = ["gf2", "code", "errmodel", "einsim", "ein", "beer", "beep", "harp", "reach"]
__version__ = "0.1.0"
