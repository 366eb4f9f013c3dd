"""Built-in parameter presets and the published sweep grid.

"paper-r3" is the published parameter set: the smallest tuple for which the
encrypted selection pipeline at r=3 decodes correctly.  "insecure-test"
shrinks the ring degree for fast tests; at d=2048 with a 116-bit modulus the
lattice problem is far too easy, so it must never protect real data and the
CLI demands an explicit opt-in flag for it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .encoder import EncodingParams
from .fv import SchemeParams
from .ring import RingParams

# sweep moduli, named by bit length; all are primes = 1 mod 2^15, so the
# NTT route is available at every grid degree
Q116 = 2**116 - 2**18 + 1
Q226 = 2**226 - 2**26 + 1
Q435 = 2**435 - 2**33 + 1
Q829 = 2**829 - 2**54 - 2**53 - 2**52 + 1

# published parameter grid for sweeps
SWEEP_GRID: dict[str, tuple] = {
    "d": (8192, 16384, 32768),
    "q": (Q116, Q226, Q435, Q829),
    "t": (4096, 16384, 65536),
    "b": (3, 5, 7, 9),
    "n_i": (8, 16, 32, 64),
    "n_f": (6, 8, 10, 24, 32),
}


@dataclass(frozen=True)
class Preset:
    name: str
    scheme: SchemeParams
    encoding: EncodingParams
    description: str

    @property
    def secure(self) -> bool:
        return self.scheme.security_note == "paper-preset"


def _make(name, d, q, t, b, n_i, n_f, note, description) -> Preset:
    scheme = SchemeParams(RingParams(d, q), t, security_note=note)
    return Preset(name, scheme, EncodingParams(b, n_i, n_f, d, t), description)


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in (
        _make(
            "paper-r3",
            d=16384,
            q=Q435,
            t=65536,
            b=7,
            n_i=8,
            n_f=8,
            note="paper-preset",
            description="published smallest parameters where the r=3 "
            "selection pipeline decodes correctly",
        ),
        _make(
            "insecure-test",
            d=2048,
            q=Q116,
            t=65536,
            b=7,
            n_i=8,
            n_f=8,
            note="insecure-test",
            description="reduced degree for fast tests; NOT secure",
        ),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        ) from None
