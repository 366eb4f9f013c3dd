"""Plaintext numerical kernels for the encrypted comparison circuit.

The comparison operator approximates the Heaviside step (half-maximum
convention) through H(x) = lim 1/2*(1 + tanh(kx)), doubling the tanh
argument r times via the polynomial identity

    tanh(2z) = 2*tanh(z) / (1 + tanh(z)^2)  ~  z*(1.9142 - z^2),

where 1.9142 = 2*0.9571 comes from the degree-1 minimax approximation of
1/(1+x) on [0, 1].  These reference implementations are the oracles the
encrypted circuit is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

# doubling-map constant: 2 * recip_unit_shifted(0)
DOUBLING_CONSTANT = 1.9142

# |z| below this keeps the linear seed tanh(z) ~ z accurate and every
# iterate inside the doubling map's bounded region
SEED_INTERVAL = 0.25


@dataclass(frozen=True)
class MinimaxPoly:
    """Best sup-norm polynomial approximation on a closed interval.

    coeffs are low degree first; stated_accuracy_bits is mu = -log2(max err).
    """

    coeffs: tuple[float, ...]
    domain: tuple[float, float]
    stated_accuracy_bits: float

    def __call__(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


RECIP_DEG3 = MinimaxPoly(
    (2.871320, -3.029870, 1.392785, -0.235498), (1.0, 2.0), 9.62
)
RECIP_DEG1 = MinimaxPoly((1.4571, -0.5), (1.0, 2.0), 4.5)
RECIP_UNIT_SHIFTED = MinimaxPoly((0.9571, -0.5), (0.0, 1.0), 4.5)


def recip_deg3(x: float) -> float:
    """Cubic minimax of 1/x on [1, 2] (9.62 bits).  Implemented for
    experimentation; the comparison circuit uses the linear fit, whose lower
    degree costs less multiplicative depth."""
    return RECIP_DEG3(x)


def recip_deg1(x: float) -> float:
    """Linear minimax of 1/x on [1, 2] (4.5 bits)."""
    return RECIP_DEG1(x)


def recip_unit_shifted(x: float) -> float:
    """Linear minimax of 1/(1+x) on [0, 1]; equals recip_deg1(x + 1)."""
    return RECIP_UNIT_SHIFTED(x)


def tanh_double(z: float) -> float:
    """One argument-doubling step: tanh(2z) ~ z*(1.9142 - z^2) when z stands
    for tanh(half the argument)."""
    return z * (DOUBLING_CONSTANT - z * z)


def heaviside_ref(x: float) -> float:
    """Heaviside step, half-maximum convention: H(0) = 1/2."""
    if x > 0:
        return 1.0
    if x < 0:
        return 0.0
    return 0.5


def tanh_iterate(z0: float, r: int) -> float:
    """Apply the doubling step exactly r times from the linear seed z0.

    Approximates tanh(2^r * z0), hence sgn(z0) as r grows, for |z0| < 0.25.
    This is the plaintext oracle for the encrypted comparison circuit.
    """
    if r < 0:
        raise ValueError(f"iteration count must be >= 0, got {r}")
    z = z0
    for _ in range(r):
        z = z * (DOUBLING_CONSTANT - z * z)
    return z
