"""Fractional encoder: reals to plaintext polynomials by base-b digits.

A value x is truncated to n_f fractional digits, written in balanced base-b
(digits in [-floor(b/2), floor(b/2)]), and laid out with integer digits at
the low coefficients x^0..x^(n_i-1) and fractional digits at the top
coefficients x^(d-1)..x^(d-n_f) with their sign flipped -- exactly what
x^d = -1 needs for ring multiplication to multiply the encoded values.

Digit coefficients grow under homomorphic evaluation.  Decoding reads the
low half of the polynomial as integer digits and the high half as fractional
digits; once growth pushes a digit group across the half-way boundary or a
coefficient past t/2 (wrapping mod t), the decoded value is garbage.  That
wrap, not ring noise, is what caps the usable iteration count in the
comparison circuit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fv import Plaintext


class EncodingRangeError(ValueError):
    """Value needs more integer digits than the encoding reserves."""


@dataclass(frozen=True)
class EncodingParams:
    """Base b, integer digit budget n_i, fractional digit budget n_f, over a
    ring of degree d with plaintext modulus t."""

    b: int
    n_i: int
    n_f: int
    d: int
    t: int

    def __post_init__(self) -> None:
        if self.b < 2:
            raise ValueError(f"base must be >= 2, got {self.b}")
        if self.n_i < 0 or self.n_f < 0 or self.n_i + self.n_f > self.d:
            raise ValueError(
                f"digit budgets n_i={self.n_i}, n_f={self.n_f} exceed degree {self.d}"
            )


def encoding_error_bound(ep: EncodingParams) -> float:
    """Worst-case |decode(encode(x)) - x| from truncating to n_f fractional
    digits, with an n_f-fold slack factor (the actual truncation error is
    below b^-n_f)."""
    return ep.n_f * float(ep.b) ** (-ep.n_f)


def _balanced_digits(v: int, b: int) -> list[int]:
    """Digits of v >= 0 in balanced base b, least significant first."""
    digits = []
    while v:
        r = v % b
        if 2 * r > b:
            r -= b
        digits.append(r)
        v = (v - r) // b
    return digits


def encode(x: float, ep: EncodingParams) -> Plaintext:
    """Truncate x to n_f fractional base-b digits and place balanced digits
    into a plaintext polynomial."""
    if not math.isfinite(x):
        raise ValueError(f"cannot encode {x}")
    scaled = math.floor(abs(x) * ep.b**ep.n_f)
    digits = _balanced_digits(scaled, ep.b)
    if len(digits) > ep.n_i + ep.n_f:
        raise EncodingRangeError(
            f"{x} needs {len(digits) - ep.n_f} integer digits, budget is {ep.n_i}"
        )
    if x < 0:
        digits = [-dg for dg in digits]
    coeffs = [0] * ep.d
    for k, dg in enumerate(digits):
        if dg == 0:
            continue
        e = k - ep.n_f
        if e >= 0:
            coeffs[e] = dg % ep.t
        else:
            coeffs[ep.d + e] = -dg % ep.t  # sign flip: x^(d-j) = -x^(-j)
    return Plaintext(ep.t, tuple(coeffs))


def decode(pt: Plaintext, ep: EncodingParams) -> float:
    """Centered-lift mod t and evaluate the two digit groups at base b.

    The low half of the coefficients is read as integer digits, the high
    half as (sign-flipped) fractional digits: evaluation grows digit support
    outward from both layout regions, so the split sits at the midpoint
    rather than at the original n_i/n_f budgets.
    """
    if pt.t != ep.t or len(pt.coeffs) != ep.d:
        raise ValueError("plaintext does not match encoding parameters")
    half_d = ep.d // 2
    cs = pt.centered()
    int_part = 0
    for i in range(half_d - 1, -1, -1):
        int_part = int_part * ep.b + cs[i]
    frac_part = 0.0
    for i in range(half_d, ep.d):
        c = cs[i]
        if c:
            frac_part += c * float(ep.b) ** (i - ep.d)
    try:
        return float(int_part) - frac_part
    except OverflowError:
        return math.inf if int_part > 0 else -math.inf
