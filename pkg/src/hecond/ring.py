"""Exact arithmetic in the quotient ring R_q = Z_q[x]/(x^d + 1).

Coefficients are arbitrary-precision integers stored reduced in [0, q);
a centered lift to (-q/2, q/2] is provided for decryption rounding.
Three multiplication routes are implemented and cross-checked in tests:

* schoolbook negacyclic convolution, O(d^2) -- the verification oracle;
* Kronecker substitution (pack coefficients into byte-aligned slots of a
  single big integer, one gmpy2 multiply, unpack and fold) -- the default,
  exact over Z, fastest at every size measured here;
* an iterative negacyclic NTT with precomputed twiddles -- available when
  q is prime and q = 1 (mod 2d).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import gmpy2


class RingMismatchError(ValueError):
    """Operands belong to incompatible ring instances."""


class NTTUnavailableError(ValueError):
    """q admits no primitive 2d-th root of unity; use the schoolbook or
    Kronecker route instead."""


@dataclass(frozen=True)
class RingParams:
    """Ring degree d (power of two) and coefficient modulus q."""

    d: int
    q: int

    def __post_init__(self) -> None:
        if self.d < 4 or self.d & (self.d - 1):
            raise ValueError(f"d must be a power of two >= 4, got {self.d}")
        if self.q < 2:
            raise ValueError(f"q must be >= 2, got {self.q}")


@dataclass(frozen=True)
class RingElement:
    params: RingParams
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.params.d:
            raise ValueError(
                f"expected {self.params.d} coefficients, got {len(self.coeffs)}"
            )


def from_coeffs(params: RingParams, coeffs: Sequence[int]) -> RingElement:
    """Build an element, reducing arbitrary integers mod q."""
    q = params.q
    return RingElement(params, tuple(int(c) % q for c in coeffs))


def zero(params: RingParams) -> RingElement:
    return RingElement(params, (0,) * params.d)


def one(params: RingParams) -> RingElement:
    return RingElement(params, (1,) + (0,) * (params.d - 1))


def monomial(params: RingParams, i: int, c: int = 1) -> RingElement:
    """c * x^i with i taken mod 2d (x^d = -1)."""
    d, q = params.d, params.q
    i %= 2 * d
    if i >= d:
        i -= d
        c = -c
    coeffs = [0] * d
    coeffs[i] = c % q
    return RingElement(params, tuple(coeffs))


def centered(a: RingElement) -> tuple[int, ...]:
    """Coefficients lifted to the centered range (-q/2, q/2]."""
    q = a.params.q
    half = q // 2
    return tuple(c if c <= half else c - q for c in a.coeffs)


def centered_inf_norm(a: RingElement) -> int:
    return max(abs(c) for c in centered(a))


def _check_params(a: RingElement, b: RingElement) -> None:
    if a.params != b.params:
        raise RingMismatchError(f"ring mismatch: {a.params} vs {b.params}")


def ring_add(a: RingElement, b: RingElement) -> RingElement:
    _check_params(a, b)
    q = a.params.q
    return RingElement(a.params, tuple((x + y) % q for x, y in zip(a.coeffs, b.coeffs)))


def ring_sub(a: RingElement, b: RingElement) -> RingElement:
    _check_params(a, b)
    q = a.params.q
    return RingElement(a.params, tuple((x - y) % q for x, y in zip(a.coeffs, b.coeffs)))


def ring_negate(a: RingElement) -> RingElement:
    q = a.params.q
    return RingElement(a.params, tuple((q - c) % q for c in a.coeffs))


def ring_scalar_mul(a: RingElement, k: int) -> RingElement:
    q = a.params.q
    k %= q
    return RingElement(a.params, tuple(c * k % q for c in a.coeffs))


# ---------------------------------------------------------------------------
# exact negacyclic convolution over Z


def _schoolbook_conv(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Signed negacyclic convolution, O(d^2). Verification oracle."""
    d = len(a)
    out = [0] * d
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            k = i + j
            if k < d:
                out[k] += ai * bj
            else:
                out[k - d] -= ai * bj
    return out


def pack_slots(values: Sequence[int], slot_bytes: int) -> int:
    """Pack nonnegative integers into consecutive byte-aligned slots of one
    big integer (Kronecker substitution at 2^(8*slot_bytes))."""
    return int.from_bytes(
        b"".join(v.to_bytes(slot_bytes, "little") for v in values), "little"
    )


def unpack_fold(product: int, d: int, slot_bytes: int) -> list[int]:
    """Unpack 2d slots of a Kronecker product and fold negacyclically:
    out[i] = slot[i] - slot[i + d]. Slots must not have overflowed."""
    raw = product.to_bytes(2 * d * slot_bytes + slot_bytes, "little")
    s = slot_bytes
    out = []
    for i in range(d):
        lo = int.from_bytes(raw[s * i : s * (i + 1)], "little")
        hi = int.from_bytes(raw[s * (i + d) : s * (i + d + 1)], "little")
        out.append(lo - hi)
    return out


def _ones_conv(x: Sequence[int]) -> list[int]:
    """Negacyclic product of x with the all-ones polynomial, in O(d):
    out[i] = sum(x[:i+1]) - sum(x[i+1:])."""
    total = sum(x)
    out = []
    prefix = 0
    for xi in x:
        prefix += xi
        out.append(2 * prefix - total)
    return out


def _kronecker_conv(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Signed negacyclic convolution, exact over Z, via one big-integer
    multiply.  Signed inputs are handled by offsetting each operand to be
    nonnegative and subtracting the offset cross terms afterwards; the cross
    terms involve only all-ones products, computable in O(d)."""
    d = len(a)
    alpha = -min(a) if min(a) < 0 else 0
    beta = -min(b) if min(b) < 0 else 0
    a2 = [x + alpha for x in a] if alpha else list(a)
    b2 = [x + beta for x in b] if beta else list(b)
    amax, bmax = max(a2), max(b2)
    if amax and bmax:
        bound = d * amax * bmax
        slot = (bound.bit_length() + 7) // 8
        prod = int(gmpy2.mpz(pack_slots(a2, slot)) * gmpy2.mpz(pack_slots(b2, slot)))
        out = unpack_fold(prod, d, slot)
    else:
        out = [0] * d
    if alpha or beta:
        sa = _ones_conv(a)
        sb = _ones_conv(b)
        for i in range(d):
            out[i] -= alpha * sb[i] + beta * sa[i] + alpha * beta * (2 * i + 2 - d)
    return out


def negacyclic_conv(a: Sequence[int], b: Sequence[int], path: str = "auto") -> list[int]:
    """Exact signed negacyclic convolution over Z (no modular reduction).

    The scheme's tensor step needs this on centered representatives; callers
    reduce mod whatever modulus applies.
    """
    if len(a) != len(b):
        raise ValueError("length mismatch")
    if path == "schoolbook":
        return _schoolbook_conv(a, b)
    if path in ("auto", "kronecker"):
        return _kronecker_conv(a, b)
    raise ValueError(f"unknown path {path!r}")


# ---------------------------------------------------------------------------
# negacyclic NTT (q prime, q = 1 mod 2d)


def _bit_reverse(n: int, bits: int) -> int:
    r = 0
    for _ in range(bits):
        r = (r << 1) | (n & 1)
        n >>= 1
    return r


class NTTPlan:
    """Precomputed twiddle tables for the negacyclic NTT of one (d, q)."""

    def __init__(self, d: int, q: int, psi: int):
        self.d, self.q, self.psi = d, q, psi
        logd = d.bit_length() - 1
        fwd = [gmpy2.mpz(1)] * d
        inv = [gmpy2.mpz(1)] * d
        psi_inv = gmpy2.invert(psi, q)
        for i in range(1, d):
            fwd[i] = fwd[i - 1] * psi % q
            inv[i] = inv[i - 1] * psi_inv % q
        self.fwd_br = [fwd[_bit_reverse(i, logd)] for i in range(d)]
        self.inv_br = [inv[_bit_reverse(i, logd)] for i in range(d)]
        self.d_inv = gmpy2.invert(d, q)

    def forward(self, coeffs: Sequence[int]) -> list[int]:
        d, q = self.d, self.q
        a = [gmpy2.mpz(c) for c in coeffs]
        tbl = self.fwd_br
        span = d
        m = 1
        while m < d:
            span //= 2
            for i in range(m):
                j1 = 2 * i * span
                s = tbl[m + i]
                for j in range(j1, j1 + span):
                    u = a[j]
                    v = a[j + span] * s % q
                    a[j] = (u + v) % q
                    a[j + span] = (u - v) % q
            m *= 2
        return [int(x) for x in a]

    def inverse(self, values: Sequence[int]) -> list[int]:
        d, q = self.d, self.q
        a = [gmpy2.mpz(c) for c in values]
        tbl = self.inv_br
        span = 1
        m = d
        while m > 1:
            h = m // 2
            j1 = 0
            for i in range(h):
                s = tbl[h + i]
                for j in range(j1, j1 + span):
                    u = a[j]
                    v = a[j + span]
                    a[j] = (u + v) % q
                    a[j + span] = (u - v) * s % q
                j1 += 2 * span
            span *= 2
            m = h
        dinv = self.d_inv
        return [int(x * dinv % q) for x in a]


def _find_primitive_2d_root(d: int, q: int) -> int | None:
    """Smallest psi with psi^d = -1 mod q, or None. Requires prime q with
    q = 1 (mod 2d)."""
    if q % (2 * d) != 1 or not gmpy2.is_prime(q):
        return None
    exp = (q - 1) // (2 * d)
    for g in range(2, 1000):
        psi = gmpy2.powmod(g, exp, q)
        if gmpy2.powmod(psi, d, q) == q - 1:
            return int(psi)
    return None


@lru_cache(maxsize=16)
def _ntt_plan(d: int, q: int) -> NTTPlan | None:
    psi = _find_primitive_2d_root(d, q)
    if psi is None:
        return None
    return NTTPlan(d, q, psi)


def has_ntt(params: RingParams) -> bool:
    return _ntt_plan(params.d, params.q) is not None


def ntt_forward(a: RingElement) -> tuple[int, ...]:
    plan = _ntt_plan(a.params.d, a.params.q)
    if plan is None:
        raise NTTUnavailableError(
            f"no primitive 2d-th root of unity mod q for d={a.params.d}; "
            "fall back to the schoolbook or Kronecker route"
        )
    return tuple(plan.forward(a.coeffs))


def ntt_inverse(values: Sequence[int], params: RingParams) -> RingElement:
    plan = _ntt_plan(params.d, params.q)
    if plan is None:
        raise NTTUnavailableError(
            f"no primitive 2d-th root of unity mod q for d={params.d}; "
            "fall back to the schoolbook or Kronecker route"
        )
    return RingElement(params, tuple(plan.inverse(values)))


def ring_mul(a: RingElement, b: RingElement, path: str = "auto") -> RingElement:
    """Negacyclic product reduced mod q.

    path: "auto" (Kronecker), "kronecker", "ntt", or "schoolbook".
    """
    _check_params(a, b)
    q = a.params.q
    if path == "ntt":
        plan = _ntt_plan(a.params.d, q)
        if plan is None:
            raise NTTUnavailableError(
                f"no primitive 2d-th root of unity mod q for d={a.params.d}; "
                "fall back to the schoolbook or Kronecker route"
            )
        fa = plan.forward(a.coeffs)
        fb = plan.forward(b.coeffs)
        return RingElement(
            a.params, tuple(plan.inverse([x * y % q for x, y in zip(fa, fb)]))
        )
    conv = negacyclic_conv(a.coeffs, b.coeffs, path=path)
    return RingElement(a.params, tuple(c % q for c in conv))


# ---------------------------------------------------------------------------
# samplers


def sample_uniform(params: RingParams, rng: random.Random) -> RingElement:
    q = params.q
    return RingElement(params, tuple(rng.randrange(q) for _ in range(params.d)))


def sample_ternary(params: RingParams, rng: random.Random) -> RingElement:
    q = params.q
    return RingElement(params, tuple(rng.randrange(-1, 2) % q for _ in range(params.d)))


def sample_gaussian(params: RingParams, sigma: float, rng: random.Random) -> RingElement:
    """Integer-rounded centered Gaussian, truncated at 6*sigma."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    q = params.q
    bound = math.ceil(6 * sigma)
    coeffs = []
    for _ in range(params.d):
        v = round(rng.gauss(0.0, sigma))
        v = max(-bound, min(bound, v))
        coeffs.append(v % q)
    return RingElement(params, tuple(coeffs))
