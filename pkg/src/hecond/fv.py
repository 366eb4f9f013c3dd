"""Textbook levelled Fan-Vercauteren encryption over R_q.

Keys, encryption, decryption, homomorphic add/mul (ciphertext and plaintext
variants), relinearization, and noise-budget measurement.  Every ciphertext
tracks the count of ciphertext-ciphertext multiplications on its critical
path (mult_depth) and of plaintext multiplications (plain_mult_count); these
counters are the performance proxy asserted by the tests in place of
wall-clock timings.

No bootstrapping: the multiplication depth is bounded by the parameters.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import gmpy2

from .ring import (
    RingElement,
    RingMismatchError,
    RingParams,
    negacyclic_conv,
    pack_slots,
    ring_add,
    ring_negate,
    sample_gaussian,
    sample_ternary,
    sample_uniform,
    unpack_fold,
)


@dataclass(frozen=True)
class SchemeParams:
    """FV parameter tuple: ring (d, q), plaintext modulus t, error width
    sigma, relinearization decomposition window in bits."""

    ring: RingParams
    t: int
    sigma: float = 3.19
    relin_base_bits: int = 60
    security_note: str = ""

    def __post_init__(self) -> None:
        if self.t < 2:
            raise ValueError(f"t must be >= 2, got {self.t}")
        if self.t >= self.ring.q or self.ring.q // self.t < 2:
            raise ValueError("degenerate parameters: need delta = floor(q/t) >= 2")
        if not 1 <= self.relin_base_bits <= self.ring.q.bit_length():
            raise ValueError(f"relin_base_bits out of range: {self.relin_base_bits}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def delta(self) -> int:
        return self.ring.q // self.t


@dataclass(frozen=True)
class Plaintext:
    """Element of R_t; coefficients reduced mod t."""

    t: int
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(not 0 <= c < self.t for c in self.coeffs):
            raise ValueError("plaintext coefficients must be reduced mod t")

    def centered(self) -> tuple[int, ...]:
        half = self.t // 2
        return tuple(c if c <= half else c - self.t for c in self.coeffs)


def plaintext_from_coeffs(t: int, coeffs) -> Plaintext:
    return Plaintext(t, tuple(int(c) % t for c in coeffs))


@dataclass(frozen=True)
class SecretKey:
    s: RingElement
    params: SchemeParams


@dataclass(frozen=True)
class PublicKey:
    p0: RingElement
    p1: RingElement
    params: SchemeParams


@dataclass(frozen=True)
class RelinKey:
    """Key-switching key for s^2, one ring-element pair per base-2^w digit.

    The pairs are also cached pre-packed into Kronecker slot integers so that
    relinearization skips repacking them on every multiplication.
    """

    base_bits: int
    pairs: tuple[tuple[RingElement, RingElement], ...]
    params: SchemeParams
    packed: tuple[tuple[int, int], ...] = field(repr=False, default=())
    slot_bytes: int = 0


@dataclass(frozen=True)
class KeySet:
    sk: SecretKey
    pk: PublicKey
    rlk: RelinKey
    params: SchemeParams


@dataclass(frozen=True)
class Ciphertext:
    parts: tuple[RingElement, ...]
    mult_depth: int = 0
    plain_mult_count: int = 0

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise ValueError("ciphertext needs at least 2 parts")


def _relin_digit_count(params: SchemeParams) -> int:
    return -(-params.ring.q.bit_length() // params.relin_base_bits)


def _relin_slot_bytes(params: SchemeParams) -> int:
    # slot must hold the digit-count-fold sum of products digit * rlk coeff
    d, q = params.ring.d, params.ring.q
    nd = _relin_digit_count(params)
    bound = nd * d * (1 << params.relin_base_bits) * q
    return (bound.bit_length() + 7) // 8


def _build_relin_key(
    pairs: tuple[tuple[RingElement, RingElement], ...], params: SchemeParams
) -> RelinKey:
    slot = _relin_slot_bytes(params)
    packed = tuple(
        (pack_slots(r0.coeffs, slot), pack_slots(r1.coeffs, slot)) for r0, r1 in pairs
    )
    return RelinKey(params.relin_base_bits, pairs, params, packed, slot)


def keygen(params: SchemeParams, rng: random.Random) -> KeySet:
    """Ternary secret, uniform/gaussian public key, relinearization key for
    s^2 decomposed in base 2^relin_base_bits."""
    ring = params.ring
    q = ring.q
    s = sample_ternary(ring, rng)
    a = sample_uniform(ring, rng)
    e = sample_gaussian(ring, params.sigma, rng)
    pk0 = ring_negate(ring_add(_mul(a, s), e))
    sk = SecretKey(s, params)
    pk = PublicKey(pk0, a, params)

    s2 = _mul(s, s)
    w = params.relin_base_bits
    pairs = []
    for i in range(_relin_digit_count(params)):
        ai = sample_uniform(ring, rng)
        ei = sample_gaussian(ring, params.sigma, rng)
        scale = pow(2, w * i, q)
        r0 = RingElement(
            ring,
            tuple(
                (-(x + y) + scale * z) % q
                for x, y, z in zip(_mul(ai, s).coeffs, ei.coeffs, s2.coeffs)
            ),
        )
        pairs.append((r0, ai))
    return KeySet(sk, pk, _build_relin_key(tuple(pairs), params), params)


def _mul(a: RingElement, b: RingElement) -> RingElement:
    q = a.params.q
    return RingElement(a.params, tuple(c % q for c in negacyclic_conv(a.coeffs, b.coeffs)))


def _centered(coeffs: tuple[int, ...], q: int) -> list[int]:
    half = q // 2
    return [c if c <= half else c - q for c in coeffs]


def encrypt(pk: PublicKey, pt: Plaintext, rng: random.Random) -> Ciphertext:
    params = pk.params
    ring, q, delta = params.ring, params.ring.q, params.delta
    if pt.t != params.t or len(pt.coeffs) != ring.d:
        raise RingMismatchError("plaintext does not match scheme parameters")
    u = sample_ternary(ring, rng)
    e1 = sample_gaussian(ring, params.sigma, rng)
    e2 = sample_gaussian(ring, params.sigma, rng)
    c0 = RingElement(
        ring,
        tuple(
            (x + y + delta * m) % q
            for x, y, m in zip(_mul(pk.p0, u).coeffs, e1.coeffs, pt.coeffs)
        ),
    )
    c1 = ring_add(_mul(pk.p1, u), e2)
    return Ciphertext((c0, c1))


def _raw_decrypt(sk: SecretKey, ct: Ciphertext) -> list[int]:
    """Centered evaluation of sum_i parts[i] * s^i mod q."""
    ring, q = sk.params.ring, sk.params.ring.q
    s_centered = _centered(sk.s.coeffs, q)
    acc = list(ct.parts[0].coeffs)
    s_pow = None
    for part in ct.parts[1:]:
        s_pow = s_centered if s_pow is None else [
            c % q for c in negacyclic_conv(s_pow, s_centered)
        ]
        conv = negacyclic_conv(_centered(part.coeffs, q), s_pow)
        acc = [(x + y) % q for x, y in zip(acc, conv)]
    return _centered(tuple(acc), q)


def _round_to_t(v: list[int], q: int, t: int) -> tuple[int, ...]:
    # round(t*v/q) mod t, round-half-up, exact integer arithmetic
    return tuple(((2 * t * c + q) // (2 * q)) % t for c in v)


def decrypt(sk: SecretKey, ct: Ciphertext) -> Plaintext:
    """Always returns a plaintext; correctness is the caller's concern via
    noise_budget (decryption past the noise bound fails silently)."""
    v = _raw_decrypt(sk, ct)
    return Plaintext(sk.params.t, _round_to_t(v, sk.params.ring.q, sk.params.t))


def noise_budget(sk: SecretKey, ct: Ciphertext) -> int:
    """Bits of log2(q/t) not yet consumed by noise: floor(log2(delta /
    (2*||residual||))), clamped at 0.  Positive budget implies decrypt is
    correct; 0 means correctness is no longer guaranteed."""
    _, budget = decrypt_with_budget(sk, ct)
    return budget


def decrypt_with_budget(sk: SecretKey, ct: Ciphertext) -> tuple[Plaintext, int]:
    """Single-pass decrypt + noise measurement (shares the s-power convolution)."""
    params = sk.params
    q, t, delta = params.ring.q, params.t, params.delta
    v = _raw_decrypt(sk, ct)
    m = _round_to_t(v, q, t)
    half = q // 2
    norm = 0
    for vc, mc in zip(v, m):
        r = (vc - delta * mc + half) % q - half
        if abs(r) > norm:
            norm = abs(r)
    if norm == 0:
        budget = delta.bit_length() - 1
    else:
        ratio = delta // (2 * norm)
        budget = ratio.bit_length() - 1 if ratio >= 1 else 0
    return Plaintext(t, m), max(0, budget)


def _pad_parts(a: Ciphertext, b: Ciphertext) -> tuple[tuple, tuple]:
    from .ring import zero

    pa, pb = a.parts, b.parts
    if len(pa) == len(pb):
        return pa, pb
    z = zero(pa[0].params)
    n = max(len(pa), len(pb))
    return pa + (z,) * (n - len(pa)), pb + (z,) * (n - len(pb))


def eval_add(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    pa, pb = _pad_parts(a, b)
    return Ciphertext(
        tuple(ring_add(x, y) for x, y in zip(pa, pb)),
        max(a.mult_depth, b.mult_depth),
        max(a.plain_mult_count, b.plain_mult_count),
    )


def eval_negate(a: Ciphertext) -> Ciphertext:
    return Ciphertext(
        tuple(ring_negate(p) for p in a.parts), a.mult_depth, a.plain_mult_count
    )


def eval_sub(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    return eval_add(a, eval_negate(b))


def eval_add_plain(a: Ciphertext, p: Plaintext) -> Ciphertext:
    q = a.parts[0].params.q
    delta = q // p.t
    c0 = a.parts[0].coeffs
    new0 = tuple((c + delta * m) % q for c, m in zip(c0, p.coeffs))
    return Ciphertext(
        (RingElement(a.parts[0].params, new0),) + a.parts[1:],
        a.mult_depth,
        a.plain_mult_count,
    )


def eval_mul_plain(a: Ciphertext, p: Plaintext) -> Ciphertext:
    """Multiply by a plaintext polynomial (the centered representative, so
    balanced encoder digits act with their true sign).  Increments
    plain_mult_count; mult_depth is unchanged -- the noise cost is far below
    a ciphertext multiplication's."""
    ring = a.parts[0].params
    q = ring.q
    pc = p.centered()
    parts = tuple(
        RingElement(ring, tuple(c % q for c in negacyclic_conv(part.coeffs, pc)))
        for part in a.parts
    )
    return Ciphertext(parts, a.mult_depth, a.plain_mult_count + 1)


def relinearize(ct: Ciphertext, rlk: RelinKey) -> Ciphertext:
    """Key-switch a 3-part ciphertext back to 2 parts via base-2^w digit
    decomposition of the quadratic part against the cached packed key."""
    if len(ct.parts) == 2:
        return ct
    if len(ct.parts) != 3:
        raise ValueError("relinearization implemented for 3-part ciphertexts")
    params = rlk.params
    ring, q, w = params.ring, params.ring.q, rlk.base_bits
    d = ring.d
    mask = (1 << w) - 1
    slot = rlk.slot_bytes
    acc0 = 0
    acc1 = 0
    for i, (pk0, pk1) in enumerate(rlk.packed):
        digit = [(c >> (w * i)) & mask for c in ct.parts[2].coeffs]
        packed_digit = gmpy2.mpz(pack_slots(digit, slot))
        acc0 += packed_digit * pk0
        acc1 += packed_digit * pk1
    conv0 = unpack_fold(int(acc0), d, slot)
    conv1 = unpack_fold(int(acc1), d, slot)
    p0 = tuple((x + y) % q for x, y in zip(ct.parts[0].coeffs, conv0))
    p1 = tuple((x + y) % q for x, y in zip(ct.parts[1].coeffs, conv1))
    return Ciphertext(
        (RingElement(ring, p0), RingElement(ring, p1)),
        ct.mult_depth,
        ct.plain_mult_count,
    )


def eval_mul(a: Ciphertext, b: Ciphertext, rlk: RelinKey) -> Ciphertext:
    """Tensor product over Z on centered representatives, scaled by t/q with
    rounding, then relinearized back to 2 parts.  mult_depth becomes
    max(a, b) + 1."""
    if len(a.parts) != 2 or len(b.parts) != 2:
        raise ValueError("multiply expects relinearized (2-part) ciphertexts")
    params = rlk.params
    ring, q, t = params.ring, params.ring.q, params.t
    if a.parts[0].params != ring:
        raise RingMismatchError("ciphertext does not match relinearization key")
    a0 = _centered(a.parts[0].coeffs, q)
    a1 = _centered(a.parts[1].coeffs, q)
    b0 = _centered(b.parts[0].coeffs, q)
    b1 = _centered(b.parts[1].coeffs, q)
    # Karatsuba: the middle tensor component from one extra convolution
    c0 = negacyclic_conv(a0, b0)
    c2 = negacyclic_conv(a1, b1)
    mid = negacyclic_conv(
        [x + y for x, y in zip(a0, a1)], [x + y for x, y in zip(b0, b1)]
    )
    c1 = [m - x - y for m, x, y in zip(mid, c0, c2)]
    scaled = tuple(
        RingElement(ring, tuple(((2 * t * v + q) // (2 * q)) % q for v in comp))
        for comp in (c0, c1, c2)
    )
    raw = Ciphertext(
        scaled,
        max(a.mult_depth, b.mult_depth) + 1,
        max(a.plain_mult_count, b.plain_mult_count),
    )
    return relinearize(raw, rlk)
