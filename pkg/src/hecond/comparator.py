"""Comparison and selection circuits over an abstract evaluation backend.

The circuits are written once against a small backend interface and run
unchanged on plain doubles (OracleBackend), on exact plaintext-polynomial
arithmetic mod t (PlainRingBackend, for fast digit-growth studies), and on
FV ciphertexts (EncryptedBackend).

comp(x1, x2) approximates sgn(x1 - x2) by r doubling steps on z = x1 - x2.
Each loop iteration computes z <- z*(z^2 - 1.9142), the negated doubling
step; the negations cancel pairwise and a final parity negation makes the
net sign correct, so only two ciphertext multiplications per iteration are
needed and the result equals tanh_iterate(x1 - x2, r) exactly.

The select variants turn the comparison weight w into selection weights:

    gt_half: s_ij = (1 + w_ij)/2, returns (s12*x1, s21*x2); ties -> 0.5*x
    lt_half: the mirror, returns (s21*x1, s12*x2)
    eq:      weight 1 + w12*w21 on both inputs; ties -> x unchanged
    gt/lt:   s~_ij = w_ij*(1 + w_ij)/2; ties -> 0

Every variant normalises its weight with exactly one plaintext
multiplication (the /2 scaling where the formula has one, a multiplication
by the encoded unit for eq), so the depth ledger is uniform: 2r ciphertext
multiplications for gt_half/lt_half weights, 2r + 1 for eq/gt/lt weights,
plus one plaintext multiplication each.  Scaling the data adds one more
ciphertext multiplication on top of the weight depth.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Generic, Protocol, TypeVar

from . import fv
from .encoder import EncodingParams, decode, encode
from .kernels import DOUBLING_CONSTANT
from .ring import negacyclic_conv

V = TypeVar("V")

VARIANTS = ("gt_half", "lt_half", "eq", "gt", "lt")


class EvalBackend(Protocol[V]):
    def inject(self, x: float) -> V: ...
    def extract(self, v: V) -> float: ...
    def add(self, a: V, b: V) -> V: ...
    def sub(self, a: V, b: V) -> V: ...
    def negate(self, a: V) -> V: ...
    def mul(self, a: V, b: V) -> V: ...
    def add_const(self, a: V, c: float) -> V: ...
    def mul_const(self, a: V, c: float) -> V: ...


@dataclass(frozen=True)
class ComparatorConfig:
    r: int
    variant: str = "gt_half"
    independent_weights: bool = True

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError(f"iteration count must be >= 1, got {self.r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; one of {VARIANTS}")


@dataclass(frozen=True)
class SelectResult(Generic[V]):
    """Weighted outputs plus the weights themselves (exposed so accuracy
    metrics can be computed on either)."""

    scaled_first: V
    scaled_second: V
    weight_first: V
    weight_second: V


class OracleBackend:
    """Exact double-precision reference."""

    def inject(self, x: float) -> float:
        return float(x)

    def extract(self, v: float) -> float:
        return v

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def negate(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def add_const(self, a, c):
        return a + c

    def mul_const(self, a, c):
        return a * c


class PlainRingBackend:
    """Exact encoded-digit arithmetic mod t, no encryption.

    Reproduces every plaintext effect of the encrypted pipeline (digit
    growth, truncation, wrap past t/2) without ring noise; the parameter
    sweep uses it to rank encodings quickly.
    """

    def __init__(self, ep: EncodingParams):
        self.ep = ep
        self._consts: dict[float, fv.Plaintext] = {}

    def _encode_const(self, c: float) -> fv.Plaintext:
        if c not in self._consts:
            self._consts[c] = encode(c, self.ep)
        return self._consts[c]

    def inject(self, x: float) -> fv.Plaintext:
        return encode(x, self.ep)

    def extract(self, v: fv.Plaintext) -> float:
        return decode(v, self.ep)

    def add(self, a, b):
        t = self.ep.t
        return fv.Plaintext(t, tuple((x + y) % t for x, y in zip(a.coeffs, b.coeffs)))

    def sub(self, a, b):
        t = self.ep.t
        return fv.Plaintext(t, tuple((x - y) % t for x, y in zip(a.coeffs, b.coeffs)))

    def negate(self, a):
        t = self.ep.t
        return fv.Plaintext(t, tuple(-x % t for x in a.coeffs))

    def mul(self, a, b):
        t = self.ep.t
        conv = negacyclic_conv(a.coeffs, b.coeffs)
        return fv.Plaintext(t, tuple(c % t for c in conv))

    def add_const(self, a, c):
        return self.add(a, self._encode_const(c))

    def mul_const(self, a, c):
        return self.mul(a, self._encode_const(c))


class EncryptedBackend:
    """FV-ciphertext evaluation.

    Circuit constants are encoded once and cached.  extract decrypts and
    decodes, and is only available when the backend was built with the
    secret key -- evaluation itself never needs it.
    """

    def __init__(
        self,
        keys: fv.KeySet,
        ep: EncodingParams,
        rng: random.Random,
        with_secret: bool = True,
    ):
        self.keys = keys
        self.ep = ep
        self.rng = rng
        self._sk = keys.sk if with_secret else None
        self._consts: dict[float, fv.Plaintext] = {}

    def _encode_const(self, c: float) -> fv.Plaintext:
        if c not in self._consts:
            self._consts[c] = encode(c, self.ep)
        return self._consts[c]

    def inject(self, x: float) -> fv.Ciphertext:
        return fv.encrypt(self.keys.pk, encode(x, self.ep), self.rng)

    def extract(self, v: fv.Ciphertext) -> float:
        if self._sk is None:
            raise PermissionError("backend built without the secret key")
        return decode(fv.decrypt(self._sk, v), self.ep)

    def add(self, a, b):
        return fv.eval_add(a, b)

    def sub(self, a, b):
        return fv.eval_sub(a, b)

    def negate(self, a):
        return fv.eval_negate(a)

    def mul(self, a, b):
        return fv.eval_mul(a, b, self.keys.rlk)

    def add_const(self, a, c):
        return fv.eval_add_plain(a, self._encode_const(c))

    def mul_const(self, a, c):
        return fv.eval_mul_plain(a, self._encode_const(c))


def comp(x1: V, x2: V, r: int, backend: EvalBackend[V]) -> V:
    """Comparison weight w12 ~ sgn(x1 - x2), for inputs in [-0.12, 0.12].

    r iterations of two ciphertext multiplications each; the circuit
    evaluates the negated doubling step z*(z^2 - 1.9142) per iteration and
    fixes the sign parity at the end with a free negation.
    """
    if r < 1:
        raise ValueError(f"iteration count must be >= 1, got {r}")
    z = backend.sub(x1, x2)
    for _ in range(r):
        y = backend.mul(z, z)
        u = backend.add_const(y, -DOUBLING_CONSTANT)
        z = backend.mul(z, u)
    if r % 2:
        z = backend.negate(z)
    return z


def _weights(x1, x2, cfg: ComparatorConfig, backend):
    w12 = comp(x1, x2, cfg.r, backend)
    if cfg.independent_weights:
        w21 = comp(x2, x1, cfg.r, backend)
    else:
        w21 = backend.negate(w12)
    return w12, w21


def _half_shift(w, backend):
    # s = (1 + w)/2 -- the one plaintext multiplication of the circuit
    return backend.mul_const(backend.add_const(w, 1.0), 0.5)


def select_gt_half(x1: V, x2: V, cfg: ComparatorConfig, backend) -> SelectResult[V]:
    """Keep the larger input: weights (1 + w_ij)/2; a tie halves both."""
    w12, w21 = _weights(x1, x2, cfg, backend)
    s12 = _half_shift(w12, backend)
    s21 = _half_shift(w21, backend)
    return SelectResult(
        scaled_first=backend.mul(s12, x1),
        scaled_second=backend.mul(s21, x2),
        weight_first=s12,
        weight_second=s21,
    )


def select_lt_half(x1: V, x2: V, cfg: ComparatorConfig, backend) -> SelectResult[V]:
    """Keep the smaller input: gt_half with the weights swapped."""
    w12, w21 = _weights(x1, x2, cfg, backend)
    s12 = _half_shift(w12, backend)
    s21 = _half_shift(w21, backend)
    return SelectResult(
        scaled_first=backend.mul(s21, x1),
        scaled_second=backend.mul(s12, x2),
        weight_first=s21,
        weight_second=s12,
    )


def select_eq(x1: V, x2: V, cfg: ComparatorConfig, backend) -> SelectResult[V]:
    """Keep both on (approximate) equality: weight 1 + w12*w21 ~ 1 - w^2.

    The weight is normalised by the encoded unit so this variant performs
    the same single plaintext multiplication as the others.
    """
    w12, w21 = _weights(x1, x2, cfg, backend)
    prod = backend.mul(w12, w21)
    weight = backend.mul_const(backend.add_const(prod, 1.0), 1.0)
    return SelectResult(
        scaled_first=backend.mul(weight, x1),
        scaled_second=backend.mul(weight, x2),
        weight_first=weight,
        weight_second=weight,
    )


def select_gt(x1: V, x2: V, cfg: ComparatorConfig, backend) -> SelectResult[V]:
    """Strict greater-than: weights w_ij*(1 + w_ij)/2; a tie zeroes both."""
    w12, w21 = _weights(x1, x2, cfg, backend)
    s12 = backend.mul(w12, _half_shift(w12, backend))
    s21 = backend.mul(w21, _half_shift(w21, backend))
    return SelectResult(
        scaled_first=backend.mul(s12, x1),
        scaled_second=backend.mul(s21, x2),
        weight_first=s12,
        weight_second=s21,
    )


def select_lt(x1: V, x2: V, cfg: ComparatorConfig, backend) -> SelectResult[V]:
    """Strict less-than: the gt weights swapped."""
    w12, w21 = _weights(x1, x2, cfg, backend)
    s12 = backend.mul(w12, _half_shift(w12, backend))
    s21 = backend.mul(w21, _half_shift(w21, backend))
    return SelectResult(
        scaled_first=backend.mul(s21, x1),
        scaled_second=backend.mul(s12, x2),
        weight_first=s21,
        weight_second=s12,
    )


_SELECT = {
    "gt_half": select_gt_half,
    "lt_half": select_lt_half,
    "eq": select_eq,
    "gt": select_gt,
    "lt": select_lt,
}


def select(x1: V, x2: V, cfg: ComparatorConfig, backend) -> SelectResult[V]:
    return _SELECT[cfg.variant](x1, x2, cfg, backend)


def depth_estimate(variant: str, r: int) -> tuple[int, int]:
    """(ciphertext multiplications, plaintext multiplications) on the weight
    path: 2r + one plaintext mul for gt_half/lt_half, 2r + 1 + one plaintext
    mul for eq/gt/lt.  Scaling the data afterwards costs one further
    ciphertext multiplication, outside these counts."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant in ("gt_half", "lt_half"):
        return 2 * r, 1
    return 2 * r + 1, 1


def ideal_weight(variant: str, x1: float, x2: float) -> float:
    """Limit weight (r -> infinity) applied to the first component."""
    if x1 > x2:
        w = 1.0
    elif x1 < x2:
        w = -1.0
    else:
        w = 0.0
    if variant == "gt_half":
        return (1 + w) / 2
    if variant == "lt_half":
        return (1 - w) / 2
    if variant == "eq":
        return 1 - w * w
    if variant == "gt":
        return w * (1 + w) / 2
    if variant == "lt":
        return -w * (1 - w) / 2
    raise ValueError(f"unknown variant {variant!r}")
