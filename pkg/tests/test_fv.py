"""Scheme layer: encrypt/decrypt roundtrips, homomorphic operation
correctness against exact plaintext-ring arithmetic, noise budget
semantics, relinearization, operation counters."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hecond import fv
from hecond.ring import RingElement, RingParams, negacyclic_conv, zero

# relin_base_bits must stay well below log2(q): the key-switching noise grows
# with 2^base, and the default base of 60 would swamp a 61-bit modulus
TINY = fv.SchemeParams(
    RingParams(16, 2**61 - 1), 257, relin_base_bits=16, security_note="test-only"
)
TINY_KEYS = fv.keygen(TINY, random.Random("test:tiny"))


def pt_strategy(params=TINY):
    return st.lists(
        st.integers(0, params.t - 1), min_size=params.ring.d, max_size=params.ring.d
    ).map(lambda cs: fv.Plaintext(params.t, tuple(cs)))


def pt_ring_mul(p1: fv.Plaintext, p2: fv.Plaintext) -> tuple[int, ...]:
    # exact negacyclic product of the plaintext polynomials, reduced mod t
    conv = negacyclic_conv(p1.centered(), p2.centered())
    return tuple(v % p1.t for v in conv)


def pt_add(p1: fv.Plaintext, p2: fv.Plaintext) -> tuple[int, ...]:
    return tuple((a + b) % p1.t for a, b in zip(p1.coeffs, p2.coeffs))


# ------------------------------------------------------------------ plumbing


def test_scheme_params_validation():
    ring = RingParams(16, 2**61 - 1)
    with pytest.raises(ValueError):
        fv.SchemeParams(ring, 1)  # t too small
    with pytest.raises(ValueError):
        fv.SchemeParams(ring, 257, sigma=0.0)
    with pytest.raises(ValueError):
        fv.SchemeParams(ring, 257, relin_base_bits=0)
    with pytest.raises(ValueError):
        fv.SchemeParams(RingParams(16, 255), 256)  # delta = q // t < 2


def test_plaintext_validation():
    with pytest.raises(ValueError):
        fv.Plaintext(257, (257,) + (0,) * 15)
    p = fv.plaintext_from_coeffs(257, [-1] + [0] * 15)
    assert p.coeffs[0] == 256
    assert p.centered()[0] == -1


def test_keygen_deterministic():
    k1 = fv.keygen(TINY, random.Random(42))
    k2 = fv.keygen(TINY, random.Random(42))
    k3 = fv.keygen(TINY, random.Random(43))
    assert k1.sk.s == k2.sk.s and k1.pk.p0 == k2.pk.p0
    assert k1.rlk.pairs == k2.rlk.pairs
    assert k1.sk.s != k3.sk.s


def test_encrypt_randomized_but_seed_deterministic():
    pt = fv.plaintext_from_coeffs(TINY.t, [5] + [0] * 15)
    c1 = fv.encrypt(TINY_KEYS.pk, pt, random.Random(1))
    c2 = fv.encrypt(TINY_KEYS.pk, pt, random.Random(1))
    c3 = fv.encrypt(TINY_KEYS.pk, pt, random.Random(2))
    assert c1.parts == c2.parts
    assert c1.parts != c3.parts
    assert fv.decrypt(TINY_KEYS.sk, c3) == pt


# ----------------------------------------------------------------- roundtrip


@given(pt_strategy(), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_encrypt_decrypt_roundtrip(pt, seed):
    ct = fv.encrypt(TINY_KEYS.pk, pt, random.Random(seed))
    out, budget = fv.decrypt_with_budget(TINY_KEYS.sk, ct)
    assert out == pt
    assert budget > 0


def test_decrypt_never_raises():
    pt = fv.plaintext_from_coeffs(TINY.t, [123] + [0] * 15)
    ct = fv.encrypt(TINY_KEYS.pk, pt, random.Random(9))
    wrong = fv.keygen(TINY, random.Random("other")).sk
    out, budget = fv.decrypt_with_budget(wrong, ct)
    assert isinstance(out, fv.Plaintext)
    assert isinstance(budget, int) and budget >= 0


# ------------------------------------------------------- homomorphic ops


@given(pt_strategy(), pt_strategy(), st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_hom_add_sub_negate(p1, p2, seed):
    rng = random.Random(seed)
    c1 = fv.encrypt(TINY_KEYS.pk, p1, rng)
    c2 = fv.encrypt(TINY_KEYS.pk, p2, rng)
    assert fv.decrypt(TINY_KEYS.sk, fv.eval_add(c1, c2)).coeffs == pt_add(p1, p2)
    assert fv.decrypt(TINY_KEYS.sk, fv.eval_sub(c1, c2)).coeffs == tuple(
        (a - b) % TINY.t for a, b in zip(p1.coeffs, p2.coeffs)
    )
    assert fv.decrypt(TINY_KEYS.sk, fv.eval_negate(c1)).coeffs == tuple(
        (-a) % TINY.t for a in p1.coeffs
    )


@given(pt_strategy(), pt_strategy(), st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_add_plain_matches_encrypted_add(p1, p2, seed):
    c1 = fv.encrypt(TINY_KEYS.pk, p1, random.Random(seed))
    via_plain = fv.decrypt(TINY_KEYS.sk, fv.eval_add_plain(c1, p2))
    c2 = fv.encrypt(TINY_KEYS.pk, p2, random.Random(seed + 1))
    via_ct = fv.decrypt(TINY_KEYS.sk, fv.eval_add(c1, c2))
    assert via_plain == via_ct
    assert via_plain.coeffs == pt_add(p1, p2)


@given(pt_strategy(), pt_strategy(), st.integers(0, 2**32))
@settings(max_examples=20, deadline=None)
def test_hom_mul_and_mul_plain_match_ring_product(p1, p2, seed):
    rng = random.Random(seed)
    c1 = fv.encrypt(TINY_KEYS.pk, p1, rng)
    c2 = fv.encrypt(TINY_KEYS.pk, p2, rng)
    expected = pt_ring_mul(p1, p2)
    prod = fv.eval_mul(c1, c2, TINY_KEYS.rlk)
    assert len(prod.parts) == 2
    assert fv.decrypt(TINY_KEYS.sk, prod).coeffs == expected
    assert fv.decrypt(TINY_KEYS.sk, fv.eval_mul_plain(c1, p2)).coeffs == expected


def test_relinearize_preserves_message():
    pt = fv.plaintext_from_coeffs(TINY.t, [7, 3] + [0] * 14)
    ct = fv.encrypt(TINY_KEYS.pk, pt, random.Random(4))
    # a synthetic 3-part ciphertext with zero quadratic part decrypts to the
    # same message; relinearization must key-switch it back to 2 parts
    ct3 = fv.Ciphertext((ct.parts[0], ct.parts[1], zero(TINY.ring)))
    assert fv.decrypt(TINY_KEYS.sk, ct3) == pt
    ct2 = fv.relinearize(ct3, TINY_KEYS.rlk)
    assert len(ct2.parts) == 2
    assert fv.decrypt(TINY_KEYS.sk, ct2) == pt
    # 2-part input passes through, anything larger is rejected
    assert fv.relinearize(ct, TINY_KEYS.rlk) is ct
    with pytest.raises(ValueError):
        fv.relinearize(
            fv.Ciphertext(tuple([ct.parts[0]] * 4)), TINY_KEYS.rlk
        )


def test_eval_mul_rejects_unrelinearized_operands():
    pt = fv.plaintext_from_coeffs(TINY.t, [1] + [0] * 15)
    ct = fv.encrypt(TINY_KEYS.pk, pt, random.Random(5))
    ct3 = fv.Ciphertext((ct.parts[0], ct.parts[1], zero(TINY.ring)))
    with pytest.raises(ValueError):
        fv.eval_mul(ct3, ct, TINY_KEYS.rlk)


# ------------------------------------------------------------ noise budget


def test_budget_decreases_with_depth_and_guards_correctness(toy):
    preset, keys = toy
    params = preset.scheme
    pt = fv.plaintext_from_coeffs(params.t, [2] + [0] * (params.ring.d - 1))
    ct = fv.encrypt(keys.pk, pt, random.Random(17))
    expected = pt.coeffs
    budgets = [fv.noise_budget(keys.sk, ct)]
    assert budgets[0] > 0
    saw_wrong_after_zero = False
    for _ in range(5):
        ct = fv.eval_mul(ct, ct, keys.rlk)
        expected = tuple(
            v % params.t
            for v in negacyclic_conv(
                [x - params.t if x > params.t // 2 else x for x in expected],
                [x - params.t if x > params.t // 2 else x for x in expected],
            )
        )
        out, budget = fv.decrypt_with_budget(keys.sk, ct)
        budgets.append(budget)
        if budget > 0:
            # the central invariant: positive budget implies exact decryption
            assert out.coeffs == expected
        elif out.coeffs != expected:
            saw_wrong_after_zero = True
    assert budgets[-1] == 0, f"chain never exhausted the budget: {budgets}"
    for prev, nxt in zip(budgets, budgets[1:]):
        assert nxt < prev or (prev == 0 and nxt == 0), budgets
    # witnesses that the budget is not vacuously optimistic
    assert saw_wrong_after_zero


def test_budget_message_independent(toy):
    preset, keys = toy
    d, t = preset.scheme.ring.d, preset.scheme.t
    p1 = fv.plaintext_from_coeffs(t, [0] * d)
    p2 = fv.plaintext_from_coeffs(t, [t - 1] * d)
    budgets = []
    for p in (p1, p2):
        ct = fv.encrypt(keys.pk, p, random.Random(23))
        budgets.append(fv.noise_budget(keys.sk, ct))
        ct2 = fv.eval_mul(ct, ct, keys.rlk)
        budgets.append(fv.noise_budget(keys.sk, ct2))
    assert abs(budgets[0] - budgets[2]) <= 2
    assert abs(budgets[1] - budgets[3]) <= 2


def test_budget_matches_decrypt_with_budget(toy):
    preset, keys = toy
    pt = fv.plaintext_from_coeffs(preset.scheme.t, [9] * preset.scheme.ring.d)
    ct = fv.encrypt(keys.pk, pt, random.Random(31))
    _, b1 = fv.decrypt_with_budget(keys.sk, ct)
    assert b1 == fv.noise_budget(keys.sk, ct)


# ---------------------------------------------------------------- counters


def test_operation_counters():
    pt = fv.plaintext_from_coeffs(TINY.t, [2] + [0] * 15)
    rng = random.Random(6)
    a = fv.encrypt(TINY_KEYS.pk, pt, rng)
    b = fv.encrypt(TINY_KEYS.pk, pt, rng)
    assert a.mult_depth == 0 and a.plain_mult_count == 0
    m1 = fv.eval_mul(a, b, TINY_KEYS.rlk)
    assert m1.mult_depth == 1
    m2 = fv.eval_mul(m1, m1, TINY_KEYS.rlk)
    assert m2.mult_depth == 2
    # additions propagate the max of the operands
    s = fv.eval_add(m2, a)
    assert s.mult_depth == 2 and s.plain_mult_count == 0
    # plaintext multiplication counts separately and adds no ct-mul depth
    p = fv.eval_mul_plain(m2, pt)
    assert p.mult_depth == 2 and p.plain_mult_count == 1
    s2 = fv.eval_add(p, m1)
    assert s2.mult_depth == 2 and s2.plain_mult_count == 1
    m3 = fv.eval_mul(p, m1, TINY_KEYS.rlk)
    assert m3.mult_depth == 3 and m3.plain_mult_count == 1
