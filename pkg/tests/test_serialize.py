"""On-disk formats: roundtrips, parameter-hash pinning, kind/version/
corruption rejection."""

import random

import pytest

from hecond import fv, serialize
from hecond.encoder import EncodingParams, decode, encode
from hecond.ring import RingParams

PARAMS = fv.SchemeParams(
    RingParams(64, 2**61 - 1), 65536, relin_base_bits=16, security_note="test-only"
)
EP = EncodingParams(7, 8, 8, 64, 65536)
KEYS = fv.keygen(PARAMS, random.Random("test:serialize"))


def test_scheme_dict_roundtrip():
    d = serialize.scheme_to_dict(PARAMS)
    assert serialize.scheme_from_dict(d) == PARAMS
    assert serialize.encoding_from_dict(serialize.encoding_to_dict(EP)) == EP
    with pytest.raises(serialize.SerializationError):
        serialize.scheme_from_dict({"d": 64})


def test_keyset_roundtrip(tmp_path):
    serialize.save_keyset(tmp_path / "ks", KEYS)
    assert sorted(p.name for p in (tmp_path / "ks").iterdir()) == [
        "params.json",
        "pk.bin",
        "rlk.bin",
        "sk.bin",
    ]
    loaded = serialize.load_keyset(tmp_path / "ks")
    assert loaded.sk.s == KEYS.sk.s
    assert loaded.pk.p0 == KEYS.pk.p0 and loaded.pk.p1 == KEYS.pk.p1
    assert loaded.rlk.pairs == KEYS.rlk.pairs
    # the packed relinearization cache must be rebuilt identically
    assert loaded.rlk.packed == KEYS.rlk.packed
    assert loaded.rlk.slot_bytes == KEYS.rlk.slot_bytes
    # loaded keys must be fully usable
    pt = encode(0.25, EP)
    ct = fv.eval_mul(
        fv.encrypt(loaded.pk, pt, random.Random(1)),
        fv.encrypt(loaded.pk, pt, random.Random(2)),
        loaded.rlk,
    )
    assert decode(fv.decrypt(loaded.sk, ct), EP) == pytest.approx(0.0625, abs=1e-4)


def test_ciphertext_roundtrip_with_metadata(tmp_path):
    pt = encode(0.1, EP)
    ct = fv.encrypt(KEYS.pk, pt, random.Random(3))
    ct = fv.eval_mul_plain(fv.eval_mul(ct, ct, KEYS.rlk), pt)
    path = tmp_path / "ct.bin"
    serialize.save_ciphertext(path, ct, PARAMS, EP)
    back, params, ep = serialize.load_ciphertext(path, expect=PARAMS)
    assert params == PARAMS and ep == EP
    assert back.parts == ct.parts
    assert back.mult_depth == 1 and back.plain_mult_count == 1


def test_plaintext_roundtrip(tmp_path):
    pt = encode(-2.375, EP)
    path = tmp_path / "pt.bin"
    serialize.save_plaintext(path, pt, PARAMS, EP)
    back, params, ep = serialize.load_plaintext(path)
    assert back == pt and ep == EP
    assert decode(back, ep) == pytest.approx(-2.375, abs=1e-5)


def test_kind_mismatch_rejected(tmp_path):
    serialize.save_secret_key(tmp_path / "sk.bin", KEYS.sk)
    with pytest.raises(serialize.SerializationError, match="secret key"):
        serialize.load_ciphertext(tmp_path / "sk.bin")


def test_cross_parameter_pinning(tmp_path):
    pt = encode(0.1, EP)
    ct = fv.encrypt(KEYS.pk, pt, random.Random(4))
    serialize.save_ciphertext(tmp_path / "ct.bin", ct, PARAMS, EP)
    other = fv.SchemeParams(RingParams(128, 2**61 - 1), 65536, relin_base_bits=16)
    with pytest.raises(serialize.SerializationError, match="different"):
        serialize.load_ciphertext(tmp_path / "ct.bin", expect=other)


def test_bad_magic_and_version(tmp_path):
    serialize.save_secret_key(tmp_path / "sk.bin", KEYS.sk)
    raw = bytearray((tmp_path / "sk.bin").read_bytes())
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXX" + bytes(raw[4:]))
    with pytest.raises(serialize.SerializationError, match="not a recognised"):
        serialize.load_secret_key(bad)
    raw2 = bytearray(raw)
    raw2[4] = 99  # format version byte
    bad.write_bytes(bytes(raw2))
    with pytest.raises(serialize.SerializationError, match="version"):
        serialize.load_secret_key(bad)


def test_corruption_detected(tmp_path):
    serialize.save_secret_key(tmp_path / "sk.bin", KEYS.sk)
    raw = bytearray((tmp_path / "sk.bin").read_bytes())
    # flip a byte inside the embedded parameter JSON: either the JSON breaks
    # or the stored parameter hash no longer matches
    raw[40] ^= 0xFF
    bad = tmp_path / "bad.bin"
    bad.write_bytes(bytes(raw))
    with pytest.raises(serialize.SerializationError):
        serialize.load_secret_key(bad)


def test_truncation_detected(tmp_path):
    serialize.save_public_key(tmp_path / "pk.bin", KEYS.pk)
    raw = (tmp_path / "pk.bin").read_bytes()
    bad = tmp_path / "bad.bin"
    bad.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(serialize.SerializationError, match="truncated"):
        serialize.load_public_key(bad)


def test_out_of_range_coefficient_rejected(tmp_path):
    serialize.save_secret_key(tmp_path / "sk.bin", KEYS.sk)
    raw = bytearray((tmp_path / "sk.bin").read_bytes())
    # the final coefficient slot: set every byte, exceeding q < 2^61 < 2^64
    for i in range(1, 9):
        raw[-i] = 0xFF
    bad = tmp_path / "bad.bin"
    bad.write_bytes(bytes(raw))
    with pytest.raises(serialize.SerializationError, match="out of range"):
        serialize.load_secret_key(bad)
