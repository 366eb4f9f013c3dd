"""Binary on-disk formats for keys, ciphertexts, and plaintexts.

Every file starts with a fixed header: magic, format version, object kind,
and a 16-byte parameter hash, followed by the full parameter JSON (files
are self-describing), an object-specific JSON metadata block, and the
coefficient vectors as fixed-width little-endian slots.  Loading verifies
the magic, version, kind, and that the stored hash matches the stored
parameters; loaders can additionally pin an expected parameter set so a
ciphertext from one keyset cannot silently be fed to another.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from typing import BinaryIO

from . import fv
from .encoder import EncodingParams
from .ring import RingElement, RingParams

MAGIC = b"FVC1"
FORMAT_VERSION = 1

KIND_SECRET_KEY = 1
KIND_PUBLIC_KEY = 2
KIND_RELIN_KEY = 3
KIND_CIPHERTEXT = 4
KIND_PLAINTEXT = 5

_KIND_NAMES = {
    KIND_SECRET_KEY: "secret key",
    KIND_PUBLIC_KEY: "public key",
    KIND_RELIN_KEY: "relinearization key",
    KIND_CIPHERTEXT: "ciphertext",
    KIND_PLAINTEXT: "plaintext",
}


class SerializationError(ValueError):
    pass


def scheme_to_dict(params: fv.SchemeParams) -> dict:
    return {
        "d": params.ring.d,
        "q": hex(params.ring.q),
        "t": params.t,
        "sigma": params.sigma,
        "relin_base_bits": params.relin_base_bits,
        "security_note": params.security_note,
    }


def scheme_from_dict(data: dict) -> fv.SchemeParams:
    try:
        return fv.SchemeParams(
            ring=RingParams(data["d"], int(data["q"], 16)),
            t=data["t"],
            sigma=data["sigma"],
            relin_base_bits=data["relin_base_bits"],
            security_note=data.get("security_note", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SerializationError(f"bad scheme parameters: {exc}") from exc


def encoding_to_dict(ep: EncodingParams) -> dict:
    return {"b": ep.b, "n_i": ep.n_i, "n_f": ep.n_f, "d": ep.d, "t": ep.t}


def encoding_from_dict(data: dict) -> EncodingParams:
    try:
        return EncodingParams(data["b"], data["n_i"], data["n_f"], data["d"], data["t"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SerializationError(f"bad encoding parameters: {exc}") from exc


def params_hash(params: fv.SchemeParams) -> bytes:
    blob = json.dumps(scheme_to_dict(params), sort_keys=True).encode()
    return hashlib.sha256(blob).digest()[:16]


def _write_json(f: BinaryIO, obj) -> None:
    blob = json.dumps(obj, sort_keys=True).encode()
    f.write(struct.pack("<I", len(blob)))
    f.write(blob)


def _read_json(f: BinaryIO):
    (n,) = struct.unpack("<I", _read_exact(f, 4))
    try:
        return json.loads(_read_exact(f, n).decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SerializationError(f"corrupted metadata block: {exc}") from exc


def _read_exact(f: BinaryIO, n: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise SerializationError("file truncated")
    return data


def _write_coeffs(f: BinaryIO, coeffs, slot: int) -> None:
    f.write(struct.pack("<IH", len(coeffs), slot))
    out = bytearray(len(coeffs) * slot)
    for i, c in enumerate(coeffs):
        out[i * slot : (i + 1) * slot] = int(c).to_bytes(slot, "little")
    f.write(bytes(out))


def _read_coeffs(f: BinaryIO) -> tuple[int, ...]:
    n, slot = struct.unpack("<IH", _read_exact(f, 6))
    raw = _read_exact(f, n * slot)
    return tuple(
        int.from_bytes(raw[i * slot : (i + 1) * slot], "little") for i in range(n)
    )


def _slot_for(modulus: int) -> int:
    return (modulus.bit_length() + 7) // 8


def _save(path, kind: int, params: fv.SchemeParams, meta: dict, polys, slot: int):
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<BB", FORMAT_VERSION, kind))
        f.write(params_hash(params))
        _write_json(f, scheme_to_dict(params))
        _write_json(f, meta)
        f.write(struct.pack("<I", len(polys)))
        for coeffs in polys:
            _write_coeffs(f, coeffs, slot)


def _load(path, expect_kind: int):
    with open(path, "rb") as f:
        if _read_exact(f, 4) != MAGIC:
            raise SerializationError(f"{path}: not a recognised key/ciphertext file")
        version, kind = struct.unpack("<BB", _read_exact(f, 2))
        if version != FORMAT_VERSION:
            raise SerializationError(
                f"{path}: format version {version}, expected {FORMAT_VERSION}"
            )
        if kind != expect_kind:
            raise SerializationError(
                f"{path}: holds a {_KIND_NAMES.get(kind, f'kind-{kind} object')}, "
                f"expected a {_KIND_NAMES[expect_kind]}"
            )
        stored_hash = _read_exact(f, 16)
        params = scheme_from_dict(_read_json(f))
        if params_hash(params) != stored_hash:
            raise SerializationError(
                f"{path}: parameter hash mismatch (file corrupted or edited)"
            )
        meta = _read_json(f)
        (n_polys,) = struct.unpack("<I", _read_exact(f, 4))
        polys = [_read_coeffs(f) for _ in range(n_polys)]
    return params, meta, polys


def _check_expected(path, params: fv.SchemeParams, expect: fv.SchemeParams | None):
    if expect is not None and params_hash(expect) != params_hash(params):
        raise SerializationError(
            f"{path}: parameters do not match the expected scheme "
            f"(file d={params.ring.d}, expected d={expect.ring.d}; "
            "was this produced under a different keyset?)"
        )


def _ring_elem(params: fv.SchemeParams, coeffs) -> RingElement:
    q = params.ring.q
    if any(c >= q for c in coeffs):
        raise SerializationError("coefficient out of range for stored modulus")
    return RingElement(params.ring, tuple(int(c) % q for c in coeffs))


def save_secret_key(path, sk: fv.SecretKey) -> None:
    _save(path, KIND_SECRET_KEY, sk.params, {}, [sk.s.coeffs],
          _slot_for(sk.params.ring.q))


def load_secret_key(path, expect: fv.SchemeParams | None = None) -> fv.SecretKey:
    params, _, polys = _load(path, KIND_SECRET_KEY)
    _check_expected(path, params, expect)
    if len(polys) != 1:
        raise SerializationError(f"{path}: expected one polynomial")
    return fv.SecretKey(_ring_elem(params, polys[0]), params)


def save_public_key(path, pk: fv.PublicKey) -> None:
    _save(path, KIND_PUBLIC_KEY, pk.params, {}, [pk.p0.coeffs, pk.p1.coeffs],
          _slot_for(pk.params.ring.q))


def load_public_key(path, expect: fv.SchemeParams | None = None) -> fv.PublicKey:
    params, _, polys = _load(path, KIND_PUBLIC_KEY)
    _check_expected(path, params, expect)
    if len(polys) != 2:
        raise SerializationError(f"{path}: expected two polynomials")
    return fv.PublicKey(
        _ring_elem(params, polys[0]), _ring_elem(params, polys[1]), params
    )


def save_relin_key(path, rlk: fv.RelinKey) -> None:
    polys = []
    for r0, r1 in rlk.pairs:
        polys.append(r0.coeffs)
        polys.append(r1.coeffs)
    _save(path, KIND_RELIN_KEY, rlk.params, {"base_bits": rlk.base_bits}, polys,
          _slot_for(rlk.params.ring.q))


def load_relin_key(path, expect: fv.SchemeParams | None = None) -> fv.RelinKey:
    params, meta, polys = _load(path, KIND_RELIN_KEY)
    _check_expected(path, params, expect)
    if meta.get("base_bits") != params.relin_base_bits:
        raise SerializationError(f"{path}: relinearization base mismatch")
    if not polys or len(polys) % 2:
        raise SerializationError(f"{path}: expected an even number of polynomials")
    pairs = tuple(
        (_ring_elem(params, polys[i]), _ring_elem(params, polys[i + 1]))
        for i in range(0, len(polys), 2)
    )
    return fv._build_relin_key(pairs, params)


def save_keyset(dir_path, keys: fv.KeySet) -> None:
    """Write sk.bin, pk.bin, rlk.bin and a human-readable params.json."""
    os.makedirs(dir_path, exist_ok=True)
    save_secret_key(os.path.join(dir_path, "sk.bin"), keys.sk)
    save_public_key(os.path.join(dir_path, "pk.bin"), keys.pk)
    save_relin_key(os.path.join(dir_path, "rlk.bin"), keys.rlk)
    info = scheme_to_dict(keys.params)
    info["params_hash"] = params_hash(keys.params).hex()
    with open(os.path.join(dir_path, "params.json"), "w") as f:
        json.dump(info, f, indent=2, sort_keys=True)
        f.write("\n")


def load_keyset(dir_path) -> fv.KeySet:
    sk = load_secret_key(os.path.join(dir_path, "sk.bin"))
    pk = load_public_key(os.path.join(dir_path, "pk.bin"), expect=sk.params)
    rlk = load_relin_key(os.path.join(dir_path, "rlk.bin"), expect=sk.params)
    return fv.KeySet(sk, pk, rlk, sk.params)


def save_ciphertext(
    path, ct: fv.Ciphertext, params: fv.SchemeParams,
    encoding: EncodingParams | None = None,
) -> None:
    meta = {
        "mult_depth": ct.mult_depth,
        "plain_mult_count": ct.plain_mult_count,
        "encoding": encoding_to_dict(encoding) if encoding else None,
    }
    _save(path, KIND_CIPHERTEXT, params, meta, [p.coeffs for p in ct.parts],
          _slot_for(params.ring.q))


def load_ciphertext(
    path, expect: fv.SchemeParams | None = None
) -> tuple[fv.Ciphertext, fv.SchemeParams, EncodingParams | None]:
    params, meta, polys = _load(path, KIND_CIPHERTEXT)
    _check_expected(path, params, expect)
    if len(polys) < 2:
        raise SerializationError(f"{path}: ciphertext needs at least two parts")
    ct = fv.Ciphertext(
        tuple(_ring_elem(params, p) for p in polys),
        mult_depth=int(meta.get("mult_depth", 0)),
        plain_mult_count=int(meta.get("plain_mult_count", 0)),
    )
    enc = meta.get("encoding")
    return ct, params, encoding_from_dict(enc) if enc else None


def save_plaintext(
    path, pt: fv.Plaintext, params: fv.SchemeParams,
    encoding: EncodingParams | None = None,
) -> None:
    if pt.t != params.t:
        raise SerializationError("plaintext modulus does not match scheme")
    meta = {"encoding": encoding_to_dict(encoding) if encoding else None}
    _save(path, KIND_PLAINTEXT, params, meta, [pt.coeffs], _slot_for(params.t))


def load_plaintext(
    path, expect: fv.SchemeParams | None = None
) -> tuple[fv.Plaintext, fv.SchemeParams, EncodingParams | None]:
    params, meta, polys = _load(path, KIND_PLAINTEXT)
    _check_expected(path, params, expect)
    if len(polys) != 1:
        raise SerializationError(f"{path}: expected one polynomial")
    if any(c >= params.t for c in polys[0]):
        raise SerializationError(f"{path}: coefficient out of range for modulus t")
    pt = fv.Plaintext(params.t, tuple(int(c) for c in polys[0]))
    enc = meta.get("encoding")
    return pt, params, encoding_from_dict(enc) if enc else None
