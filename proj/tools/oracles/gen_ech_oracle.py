# Copyright (c) httpsrr contributors. All rights reserved.
# Licensed under the Apache 2.0 License.
"""Build ECHConfigList fixtures (draft-13 layout) with real X25519 keys.

Output: tests/data/ech_oracle.json. Keys are derived from fixed seeds so the
fixture is reproducible.
"""

import base64
import hashlib
import json
import struct
import sys
from pathlib import Path

from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

DRAFT13 = 0xFE0D
KEM_X25519 = 0x0020
KDF_SHA256 = 0x0001
AEAD_AES128GCM = 0x0001
AEAD_CHACHA = 0x0003


def x25519_public(seed: str) -> bytes:
    priv = X25519PrivateKey.from_private_bytes(hashlib.sha256(seed.encode()).digest())
    return priv.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)


def u16(v):
    return struct.pack("!H", v)


def vec16(b):
    return u16(len(b)) + b


def vec8(b):
    return bytes([len(b)]) + b


def ech_config(config_id, public_key, public_name, suites, max_name_len=0, extensions=b""):
    contents = (
        bytes([config_id])
        + u16(KEM_X25519)
        + vec16(public_key)
        + vec16(b"".join(u16(k) + u16(a) for k, a in suites))
        + bytes([max_name_len])
        + vec8(public_name.encode())
        + vec16(extensions)
    )
    return u16(DRAFT13) + vec16(contents)


def opaque_config(version, body):
    return u16(version) + vec16(body)


def config_list(*configs):
    return vec16(b"".join(configs))


def describe(config_id, public_key, public_name, suites, max_name_len=0, extensions=b""):
    return {
        "version": DRAFT13,
        "config_id": config_id,
        "kem_id": KEM_X25519,
        "public_key": public_key.hex(),
        "cipher_suites": [[k, a] for k, a in suites],
        "maximum_name_length": max_name_len,
        "public_name": public_name,
        "extensions": extensions.hex(),
        "public_key_sha256": hashlib.sha256(public_key).hexdigest(),
    }


def walk_list(blob):
    """Independent length-grammar walk: returns [(version, raw_entry)]."""
    if len(blob) < 2:
        raise ValueError("truncated")
    total = struct.unpack("!H", blob[:2])[0]
    if total != len(blob) - 2:
        raise ValueError("length mismatch")
    if total == 0:
        raise ValueError("empty list")
    out, pos = [], 2
    while pos < len(blob):
        version, length = struct.unpack("!HH", blob[pos : pos + 4])
        end = pos + 4 + length
        if end > len(blob):
            raise ValueError("truncated entry")
        out.append((version, blob[pos:end]))
        pos = end
    return out


def main(out_path: Path):
    suites = [(KDF_SHA256, AEAD_AES128GCM), (KDF_SHA256, AEAD_CHACHA)]
    cover_key = x25519_public("cover.a.com/1")
    cover_key2 = x25519_public("cover.a.com/2")
    b_key = x25519_public("b.com/1")

    cases = []

    def add(name, blob, configs):
        walked = walk_list(blob)
        assert len(walked) == len(configs), name
        cases.append(
            {
                "name": name,
                "hex": blob.hex(),
                "base64": base64.b64encode(blob).decode(),
                "configs": configs,
            }
        )

    c1 = ech_config(7, cover_key, "cover.a.com", suites)
    add("shared_cover", config_list(c1), [describe(7, cover_key, "cover.a.com", suites)])

    c2 = ech_config(8, cover_key2, "cover.a.com", suites)
    add("shared_cover_rotated", config_list(c2), [describe(8, cover_key2, "cover.a.com", suites)])

    c3 = ech_config(1, b_key, "b.com", suites[:1], max_name_len=32)
    add("split_b", config_list(c3), [describe(1, b_key, "b.com", suites[:1], 32)])

    ext = u16(0xFACE) + vec16(b"\x01\x02\x03")
    c4 = ech_config(7, cover_key, "cover.a.com", suites, extensions=ext)
    add("with_extension", config_list(c4), [describe(7, cover_key, "cover.a.com", suites, 0, ext)])

    unknown_body = bytes(range(12))
    unknown = opaque_config(0xAAAA, unknown_body)
    add(
        "unknown_version",
        config_list(unknown),
        [{"version": 0xAAAA, "raw": unknown.hex()}],
    )
    add(
        "unknown_then_draft13",
        config_list(unknown, c3),
        [{"version": 0xAAAA, "raw": unknown.hex()}, describe(1, b_key, "b.com", suites[:1], 32)],
    )

    errors = [
        {"name": "empty_payload", "hex": "", "error": "truncated"},
        {"name": "zero_length_list", "hex": "0000", "error": "empty_list"},
        {"name": "declared_too_long", "hex": (u16(len(c1) + 5) + c1).hex(), "error": "length_mismatch"},
        {"name": "declared_too_short", "hex": (u16(len(c1) - 1) + c1).hex(), "error": "length_mismatch"},
        {"name": "entry_overruns", "hex": config_list(c1[:-3]).hex(), "error": "truncated"},
    ]

    out = {"generator": "gen_ech_oracle.py", "cases": cases, "errors": errors}
    out_path.write_text(json.dumps(out, indent=2) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/data/ech_oracle.json"))
