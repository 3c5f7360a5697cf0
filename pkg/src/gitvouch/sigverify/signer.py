"""Ed25519 signer for fixture generation.

Produces real v4 OpenPGP packets: an importable public-key certificate
(key + user id + self-certification) and detached document signatures
that `verify` — and stock OpenPGP tooling — accept. This exists so the
test suite can fabricate signed histories without external tools; it is
not a general-purpose signing implementation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from gitvouch.sigverify.armor import armor
from gitvouch.sigverify.fingerprint import Fingerprint
from gitvouch.sigverify.packets import (
    ALGO_EDDSA,
    ED25519_OID,
    HASH_SHA1,
    HASH_SHA256,
    HASH_SHA512,
    SUBPKT_CREATED,
    SUBPKT_ISSUER_FINGERPRINT,
    SUBPKT_ISSUER_KEY_ID,
    TAG_PUBLIC_KEY,
    TAG_SIGNATURE,
    TAG_USER_ID,
    fingerprint_of,
)

DEFAULT_CREATED = 1600000000

_HASHERS = {HASH_SHA1: hashlib.sha1, HASH_SHA256: hashlib.sha256, HASH_SHA512: hashlib.sha512}
_HASH_BY_NAME = {"sha1": HASH_SHA1, "sha256": HASH_SHA256, "sha512": HASH_SHA512}


def _mpi(value: int) -> bytes:
    bits = value.bit_length()
    return bits.to_bytes(2, "big") + value.to_bytes((bits + 7) // 8 or 1, "big")


def _packet(tag: int, body: bytes) -> bytes:
    header = bytes([0xC0 | tag])
    n = len(body)
    if n < 192:
        return header + bytes([n]) + body
    if n < 8384:
        n -= 192
        return header + bytes([192 + (n >> 8), n & 0xFF]) + body
    return header + b"\xff" + n.to_bytes(4, "big") + body


def _subpacket(type_: int, data: bytes) -> bytes:
    length = len(data) + 1
    if length < 192:
        prefix = bytes([length])
    else:
        length -= 192
        prefix = bytes([192 + (length >> 8), length & 0xFF])
    return prefix + bytes([type_]) + data


@dataclass
class SigningKey:
    """An Ed25519 key pair plus the metadata its packets carry."""

    private: Ed25519PrivateKey
    created: int
    user_id: str

    @classmethod
    def generate(cls, user_id: str = "Test Key <test@example.org>", *, created: int = DEFAULT_CREATED) -> "SigningKey":
        return cls(Ed25519PrivateKey.generate(), created, user_id)

    @classmethod
    def from_seed(cls, seed: bytes, user_id: str = "Test Key <test@example.org>", *, created: int = DEFAULT_CREATED) -> "SigningKey":
        """Deterministic key: ``seed`` is hashed down to 32 bytes."""
        raw = hashlib.sha256(seed).digest()
        return cls(Ed25519PrivateKey.from_private_bytes(raw), created, user_id)

    @property
    def public_point(self) -> bytes:
        from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

        return self.private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)

    @property
    def key_packet_body(self) -> bytes:
        point = int.from_bytes(b"\x40" + self.public_point, "big")
        return (
            b"\x04"
            + self.created.to_bytes(4, "big")
            + bytes([ALGO_EDDSA])
            + bytes([len(ED25519_OID)])
            + ED25519_OID
            + _mpi(point)
        )

    @property
    def fingerprint(self) -> Fingerprint:
        return fingerprint_of(self.key_packet_body)


def _signature_packet_body(
    key: SigningKey,
    sig_type: int,
    hash_id: int,
    hash_input_prefix: bytes,
    created: int,
    *,
    issuer_fingerprint: bool = True,
) -> bytes:
    hashed = _subpacket(SUBPKT_CREATED, created.to_bytes(4, "big"))
    if issuer_fingerprint:
        hashed = (
            _subpacket(SUBPKT_ISSUER_FINGERPRINT, b"\x04" + key.fingerprint.raw) + hashed
        )
    if sig_type == 0x13:
        hashed += _subpacket(27, b"\x03")  # key flags: certify + sign
    unhashed = _subpacket(SUBPKT_ISSUER_KEY_ID, key.fingerprint.key_id)

    hashed_portion = (
        b"\x04"
        + bytes([sig_type, ALGO_EDDSA, hash_id])
        + len(hashed).to_bytes(2, "big")
        + hashed
    )
    trailer = hashed_portion + b"\x04\xff" + len(hashed_portion).to_bytes(4, "big")
    digest = _HASHERS[hash_id](hash_input_prefix + trailer).digest()

    raw = key.private.sign(digest)
    r = int.from_bytes(raw[:32], "big")
    s = int.from_bytes(raw[32:], "big")
    return (
        hashed_portion
        + len(unhashed).to_bytes(2, "big")
        + unhashed
        + digest[:2]
        + _mpi(r)
        + _mpi(s)
    )


def sign_for_tests(
    payload: bytes,
    key: SigningKey,
    *,
    hash_algorithm: str = "sha256",
    text_mode: bool = False,
    created: int | None = None,
    issuer_fingerprint: bool = True,
) -> str:
    """Detached signature over ``payload``, armored.

    ``hash_algorithm`` may name a weak digest on purpose so tests can
    exercise the rejection path; ``issuer_fingerprint=False`` leaves
    only the 64-bit key id for issuer lookup.
    """
    hash_id = _HASH_BY_NAME[hash_algorithm]
    sig_type = 0x01 if text_mode else 0x00
    data = payload
    if text_mode:
        data = payload.replace(b"\r\n", b"\n").replace(b"\n", b"\r\n")
    body = _signature_packet_body(
        key,
        sig_type,
        hash_id,
        data,
        created if created is not None else key.created,
        issuer_fingerprint=issuer_fingerprint,
    )
    return armor("SIGNATURE", _packet(TAG_SIGNATURE, body))


def export_public(key: SigningKey, *, armored: bool = True) -> str | bytes:
    """Certificate (key + user id + self-certification) that OpenPGP
    tooling can import."""
    key_body = key.key_packet_body
    uid = key.user_id.encode("utf-8")
    cert_input = (
        b"\x99"
        + len(key_body).to_bytes(2, "big")
        + key_body
        + b"\xb4"
        + len(uid).to_bytes(4, "big")
        + uid
    )
    selfsig = _signature_packet_body(key, 0x13, HASH_SHA256, cert_input, key.created)
    binary = (
        _packet(TAG_PUBLIC_KEY, key_body)
        + _packet(TAG_USER_ID, uid)
        + _packet(TAG_SIGNATURE, selfsig)
    )
    if armored:
        return armor("PUBLIC KEY BLOCK", binary)
    return binary
