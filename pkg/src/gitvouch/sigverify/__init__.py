"""OpenPGP subset: key loading and detached-signature verification."""

from gitvouch.sigverify.armor import (
    BadArmor,
    BadChecksum,
    armor,
    dearmor,
    split_armored_blocks,
)
from gitvouch.sigverify.fingerprint import Fingerprint
from gitvouch.sigverify.keys import Keyring, NoKeyFound, PublicKey, load_keys
from gitvouch.sigverify.packets import (
    KeyPacket,
    SignaturePacket,
    Truncated,
    UnknownPacket,
    Unsupported,
    UserIdPacket,
    fingerprint_of,
    parse_packets,
)
from gitvouch.sigverify.signer import SigningKey, export_public, sign_for_tests
from gitvouch.sigverify.verify import (
    BadSignature,
    UnknownKey,
    VerifiedSignature,
    WeakDigest,
    verify,
    verify_detailed,
)

__all__ = [
    "BadArmor",
    "BadChecksum",
    "BadSignature",
    "Fingerprint",
    "KeyPacket",
    "Keyring",
    "NoKeyFound",
    "PublicKey",
    "SignaturePacket",
    "SigningKey",
    "Truncated",
    "UnknownKey",
    "UnknownPacket",
    "Unsupported",
    "UserIdPacket",
    "VerifiedSignature",
    "WeakDigest",
    "armor",
    "dearmor",
    "export_public",
    "fingerprint_of",
    "load_keys",
    "parse_packets",
    "sign_for_tests",
    "split_armored_blocks",
    "verify",
    "verify_detailed",
]
