"""ASCII armor: base64 + CRC-24 framing around binary OpenPGP packets."""

from __future__ import annotations

import base64
import binascii
import re

from gitvouch.errors import VouchError

_CRC24_INIT = 0xB704CE
_CRC24_POLY = 0x1864CFB

_BEGIN_RE = re.compile(r"^-----BEGIN PGP ([A-Z0-9 ]+)-----\s*$")
_END_RE = re.compile(r"^-----END PGP ([A-Z0-9 ]+)-----\s*$")


class BadArmor(VouchError):
    pass


class BadChecksum(VouchError):
    pass


def _crc24_table() -> list[int]:
    table = []
    for byte in range(256):
        crc = byte << 16
        for _ in range(8):
            crc <<= 1
            if crc & 0x1000000:
                crc ^= _CRC24_POLY
        table.append(crc & 0xFFFFFF)
    return table


_TABLE = _crc24_table()


def crc24(data: bytes) -> int:
    crc = _CRC24_INIT
    for byte in data:
        crc = ((crc << 8) ^ _TABLE[((crc >> 16) ^ byte) & 0xFF]) & 0xFFFFFF
    return crc


def dearmor(text: str | bytes) -> bytes:
    """Decode a single armored block; verifies the CRC-24 trailer when
    present."""
    if isinstance(text, bytes):
        text = text.decode("utf-8", "replace")
    lines = text.splitlines()

    start = next((i for i, l in enumerate(lines) if _BEGIN_RE.match(l)), None)
    if start is None:
        raise BadArmor("missing BEGIN PGP marker")
    end = next((i for i in range(start + 1, len(lines)) if _END_RE.match(lines[i])), None)
    if end is None:
        raise BadArmor("missing END PGP marker")

    body = lines[start + 1 : end]
    # Armor headers (Key: value) run until the first blank line; minimal
    # armors omit both the headers and the blank line.
    if "" in body:
        body = body[body.index("") + 1 :]
    else:
        body = [l for l in body if ": " not in l]

    checksum = None
    data_lines = []
    for line in body:
        line = line.strip()
        if not line:
            continue
        if line.startswith("="):
            checksum = line[1:5]
        else:
            data_lines.append(line)
    try:
        data = base64.b64decode("".join(data_lines), validate=True)
    except (binascii.Error, ValueError) as exc:
        raise BadArmor(f"invalid base64 payload: {exc}") from exc

    if checksum is not None:
        try:
            stated = int.from_bytes(base64.b64decode(checksum, validate=True), "big")
        except (binascii.Error, ValueError) as exc:
            raise BadArmor(f"invalid checksum encoding: {exc}") from exc
        if stated != crc24(data):
            raise BadChecksum(
                f"CRC-24 mismatch: stated {stated:06x}, actual {crc24(data):06x}"
            )
    return data


def armor(kind: str, data: bytes) -> str:
    """Encode ``data`` as an armored block, e.g. kind="SIGNATURE"."""
    encoded = base64.b64encode(data).decode("ascii")
    lines = [encoded[i : i + 64] for i in range(0, len(encoded), 64)]
    crc = base64.b64encode(crc24(data).to_bytes(3, "big")).decode("ascii")
    return (
        f"-----BEGIN PGP {kind}-----\n\n"
        + "\n".join(lines)
        + f"\n={crc}\n-----END PGP {kind}-----\n"
    )


def split_armored_blocks(text: str) -> list[str]:
    """Split text into individual armored blocks (may be empty)."""
    lines = text.splitlines()
    blocks = []
    current: list[str] | None = None
    for line in lines:
        if _BEGIN_RE.match(line):
            current = [line]
        elif current is not None:
            current.append(line)
            if _END_RE.match(line):
                blocks.append("\n".join(current) + "\n")
                current = None
    return blocks
