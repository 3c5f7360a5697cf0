"""OpenPGP v4 key fingerprints (20-byte SHA-1 of the key packet)."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Fingerprint:
    raw: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.raw, bytes) or len(self.raw) != 20:
            raise ValueError(f"fingerprint must be exactly 20 bytes, got {self.raw!r}")

    @classmethod
    def parse(cls, text: str) -> "Fingerprint":
        """Accepts hex with or without spacing, any case."""
        compact = text.replace(" ", "")
        if len(compact) != 40:
            raise ValueError(f"fingerprint must be 40 hex digits: {text!r}")
        try:
            return cls(bytes.fromhex(compact))
        except ValueError:
            raise ValueError(f"fingerprint is not hexadecimal: {text!r}") from None

    @property
    def hex(self) -> str:
        return self.raw.hex()

    @property
    def key_id(self) -> bytes:
        """Low 64 bits, what signature issuer subpackets carry."""
        return self.raw[-8:]

    def display(self) -> str:
        """Canonical form: 10 uppercase groups of 4, space separated."""
        hx = self.raw.hex().upper()
        return " ".join(hx[i : i + 4] for i in range(0, 40, 4))

    def __str__(self) -> str:
        return self.display()

    def __repr__(self) -> str:
        return f"Fingerprint({self.raw.hex().upper()})"
