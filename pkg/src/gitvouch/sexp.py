"""Minimal s-expression reader and printer.

Grammar: lists in parentheses, double-quoted strings with ``\\"`` and
``\\\\`` escapes, bare atoms, ``;`` line comments, and the ``'expr``
quote shorthand. Input must be UTF-8 without a byte-order mark. Errors
carry the byte offset they were detected at.
"""

from __future__ import annotations

from dataclasses import dataclass

from gitvouch.errors import VouchError


class SexpSyntaxError(VouchError):
    def __init__(self, message: str, offset: int | None = None) -> None:
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class Atom:
    """A leaf: a bare symbol/number, or a quoted string when
    ``quoted`` is true."""

    text: str
    quoted: bool = False


SExp = Atom | list

_DELIMS = b"()\"; \t\r\n'"


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def error(self, message: str, offset: int | None = None) -> SexpSyntaxError:
        return SexpSyntaxError(message, self.pos if offset is None else offset)

    def skip_blank(self) -> None:
        data = self.data
        while self.pos < len(data):
            byte = data[self.pos : self.pos + 1]
            if byte in b" \t\r\n":
                self.pos += 1
            elif byte == b";":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            else:
                return

    def read(self):
        self.skip_blank()
        if self.pos >= len(self.data):
            return None
        byte = self.data[self.pos : self.pos + 1]
        if byte == b"(":
            return self._read_list()
        if byte == b")":
            raise self.error("unexpected ')'")
        if byte == b'"':
            return self._read_string()
        if byte == b"'":
            self.pos += 1
            inner = self.read()
            if inner is None:
                raise self.error("dangling quote at end of input")
            return [Atom("quote"), inner]
        return self._read_atom()

    def _read_list(self) -> list:
        start = self.pos
        self.pos += 1
        items = []
        while True:
            self.skip_blank()
            if self.pos >= len(self.data):
                raise self.error("unbalanced '('", start)
            if self.data[self.pos : self.pos + 1] == b")":
                self.pos += 1
                return items
            items.append(self.read())

    def _read_string(self) -> Atom:
        start = self.pos
        self.pos += 1
        out = bytearray()
        data = self.data
        while self.pos < len(data):
            byte = data[self.pos : self.pos + 1]
            if byte == b'"':
                self.pos += 1
                return Atom(self._decode(out, start), quoted=True)
            if byte == b"\\" and self.pos + 1 < len(data):
                nxt = data[self.pos + 1 : self.pos + 2]
                if nxt in (b'"', b"\\"):
                    out += nxt
                    self.pos += 2
                    continue
            out += byte
            self.pos += 1
        raise self.error("unterminated string", start)

    def _read_atom(self) -> Atom:
        start = self.pos
        data = self.data
        while self.pos < len(data) and data[self.pos : self.pos + 1] not in [
            bytes([b]) for b in _DELIMS
        ]:
            self.pos += 1
        return Atom(self._decode(data[start : self.pos], start))

    def _decode(self, raw: bytes | bytearray, offset: int) -> str:
        try:
            return bytes(raw).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SexpSyntaxError(f"invalid UTF-8: {exc}", offset) from exc


def _reader(data: bytes | str) -> _Reader:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if data.startswith(b"\xef\xbb\xbf"):
        raise SexpSyntaxError("byte-order mark not allowed", 0)
    return _Reader(data)


def parse_sexp(data: bytes | str) -> SExp:
    """Parse exactly one top-level expression."""
    reader = _reader(data)
    expr = reader.read()
    if expr is None:
        raise SexpSyntaxError("empty input", 0)
    reader.skip_blank()
    if reader.pos < len(reader.data):
        raise reader.error("trailing data after expression")
    return expr


def parse_all(data: bytes | str, *, allow_trailing_closers: bool = False) -> list[SExp]:
    """Parse every top-level expression (possibly none).

    ``allow_trailing_closers`` treats stray ``)`` after complete
    top-level forms as end of input; published snippets sometimes lose a
    wrapping form and keep its closing paren.
    """
    reader = _reader(data)
    out = []
    while True:
        reader.skip_blank()
        if (
            allow_trailing_closers
            and out
            and reader.pos < len(reader.data)
            and reader.data[reader.pos : reader.pos + 1] == b")"
        ):
            return out
        expr = reader.read()
        if expr is None:
            return out
        out.append(expr)


def print_sexp(expr: SExp) -> str:
    """Canonical printer; ``parse_sexp(print_sexp(e))`` == ``e``."""
    if isinstance(expr, Atom):
        if expr.quoted:
            escaped = expr.text.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        return expr.text
    return "(" + " ".join(print_sexp(item) for item in expr) + ")"
