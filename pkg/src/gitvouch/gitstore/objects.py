"""Git object model: ids, raw objects, commit and tree parsing.

Everything here is pure byte manipulation; no I/O. Parsing is lossless:
a parsed commit retains its raw payload and can be re-serialized
byte-for-byte, which is what signature verification depends on.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from gitvouch.errors import VouchError

OBJECT_KINDS = ("commit", "tree", "blob", "tag")


class GitStoreError(VouchError):
    """Base for object-store errors."""


class ObjectNotFound(GitStoreError):
    pass


class CorruptObject(GitStoreError):
    pass


class BadDelta(GitStoreError):
    pass


class MalformedCommit(GitStoreError):
    pass


class NotACommit(GitStoreError):
    pass


class SymrefLoop(GitStoreError):
    pass


@dataclass(frozen=True, order=True)
class ObjectId:
    """A 20-byte SHA-1 object name."""

    raw: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.raw, bytes) or len(self.raw) != 20:
            raise ValueError(f"object id must be exactly 20 bytes, got {self.raw!r}")

    @classmethod
    def from_hex(cls, text: str | bytes) -> "ObjectId":
        if isinstance(text, bytes):
            text = text.decode("ascii", "replace")
        if len(text) != 40:
            raise ValueError(f"object id must be 40 hex digits, got {len(text)}")
        try:
            return cls(bytes.fromhex(text))
        except ValueError:
            raise ValueError(f"invalid hex object id: {text!r}") from None

    @property
    def hex(self) -> str:
        return self.raw.hex()

    def __str__(self) -> str:
        return self.hex

    def __repr__(self) -> str:
        return f"ObjectId({self.hex})"


@dataclass(frozen=True)
class RawObject:
    """An object as stored: its kind and uncompressed payload."""

    kind: str
    payload: bytes

    def __post_init__(self) -> None:
        if self.kind not in OBJECT_KINDS:
            raise ValueError(f"unknown object kind {self.kind!r}")


def hash_object(kind: str, payload: bytes) -> ObjectId:
    """Object id: SHA-1 over ``"<kind> <len>\\0"`` + payload."""
    h = hashlib.sha1()
    h.update(b"%s %d\x00" % (kind.encode("ascii"), len(payload)))
    h.update(payload)
    return ObjectId(h.digest())


def object_id(obj: RawObject) -> ObjectId:
    return hash_object(obj.kind, obj.payload)


@dataclass(frozen=True)
class TreeEntry:
    mode: str
    name: str
    id: ObjectId

    @property
    def is_tree(self) -> bool:
        return self.mode == "40000"


def parse_tree(payload: bytes) -> list[TreeEntry]:
    """Parse a tree payload: ``<mode> <name>\\0<20-byte id>`` records."""
    entries = []
    seen: set[bytes] = set()
    pos = 0
    while pos < len(payload):
        space = payload.find(b" ", pos)
        nul = payload.find(b"\x00", pos)
        if space < 0 or nul < 0 or nul < space or nul + 21 > len(payload):
            raise CorruptObject(f"truncated tree entry at offset {pos}")
        name = payload[space + 1 : nul]
        if name in seen:
            raise CorruptObject(f"duplicate tree entry {name!r}")
        seen.add(name)
        entries.append(
            TreeEntry(
                mode=payload[pos:space].decode("ascii"),
                name=name.decode("utf-8", "surrogateescape"),
                id=ObjectId(payload[nul + 1 : nul + 21]),
            )
        )
        pos = nul + 21
    return entries


def serialize_tree(entries: list[TreeEntry]) -> bytes:
    """Inverse of parse_tree; entries are sorted the way git sorts them."""

    def sort_key(e: TreeEntry) -> bytes:
        name = e.name.encode("utf-8", "surrogateescape")
        return name + b"/" if e.is_tree else name

    out = bytearray()
    for e in sorted(entries, key=sort_key):
        out += e.mode.encode("ascii")
        out += b" "
        out += e.name.encode("utf-8", "surrogateescape")
        out += b"\x00"
        out += e.id.raw
    return bytes(out)


@dataclass(frozen=True)
class Commit:
    """A parsed commit.

    ``headers`` keeps every header in payload order with continuation
    lines already unfolded, so ``serialize_commit`` can rebuild the exact
    payload. ``signature`` is the reassembled armored block from the
    ``gpgsig`` header, if any.
    """

    tree: ObjectId
    parents: tuple[ObjectId, ...]
    author_line: str
    committer_line: str
    signature: str | None
    message: str
    raw_payload: bytes = field(repr=False)
    headers: tuple[tuple[bytes, bytes], ...] = field(repr=False)
    message_bytes: bytes = field(repr=False)

    @property
    def id(self) -> ObjectId:
        return hash_object("commit", self.raw_payload)


def _parse_headers(payload: bytes) -> tuple[list[tuple[bytes, bytes]], bytes]:
    headers: list[tuple[bytes, bytes]] = []
    pos = 0
    n = len(payload)
    while True:
        if pos >= n:
            raise MalformedCommit("no blank line separating headers from message")
        if payload[pos : pos + 1] == b"\n":
            pos += 1
            break
        eol = payload.find(b"\n", pos)
        if eol < 0:
            raise MalformedCommit("header line without newline")
        line = payload[pos:eol]
        pos = eol + 1
        if line.startswith(b" "):
            raise MalformedCommit("continuation line without a preceding header")
        space = line.find(b" ")
        if space < 0:
            raise MalformedCommit(f"malformed header line {line!r}")
        name, value = line[:space], line[space + 1 :]
        # Continuation lines carry one leading space per line.
        while pos < n and payload[pos : pos + 1] == b" ":
            eol = payload.find(b"\n", pos)
            if eol < 0:
                raise MalformedCommit("continuation line without newline")
            value += b"\n" + payload[pos + 1 : eol]
            pos = eol + 1
        headers.append((name, value))
    return headers, payload[pos:]


def parse_commit(obj: RawObject) -> Commit:
    """Parse a commit payload.

    Header order is enforced: ``tree``, then ``parent`` lines, then
    ``author`` and ``committer``; any further headers (``gpgsig``,
    ``encoding``, ...) follow.
    """
    if obj.kind != "commit":
        raise NotACommit(f"expected a commit, got {obj.kind}")
    headers, message_bytes = _parse_headers(obj.payload)

    names = [name for name, _ in headers]
    if not headers or names[0] != b"tree":
        raise MalformedCommit("first header must be 'tree'")
    if names.count(b"tree") != 1:
        raise MalformedCommit("multiple 'tree' headers")
    idx = 1
    while idx < len(names) and names[idx] == b"parent":
        idx += 1
    if b"parent" in names[idx:]:
        raise MalformedCommit("'parent' header out of order")
    if idx >= len(names) or names[idx] != b"author":
        raise MalformedCommit("missing 'author' header")
    if idx + 1 >= len(names) or names[idx + 1] != b"committer":
        raise MalformedCommit("missing 'committer' header")

    def oid_of(value: bytes, what: str) -> ObjectId:
        try:
            return ObjectId.from_hex(value)
        except ValueError:
            raise MalformedCommit(f"bad {what} id {value!r}") from None

    tree = oid_of(headers[0][1], "tree")
    parents = tuple(oid_of(v, "parent") for n, v in headers if n == b"parent")
    author_line = dict(headers)[b"author"].decode("utf-8", "replace")
    committer_line = headers[idx + 1][1].decode("utf-8", "replace")

    sig_values = [v for n, v in headers if n == b"gpgsig"]
    if len(sig_values) > 1:
        raise MalformedCommit("multiple 'gpgsig' headers")
    signature = sig_values[0].decode("utf-8", "replace") if sig_values else None

    return Commit(
        tree=tree,
        parents=parents,
        author_line=author_line,
        committer_line=committer_line,
        signature=signature,
        message=message_bytes.decode("utf-8", "replace"),
        raw_payload=obj.payload,
        headers=tuple(headers),
        message_bytes=message_bytes,
    )


def _serialize_headers(headers: tuple[tuple[bytes, bytes], ...], message: bytes) -> bytes:
    out = bytearray()
    for name, value in headers:
        out += name
        out += b" "
        out += value.replace(b"\n", b"\n ")
        out += b"\n"
    out += b"\n"
    out += message
    return bytes(out)


def serialize_commit(commit: Commit) -> bytes:
    """Rebuild the commit payload from parsed headers (round-trip exact)."""
    return _serialize_headers(commit.headers, commit.message_bytes)


def signed_payload(commit: Commit) -> bytes:
    """The bytes a commit signature covers: the payload minus its ``gpgsig``
    header (continuation lines included). Unsigned commits are returned
    unchanged."""
    if commit.signature is None:
        return commit.raw_payload
    stripped = tuple((n, v) for n, v in commit.headers if n != b"gpgsig")
    return _serialize_headers(stripped, commit.message_bytes)
