"""In-memory object store and history builder.

Used by the test suite and fixture generators so that property tests can
fabricate arbitrary repositories without shelling out to git. The builder
also remembers each signed commit's pre-signing payload, which gives
tests an oracle for ``signed_payload``.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping

from gitvouch.gitstore import refs as _refs
from gitvouch.gitstore.objects import (
    Commit,
    ObjectId,
    ObjectNotFound,
    RawObject,
    TreeEntry,
    hash_object,
    parse_commit,
    serialize_tree,
)

DEFAULT_IDENT = "A U Thor <author@example.org> 1600000000 +0000"


class MemoryStore:
    """Read interface compatible with :class:`gitvouch.gitstore.Repository`,
    plus mutation helpers for building histories."""

    def __init__(self) -> None:
        self._objects: dict[ObjectId, RawObject] = {}
        self._refs: dict[str, ObjectId | str] = {"HEAD": "refs/heads/master"}
        self.presign_payloads: dict[ObjectId, bytes] = {}

    # -- read side ----------------------------------------------------

    def read_object(self, oid: ObjectId) -> RawObject:
        try:
            return self._objects[oid]
        except KeyError:
            raise ObjectNotFound(f"no object {oid}") from None

    def __contains__(self, oid: ObjectId) -> bool:
        return oid in self._objects

    def __len__(self) -> int:
        return len(self._objects)

    def objects(self) -> Iterable[tuple[ObjectId, RawObject]]:
        return self._objects.items()

    def _ref_target(self, name: str):
        return self._refs.get(name)

    def resolve_ref(self, name: str) -> ObjectId:
        return _refs.resolve_ref(self, name)

    # -- build side ---------------------------------------------------

    def add_object(self, kind: str, payload: bytes) -> ObjectId:
        oid = hash_object(kind, payload)
        self._objects[oid] = RawObject(kind, payload)
        return oid

    def add_blob(self, data: bytes) -> ObjectId:
        return self.add_object("blob", data)

    def add_tree(self, entries: list[TreeEntry]) -> ObjectId:
        return self.add_object("tree", serialize_tree(entries))

    def add_tree_from_files(self, files: Mapping[str, bytes]) -> ObjectId:
        """Build (possibly nested) trees from a flat ``path -> bytes`` map."""
        root: dict = {}
        for path, data in files.items():
            parts = path.split("/")
            node = root
            for part in parts[:-1]:
                node = node.setdefault(part, {})
                if not isinstance(node, dict):
                    raise ValueError(f"path conflict at {part!r} in {path!r}")
            node[parts[-1]] = data

        def build(node: dict) -> ObjectId:
            entries = []
            for name, value in node.items():
                if isinstance(value, dict):
                    entries.append(TreeEntry("40000", name, build(value)))
                else:
                    entries.append(TreeEntry("100644", name, self.add_blob(value)))
            return self.add_tree(entries)

        return build(root)

    def add_commit(
        self,
        tree: ObjectId,
        parents: Iterable[ObjectId] = (),
        *,
        author: str = DEFAULT_IDENT,
        committer: str | None = None,
        message: str = "commit\n",
        sign_with: Callable[[bytes], str] | None = None,
    ) -> ObjectId:
        """Assemble a commit; ``sign_with`` maps the pre-signing payload to
        an armored signature that gets folded into a ``gpgsig`` header."""
        committer = committer if committer is not None else author
        lines = [b"tree " + tree.hex.encode()]
        lines += [b"parent " + p.hex.encode() for p in parents]
        lines.append(b"author " + author.encode())
        lines.append(b"committer " + committer.encode())
        unsigned = b"\n".join(lines) + b"\n\n" + message.encode()

        if sign_with is None:
            return self.add_object("commit", unsigned)

        armored = sign_with(unsigned)
        folded = armored.rstrip("\n").replace("\n", "\n ").encode()
        signed = b"\n".join(lines + [b"gpgsig " + folded]) + b"\n\n" + message.encode()
        oid = self.add_object("commit", signed)
        self.presign_payloads[oid] = unsigned
        return oid

    def commit_files(
        self,
        files: Mapping[str, bytes],
        parents: Iterable[ObjectId] = (),
        *,
        message: str = "commit\n",
        author: str = DEFAULT_IDENT,
        sign_with: Callable[[bytes], str] | None = None,
    ) -> ObjectId:
        """Convenience: tree from files + commit in one step."""
        tree = self.add_tree_from_files(files)
        return self.add_commit(
            tree, parents, author=author, message=message, sign_with=sign_with
        )

    def set_ref(self, name: str, target: ObjectId | str) -> None:
        """Point ``name`` at an object id, or at another ref (symref) when
        ``target`` is a string."""
        self._refs[name] = target

    def refs(self) -> dict[str, ObjectId | str]:
        return dict(self._refs)

    def commit(self, oid: ObjectId) -> Commit:
        return parse_commit(self.read_object(oid))
