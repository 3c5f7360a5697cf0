"""Commit-graph queries: ancestry, reachability difference, tree reads.

These operate on any object store exposing ``read_object``. The
difference traversal is what keeps authentication incremental: commits
inside the transitive closure of already-trusted commits are never
visited.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from gitvouch.gitstore.objects import (
    Commit,
    NotACommit,
    ObjectId,
    ObjectNotFound,
    parse_commit,
    parse_tree,
)


def read_commit(store, oid: ObjectId) -> Commit:
    return parse_commit(store.read_object(oid))


def is_ancestor(store, a: ObjectId, b: ObjectId) -> bool:
    """True iff ``a`` equals ``b`` or is reachable from ``b`` over parent
    edges."""
    store.read_object(a)
    if a == b:
        return True
    seen = {b}
    queue = deque([b])
    while queue:
        current = queue.popleft()
        for parent in read_commit(store, current).parents:
            if parent == a:
                return True
            if parent not in seen:
                seen.add(parent)
                queue.append(parent)
    return False


@dataclass
class DifferenceResult:
    commits: list[Commit]
    excluded_hits: frozenset[ObjectId]


def commit_difference_with_stats(
    store, target: ObjectId, excluded: set[ObjectId]
) -> DifferenceResult:
    """Commits reachable from ``target`` but not from any of ``excluded``,
    topologically ordered parents-before-children.

    ``excluded_hits`` records which excluded-closure commits the walk from
    ``target`` actually ran into (the traversal frontier), which is what
    cache-hit reporting wants. Excluded ids absent from the store are
    ignored: an absent commit cannot be an ancestor of a present one.
    """
    # The excluded set may come from an advisory cache: ids that are
    # absent, or that do not name commits, are ignored rather than fatal.
    # Under-computing this closure is sound (it can only enlarge the
    # checked set, never shrink it).
    closure: set[ObjectId] = set()
    queue = deque()
    for oid in excluded:
        if oid in closure:
            continue
        try:
            if store.read_object(oid).kind != "commit":
                continue
        except ObjectNotFound:
            continue
        closure.add(oid)
        queue.append(oid)
    while queue:
        oid = queue.popleft()
        try:
            parents = read_commit(store, oid).parents
        except ObjectNotFound:
            continue
        for parent in parents:
            if parent not in closure:
                closure.add(parent)
                queue.append(parent)

    hits: set[ObjectId] = set()
    if target in closure:
        store.read_object(target)
        return DifferenceResult([], frozenset({target}))

    commits: dict[ObjectId, Commit] = {}
    queue = deque([target])
    seen = {target}
    while queue:
        oid = queue.popleft()
        commit = read_commit(store, oid)
        commits[oid] = commit
        for parent in commit.parents:
            if parent in closure:
                hits.add(parent)
            elif parent not in seen:
                seen.add(parent)
                queue.append(parent)

    # Kahn's algorithm over the visited subgraph, parents first.
    children: dict[ObjectId, list[ObjectId]] = {oid: [] for oid in commits}
    indegree = {}
    for oid, commit in commits.items():
        inside = [p for p in commit.parents if p in commits]
        indegree[oid] = len(inside)
        for parent in inside:
            children[parent].append(oid)
    ready = deque(sorted((o for o, d in indegree.items() if d == 0)))
    ordered: list[Commit] = []
    while ready:
        oid = ready.popleft()
        ordered.append(commits[oid])
        for child in children[oid]:
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
    return DifferenceResult(ordered, frozenset(hits))


def commit_difference(store, target: ObjectId, excluded: set[ObjectId]) -> list[Commit]:
    return commit_difference_with_stats(store, target, excluded).commits


def read_path_at_commit(store, commit_id: ObjectId, path: str) -> bytes | None:
    """Blob bytes for ``path`` in the tree of ``commit_id``, or None when
    any path component is missing or names a tree."""
    obj = store.read_object(commit_id)
    if obj.kind != "commit":
        raise NotACommit(f"{commit_id} is a {obj.kind}")
    current = parse_commit(obj).tree
    parts = [p for p in path.split("/") if p]
    for i, part in enumerate(parts):
        entries = {e.name: e for e in parse_tree(store.read_object(current).payload)}
        entry = entries.get(part)
        if entry is None:
            return None
        last = i == len(parts) - 1
        if last:
            if entry.is_tree:
                return None
            blob = store.read_object(entry.id)
            return blob.payload if blob.kind == "blob" else None
        if not entry.is_tree:
            return None
        current = entry.id
    return None
