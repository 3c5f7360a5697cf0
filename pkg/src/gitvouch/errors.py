"""Root of the exception hierarchy.

Every error raised by this package derives from :class:`VouchError` so that
callers (notably the CLI) can map failures to exit codes in one place.
"""

from __future__ import annotations


class VouchError(Exception):
    """Base class for all gitvouch errors.

    ``commit_id`` is filled in by the authentication engine when a failure
    can be pinned to a specific commit; it is ``None`` for errors that are
    not about one commit.
    """

    commit_id: str | None = None

    def annotate(self, commit_id: str) -> "VouchError":
        """Pin the error to a commit; the first (most specific) pin wins."""
        if self.commit_id is None:
            self.commit_id = commit_id
        return self

    def __str__(self) -> str:
        base = super().__str__()
        if self.commit_id:
            return f"{base} (commit {self.commit_id})"
        return base
