"""Where persistent state (authentication cache, provenance) lives."""

from __future__ import annotations

import os

STATE_DIR_ENV = "GITVOUCH_STATE_DIR"


def default_state_dir() -> str:
    """``$GITVOUCH_STATE_DIR``, else the XDG state directory."""
    env = os.environ.get(STATE_DIR_ENV)
    if env:
        return env
    xdg = os.environ.get("XDG_STATE_HOME")
    base = xdg if xdg else os.path.expanduser(os.path.join("~", ".local", "state"))
    return os.path.join(base, "gitvouch")
