"""gitvouch: authenticate Git checkouts.

Every commit between a pinned introduction and the target must be
signed by a key that the authorization file of each of its parents
lists. On top of that sit downgrade refusal (fast-forward checks
against recorded provenance) and stale-mirror warnings driven by
authenticated channel metadata.
"""

from gitvouch.authgraph import (
    AuthCache,
    AuthOptions,
    AuthReport,
    ChannelIntroduction,
    EmptyKeyring,
    IntroductionSignerMismatch,
    MissingAuthorizations,
    NotDescendantOfIntroduction,
    Unauthorized,
    Unsigned,
    authenticate_commit,
    authenticate_repository,
    load_keyring,
    parent_authorizations,
)
from gitvouch.channel import (
    ChannelMetadata,
    ChannelSpec,
    FastForwardVerdict,
    MissingIntroduction,
    ProvenanceRecord,
    fast_forward_check,
    parse_channel_metadata,
    parse_channel_spec,
    provenance_read,
    provenance_read_all,
    provenance_write,
    staleness_check,
)
from gitvouch.errors import VouchError
from gitvouch.gitstore import MemoryStore, ObjectId, Repository
from gitvouch.sigverify import Fingerprint, Keyring

__version__ = "0.1.0"

__all__ = [
    "AuthCache",
    "AuthOptions",
    "AuthReport",
    "ChannelIntroduction",
    "ChannelMetadata",
    "ChannelSpec",
    "EmptyKeyring",
    "Fingerprint",
    "FastForwardVerdict",
    "IntroductionSignerMismatch",
    "Keyring",
    "MemoryStore",
    "MissingAuthorizations",
    "MissingIntroduction",
    "NotDescendantOfIntroduction",
    "ObjectId",
    "ProvenanceRecord",
    "Repository",
    "Unauthorized",
    "Unsigned",
    "VouchError",
    "authenticate_commit",
    "authenticate_repository",
    "fast_forward_check",
    "load_keyring",
    "parent_authorizations",
    "parse_channel_metadata",
    "parse_channel_spec",
    "provenance_read",
    "provenance_read_all",
    "provenance_write",
    "staleness_check",
    "__version__",
]
