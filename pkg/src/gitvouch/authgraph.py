"""The authentication engine.

A commit is authentic iff it is signed by a key listed in the
authorization file of each of its parents. Authentication runs from a
trust anchor — the channel introduction (commit id + signer
fingerprint) — to a target commit: the target must descend from the
introduction, the introduction's own signature must match the pinned
fingerprint, and every commit in between must satisfy the invariant.
Commits inside the transitive closure of previously-authenticated
commits are skipped via a persistent, purely advisory cache.
"""

from __future__ import annotations

import logging
import os
import tempfile
from dataclasses import dataclass, field

from gitvouch import authz
from gitvouch.errors import VouchError
from gitvouch.gitstore import graph
from gitvouch.gitstore.objects import Commit, ObjectId
from gitvouch.sexp import SexpSyntaxError
from gitvouch.sigverify.armor import BadArmor, dearmor
from gitvouch.sigverify.fingerprint import Fingerprint
from gitvouch.sigverify.keys import Keyring, load_keys
from gitvouch.sigverify.packets import SignaturePacket, parse_packets
from gitvouch.sigverify.verify import VerifiedSignature, verify_detailed
from gitvouch.statedir import default_state_dir

logger = logging.getLogger(__name__)

DEFAULT_KEYRING_REF = "refs/heads/keyring"


class AuthenticationError(VouchError):
    pass


class Unsigned(AuthenticationError):
    pass


class Unauthorized(AuthenticationError):
    def __init__(self, message: str, parent: ObjectId) -> None:
        super().__init__(message)
        self.parent = parent


class MissingAuthorizations(AuthenticationError):
    pass


class NotDescendantOfIntroduction(AuthenticationError):
    pass


class IntroductionSignerMismatch(AuthenticationError):
    pass


class EmptyKeyring(AuthenticationError):
    pass


@dataclass(frozen=True)
class ChannelIntroduction:
    """Trust anchor: the first commit where the invariant holds, and the
    fingerprint of the key that signed it."""

    commit: ObjectId
    signer: Fingerprint


@dataclass
class AuthOptions:
    keyring_ref: str = DEFAULT_KEYRING_REF
    historical_authorizations: authz.AuthorizationList | None = None
    cache: "AuthCache | None" = None
    cache_key: str | None = None

    @property
    def historical_mode(self) -> bool:
        return self.historical_authorizations is not None


@dataclass
class AuthReport:
    target: ObjectId
    checked: int
    cache_skipped: int
    signers: dict[ObjectId, Fingerprint] = field(default_factory=dict)


class AuthCache:
    """Per-user set of already-authenticated commit ids, keyed by
    introduction. Purely advisory: unreadable content degrades to an
    empty set, write failures are warnings."""

    def __init__(self, state_dir: str | None = None) -> None:
        self.state_dir = state_dir if state_dir is not None else default_state_dir()

    @staticmethod
    def key_for(intro: ChannelIntroduction) -> str:
        return f"{intro.commit.hex}-{intro.signer.hex}"

    def _path(self, key: str) -> str:
        return os.path.join(self.state_dir, "authentication", key)

    def read(self, key: str) -> set[ObjectId]:
        try:
            with open(self._path(key), "rb") as fh:
                content = fh.read()
        except OSError:
            return set()
        ids: set[ObjectId] = set()
        for line in content.splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                ids.add(ObjectId.from_hex(line.decode("ascii")))
            except (ValueError, UnicodeDecodeError):
                logger.warning("ignoring unparsable authentication cache %s", key)
                return set()
        return ids

    def write(self, key: str, ids: set[ObjectId]) -> None:
        """Atomic replace; merges with whatever is on disk right now."""
        try:
            merged = ids | self.read(key)
            path = self._path(key)
            os.makedirs(os.path.dirname(path), exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), prefix=".cache-")
            try:
                with os.fdopen(fd, "w") as fh:
                    fh.writelines(oid.hex + "\n" for oid in sorted(merged))
                os.replace(tmp, path)
            except BaseException:
                try:
                    os.unlink(tmp)
                except OSError:
                    pass
                raise
        except OSError as exc:
            logger.warning("could not write authentication cache %s: %s", key, exc)


def cache_read(state_dir: str, key: str) -> set[ObjectId]:
    return AuthCache(state_dir).read(key)


def cache_write(state_dir: str, key: str, ids: set[ObjectId]) -> None:
    AuthCache(state_dir).write(key, ids)


def load_keyring(store, keyring_ref: str = DEFAULT_KEYRING_REF) -> Keyring:
    """Load every OpenPGP key reachable from the keyring branch's tree.

    Files that hold neither binary packets nor armored keys are skipped
    (warned about); an entirely keyless branch is fatal since no commit
    could ever verify.
    """
    tip = store.resolve_ref(keyring_ref)
    commit = graph.read_commit(store, tip)
    keyring = Keyring()
    skipped = 0

    def walk(tree_id: ObjectId, prefix: str) -> None:
        nonlocal skipped
        from gitvouch.gitstore.objects import parse_tree

        for entry in parse_tree(store.read_object(tree_id).payload):
            path = f"{prefix}{entry.name}"
            if entry.is_tree:
                walk(entry.id, path + "/")
                continue
            obj = store.read_object(entry.id)
            if obj.kind != "blob":
                continue
            try:
                keyring.update(load_keys(obj.payload))
            except VouchError:
                skipped += 1
                logger.warning("keyring file %s does not contain OpenPGP keys", path)

    walk(commit.tree, "")
    if len(keyring) == 0:
        raise EmptyKeyring(
            f"no OpenPGP keys found on {keyring_ref} ({skipped} file(s) skipped)"
        )
    if skipped:
        logger.warning("%d keyring file(s) skipped", skipped)
    return keyring


def _signature_packet(commit: Commit) -> SignaturePacket:
    if commit.signature is None:
        raise Unsigned("commit is not signed")
    packets = parse_packets(dearmor(commit.signature))
    for packet in packets:
        if isinstance(packet, SignaturePacket):
            return packet
    raise BadArmor("signature header carries no signature packet")


def _verify_commit(store, commit: Commit, keyring: Keyring) -> VerifiedSignature:
    from gitvouch.gitstore.objects import signed_payload

    sig = _signature_packet(commit)
    return verify_detailed(sig, signed_payload(commit), keyring)


def authenticate_commit(
    store,
    commit: Commit,
    keyring: Keyring,
    parent_authorizations: list[tuple[ObjectId, frozenset[Fingerprint]]],
) -> Fingerprint:
    """Check one commit: valid signature first, then membership of the
    signer in every parent's authorized set. Returns the signer's
    primary fingerprint.

    A fingerprint matches if it names the signer's primary key, or — as
    a documented extension — the exact signing subkey.
    """
    verified = _verify_commit(store, commit, keyring)
    for parent_id, authorized in parent_authorizations:
        if (
            verified.primary_fingerprint not in authorized
            and verified.key_fingerprint not in authorized
        ):
            raise Unauthorized(
                f"signer {verified.primary_fingerprint.display()} is not authorized "
                f"by parent {parent_id}",
                parent=parent_id,
            )
    return verified.primary_fingerprint


def parent_authorizations(
    store, parent: ObjectId, options: AuthOptions
) -> frozenset[Fingerprint]:
    """Authorized fingerprints as of ``parent``.

    When the parent carries no authorization file, historical mode
    substitutes the static list; otherwise that is fatal. A malformed
    policy file anywhere in history is always fatal, never skipped.
    """
    data = graph.read_path_at_commit(store, parent, authz.AUTHORIZATIONS_FILE)
    if data is None:
        if options.historical_authorizations is not None:
            return authz.authorized_fingerprints(options.historical_authorizations)
        raise MissingAuthorizations(
            f"commit {parent} lacks {authz.AUTHORIZATIONS_FILE} "
            "(use historical authorizations for pre-policy history)"
        ).annotate(parent.hex)
    try:
        return authz.authorized_fingerprints(authz.parse_authorizations(data))
    except (SexpSyntaxError, authz.BadVersion, authz.BadFingerprint) as exc:
        raise exc.annotate(parent.hex)


class _AuthzReader:
    """Per-run memo of parent -> authorized fingerprints."""

    def __init__(self, store, options: AuthOptions) -> None:
        self.store = store
        self.options = options
        self._memo: dict[ObjectId, frozenset[Fingerprint]] = {}

    def get(self, parent: ObjectId) -> frozenset[Fingerprint]:
        cached = self._memo.get(parent)
        if cached is None:
            cached = parent_authorizations(self.store, parent, self.options)
            self._memo[parent] = cached
        return cached


def authenticate_repository(
    store,
    intro: ChannelIntroduction,
    target: ObjectId,
    options: AuthOptions | None = None,
    *,
    keyring: Keyring | None = None,
) -> AuthReport:
    """Authenticate every commit from the introduction to ``target``.

    Steps: (1) ``target`` must descend from the introductory commit —
    commits outside that cone are inauthentic by definition; (2) the
    introductory commit's signature must match the pinned fingerprint;
    (3) every commit not inside the closure of the introduction or of a
    cached commit is checked, parents before children; (4) on success
    the cache absorbs everything newly authenticated. The introduction's
    ancestors are trusted and never examined.
    """
    options = options if options is not None else AuthOptions()

    if not graph.is_ancestor(store, intro.commit, target):
        raise NotDescendantOfIntroduction(
            f"target {target} is not a descendant of the introductory "
            f"commit {intro.commit}"
        ).annotate(target.hex)

    if keyring is None:
        keyring = load_keyring(store, options.keyring_ref)

    intro_commit = graph.read_commit(store, intro.commit)
    try:
        verified = _verify_commit(store, intro_commit, keyring)
    except VouchError as exc:
        raise exc.annotate(intro.commit.hex)
    if intro.signer not in (verified.primary_fingerprint, verified.key_fingerprint):
        raise IntroductionSignerMismatch(
            f"introductory commit is signed by "
            f"{verified.primary_fingerprint.display()}, "
            f"not the expected {intro.signer.display()}"
        ).annotate(intro.commit.hex)

    cache_key = options.cache_key or AuthCache.key_for(intro)
    cached: set[ObjectId] = set()
    if options.cache is not None:
        cached = options.cache.read(cache_key)

    difference = graph.commit_difference_with_stats(
        store, target, cached | {intro.commit}
    )
    reader = _AuthzReader(store, options)
    signers: dict[ObjectId, Fingerprint] = {}
    for commit in difference.commits:
        cid = commit.id
        try:
            parent_sets = [(p, reader.get(p)) for p in commit.parents]
            signers[cid] = authenticate_commit(store, commit, keyring, parent_sets)
        except VouchError as exc:
            raise exc.annotate(cid.hex)

    if options.cache is not None:
        options.cache.write(cache_key, set(signers) | {target})

    return AuthReport(
        target=target,
        checked=len(signers),
        cache_skipped=len(difference.excluded_hits & cached),
        signers=signers,
    )
