"""Portal core: subscriptions, credentials, sessions, history, persistence.

State (subscriptions, credentials, dialog-path history) lives in one versioned
JSON file; live sessions are memory-only and do not survive a restart. The
state file holds credentials in plain text and is therefore written with mode
0600.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping
from urllib.parse import urlsplit

from .dialog import DialogTree, ShortcutIndex, build_dialog_tree, build_shortcut_index, score_items
from .errors import (
    BadFormatError,
    CorruptStateError,
    DuplicateSubscriptionError,
    FeedNotLoadedError,
    MalformedInputError,
    StateIoError,
    UnknownFeedError,
    UnknownSessionError,
)
from .feeds import (
    Credential,
    CredentialStore,
    DEFAULT_CONNECT_TIMEOUT,
    DEFAULT_READ_TIMEOUT,
    FeedDocument,
    document_from_dict,
    document_to_dict,
    load_feed,
    require_http_url,
)
from .render import DEFAULT_POSTBACK_URL, RenderedDocument, render_voicexml, render_xhtml_voice
from .session import (
    Command,
    CommandWord,
    DialogAction,
    DialogInput,
    PathRecord,
    PhraseMatch,
    Session,
    ShortcutQuery,
    advance,
    assign_history_shortcuts,
    jump_to_path,
    rank_paths,
    record_path,
)
from .text import tokenize
from .errors import VoxfeedError

STATE_VERSION = 1


@dataclass
class FeedSubscription:
    feed_id: str
    url: str
    last_document: FeedDocument | None = None
    last_error: str | None = None
    refreshed_at: datetime | None = None


@dataclass
class PortalState:
    subscriptions: dict[str, FeedSubscription] = field(default_factory=dict)
    credentials: CredentialStore = field(default_factory=CredentialStore)
    sessions: dict[str, Session] = field(default_factory=dict)
    history_by_feed: dict[str, list[PathRecord]] = field(default_factory=dict)
    stale_paths: dict[str, set[tuple[int, ...]]] = field(default_factory=dict)


@dataclass(frozen=True)
class HistoryJump:
    """Resolved "history N" phrase: jump straight to a recorded path."""

    path: tuple[int, ...]


@dataclass(frozen=True)
class InputOutcome:
    action: DialogAction
    node_id: str
    prompt: str
    ranked: list[tuple[int, float]]
    turn_count: int


def canonical_url(url: str) -> str:
    return url.rstrip("/")


def feed_id_for_url(url: str) -> str:
    return hashlib.sha256(canonical_url(url).encode("utf-8")).hexdigest()


# --- state file ---------------------------------------------------------------

def persist_state(state: PortalState, path: str | Path) -> None:
    """Write subscriptions, credentials and history (not sessions) atomically."""
    payload = {
        "version": STATE_VERSION,
        "subscriptions": [
            {
                "feed_id": sub.feed_id,
                "url": sub.url,
                "last_error": sub.last_error,
                "refreshed_at": sub.refreshed_at.isoformat() if sub.refreshed_at else None,
                "last_document": document_to_dict(sub.last_document) if sub.last_document else None,
            }
            for sub in state.subscriptions.values()
        ],
        "credentials": [
            {"url_prefix": c.url_prefix, "username": c.username, "password": c.password}
            for c in state.credentials.entries()
        ],
        "history": {
            feed_id: [
                {
                    "path": list(rec.path),
                    "visit_count": rec.visit_count,
                    "last_visited": rec.last_visited.isoformat(),
                    "stale": rec.path in state.stale_paths.get(feed_id, set()),
                }
                for rec in records
            ]
            for feed_id, records in state.history_by_feed.items()
        },
    }
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        tmp.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        os.chmod(tmp, 0o600)
        os.replace(tmp, path)
    except OSError as exc:
        raise StateIoError(f"cannot write state file {path}: {exc}") from exc


def load_state(path: str | Path) -> PortalState:
    """Restore a state file; bad JSON or a wrong schema raises CorruptStateError."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StateIoError(f"cannot read state file {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except ValueError as exc:
        raise CorruptStateError(f"state file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or data.get("version") != STATE_VERSION:
        raise CorruptStateError(f"state file {path} has unsupported schema version {data.get('version')!r}")

    state = PortalState()
    try:
        for entry in data["subscriptions"]:
            document = entry.get("last_document")
            refreshed = entry.get("refreshed_at")
            sub = FeedSubscription(
                feed_id=entry["feed_id"],
                url=entry["url"],
                last_document=document_from_dict(document) if document else None,
                last_error=entry.get("last_error"),
                refreshed_at=datetime.fromisoformat(refreshed) if refreshed else None,
            )
            state.subscriptions[sub.feed_id] = sub
        for entry in data["credentials"]:
            state.credentials.upsert(Credential(
                url_prefix=entry["url_prefix"],
                username=entry["username"],
                password=entry["password"],
            ))
        for feed_id, records in data["history"].items():
            restored: list[PathRecord] = []
            stale: set[tuple[int, ...]] = set()
            for rec in records:
                path_tuple = tuple(int(p) for p in rec["path"])
                restored.append(PathRecord(
                    path=path_tuple,
                    visit_count=int(rec["visit_count"]),
                    last_visited=datetime.fromisoformat(rec["last_visited"]),
                ))
                if rec.get("stale"):
                    stale.add(path_tuple)
            state.history_by_feed[feed_id] = restored
            if stale:
                state.stale_paths[feed_id] = stale
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise CorruptStateError(f"state file {path} is malformed: {exc}") from exc
    return state


# --- portal -------------------------------------------------------------------

class Portal:
    """Ties ingestion, dialog and rendering together behind one stateful facade.

    Registry mutations run under a portal-wide lock; per-session locks
    serialize dialog turns; network fetches happen outside any lock, with the
    parsed result swapped in atomically afterwards.
    """

    def __init__(
        self,
        state_path: str | Path | None = None,
        *,
        connect_timeout: float = DEFAULT_CONNECT_TIMEOUT,
        read_timeout: float = DEFAULT_READ_TIMEOUT,
        postback_url: str = DEFAULT_POSTBACK_URL,
    ):
        self._state_path = Path(state_path) if state_path else None
        self._connect_timeout = connect_timeout
        self._read_timeout = read_timeout
        self._postback_url = postback_url
        self._lock = threading.RLock()
        self._session_locks: dict[str, threading.Lock] = {}
        self._trees: dict[str, DialogTree] = {}
        self._indexes: dict[str, ShortcutIndex] = {}

        if self._state_path and self._state_path.exists():
            self.state = load_state(self._state_path)
            for sub in self.state.subscriptions.values():
                if sub.last_document and sub.last_document.items:
                    self._install_document(sub.feed_id, sub.last_document)
        else:
            self.state = PortalState()

    # -- helpers ---------------------------------------------------------------

    def _save(self) -> None:
        if self._state_path:
            persist_state(self.state, self._state_path)

    def save(self) -> None:
        with self._lock:
            self._save()

    def _install_document(self, feed_id: str, document: FeedDocument) -> None:
        self._trees[feed_id] = build_dialog_tree(document)
        self._indexes[feed_id] = build_shortcut_index(document)

    def _subscription(self, feed_id: str) -> FeedSubscription:
        try:
            return self.state.subscriptions[feed_id]
        except KeyError:
            raise UnknownFeedError(f"no subscription {feed_id!r}") from None

    def _loaded(self, feed_id: str) -> tuple[FeedSubscription, DialogTree, ShortcutIndex]:
        sub = self._subscription(feed_id)
        tree = self._trees.get(feed_id)
        index = self._indexes.get(feed_id)
        if sub.last_document is None or tree is None or index is None:
            raise FeedNotLoadedError(f"feed {feed_id!r} has no parsed document")
        return sub, tree, index

    def _session(self, session_id: str) -> Session:
        try:
            return self.state.sessions[session_id]
        except KeyError:
            raise UnknownSessionError(f"no session {session_id!r}") from None

    def _subscribed_urls(self) -> list[str]:
        return [sub.url for sub in self.state.subscriptions.values()]

    def _fetch_document(self, url: str) -> FeedDocument:
        return load_feed(
            url,
            self.state.credentials,
            connect_timeout=self._connect_timeout,
            read_timeout=self._read_timeout,
        )

    # -- subscriptions -----------------------------------------------------------

    def subscribe_feed(self, url: str, username: str | None = None, password: str | None = None) -> str:
        """Register a feed (optionally with credentials) and fetch it once.

        A failed first fetch keeps the subscription with last_error set.
        """
        require_http_url(url)
        with self._lock:
            feed_id = feed_id_for_url(url)
            if feed_id in self.state.subscriptions:
                raise DuplicateSubscriptionError(f"already subscribed to {url}")
            if username:
                parts = urlsplit(url)
                prefix = f"{parts.scheme}://{parts.netloc}"
                self.state.credentials.upsert(Credential(prefix, username, password or ""))
            self.state.subscriptions[feed_id] = FeedSubscription(feed_id=feed_id, url=url)

        self._refresh(feed_id)
        return feed_id

    def refresh_feed(self, feed_id: str) -> FeedSubscription:
        """Re-fetch and atomically swap in the new dialog tree.

        Sessions whose node disappeared reset to the root; history paths that
        no longer resolve are flagged stale. A failed fetch leaves the previous
        document in place and records last_error.
        """
        self._subscription(feed_id)
        return self._refresh(feed_id)

    def _refresh(self, feed_id: str) -> FeedSubscription:
        sub = self._subscription(feed_id)
        try:
            document = self._fetch_document(sub.url)
            error = None
        except VoxfeedError as exc:
            document = None
            error = str(exc)

        with self._lock:
            sub = self._subscription(feed_id)
            if error is not None:
                sub.last_error = error
                self._save()
                return sub
            sub.last_document = document
            sub.last_error = None
            sub.refreshed_at = datetime.now(timezone.utc)
            if document.items:
                self._install_document(feed_id, document)
            else:
                self._trees.pop(feed_id, None)
                self._indexes.pop(feed_id, None)
            tree = self._trees.get(feed_id)
            for session_id, session in list(self.state.sessions.items()):
                if session.feed_id != feed_id:
                    continue
                if tree is None or session.current_node not in tree.nodes:
                    self.state.sessions[session_id] = Session(
                        id=session.id,
                        feed_id=session.feed_id,
                        current_node="n0",
                        history=session.history,
                        turn_count=session.turn_count,
                    )
            stale = {
                rec.path
                for rec in self.state.history_by_feed.get(feed_id, [])
                if tree is None or tree.node_for_path(rec.path) is None
            }
            if stale:
                self.state.stale_paths[feed_id] = stale
            else:
                self.state.stale_paths.pop(feed_id, None)
            self._save()
            return sub

    def list_feeds(self) -> list[FeedSubscription]:
        with self._lock:
            return list(self.state.subscriptions.values())

    # -- sessions ----------------------------------------------------------------

    def create_session(self, feed_id: str) -> str:
        with self._lock:
            sub, tree, _index = self._loaded(feed_id)
            session_id = uuid.uuid4().hex
            self.state.sessions[session_id] = Session(
                id=session_id,
                feed_id=feed_id,
                current_node=tree.root_id,
                history=tuple(self.state.history_by_feed.get(feed_id, [])),
                turn_count=0,
            )
            self._session_locks[session_id] = threading.Lock()
            return session_id

    def _history_shortcuts(self, session: Session, tree: DialogTree) -> dict[str, tuple[int, ...]]:
        # The empty path (the root) is excluded: jumping there duplicates the
        # "home" command and would otherwise dominate the ranking by recency.
        usable = [
            rec for rec in session.history
            if rec.path
            and rec.path not in self.state.stale_paths.get(session.feed_id, set())
            and tree.node_for_path(rec.path) is not None
        ]
        return assign_history_shortcuts(rank_paths(usable))

    def translate_input(self, session_id: str, kind: str, value: str) -> DialogInput | HistoryJump:
        """Map a wire-level {kind, value} pair onto a typed dialog input."""
        with self._lock:
            session = self._session(session_id)
            _sub, tree, _index = self._loaded(session.feed_id)

            if kind == "shortcut":
                return ShortcutQuery(tuple(tokenize(value)))

            if kind == "command":
                try:
                    return Command(CommandWord(value.strip().lower()))
                except ValueError:
                    raise MalformedInputError(f"unknown command {value!r}") from None

            if kind == "phrase":
                candidate = value.strip()
                if candidate.isdigit():
                    return PhraseMatch(candidate)
                folded = candidate.casefold()
                for rule in tree.grammar.rules:
                    if rule.text.casefold() == folded:
                        return PhraseMatch(rule.semantic_tag)
                shortcuts = self._history_shortcuts(session, tree)
                for phrase, path in shortcuts.items():
                    if phrase.casefold() == folded:
                        return HistoryJump(path)
                raise MalformedInputError(f"phrase {value!r} is not in the session grammar")

            raise MalformedInputError(f"unknown input kind {kind!r}")

    def post_input(self, session_id: str, dialog_input: DialogInput | HistoryJump) -> InputOutcome:
        """Apply one dialog turn under exclusive access to the session."""
        with self._lock:
            lock = self._session_locks.get(session_id)
            if lock is None:
                raise UnknownSessionError(f"no session {session_id!r}")

        with lock:
            with self._lock:
                session = self._session(session_id)
                _sub, tree, index = self._loaded(session.feed_id)
                feed_urls = self._subscribed_urls()

            now = datetime.now(timezone.utc)
            ranked: list[tuple[int, float]] = []
            if isinstance(dialog_input, HistoryJump):
                updated, action = jump_to_path(session, tree, dialog_input.path, now=now)
            else:
                if isinstance(dialog_input, ShortcutQuery):
                    ranked = score_items(list(dialog_input.words), index)
                updated, action = advance(
                    session, tree, index, dialog_input, now=now, feed_urls=feed_urls,
                )

            with self._lock:
                # A concurrent refresh may have swapped the tree; never leave
                # the session on a node that no longer exists.
                current_tree = self._trees.get(session.feed_id)
                if current_tree is not None and updated.current_node not in current_tree.nodes:
                    updated = Session(
                        id=updated.id,
                        feed_id=updated.feed_id,
                        current_node=current_tree.root_id,
                        history=updated.history,
                        turn_count=updated.turn_count,
                    )
                self.state.sessions[session_id] = updated
                arrived = _history_delta(session.history, updated.history)
                if arrived is not None:
                    self.state.history_by_feed[session.feed_id] = list(record_path(
                        tuple(self.state.history_by_feed.get(session.feed_id, [])), arrived, now,
                    ))
                    self._save()
                node = tree.node(updated.current_node)
                return InputOutcome(
                    action=action,
                    node_id=node.id,
                    prompt=node.prompt,
                    ranked=ranked,
                    turn_count=updated.turn_count,
                )

    def get_session(self, session_id: str) -> tuple[Session, DialogTree]:
        with self._lock:
            session = self._session(session_id)
            _sub, tree, _index = self._loaded(session.feed_id)
            return session, tree

    def session_history_shortcuts(self, session_id: str) -> dict[str, tuple[int, ...]]:
        with self._lock:
            session = self._session(session_id)
            _sub, tree, _index = self._loaded(session.feed_id)
            return self._history_shortcuts(session, tree)

    # -- rendering and history ------------------------------------------------------

    def get_dialog_document(self, feed_id: str, format: str) -> RenderedDocument:
        with self._lock:
            _sub, tree, _index = self._loaded(feed_id)
            if format == "vxml":
                return render_voicexml(tree.root, tree, postback_url=self._postback_url)
            if format == "xv":
                return render_xhtml_voice(tree.root, tree)
            raise BadFormatError(f"unknown dialog document format {format!r}")

    def get_history(self, feed_id: str) -> tuple[list[PathRecord], set[tuple[int, ...]], dict[str, tuple[int, ...]]]:
        """Ranked records, the stale-path set, and the assigned jump phrases."""
        with self._lock:
            self._subscription(feed_id)
            records = rank_paths(self.state.history_by_feed.get(feed_id, []))
            stale = set(self.state.stale_paths.get(feed_id, set()))
            usable = [rec for rec in records if rec.path and rec.path not in stale]
            return records, stale, assign_history_shortcuts(usable)


def _history_delta(
    old: tuple[PathRecord, ...],
    new: tuple[PathRecord, ...],
) -> tuple[int, ...] | None:
    """The single path whose visit count grew between two history snapshots."""
    if len(new) > len(old):
        return new[-1].path
    previous: Mapping[tuple[int, ...], int] = {rec.path: rec.visit_count for rec in old}
    for rec in new:
        if rec.visit_count != previous.get(rec.path):
            return rec.path
    return None
