"""Mixed-initiative dialog state machine and ranked dialog-path history.

``advance`` is a pure transition function: it never mutates its inputs and
returns a fresh session. Item phrases and shortcut queries are accepted at
every node; commands move within the tree. Every successful arrival at a node
is recorded in the session's path history, which powers the "history one" ...
"history five" jump phrases.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Union

from .dialog import DialogNode, DialogTree, NodeKind, ShortcutIndex, score_items
from .text import number_word

HISTORY_SHORTCUT_LIMIT = 5


# --- inputs and actions -------------------------------------------------------

class CommandWord(str, Enum):
    NEXT = "next"
    PREVIOUS = "previous"
    REPEAT = "repeat"
    BACK = "back"
    FOLLOW = "follow"
    HOME = "home"


@dataclass(frozen=True)
class PhraseMatch:
    """A grammar phrase was recognized; the tag is the decimal item index."""

    tag: str

    def __post_init__(self) -> None:
        if not self.tag.isdigit():
            raise ValueError(f"semantic tag must be a decimal string, got {self.tag!r}")


@dataclass(frozen=True)
class ShortcutQuery:
    words: tuple[str, ...]


@dataclass(frozen=True)
class Command:
    word: CommandWord


DialogInput = Union[PhraseMatch, ShortcutQuery, Command]


class RejectReason(str, Enum):
    NOMATCH = "nomatch"
    NOINPUT = "noinput"
    INVALID_COMMAND = "invalid_command"


@dataclass(frozen=True)
class Prompt:
    node_id: str


@dataclass(frozen=True)
class AnnounceLink:
    url: str


@dataclass(frozen=True)
class EnterFeed:
    url: str


@dataclass(frozen=True)
class Reject:
    reason: RejectReason


DialogAction = Union[Prompt, AnnounceLink, EnterFeed, Reject]


# --- history -------------------------------------------------------------------

@dataclass(frozen=True)
class PathRecord:
    path: tuple[int, ...]
    visit_count: int
    last_visited: datetime


def record_path(
    history: tuple[PathRecord, ...] | list[PathRecord],
    path: Iterable[int],
    now: datetime,
) -> tuple[PathRecord, ...]:
    """Count a visit: bump the existing record or append a new one."""
    path = tuple(path)
    updated: list[PathRecord] = []
    found = False
    for rec in history:
        if rec.path == path:
            updated.append(replace(rec, visit_count=rec.visit_count + 1, last_visited=now))
            found = True
        else:
            updated.append(rec)
    if not found:
        updated.append(PathRecord(path=path, visit_count=1, last_visited=now))
    return tuple(updated)


def rank_paths(history: Iterable[PathRecord]) -> list[PathRecord]:
    """Most visited first; newer breaks ties, then the lexically smaller path."""
    return sorted(
        history,
        key=lambda rec: (-rec.visit_count, -rec.last_visited.timestamp(), rec.path),
    )


def assign_history_shortcuts(
    ranked: list[PathRecord],
    limit: int = HISTORY_SHORTCUT_LIMIT,
) -> dict[str, tuple[int, ...]]:
    """Map "history one" ... "history five" onto the top ranked paths."""
    return {
        f"history {number_word(position)}": rec.path
        for position, rec in enumerate(ranked[:limit], start=1)
    }


# --- session and transitions ----------------------------------------------------

@dataclass(frozen=True)
class Session:
    id: str
    feed_id: str
    current_node: str
    history: tuple[PathRecord, ...]
    turn_count: int


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


def _normalize_url(url: str) -> str:
    return url.rstrip("/")


def advance(
    session: Session,
    tree: DialogTree,
    index: ShortcutIndex,
    dialog_input: DialogInput,
    *,
    now: datetime | None = None,
    feed_urls: Iterable[str] = (),
) -> tuple[Session, DialogAction]:
    """Apply one dialog turn; the turn counter advances even on rejections.

    ``feed_urls`` are the portal's subscribed feed URLs: a followed link that
    matches one becomes EnterFeed instead of AnnounceLink.
    """
    node = tree.node(session.current_node)
    when = now or _utcnow()

    def arrive(target: DialogNode, action: DialogAction) -> tuple[Session, DialogAction]:
        updated = replace(
            session,
            current_node=target.id,
            history=record_path(session.history, target.path, when),
            turn_count=session.turn_count + 1,
        )
        return updated, action

    def stay(action: DialogAction) -> tuple[Session, DialogAction]:
        return replace(session, turn_count=session.turn_count + 1), action

    def link_action(url: str) -> DialogAction:
        subscribed = {_normalize_url(u) for u in feed_urls}
        if _normalize_url(url) in subscribed:
            return EnterFeed(url)
        return AnnounceLink(url)

    if isinstance(dialog_input, PhraseMatch):
        target = tree.node_for_tag(dialog_input.tag)
        if target is None:
            return stay(Reject(RejectReason.NOMATCH))
        return arrive(target, Prompt(target.id))

    if isinstance(dialog_input, ShortcutQuery):
        ranked = score_items(list(dialog_input.words), index)
        if not ranked:
            return stay(Reject(RejectReason.NOMATCH))
        target = tree.item_detail(ranked[0][0])
        return arrive(target, Prompt(target.id))

    word = dialog_input.word

    if word is CommandWord.REPEAT:
        return stay(Prompt(node.id))

    if word is CommandWord.HOME:
        return arrive(tree.root, Prompt(tree.root_id))

    if word is CommandWord.BACK:
        parent = tree.parent(node)
        if parent is None:
            return stay(Reject(RejectReason.INVALID_COMMAND))
        return arrive(parent, Prompt(parent.id))

    if word in (CommandWord.NEXT, CommandWord.PREVIOUS):
        if node.kind is not NodeKind.ITEM_DETAIL:
            return stay(Reject(RejectReason.INVALID_COMMAND))
        step = 1 if word is CommandWord.NEXT else -1
        sibling_index = node.item_index + step
        if not 1 <= sibling_index <= len(tree.feed.items):
            return stay(Reject(RejectReason.INVALID_COMMAND))
        target = tree.item_detail(sibling_index)
        return arrive(target, Prompt(target.id))

    # follow
    item = tree.item_for_node(node)
    if item is None or item.link is None:
        return stay(Reject(RejectReason.INVALID_COMMAND))
    if node.kind is NodeKind.ITEM_DETAIL:
        # Following from the item detail steps onto the link node as it announces.
        return arrive(tree.node(node.children[0]), link_action(item.link))
    return stay(link_action(item.link))


def jump_to_path(
    session: Session,
    tree: DialogTree,
    path: tuple[int, ...],
    *,
    now: datetime | None = None,
) -> tuple[Session, DialogAction]:
    """History-shortcut jump straight to the node a recorded path points at.

    Counts as a normal turn and arrival; a stale path (no longer resolvable in
    the current tree) rejects without moving.
    """
    when = now or _utcnow()
    target = tree.node_for_path(path)
    if target is None:
        return replace(session, turn_count=session.turn_count + 1), Reject(RejectReason.NOMATCH)
    updated = replace(
        session,
        current_node=target.id,
        history=record_path(session.history, target.path, when),
        turn_count=session.turn_count + 1,
    )
    return updated, Prompt(target.id)
