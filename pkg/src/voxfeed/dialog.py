"""Dialog structures derived from a feed: shortcut index, grammar, dialog tree."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .errors import EmptyFeedError, UnknownNodeError
from .feeds import FeedDocument
from .text import is_stopword, number_word, split_words

ROOT_NODE_ID = "n0"
ROOT_PROMPT = "Please say the items."

# Grammar phrases start at three words (or the whole title when shorter).
MIN_PHRASE_WORDS = 3


# --- shortcut index ----------------------------------------------------------

@dataclass(frozen=True)
class ShortcutIndex:
    """Inverted index over non-stopword title words with IDF weights."""

    item_count: int
    postings: Mapping[str, frozenset[int]]
    weights: Mapping[str, float]


def build_shortcut_index(feed: FeedDocument) -> ShortcutIndex:
    """Index every non-stopword title token; weight(t) = ln(N / df(t))."""
    if not feed.items:
        raise EmptyFeedError("cannot index a feed with no items")
    postings: dict[str, set[int]] = defaultdict(set)
    for item in feed.items:
        for word in item.tokens:
            if is_stopword(word):
                continue
            postings[word].add(item.index)
    n = len(feed.items)
    return ShortcutIndex(
        item_count=n,
        postings={word: frozenset(indices) for word, indices in postings.items()},
        weights={word: math.log(n / len(indices)) for word, indices in postings.items()},
    )


def score_items(utterance: list[str], index: ShortcutIndex) -> list[tuple[int, float]]:
    """Rank items by summed weights of the distinct utterance words they contain.

    Only items with a positive score are returned, best first; ties break on
    the lower item index.
    """
    scores: dict[int, float] = {}
    for word in dict.fromkeys(utterance):
        indices = index.postings.get(word)
        if not indices:
            continue
        weight = index.weights[word]
        for item_index in indices:
            scores[item_index] = scores.get(item_index, 0.0) + weight
    ranked = [(item_index, score) for item_index, score in scores.items() if score > 0.0]
    ranked.sort(key=lambda pair: (-pair[1], pair[0]))
    return ranked


# --- grammar -----------------------------------------------------------------

@dataclass(frozen=True)
class GrammarRule:
    phrase: tuple[str, ...]
    semantic_tag: str

    @property
    def text(self) -> str:
        return " ".join(self.phrase)


@dataclass(frozen=True)
class Grammar:
    name: str
    rules: tuple[GrammarRule, ...]


def _initial_phrase_length(words: list[str]) -> int:
    length = min(MIN_PHRASE_WORDS, len(words))
    while length < len(words) and is_stopword(words[length - 1]):
        length += 1
    return length


def generate_grammar(feed: FeedDocument) -> Grammar:
    """One spoken phrase per item, derived from the title.

    Each phrase is the shortest title prefix that is at least three words,
    does not end on a stopword (unless it is the whole title), and is unique
    case-insensitively across the feed. Colliding phrases are extended word by
    word; identical full titles get the spoken item number appended to the
    later items.
    """
    if not feed.items:
        raise EmptyFeedError("cannot build a grammar for a feed with no items")

    words_per_item = [split_words(item.title) for item in feed.items]
    lengths = [_initial_phrase_length(words) for words in words_per_item]
    suffixes: list[list[str]] = [[] for _ in feed.items]

    def phrase(i: int) -> tuple[str, ...]:
        return tuple(words_per_item[i][: lengths[i]] + suffixes[i])

    while True:
        groups: dict[str, list[int]] = defaultdict(list)
        for i in range(len(feed.items)):
            groups[" ".join(phrase(i)).casefold()].append(i)
        colliding = [members for members in groups.values() if len(members) > 1]
        if not colliding:
            break
        extended = False
        for members in colliding:
            for i in members:
                if not suffixes[i] and lengths[i] < len(words_per_item[i]):
                    lengths[i] += 1
                    while lengths[i] < len(words_per_item[i]) and is_stopword(words_per_item[i][lengths[i] - 1]):
                        lengths[i] += 1
                    extended = True
        if not extended:
            # Everybody in each group is exhausted: identical titles. The later
            # items get their spoken index appended; indices are unique, so the
            # group splits.
            for members in colliding:
                for i in sorted(members)[1:]:
                    suffixes[i].append(number_word(feed.items[i].index))

    rules = tuple(
        GrammarRule(phrase=phrase(i), semantic_tag=str(item.index))
        for i, item in enumerate(feed.items)
    )
    return Grammar(name="items", rules=rules)


# --- dialog tree -------------------------------------------------------------

class NodeKind(Enum):
    CHANNEL_MENU = "channel_menu"
    ITEM_DETAIL = "item_detail"
    LINK_FOLLOW = "link_follow"


@dataclass(frozen=True)
class DialogNode:
    id: str
    kind: NodeKind
    prompt: str
    item_index: int | None
    children: tuple[str, ...]
    path: tuple[int, ...]


@dataclass(frozen=True)
class DialogTree:
    """All dialog routes for one feed: channel menu -> item detail -> link."""

    feed: FeedDocument
    root_id: str
    nodes: Mapping[str, DialogNode]
    grammar: Grammar

    @property
    def root(self) -> DialogNode:
        return self.nodes[self.root_id]

    def node(self, node_id: str) -> DialogNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"no node {node_id!r} in dialog tree") from None

    def parent(self, node: DialogNode) -> DialogNode | None:
        if not node.path:
            return None
        parent_id, _, _ = node.id.rpartition(".")
        return self.nodes[parent_id]

    def item_detail(self, item_index: int) -> DialogNode:
        return self.node(f"{self.root_id}.{item_index}")

    def node_for_tag(self, tag: str) -> DialogNode | None:
        """ItemDetail node selected by a grammar semantic tag, if valid."""
        if not tag.isdigit():
            return None
        return self.nodes.get(f"{self.root_id}.{int(tag)}")

    def node_for_path(self, path: tuple[int, ...]) -> DialogNode | None:
        """Walk child ordinals from the root; None when the path is stale."""
        node = self.root
        for ordinal in path:
            if not 1 <= ordinal <= len(node.children):
                return None
            node = self.nodes[node.children[ordinal - 1]]
        return node

    def item_for_node(self, node: DialogNode):
        if node.item_index is None:
            return None
        return self.feed.items[node.item_index - 1]


def build_dialog_tree(feed: FeedDocument) -> DialogTree:
    """Channel menu root, one item-detail child per item, link nodes when linked."""
    if not feed.items:
        raise EmptyFeedError("cannot build a dialog tree for a feed with no items")

    nodes: dict[str, DialogNode] = {}
    root_children: list[str] = []
    for item in feed.items:
        detail_id = f"{ROOT_NODE_ID}.{item.index}"
        detail_children: list[str] = []
        if item.link:
            follow_id = f"{detail_id}.1"
            nodes[follow_id] = DialogNode(
                id=follow_id,
                kind=NodeKind.LINK_FOLLOW,
                prompt=f"Follow link to {item.title}?",
                item_index=item.index,
                children=(),
                path=(item.index, 1),
            )
            detail_children.append(follow_id)
        prompt = item.title if not item.description else f"{item.title}. {item.description}"
        nodes[detail_id] = DialogNode(
            id=detail_id,
            kind=NodeKind.ITEM_DETAIL,
            prompt=prompt,
            item_index=item.index,
            children=tuple(detail_children),
            path=(item.index,),
        )
        root_children.append(detail_id)

    nodes[ROOT_NODE_ID] = DialogNode(
        id=ROOT_NODE_ID,
        kind=NodeKind.CHANNEL_MENU,
        prompt=ROOT_PROMPT,
        item_index=None,
        children=tuple(root_children),
        path=(),
    )
    return DialogTree(feed=feed, root_id=ROOT_NODE_ID, nodes=nodes, grammar=generate_grammar(feed))
