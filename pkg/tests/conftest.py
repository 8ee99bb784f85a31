from __future__ import annotations

import random
from datetime import datetime, timezone

import pytest

from voxfeed.feeds import ChannelMeta, FeedDocument, FeedFormat, FeedItem, parse_feed
from voxfeed.text import tokenize

from .stubserver import StubServer

# Reconstruction of the two-item Google News RSS shown in the source material:
# items sit OUTSIDE <channel>, which the parser must tolerate.
FIGURE2_RSS = b"""<?xml version="1.0" encoding="UTF-8"?>
<rss version="2.0">
  <channel>
    <title>Google News</title>
    <link>http://news.google.com/?ned=ePkh8BM9E0KzgxVohvEbPluMBELmPv--4xLLNcf2PrVnqUhrvAF9KD4I</link>
    <language>en</language>
    <pubDate>Fri, 23 Feb 2007</pubDate>
  </channel>
  <item>
    <title>US seeks more stringent UN sanctions against Iran - San Jose Mercury News</title>
    <link>http://news.google.com/news/url?sa=T&amp;ct=us/0-0-0&amp;fd=R&amp;id=R</link>
    <pubDate>Fri, 23 Feb 2007</pubDate>
    <description>The United States will seek tougher UN sanctions ...</description>
  </item>
  <item>
    <title>Senator takes a meeting at CAA - The Southern</title>
    <link>http://news.google.com/news/url?sa=T&amp;ct=us/0-0-1&amp;fd=R&amp;id=R</link>
    <pubDate>Fri, 23 Feb 2007</pubDate>
    <description>Continuing the week's intriguing fusion of ...</description>
  </item>
</rss>
"""

FIGURE2_TITLES = (
    "US seeks more stringent UN sanctions against Iran - San Jose Mercury News",
    "Senator takes a meeting at CAA - The Southern",
)

FIGURE2_URL = "http://news.google.com/feed"


@pytest.fixture
def figure2_rss() -> bytes:
    return FIGURE2_RSS


@pytest.fixture
def figure2_doc() -> FeedDocument:
    return parse_feed(FIGURE2_RSS, FeedFormat.RSS2, FIGURE2_URL)


@pytest.fixture
def stub_server():
    server = StubServer().start()
    yield server
    server.stop()


@pytest.fixture
def second_stub_server():
    server = StubServer().start()
    yield server
    server.stop()


def make_feed(
    titles,
    links=None,
    descriptions=None,
    url: str = "http://feeds.example/test",
    title: str = "Test Feed",
) -> FeedDocument:
    """Hand-built document for dialog-layer tests (bypasses XML)."""
    items = []
    for i, item_title in enumerate(titles, start=1):
        link = links[i - 1] if links else f"http://feeds.example/item/{i}"
        description = descriptions[i - 1] if descriptions else None
        items.append(FeedItem(
            index=i,
            title=item_title,
            link=link,
            description=description,
            pub_date=None,
            tokens=tuple(tokenize(item_title)),
        ))
    return FeedDocument(
        source_url=url,
        format=FeedFormat.RSS2,
        channel=ChannelMeta(title=title),
        items=tuple(items),
        fetched_at=datetime(2026, 8, 10, tzinfo=timezone.utc),
    )


_CONTENT_WORDS = [
    "alpha", "Bravo", "charlie", "Delta", "echo", "foxtrot", "Golf", "hotel",
    "india", "juliet", "KILO", "lima", "mike", "november", "Oscar", "papa",
    "quebec", "romeo", "sierra", "tango", "Uniform", "victor", "whiskey",
    "xray", "yankee", "zulu", "rust", "async", "runtime", "sanctions",
    "senator", "meeting", "stringent", "iran", "news", "Calendar", "blogs",
]

_FUZZ_WORDS = _CONTENT_WORDS + [
    "a", "an", "the", "and", "or", "of", "to", "in", "on", "at", "for", "is",
    "are", "with", "by",
]


def random_titles(rng: random.Random, n: int, dup_rate: float = 0.05) -> list[str]:
    titles: list[str] = []
    for _ in range(n):
        if titles and rng.random() < dup_rate:
            titles.append(rng.choice(titles))
        else:
            titles.append(" ".join(rng.choice(_FUZZ_WORDS) for _ in range(rng.randint(1, 12))))
    return titles


def random_feed(rng: random.Random, n_items: int | None = None, dup_rate: float = 0.05) -> FeedDocument:
    n = n_items if n_items is not None else rng.randint(1, 50)
    titles = random_titles(rng, n, dup_rate)
    links = [
        f"http://feeds.example/item/{i}" if rng.random() < 0.8 else None
        for i in range(1, n + 1)
    ]
    descriptions = [
        " ".join(rng.choice(_FUZZ_WORDS) for _ in range(rng.randint(2, 8))) if rng.random() < 0.5 else None
        for _ in range(n)
    ]
    items = tuple(
        FeedItem(
            index=i,
            title=titles[i - 1],
            link=links[i - 1],
            description=descriptions[i - 1],
            pub_date=None,
            tokens=tuple(tokenize(titles[i - 1])),
        )
        for i in range(1, n + 1)
    )
    return FeedDocument(
        source_url="http://feeds.example/fuzz",
        format=FeedFormat.RSS2,
        channel=ChannelMeta(title="Fuzz Feed"),
        items=items,
        fetched_at=datetime(2026, 8, 10, tzinfo=timezone.utc),
    )


def random_utterance(rng: random.Random, feed: FeedDocument) -> list[str]:
    """Mix of words actually present in the feed and words that are not."""
    pool: list[str] = ["zebra", "quux", "the", "of"]
    for item in feed.items:
        pool.extend(item.tokens)
    return [rng.choice(pool) for _ in range(rng.randint(1, 5))]
