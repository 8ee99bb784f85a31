"""Feed retrieval and parsing: RSS 2.0 / Atom 0.3 over HTTP with optional Basic auth.

Parsing is deliberately lenient where real feeds are sloppy: ``item`` elements
are accepted both inside and outside ``channel``, unparseable dates keep their
raw string, and relative links are resolved against the feed URL.
"""

from __future__ import annotations

import base64
import io
import threading
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import datetime, timezone
from email.utils import parsedate_to_datetime
from enum import Enum
from typing import Iterator, Mapping
from urllib.parse import urljoin, urlsplit

import requests

from .errors import (
    AuthRequiredError,
    FeedXmlError,
    HttpStatusError,
    InvalidUrlError,
    MissingChannelTitleError,
    NetworkError,
    RedirectLoopError,
    UnknownFormatError,
)
from .text import tokenize

ATOM03_NS = "http://purl.org/atom/ns#"

DEFAULT_CONNECT_TIMEOUT = 15.0
DEFAULT_READ_TIMEOUT = 30.0
MAX_REDIRECTS = 5


# --- credentials ------------------------------------------------------------

@dataclass(frozen=True)
class Credential:
    """Username/password bound to a URL prefix (scheme + host + path prefix)."""

    url_prefix: str
    username: str
    password: str

    def __post_init__(self) -> None:
        parts = urlsplit(self.url_prefix)
        if parts.scheme not in ("http", "https") or not parts.netloc:
            raise ValueError(f"credential prefix is not an absolute http(s) URL: {self.url_prefix!r}")
        if not self.username:
            raise ValueError("credential username must be non-empty")

    def basic_auth_header(self) -> str:
        token = base64.b64encode(f"{self.username}:{self.password}".encode("utf-8"))
        return "Basic " + token.decode("ascii")


def _prefix_specificity(url: str, prefix: str) -> int | None:
    """Number of matched path segments if ``prefix`` covers ``url``, else None."""
    u, p = urlsplit(url), urlsplit(prefix)
    if u.scheme.lower() != p.scheme.lower():
        return None
    if u.netloc.lower() != p.netloc.lower():
        return None
    prefix_segments = [s for s in p.path.split("/") if s]
    url_segments = [s for s in u.path.split("/") if s]
    if url_segments[: len(prefix_segments)] != prefix_segments:
        return None
    return len(prefix_segments)


def resolve_credentials(url: str, store: "CredentialStore") -> Credential | None:
    """Credential with the longest matching URL prefix, or None.

    Longest is measured in path segments (the host must match exactly), so one
    stored credential covers every feed under its prefix.
    """
    best: tuple[int, int, Credential] | None = None
    for credential in store.entries():
        specificity = _prefix_specificity(url, credential.url_prefix)
        if specificity is None:
            continue
        key = (specificity, len(credential.url_prefix))
        if best is None or key > best[:2]:
            best = (*key, credential)
    return best[2] if best else None


class CredentialStore:
    """Ordered credential list safe for concurrent readers and writers."""

    def __init__(self, entries: Iterator[Credential] | list[Credential] = ()):
        self._lock = threading.RLock()
        self._entries: list[Credential] = []
        for entry in entries:
            self.upsert(entry)

    def upsert(self, credential: Credential) -> None:
        """Add a credential, replacing any existing entry with the same prefix."""
        with self._lock:
            for i, existing in enumerate(self._entries):
                if existing.url_prefix == credential.url_prefix:
                    self._entries[i] = credential
                    return
            self._entries.append(credential)

    def entries(self) -> list[Credential]:
        with self._lock:
            return list(self._entries)

    def resolve(self, url: str) -> Credential | None:
        return resolve_credentials(url, self)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


# --- fetching ---------------------------------------------------------------

@dataclass(frozen=True)
class RawFetch:
    """Terminal response of a feed fetch."""

    final_url: str
    status: int
    content_type: str
    body: bytes
    used_auth: bool


def require_http_url(url: str) -> None:
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise InvalidUrlError(f"not an absolute http(s) URL: {url!r}")


def fetch_feed(
    url: str,
    store: CredentialStore | None = None,
    *,
    connect_timeout: float = DEFAULT_CONNECT_TIMEOUT,
    read_timeout: float = DEFAULT_READ_TIMEOUT,
) -> RawFetch:
    """GET a feed, following up to 5 redirects and retrying 401s with Basic auth.

    Credentials are resolved per hop against the URL being requested, so they
    are never sent to a host the stored prefix does not cover.
    """
    require_http_url(url)
    store = store or CredentialStore()
    timeout = (connect_timeout, read_timeout)
    headers = {"User-Agent": "voxfeed/0.1", "Accept": "application/rss+xml, application/atom+xml, application/xml, text/xml, */*"}

    current = url
    redirects = 0
    while True:
        used_auth = False
        try:
            response = requests.get(current, headers=headers, timeout=timeout, allow_redirects=False)
            if response.status_code == 401:
                credential = resolve_credentials(current, store)
                if credential is None:
                    raise AuthRequiredError(f"401 from {current} and no stored credential matches")
                authed = dict(headers, Authorization=credential.basic_auth_header())
                response = requests.get(current, headers=authed, timeout=timeout, allow_redirects=False)
                used_auth = True
                if response.status_code == 401:
                    raise AuthRequiredError(f"401 from {current} after Basic auth retry")
        except requests.exceptions.RequestException as exc:
            raise NetworkError(f"fetch of {current} failed: {exc}") from exc

        if response.is_redirect or response.status_code in (301, 302, 303, 307, 308):
            location = response.headers.get("Location")
            if not location:
                raise HttpStatusError(response.status_code, current)
            redirects += 1
            if redirects > MAX_REDIRECTS:
                raise RedirectLoopError(f"more than {MAX_REDIRECTS} redirects starting from {url}")
            current = urljoin(current, location)
            continue

        if not 200 <= response.status_code < 300:
            raise HttpStatusError(response.status_code, current)

        return RawFetch(
            final_url=current,
            status=response.status_code,
            content_type=response.headers.get("Content-Type", ""),
            body=response.content,
            used_auth=used_auth,
        )


# --- parsing ----------------------------------------------------------------

class FeedFormat(Enum):
    RSS2 = "rss2"
    ATOM03 = "atom03"


@dataclass(frozen=True)
class FeedDate:
    """A date as published plus its parsed UTC value when parseable."""

    raw: str
    parsed: datetime | None


@dataclass(frozen=True)
class ChannelMeta:
    title: str
    link: str | None = None
    language: str | None = None
    pub_date: FeedDate | None = None


@dataclass(frozen=True)
class FeedItem:
    index: int
    title: str
    link: str | None = None
    description: str | None = None
    pub_date: FeedDate | None = None
    tokens: tuple[str, ...] = ()


@dataclass(frozen=True)
class FeedDocument:
    source_url: str
    format: FeedFormat
    channel: ChannelMeta
    items: tuple[FeedItem, ...]
    fetched_at: datetime


def detect_format(body: bytes) -> FeedFormat:
    """Classify a feed body by its root element."""
    if not body:
        raise FeedXmlError("empty feed body")
    try:
        for _event, element in ET.iterparse(io.BytesIO(body), events=("start",)):
            tag = element.tag
            if tag == "rss" and element.get("version", "").startswith("2."):
                return FeedFormat.RSS2
            if tag == f"{{{ATOM03_NS}}}feed":
                return FeedFormat.ATOM03
            raise UnknownFormatError(tag)
    except ET.ParseError as exc:
        raise FeedXmlError(f"feed is not well-formed XML: {exc}") from exc
    raise FeedXmlError("feed has no root element")


def _element_text(element: ET.Element | None) -> str | None:
    """Whitespace-normalized text content (entities and CDATA already decoded)."""
    if element is None:
        return None
    text = " ".join("".join(element.itertext()).split())
    return text or None


def _parse_rfc822(raw: str) -> datetime | None:
    try:
        parsed = parsedate_to_datetime(raw)
    except (TypeError, ValueError):
        return None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def _parse_iso8601(raw: str) -> datetime | None:
    candidate = raw.strip()
    if candidate.endswith(("Z", "z")):
        candidate = candidate[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(candidate)
    except ValueError:
        return None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def _feed_date(raw: str | None, parse) -> FeedDate | None:
    if not raw:
        return None
    return FeedDate(raw=raw, parsed=parse(raw))


def _resolve_link(raw: str | None, base: str) -> str | None:
    if not raw:
        return None
    return urljoin(base, raw.strip())


def _alternate_link(element: ET.Element, ns: str) -> str | None:
    # Atom 0.3 defaults rel to "alternate" when absent.
    for link in element.findall(f"{{{ns}}}link"):
        if link.get("rel") in (None, "alternate") and link.get("href"):
            return link.get("href")
    return None


def _rss_items(root: ET.Element) -> Iterator[ET.Element]:
    # Document order regardless of whether items sit inside or beside channel.
    return root.iter("item")


def parse_feed(body: bytes, format: FeedFormat, source_url: str) -> FeedDocument:
    """Parse feed bytes into a normalized document.

    Items without a title are dropped and the survivors renumbered from 1 in
    source order; items without a link are kept but cannot be followed.
    """
    try:
        root = ET.fromstring(body)
    except ET.ParseError as exc:
        raise FeedXmlError(f"feed is not well-formed XML: {exc}") from exc

    if format is FeedFormat.RSS2:
        channel, raw_items = _extract_rss(root, source_url)
    else:
        channel, raw_items = _extract_atom(root, source_url)

    if channel.title is None:
        raise MissingChannelTitleError("feed has no non-empty channel title")

    items: list[FeedItem] = []
    for title, link, description, pub_date in raw_items:
        if not title:
            continue
        items.append(FeedItem(
            index=len(items) + 1,
            title=title,
            link=link,
            description=description,
            pub_date=pub_date,
            tokens=tuple(tokenize(title)),
        ))

    return FeedDocument(
        source_url=source_url,
        format=format,
        channel=ChannelMeta(
            title=channel.title,
            link=channel.link,
            language=channel.language,
            pub_date=channel.pub_date,
        ),
        items=tuple(items),
        fetched_at=datetime.now(timezone.utc),
    )


@dataclass
class _RawChannel:
    title: str | None = None
    link: str | None = None
    language: str | None = None
    pub_date: FeedDate | None = None


_RawItem = tuple  # (title, link, description, pub_date)


def _extract_rss(root: ET.Element, source_url: str) -> tuple[_RawChannel, list[_RawItem]]:
    channel = _RawChannel()
    channel_el = root.find("channel")
    if channel_el is not None:
        channel.title = _element_text(channel_el.find("title"))
        channel.link = _resolve_link(_element_text(channel_el.find("link")), source_url)
        channel.language = _element_text(channel_el.find("language"))
        channel.pub_date = _feed_date(_element_text(channel_el.find("pubDate")), _parse_rfc822)

    items = []
    for item in _rss_items(root):
        items.append((
            _element_text(item.find("title")),
            _resolve_link(_element_text(item.find("link")), source_url),
            _element_text(item.find("description")),
            _feed_date(_element_text(item.find("pubDate")), _parse_rfc822),
        ))
    return channel, items


def _extract_atom(root: ET.Element, source_url: str) -> tuple[_RawChannel, list[_RawItem]]:
    ns = ATOM03_NS
    channel = _RawChannel(
        title=_element_text(root.find(f"{{{ns}}}title")),
        link=_resolve_link(_alternate_link(root, ns), source_url),
        pub_date=_feed_date(_element_text(root.find(f"{{{ns}}}modified")), _parse_iso8601),
    )

    items = []
    for entry in root.iter(f"{{{ns}}}entry"):
        description = _element_text(entry.find(f"{{{ns}}}summary"))
        if description is None:
            description = _element_text(entry.find(f"{{{ns}}}content"))
        raw_date = _element_text(entry.find(f"{{{ns}}}modified"))
        if raw_date is None:
            raw_date = _element_text(entry.find(f"{{{ns}}}issued"))
        items.append((
            _element_text(entry.find(f"{{{ns}}}title")),
            _resolve_link(_alternate_link(entry, ns), source_url),
            description,
            _feed_date(raw_date, _parse_iso8601),
        ))
    return channel, items


def load_feed(
    url: str,
    store: CredentialStore | None = None,
    *,
    connect_timeout: float = DEFAULT_CONNECT_TIMEOUT,
    read_timeout: float = DEFAULT_READ_TIMEOUT,
) -> FeedDocument:
    """fetch + detect + parse in one step."""
    fetched = fetch_feed(url, store, connect_timeout=connect_timeout, read_timeout=read_timeout)
    format = detect_format(fetched.body)
    return parse_feed(fetched.body, format, fetched.final_url)


# --- JSON projection (used by the CLI and the portal state file) -------------

def document_to_dict(doc: FeedDocument) -> dict:
    return {
        "source_url": doc.source_url,
        "format": doc.format.value,
        "channel": {
            "title": doc.channel.title,
            "link": doc.channel.link,
            "language": doc.channel.language,
            "pub_date": _date_to_dict(doc.channel.pub_date),
        },
        "items": [
            {
                "index": item.index,
                "title": item.title,
                "link": item.link,
                "description": item.description,
                "pub_date": _date_to_dict(item.pub_date),
                "tokens": list(item.tokens),
            }
            for item in doc.items
        ],
        "fetched_at": doc.fetched_at.isoformat(),
    }


def document_from_dict(data: Mapping) -> FeedDocument:
    channel = data["channel"]
    return FeedDocument(
        source_url=data["source_url"],
        format=FeedFormat(data["format"]),
        channel=ChannelMeta(
            title=channel["title"],
            link=channel.get("link"),
            language=channel.get("language"),
            pub_date=_date_from_dict(channel.get("pub_date")),
        ),
        items=tuple(
            FeedItem(
                index=item["index"],
                title=item["title"],
                link=item.get("link"),
                description=item.get("description"),
                pub_date=_date_from_dict(item.get("pub_date")),
                tokens=tuple(item["tokens"]),
            )
            for item in data["items"]
        ),
        fetched_at=datetime.fromisoformat(data["fetched_at"]),
    )


def _date_to_dict(date: FeedDate | None) -> dict | None:
    if date is None:
        return None
    return {"raw": date.raw, "parsed": date.parsed.isoformat() if date.parsed else None}


def _date_from_dict(data: Mapping | None) -> FeedDate | None:
    if data is None:
        return None
    parsed = data.get("parsed")
    return FeedDate(raw=data["raw"], parsed=datetime.fromisoformat(parsed) if parsed else None)
