"""Exception hierarchy shared across the package."""

from __future__ import annotations


class VoxfeedError(Exception):
    """Base class for all errors raised by this package."""


# --- fetching ---------------------------------------------------------------

class NetworkError(VoxfeedError):
    """DNS, connect, TLS, or timeout failure while fetching a feed."""


class AuthRequiredError(VoxfeedError):
    """Got a 401 and either had no matching credential or the retry failed."""


class HttpStatusError(VoxfeedError):
    """Terminal non-2xx HTTP status that is not an auth problem."""

    def __init__(self, status: int, url: str):
        super().__init__(f"HTTP {status} from {url}")
        self.status = status
        self.url = url


class RedirectLoopError(VoxfeedError):
    """More than the allowed number of redirects."""


# --- parsing ----------------------------------------------------------------

class FeedXmlError(VoxfeedError):
    """Feed body is not well-formed XML."""


class UnknownFormatError(VoxfeedError):
    """Root element is neither RSS 2.x nor Atom 0.3."""

    def __init__(self, root_tag: str):
        super().__init__(f"unrecognized feed root element: {root_tag}")
        self.root_tag = root_tag


class MissingChannelTitleError(VoxfeedError):
    """Feed has no non-empty channel/feed title."""


# --- dialog -----------------------------------------------------------------

class EmptyFeedError(VoxfeedError):
    """Operation requires a feed with at least one item."""


class EmptyGrammarError(VoxfeedError):
    """Grammar has no rules to serialize."""


class UnknownNodeError(VoxfeedError):
    """Node id does not exist in the dialog tree."""


class WrongNodeKindError(VoxfeedError):
    """Node kind is not valid for the requested rendering."""


# --- portal -----------------------------------------------------------------

class InvalidUrlError(VoxfeedError):
    """URL is not an absolute http/https URL."""


class DuplicateSubscriptionError(VoxfeedError):
    """The URL is already subscribed."""


class UnknownFeedError(VoxfeedError):
    """No subscription with that feed id."""


class FeedNotLoadedError(VoxfeedError):
    """Subscription exists but has no successfully parsed document."""


class BadFormatError(VoxfeedError):
    """Requested rendering format is not vxml/xv/jsgf."""


class UnknownSessionError(VoxfeedError):
    """No live session with that id."""


class MalformedInputError(VoxfeedError):
    """Dialog input payload could not be interpreted."""


class StateIoError(VoxfeedError):
    """State file could not be read or written."""


class CorruptStateError(VoxfeedError):
    """State file exists but cannot be restored (bad JSON or wrong schema)."""
