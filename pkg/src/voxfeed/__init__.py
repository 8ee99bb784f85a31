"""voxfeed: a voice portal for RSS/Atom feeds.

Fetches feeds (optionally behind HTTP Basic auth), turns them into dialog
trees with auto-generated JSGF grammars, renders VoiceXML 2.0 and XHTML+Voice
1.2 documents, and runs mixed-initiative dialog sessions with shortcut-word
ranking and dialog-path history.
"""

from .dialog import (
    DialogNode,
    DialogTree,
    Grammar,
    GrammarRule,
    NodeKind,
    ShortcutIndex,
    build_dialog_tree,
    build_shortcut_index,
    generate_grammar,
    score_items,
)
from .feeds import (
    ChannelMeta,
    Credential,
    CredentialStore,
    FeedDocument,
    FeedFormat,
    FeedItem,
    RawFetch,
    detect_format,
    fetch_feed,
    load_feed,
    parse_feed,
    resolve_credentials,
)
from .portal import Portal, PortalState, load_state, persist_state
from .render import (
    RenderedDocument,
    render_voicexml,
    render_xhtml_voice,
    serialize_jsgf,
)
from .session import (
    AnnounceLink,
    Command,
    CommandWord,
    DialogAction,
    DialogInput,
    EnterFeed,
    PathRecord,
    PhraseMatch,
    Prompt,
    Reject,
    RejectReason,
    Session,
    ShortcutQuery,
    advance,
    assign_history_shortcuts,
    jump_to_path,
    rank_paths,
    record_path,
)
from .text import STOPWORDS, tokenize

__version__ = "0.1.0"
