"""Command-line entry point: fetch, render, navigate (text REPL), serve.

Exit codes: 10 network, 11 auth, 12 parse, 13 bad format, 20 bind failure.
Diagnostics go to stderr; documents and prompts go to stdout.
"""

from __future__ import annotations

import json
import socket
import sys
from pathlib import Path
from urllib.parse import urlsplit

import click
import uvicorn

from .app import create_app
from .dialog import NodeKind, build_dialog_tree, build_shortcut_index
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
from .feeds import Credential, CredentialStore, document_to_dict, load_feed
from .portal import Portal
from .render import render_voicexml, render_xhtml_voice, serialize_jsgf
from .session import (
    AnnounceLink,
    Command,
    CommandWord,
    EnterFeed,
    PhraseMatch,
    Prompt,
    Reject,
    Session,
    ShortcutQuery,
    advance,
    assign_history_shortcuts,
    jump_to_path,
    rank_paths,
)
from .text import tokenize

EXIT_NETWORK = 10
EXIT_AUTH = 11
EXIT_PARSE = 12
EXIT_BAD_FORMAT = 13
EXIT_BIND = 20

_NETWORK_ERRORS = (NetworkError, RedirectLoopError, HttpStatusError)
_PARSE_ERRORS = (FeedXmlError, UnknownFormatError, MissingChannelTitleError)


def _fail(message: str, code: int) -> None:
    click.echo(f"voxfeed: {message}", err=True)
    sys.exit(code)


def _store_from_flags(url: str, user: str | None, password: str | None) -> CredentialStore:
    store = CredentialStore()
    if user:
        parts = urlsplit(url)
        store.upsert(Credential(f"{parts.scheme}://{parts.netloc}", user, password or ""))
    return store


def _load(url: str, user: str | None, password: str | None):
    try:
        return load_feed(url, _store_from_flags(url, user, password))
    except InvalidUrlError as exc:
        raise click.BadParameter(str(exc)) from exc
    except AuthRequiredError as exc:
        _fail(str(exc), EXIT_AUTH)
    except _NETWORK_ERRORS as exc:
        _fail(str(exc), EXIT_NETWORK)
    except _PARSE_ERRORS as exc:
        _fail(str(exc), EXIT_PARSE)


@click.group()
def main() -> None:
    """Voice portal for RSS/Atom feeds."""


@main.command()
@click.argument("url")
@click.option("--user", default=None, help="Username for HTTP Basic auth.")
@click.option("--pass", "password", default=None, help="Password for HTTP Basic auth.")
def fetch(url: str, user: str | None, password: str | None) -> None:
    """Fetch a feed and print the normalized document as JSON."""
    document = _load(url, user, password)
    click.echo(json.dumps(document_to_dict(document), indent=2))


@main.command()
@click.argument("url")
@click.option("--format", "format_", required=True, help="vxml, xv, or jsgf.")
@click.option("--user", default=None, help="Username for HTTP Basic auth.")
@click.option("--pass", "password", default=None, help="Password for HTTP Basic auth.")
def render(url: str, format_: str, user: str | None, password: str | None) -> None:
    """Fetch a feed and print its grammar or dialog document."""
    if format_ not in ("vxml", "xv", "jsgf"):
        _fail(f"unknown render format {format_!r} (expected vxml, xv, or jsgf)", EXIT_BAD_FORMAT)
    document = _load(url, user, password)
    tree = build_dialog_tree(document)
    if format_ == "jsgf":
        sys.stdout.write(serialize_jsgf(tree.grammar))
        return
    rendered = render_voicexml(tree.root, tree) if format_ == "vxml" else render_xhtml_voice(tree.root, tree)
    sys.stdout.buffer.write(rendered.to_bytes())
    sys.stdout.buffer.flush()


_REPL_COMMANDS = {word.value: word for word in CommandWord}


def _print_node(tree, node_id: str) -> None:
    node = tree.node(node_id)
    click.echo(node.prompt)
    if node.kind is NodeKind.CHANNEL_MENU:
        for position, rule in enumerate(tree.grammar.rules, start=1):
            click.echo(f"  {position}. {rule.text}")


@main.command()
@click.argument("url")
@click.option("--user", default=None, help="Username for HTTP Basic auth.")
@click.option("--pass", "password", default=None, help="Password for HTTP Basic auth.")
def navigate(url: str, user: str | None, password: str | None) -> None:
    """Interactive text stand-in for the voice channel.

    Lines starting with ":" are commands (:next, :previous, :repeat, :back,
    :follow, :home, :quit); anything else is matched against the grammar and
    otherwise treated as shortcut words.
    """
    document = _load(url, user, password)
    tree = build_dialog_tree(document)
    index = build_shortcut_index(document)
    session = Session(id="repl", feed_id="repl", current_node=tree.root_id, history=(), turn_count=0)

    _print_node(tree, session.current_node)
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        if line.startswith(":"):
            name = line[1:].strip().lower()
            if name == "quit":
                break
            word = _REPL_COMMANDS.get(name)
            if word is None:
                click.echo(f"unknown command :{name}", err=True)
                continue
            session, action = advance(session, tree, index, Command(word))
        else:
            folded = line.casefold()
            tag = next((r.semantic_tag for r in tree.grammar.rules if r.text.casefold() == folded), None)
            shortcuts = assign_history_shortcuts(rank_paths([r for r in session.history if r.path]))
            if tag is not None:
                session, action = advance(session, tree, index, PhraseMatch(tag))
            elif folded in (phrase.casefold() for phrase in shortcuts):
                path = next(p for phrase, p in shortcuts.items() if phrase.casefold() == folded)
                session, action = jump_to_path(session, tree, path)
            else:
                session, action = advance(session, tree, index, ShortcutQuery(tuple(tokenize(line))))

        if isinstance(action, Prompt):
            _print_node(tree, action.node_id)
        elif isinstance(action, AnnounceLink):
            click.echo(f"link: {action.url}")
        elif isinstance(action, EnterFeed):
            click.echo(f"enter feed: {action.url}")
        elif isinstance(action, Reject):
            click.echo(f"[{action.reason.value}]")
    click.echo(f"turns: {session.turn_count}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True, help="Listen address.")
@click.option("--port", default=8000, show_default=True, type=int, help="Listen port.")
@click.option(
    "--state-file",
    envvar="VOXFEED_STATE",
    default="voxfeed-state.json",
    show_default=True,
    help="Path of the JSON state file (env: VOXFEED_STATE).",
)
@click.option("--postback-url", default=None, help="URL template for VoiceXML filled handlers.")
@click.option(
    "--ui-dir",
    envvar="VOXFEED_UI",
    default=None,
    help="Directory of built web UI assets to serve under /ui "
         "(default: ./frontend/dist when present; env: VOXFEED_UI).",
)
@click.option("--connect-timeout", default=15.0, show_default=True, help="Feed fetch connect timeout (s).")
@click.option("--read-timeout", default=30.0, show_default=True, help="Feed fetch read timeout (s).")
def serve(
    host: str,
    port: int,
    state_file: str,
    postback_url: str | None,
    ui_dir: str | None,
    connect_timeout: float,
    read_timeout: float,
) -> None:
    """Run the portal HTTP service until interrupted."""
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        # Mirror uvicorn's bind semantics: a socket in TIME_WAIT must not
        # count as a conflict, only a live listener should.
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
        probe.close()
    except OSError as exc:
        _fail(f"cannot bind {host}:{port}: {exc}", EXIT_BIND)

    kwargs = {"connect_timeout": connect_timeout, "read_timeout": read_timeout}
    if postback_url:
        kwargs["postback_url"] = postback_url
    portal = Portal(state_file, **kwargs)
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    app = create_app(portal, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
