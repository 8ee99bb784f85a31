"""FastAPI service exposing the portal over HTTP/JSON."""

from __future__ import annotations

from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import (
    BadFormatError,
    DuplicateSubscriptionError,
    FeedNotLoadedError,
    InvalidUrlError,
    MalformedInputError,
    UnknownFeedError,
    UnknownSessionError,
)
from .portal import Portal
from .schemas import (
    ActionModel,
    FeedSummary,
    HistoryRecordView,
    HistoryResponse,
    InputRequest,
    InputResponse,
    ItemView,
    RankedEntry,
    SessionCreateRequest,
    SessionCreateResponse,
    SessionView,
    SubscribeRequest,
    SubscribeResponse,
)
from .session import AnnounceLink, EnterFeed, Prompt, Reject

_ERROR_STATUS = {
    InvalidUrlError: 400,
    BadFormatError: 400,
    MalformedInputError: 400,
    UnknownFeedError: 404,
    UnknownSessionError: 404,
    DuplicateSubscriptionError: 409,
    FeedNotLoadedError: 409,
}


def _action_model(action) -> ActionModel:
    if isinstance(action, Prompt):
        return ActionModel(type="prompt", node_id=action.node_id)
    if isinstance(action, AnnounceLink):
        return ActionModel(type="announce_link", url=action.url)
    if isinstance(action, EnterFeed):
        return ActionModel(type="enter_feed", url=action.url)
    if isinstance(action, Reject):
        return ActionModel(type="reject", reason=action.reason.value)
    raise TypeError(f"unknown action {action!r}")


def _feed_summary(sub) -> FeedSummary:
    return FeedSummary(
        feed_id=sub.feed_id,
        url=sub.url,
        title=sub.last_document.channel.title if sub.last_document else None,
        refreshed_at=sub.refreshed_at,
        last_error=sub.last_error,
    )


def create_app(
    portal: Portal | None = None,
    *,
    state_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    portal = portal or Portal(state_path)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        portal.save()

    app = FastAPI(title="voxfeed portal", lifespan=lifespan)
    app.state.portal = portal

    for error_type, status in _ERROR_STATUS.items():
        def handler(request: Request, exc: Exception, status=status) -> JSONResponse:
            return JSONResponse(status_code=status, content={"detail": str(exc)})
        app.add_exception_handler(error_type, handler)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError) -> JSONResponse:
        # The API contract uses 400 for malformed bodies.
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/feeds", status_code=201, response_model=SubscribeResponse)
    def subscribe(body: SubscribeRequest) -> SubscribeResponse:
        feed_id = portal.subscribe_feed(body.url, body.username, body.password)
        return SubscribeResponse(feed_id=feed_id)

    @app.get("/feeds", response_model=list[FeedSummary])
    def list_feeds() -> list[FeedSummary]:
        return [_feed_summary(sub) for sub in portal.list_feeds()]

    @app.post("/feeds/{feed_id}/refresh", response_model=FeedSummary)
    def refresh(feed_id: str):
        sub = portal.refresh_feed(feed_id)
        if sub.last_error is not None:
            return JSONResponse(
                status_code=502,
                content={"detail": "upstream fetch failed", "last_error": sub.last_error},
            )
        return _feed_summary(sub)

    @app.get("/feeds/{feed_id}/dialog")
    def dialog_document(feed_id: str, format: str) -> Response:
        doc = portal.get_dialog_document(feed_id, format)
        return Response(
            content=doc.to_bytes(),
            media_type=f"{doc.media_type}; charset={doc.encoding}",
        )

    @app.get("/feeds/{feed_id}/history", response_model=HistoryResponse)
    def history(feed_id: str) -> HistoryResponse:
        records, stale, shortcuts = portal.get_history(feed_id)
        return HistoryResponse(
            records=[
                HistoryRecordView(
                    path=list(rec.path),
                    visit_count=rec.visit_count,
                    last_visited=rec.last_visited,
                    stale=rec.path in stale,
                )
                for rec in records
            ],
            shortcuts={phrase: list(path) for phrase, path in shortcuts.items()},
        )

    @app.post("/sessions", status_code=201, response_model=SessionCreateResponse)
    def create_session(body: SessionCreateRequest) -> SessionCreateResponse:
        session_id = portal.create_session(body.feed_id)
        session, tree = portal.get_session(session_id)
        return SessionCreateResponse(
            session_id=session_id,
            node_id=session.current_node,
            prompt=tree.node(session.current_node).prompt,
        )

    @app.post("/sessions/{session_id}/input", response_model=InputResponse)
    def post_input(session_id: str, body: InputRequest) -> InputResponse:
        dialog_input = portal.translate_input(session_id, body.kind, body.value)
        outcome = portal.post_input(session_id, dialog_input)
        return InputResponse(
            action=_action_model(outcome.action),
            node_id=outcome.node_id,
            prompt=outcome.prompt,
            turn_count=outcome.turn_count,
            ranked=[RankedEntry(item=item, score=score) for item, score in outcome.ranked],
        )

    @app.get("/sessions/{session_id}", response_model=SessionView)
    def get_session(session_id: str) -> SessionView:
        session, tree = portal.get_session(session_id)
        shortcuts = portal.session_history_shortcuts(session_id)
        return SessionView(
            session_id=session.id,
            feed_id=session.feed_id,
            node_id=session.current_node,
            prompt=tree.node(session.current_node).prompt,
            turn_count=session.turn_count,
            items=[
                ItemView(index=item.index, title=item.title, phrase=rule.text)
                for item, rule in zip(tree.feed.items, tree.grammar.rules)
            ],
            history_shortcuts={phrase: list(path) for phrase, path in shortcuts.items()},
        )

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
