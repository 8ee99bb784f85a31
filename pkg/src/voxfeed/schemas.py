"""Pydantic request/response models for the portal HTTP API."""

from __future__ import annotations

from datetime import datetime

from pydantic import BaseModel


class SubscribeRequest(BaseModel):
    url: str
    username: str | None = None
    password: str | None = None


class SubscribeResponse(BaseModel):
    feed_id: str


class FeedSummary(BaseModel):
    feed_id: str
    url: str
    title: str | None = None
    refreshed_at: datetime | None = None
    last_error: str | None = None


class SessionCreateRequest(BaseModel):
    feed_id: str


class SessionCreateResponse(BaseModel):
    session_id: str
    node_id: str
    prompt: str


class InputRequest(BaseModel):
    kind: str
    value: str


class ActionModel(BaseModel):
    type: str
    node_id: str | None = None
    url: str | None = None
    reason: str | None = None


class RankedEntry(BaseModel):
    item: int
    score: float


class InputResponse(BaseModel):
    action: ActionModel
    node_id: str
    prompt: str
    turn_count: int
    ranked: list[RankedEntry]


class ItemView(BaseModel):
    index: int
    title: str
    phrase: str


class SessionView(BaseModel):
    session_id: str
    feed_id: str
    node_id: str
    prompt: str
    turn_count: int
    items: list[ItemView]
    history_shortcuts: dict[str, list[int]]


class HistoryRecordView(BaseModel):
    path: list[int]
    visit_count: int
    last_visited: datetime
    stale: bool


class HistoryResponse(BaseModel):
    records: list[HistoryRecordView]
    shortcuts: dict[str, list[int]]


class ErrorBody(BaseModel):
    detail: str
    last_error: str | None = None
