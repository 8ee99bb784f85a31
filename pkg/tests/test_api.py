from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from voxfeed.app import create_app
from voxfeed.portal import Portal

from .conftest import FIGURE2_RSS

LN2 = 0.6931471805599453


@pytest.fixture
def portal(tmp_path):
    return Portal(tmp_path / "state.json")


@pytest.fixture
def client(portal):
    with TestClient(create_app(portal)) as client:
        yield client


@pytest.fixture
def feed_url(stub_server):
    stub_server.add("/feed", body=FIGURE2_RSS)
    return stub_server.url("/feed")


def subscribe(client, url, **extra) -> str:
    response = client.post("/feeds", json={"url": url, **extra})
    assert response.status_code == 201
    return response.json()["feed_id"]


def start_session(client, feed_id) -> dict:
    response = client.post("/sessions", json={"feed_id": feed_id})
    assert response.status_code == 201
    return response.json()


class TestFeeds:
    def test_fresh_portal_lists_nothing(self, client):
        response = client.get("/feeds")
        assert response.status_code == 200
        assert response.json() == []

    def test_subscribe_and_list(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        listed = client.get("/feeds").json()
        assert len(listed) == 1
        assert listed[0]["feed_id"] == feed_id
        assert listed[0]["title"] == "Google News"
        assert listed[0]["last_error"] is None

    def test_subscribe_bad_url_is_400(self, client):
        assert client.post("/feeds", json={"url": "gopher://x"}).status_code == 400

    def test_subscribe_twice_is_409(self, client, feed_url):
        subscribe(client, feed_url)
        assert client.post("/feeds", json={"url": feed_url}).status_code == 409

    def test_refresh_ok(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        response = client.post(f"/feeds/{feed_id}/refresh")
        assert response.status_code == 200
        assert response.json()["title"] == "Google News"

    def test_refresh_unknown_is_404(self, client):
        assert client.post("/feeds/deadbeef/refresh").status_code == 404

    def test_refresh_upstream_failure_is_502(self, client, stub_server):
        route = stub_server.add("/feed", body=FIGURE2_RSS)
        feed_id = subscribe(client, stub_server.url("/feed"))
        route.status = 503
        response = client.post(f"/feeds/{feed_id}/refresh")
        assert response.status_code == 502
        assert response.json()["last_error"]


class TestDialogDocuments:
    def test_xhtml_voice_document(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        response = client.get(f"/feeds/{feed_id}/dialog", params={"format": "xv"})
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("application/xhtml+xml")
        assert "xv:sync" in response.text
        assert response.text.count("<option>") == 2

    def test_voicexml_document_media_type(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        response = client.get(f"/feeds/{feed_id}/dialog", params={"format": "vxml"})
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("application/voicexml+xml")

    def test_bad_format_is_400(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        assert client.get(f"/feeds/{feed_id}/dialog", params={"format": "rss"}).status_code == 400

    def test_unknown_feed_is_404(self, client):
        assert client.get("/feeds/deadbeef/dialog", params={"format": "xv"}).status_code == 404

    def test_not_loaded_is_409(self, client, stub_server):
        feed_id = subscribe(client, stub_server.url("/broken"))
        assert client.get(f"/feeds/{feed_id}/dialog", params={"format": "xv"}).status_code == 409


class TestSessions:
    def test_create_session(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        created = start_session(client, feed_id)
        assert created["node_id"] == "n0"
        assert created["prompt"] == "Please say the items."

    def test_create_on_unknown_feed_404(self, client):
        assert client.post("/sessions", json={"feed_id": "deadbeef"}).status_code == 404

    def test_create_on_unloaded_feed_409(self, client, stub_server):
        feed_id = subscribe(client, stub_server.url("/broken"))
        assert client.post("/sessions", json={"feed_id": feed_id}).status_code == 409

    def test_phrase_input_by_tag(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        session = start_session(client, feed_id)
        response = client.post(f"/sessions/{session['session_id']}/input",
                               json={"kind": "phrase", "value": "1"})
        assert response.status_code == 200
        body = response.json()
        assert body["action"] == {"type": "prompt", "node_id": "n0.1", "url": None, "reason": None}
        assert body["prompt"].startswith("US seeks more stringent UN sanctions")
        assert body["turn_count"] == 1

    def test_phrase_input_by_text(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        session = start_session(client, feed_id)
        response = client.post(f"/sessions/{session['session_id']}/input",
                               json={"kind": "phrase", "value": "Senator takes a meeting"})
        assert response.json()["node_id"] == "n0.2"

    def test_shortcut_input_returns_ranked_list(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        session = start_session(client, feed_id)
        response = client.post(f"/sessions/{session['session_id']}/input",
                               json={"kind": "shortcut", "value": "senator"})
        body = response.json()
        assert body["node_id"] == "n0.2"
        assert len(body["ranked"]) == 1
        assert body["ranked"][0]["item"] == 2
        assert abs(body["ranked"][0]["score"] - LN2) < 1e-12

    def test_nomatch_shortcut_rejects_in_place(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        session = start_session(client, feed_id)
        response = client.post(f"/sessions/{session['session_id']}/input",
                               json={"kind": "shortcut", "value": "zebra"})
        body = response.json()
        assert body["action"]["type"] == "reject"
        assert body["action"]["reason"] == "nomatch"
        assert body["node_id"] == "n0"
        assert body["ranked"] == []

    def test_command_input(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        session = start_session(client, feed_id)
        client.post(f"/sessions/{session['session_id']}/input", json={"kind": "phrase", "value": "1"})
        response = client.post(f"/sessions/{session['session_id']}/input",
                               json={"kind": "command", "value": "next"})
        assert response.json()["node_id"] == "n0.2"

    def test_unknown_kind_is_400(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        session = start_session(client, feed_id)
        response = client.post(f"/sessions/{session['session_id']}/input",
                               json={"kind": "hum", "value": "x"})
        assert response.status_code == 400

    def test_unknown_phrase_is_400(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        session = start_session(client, feed_id)
        response = client.post(f"/sessions/{session['session_id']}/input",
                               json={"kind": "phrase", "value": "read me the news"})
        assert response.status_code == 400

    def test_missing_body_field_is_400(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        session = start_session(client, feed_id)
        response = client.post(f"/sessions/{session['session_id']}/input", json={"kind": "phrase"})
        assert response.status_code == 400

    def test_unknown_session_is_404(self, client):
        response = client.post("/sessions/nope/input", json={"kind": "phrase", "value": "1"})
        assert response.status_code == 404

    def test_session_view(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        session = start_session(client, feed_id)
        client.post(f"/sessions/{session['session_id']}/input", json={"kind": "phrase", "value": "2"})

        view = client.get(f"/sessions/{session['session_id']}").json()
        assert view["node_id"] == "n0.2"
        assert view["turn_count"] == 1
        assert [item["index"] for item in view["items"]] == [1, 2]
        assert view["items"][0]["phrase"] == "US seeks more"
        assert view["items"][1]["title"] == "Senator takes a meeting at CAA - The Southern"
        assert view["history_shortcuts"] == {"history one": [2]}

    def test_get_unknown_session_is_404(self, client):
        assert client.get("/sessions/nope").status_code == 404


class TestHistoryEndpoint:
    def test_history_records_and_shortcuts(self, client, feed_url):
        feed_id = subscribe(client, feed_url)
        session = start_session(client, feed_id)
        for value in ("2", "2", "1"):
            client.post(f"/sessions/{session['session_id']}/input",
                        json={"kind": "phrase", "value": value})

        body = client.get(f"/feeds/{feed_id}/history").json()
        assert [rec["path"] for rec in body["records"]] == [[2], [1]]
        assert body["records"][0]["visit_count"] == 2
        assert all(rec["stale"] is False for rec in body["records"])
        assert body["shortcuts"] == {"history one": [2], "history two": [1]}

    def test_history_unknown_feed_404(self, client):
        assert client.get("/feeds/deadbeef/history").status_code == 404


def test_error_statuses_are_distinct_and_exhaustive(client, stub_server):
    stub_server.add("/feed", body=FIGURE2_RSS)
    ok_url = stub_server.url("/feed")
    feed_id = subscribe(client, ok_url)
    broken_id = subscribe(client, stub_server.url("/broken"))
    session = start_session(client, feed_id)
    sid = session["session_id"]

    stub_server.routes["/feed"].status = 500
    cases = [
        (client.post("/feeds", json={"url": "not-a-url"}), 400),
        (client.post("/feeds", json={"url": ok_url}), 409),
        (client.post("/feeds/deadbeef/refresh"), 404),
        (client.post(f"/feeds/{feed_id}/refresh"), 502),
        (client.get(f"/feeds/{feed_id}/dialog", params={"format": "pdf"}), 400),
        (client.get("/feeds/deadbeef/dialog", params={"format": "xv"}), 404),
        (client.get(f"/feeds/{broken_id}/dialog", params={"format": "xv"}), 409),
        (client.post("/sessions", json={"feed_id": "deadbeef"}), 404),
        (client.post("/sessions", json={"feed_id": broken_id}), 409),
        (client.post(f"/sessions/{sid}/input", json={"kind": "wat", "value": ""}), 400),
        (client.post("/sessions/nope/input", json={"kind": "command", "value": "next"}), 404),
        (client.get("/sessions/nope"), 404),
        (client.get("/feeds/deadbeef/history"), 404),
    ]
    for response, expected in cases:
        assert response.status_code == expected, response.text


def test_credentials_never_leak_through_the_api(client, stub_server):
    stub_server.add("/private", body=FIGURE2_RSS, require_auth=("alice", "hunter2secret"))
    response = client.post("/feeds", json={
        "url": stub_server.url("/private"), "username": "alice", "password": "hunter2secret",
    })
    feed_id = response.json()["feed_id"]
    session = start_session(client, feed_id)

    surfaces = [
        response.text,
        client.get("/feeds").text,
        client.post(f"/feeds/{feed_id}/refresh").text,
        client.get(f"/feeds/{feed_id}/dialog", params={"format": "xv"}).text,
        client.get(f"/feeds/{feed_id}/dialog", params={"format": "vxml"}).text,
        client.get(f"/feeds/{feed_id}/history").text,
        client.get(f"/sessions/{session['session_id']}").text,
        client.post(f"/sessions/{session['session_id']}/input",
                    json={"kind": "shortcut", "value": "senator"}).text,
    ]
    for body in surfaces:
        assert "hunter2secret" not in body
