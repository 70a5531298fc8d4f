"""HTTP endpoints of the map service."""

import datetime as dt

import pytest
from fastapi.testclient import TestClient

from flowkit.mapserver.adapter import http_deliverer
from flowkit.mapserver.app import create_app
from flowkit.mapserver.state import ServerState

UTC = dt.timezone.utc
NOW = dt.datetime(2026, 8, 10, 12, 0, tzinfo=UTC)


@pytest.fixture
def client(tmp_path):
    state = ServerState(tmp_path / "data", now_fn=lambda: NOW)
    return TestClient(create_app(state))


def put_participant(client, pid, **extra):
    answer = client.put(f"/participants/{pid}", json=extra)
    assert answer.status_code == 200, answer.text
    return answer.json()


def event_payload(eid="e1", start="2026-08-10T11:00:00Z", end="2026-08-10T11:30:00Z"):
    return {
        "id": eid,
        "channel": "text-chat",
        "participants": ["alice", "bob"],
        "start": start,
        "end": end,
    }


def test_roundtrip_through_all_endpoints(client):
    assert client.get("/health").json() == {
        "status": "ok",
        "events": 0,
        "participants": 0,
    }

    profile = put_participant(client, "alice", name="Alice", site="GER")
    assert profile["site"] == "GER"
    put_participant(client, "bob", name="Bob", site="SWE")

    answer = client.post("/events", json=event_payload())
    assert answer.status_code == 200
    assert answer.json() == {"id": "e1", "stored": True}

    assert client.get("/health").json()["events"] == 1

    listed = client.get("/participants").json()["participants"]
    assert [p["id"] for p in listed] == ["alice", "bob"]

    snap = client.get("/snapshot").json()
    assert snap["mode"] == "live"
    assert snap["window"]["end"] == NOW.isoformat()
    (flow,) = snap["map"]["flows"]
    assert (flow["source"], flow["target"], flow["intensity"]) == ("alice", "bob", 30.0)

    history = client.get(
        "/snapshot",
        params={
            "mode": "history",
            "start": "2026-08-10T00:00:00Z",
            "end": "2026-08-10T11:15:00Z",
        },
    ).json()
    (clipped,) = history["map"]["flows"]
    assert clipped["intensity"] == 15.0

    echoed = client.put(
        "/plan",
        json={
            "activities": [
                {
                    "name": "standup",
                    "kind": "scheduled",
                    "participants": ["alice", "bob"],
                    "media": ["text-chat"],
                    "schedule": {
                        "recurrence": "daily",
                        "time": "11:00",
                        "timezone": "UTC",
                    },
                }
            ]
        },
    )
    assert echoed.status_code == 200
    assert echoed.json()["activities"][0]["schedule"]["time"] == "11:00"

    registered = client.put(
        "/soll-map",
        content="model Plan soll map\nstore Alice liquid\nstore Bob liquid\n"
        "flow Alice -- Bob liquid intensity 30.0\n",
    )
    assert registered.status_code == 200, registered.text
    assert registered.json() == {"stores": 2, "flows": 1}

    report = client.get(
        "/conformance",
        params={"start": "2026-08-10T00:00:00Z", "end": "2026-08-10T12:00:00Z"},
    ).json()
    assert report["deviations"] == []


def test_snapshot_bytes_are_identical_across_calls(client):
    put_participant(client, "alice")
    put_participant(client, "bob")
    client.post("/events", json=event_payload())
    first = client.get("/snapshot")
    second = client.get("/snapshot")
    assert first.headers["content-type"] == "application/json"
    assert first.content == second.content


def test_token_guard(tmp_path):
    state = ServerState(tmp_path / "data", now_fn=lambda: NOW)
    client = TestClient(create_app(state, token="geheim"))

    assert client.get("/health").status_code == 200
    answer = client.get("/participants")
    assert answer.status_code == 401
    assert answer.json()["detail"] == "missing or wrong token"
    assert (
        client.get("/participants", headers={"Authorization": "Bearer falsch"}).status_code
        == 401
    )
    good = client.get("/participants", headers={"Authorization": "Bearer geheim"})
    assert good.status_code == 200
    assert good.json() == {"participants": []}


def test_conflicting_event_is_409(client):
    put_participant(client, "alice")
    put_participant(client, "bob")
    assert client.post("/events", json=event_payload()).status_code == 200
    again = client.post("/events", json=event_payload())
    assert again.status_code == 200
    assert again.json() == {"id": "e1", "stored": False}
    clash = client.post(
        "/events", json=event_payload(end="2026-08-10T11:45:00Z")
    )
    assert clash.status_code == 409
    assert "e1" in clash.json()["detail"]


def test_bad_payloads_are_422(client):
    put_participant(client, "alice")

    unknown = client.post("/events", json=event_payload())
    assert unknown.status_code == 422
    assert "unknown participant 'bob'" in unknown.json()["detail"]

    backwards = client.post(
        "/events",
        json=event_payload(start="2026-08-10T11:30:00Z", end="2026-08-10T11:00:00Z"),
    )
    assert backwards.status_code == 422

    assert client.get("/snapshot", params={"mode": "gestern"}).status_code == 422
    assert client.get("/snapshot", params={"mode": "history"}).status_code == 422
    assert (
        client.get(
            "/snapshot",
            params={
                "mode": "history",
                "start": "2026-08-10T12:00:00Z",
                "end": "2026-08-10T11:00:00Z",
            },
        ).status_code
        == 422
    )

    mismatch = client.put("/participants/alice", json={"id": "bob"})
    assert mismatch.status_code == 422
    assert "does not match" in mismatch.json()["detail"]

    assert (
        client.put("/plan", json={"activities": [{"name": "x", "kind": "spontan"}]})
        .status_code
        == 422
    )

    broken_map = client.put("/soll-map", content="store {")
    assert broken_map.status_code == 422
    assert "does not parse" in broken_map.json()["detail"]

    wrong_kind = client.put("/soll-map", content="model Beobachtet ist map\n")
    assert wrong_kind.status_code == 422


def test_deliverer_translates_conflicts(monkeypatch):
    calls = []

    class Answer:
        def __init__(self, status_code):
            self.status_code = status_code
            self.text = "stored differently"

        def raise_for_status(self):
            if self.status_code >= 400:
                raise RuntimeError(f"status {self.status_code}")

    def fake_post(url, json=None, headers=None, timeout=None):
        calls.append((url, json, headers))
        return Answer(409 if json["id"] == "dupe" else 200)

    monkeypatch.setattr("httpx.post", fake_post)
    deliver = http_deliverer("http://localhost:9/events", token="geheim")
    deliver({"id": "fresh"})
    assert calls[0][2] == {"Authorization": "Bearer geheim"}
    with pytest.raises(ValueError, match="'dupe' clashes"):
        deliver({"id": "dupe"})
