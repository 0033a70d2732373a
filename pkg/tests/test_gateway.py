"""Gateway API: registration, submission, polling, information hiding."""

import pytest
from fastapi.testclient import TestClient

from mdp.gateway import SessionDriver, create_app
from mdp.harness.scenario import INTERACTIVE, PlayerSpec, simple_scenario
from mdp.transport.sim import Topology


def interactive_scenario(slots=1, scripted=("8/1", "5/1"), seed=11):
    s = simple_scenario("live", seed, "vickrey", {}, list(scripted),
                        registries=2, max_ticks=10**6,
                        scheme_deadline_ticks=10**5, timeout_ticks=2000)
    hosts = list(s.topology.hosts)
    edges = list(s.topology.edges)
    for k in range(slots):
        hosts.append("h-human%d" % k)
        edges.append(("h-human%d" % k, "core0", 1))
        s.players.append(PlayerSpec("seat-%d" % k, 0, "h-human%d" % k, 1,
                                    INTERACTIVE))
    s.topology = Topology(hosts=tuple(hosts), edges=tuple(edges))
    return s


@pytest.fixture
def session():
    driver = SessionDriver(interactive_scenario())
    client = TestClient(create_app(driver))
    return driver, client


def test_full_round_trip(session):
    driver, client = session
    resp = client.post("/sessions/live/players", json={"credentials": "ann"})
    assert resp.status_code == 201
    token = resp.json()["token"]
    assert resp.json()["state"] == "registered"
    driver.pump(600)
    poll = client.get("/sessions/live/players/%s" % token).json()
    assert poll["state"] == "awaiting-type"
    sub = client.post("/sessions/live/players/%s/type" % token,
                      json={"type_value": "10/1"})
    assert sub.status_code == 200
    driver.pump(4000)
    poll = client.get("/sessions/live/players/%s" % token).json()
    assert poll["state"] == "done"
    assert poll["outcome"]["own_tax"] == "-8/1"
    assert poll["outcome"]["roster_size"] == 3
    status = client.get("/sessions/live/status").json()
    assert status["phase"] == "complete"


def test_double_submission_rejected_server_side(session):
    driver, client = session
    token = client.post("/sessions/live/players",
                        json={"credentials": "ann"}).json()["token"]
    driver.pump(600)
    first = client.post("/sessions/live/players/%s/type" % token,
                        json={"type_value": "10/1"})
    assert first.status_code == 200
    second = client.post("/sessions/live/players/%s/type" % token,
                         json={"type_value": "11/1"})
    assert second.status_code == 409


def test_submission_validates_domain(session):
    driver, client = session
    token = client.post("/sessions/live/players",
                        json={"credentials": "ann"}).json()["token"]
    driver.pump(600)
    bad = client.post("/sessions/live/players/%s/type" % token,
                      json={"type_value": "-3/1"})
    assert bad.status_code == 400
    assert "invalid type value" in bad.json()["detail"]


def test_submission_before_round_opens_is_409(session):
    driver, client = session
    token = client.post("/sessions/live/players",
                        json={"credentials": "ann"}).json()["token"]
    # no pumping: the registration barrier has not announced yet
    early = client.post("/sessions/live/players/%s/type" % token,
                        json={"type_value": "10/1"})
    assert early.status_code == 409


def test_register_after_phase_closed(session):
    driver, client = session
    client.post("/sessions/live/players", json={"credentials": "ann"})
    driver.pump(3000)  # registration barrier long announced
    late = client.post("/sessions/live/players", json={"credentials": "bob"})
    assert late.status_code == 409


def test_unknown_session_and_ticket_are_404(session):
    _, client = session
    assert client.get("/sessions/other/status").status_code == 404
    assert client.get("/sessions/live/players/zzz").status_code == 404
    assert client.post("/sessions/live/players/zzz/type",
                       json={"type_value": "1/1"}).status_code == 404


def test_poll_never_leaks_other_players(session):
    driver, client = session
    token = client.post("/sessions/live/players",
                        json={"credentials": "ann"}).json()["token"]
    driver.pump(600)
    client.post("/sessions/live/players/%s/type" % token,
                json={"type_value": "10/1"})
    driver.pump(4000)
    body = client.get("/sessions/live/players/%s" % token).json()
    # response schema audit: only the public decision, the caller's own tax
    # and own transfer lines; never the full tax vector or any type value
    assert set(body) == {"state", "phase", "outcome", "reason"}
    assert set(body["outcome"]) == {"decision", "own_tax", "own_transfers",
                                    "roster_size"}
    own = body["outcome"]["own_transfers"]
    assert len(own) == 1  # winner pays the collector once
    caller_index = own[0][0]
    assert all(caller_index in (t[0], t[1]) for t in own)


def test_gateway_restart_does_not_change_outcome(session):
    driver, client = session
    token = client.post("/sessions/live/players",
                        json={"credentials": "ann"}).json()["token"]
    driver.pump(600)
    client.post("/sessions/live/players/%s/type" % token,
                json={"type_value": "10/1"})
    # kill the HTTP layer mid-round and stand up a fresh one on the same
    # session driver: the player processes never notice
    client2 = TestClient(create_app(driver))
    driver.pump(4000)
    poll = client2.get("/sessions/live/players/%s" % token).json()
    assert poll["state"] == "done"
    assert poll["outcome"]["own_tax"] == "-8/1"


def test_mixed_interactive_and_scripted_roster(session=None):
    driver = SessionDriver(interactive_scenario(slots=3, scripted=("8/1", "5/1")))
    client = TestClient(create_app(driver))
    tokens = []
    for name in ("ann", "bob", "cid"):
        resp = client.post("/sessions/live/players", json={"credentials": name})
        assert resp.status_code == 201
        tokens.append(resp.json()["token"])
    driver.pump(800)
    for i, token in enumerate(tokens):
        assert client.post("/sessions/live/players/%s/type" % token,
                           json={"type_value": "%d/1" % (9 + i)}).status_code == 200
    driver.pump(6000)
    polls = [client.get("/sessions/live/players/%s" % t).json() for t in tokens]
    assert all(p["state"] == "done" for p in polls)
    assert all(p["outcome"]["roster_size"] == 5 for p in polls)
    # cid bid 11: wins and pays the second price 10
    assert polls[2]["outcome"]["own_tax"] == "-10/1"
    assert polls[0]["outcome"]["own_tax"] == "0/1"
