"""SDK against a live server; the equivalence check replays through the
primary harness and compares report bytes."""

import socket
import threading
import time

import pytest
import uvicorn

from worksim.compose import compose
from worksim.harness import run_episode
from worksim.agents import OracleAgent
from worksim.jsonio import canonical_bytes
from worksim.server import create_app
from worksim.session import SessionService, action_log, replay
from worksim.tasks import get_rule

from worksim_client import ConnectError, ServerError, connect


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def live_server():
    scenario = compose(
        [get_rule("transaction_auditing"), get_rule("contact_lookup")],
        814,
        dependency_probability=0.0,
        at_time_probability=0.0,
    )
    service = SessionService()
    service.add_scenario(scenario)
    port = _free_port()
    config = uvicorn.Config(create_app(service), host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    import httpx

    while time.time() < deadline:
        try:
            httpx.get(f"http://127.0.0.1:{port}/health", timeout=1.0)
            break
        except Exception:
            time.sleep(0.05)
    else:
        raise RuntimeError("server did not come up")
    yield f"http://127.0.0.1:{port}", scenario
    server.should_exit = True
    thread.join(timeout=5)


def test_connect_dead_endpoint_raises():
    with pytest.raises(ConnectError):
        connect("http://127.0.0.1:9")


def test_connect_and_catalog(live_server):
    endpoint, _scenario = live_server
    client = connect(endpoint)
    assert any(t["name"] == "SubmitResult" for t in client.tools())
    assert len(client.rules()) >= 10


def test_scenario_view_is_agent_facing(live_server):
    endpoint, scenario = live_server
    client = connect(endpoint)
    doc = client.scenario(scenario.scenario_id)
    assert "hidden" not in doc
    text = str(doc)
    for task in scenario.tasks:
        for clue in task.clues:
            assert clue.content not in text


def test_echo_callback_finalizes_with_low_score(live_server):
    endpoint, scenario = live_server
    client = connect(endpoint)
    handle = client.create(scenario_id=scenario.scenario_id)
    sent = []

    def immediate_submit(observation):
        if sent:
            return None
        sent.append(True)
        return [
            {"tool": "SubmitResult", "arguments": {"task_id": t["task_id"], "content": "done-ish"}}
            for t in handle.initial_observation.get("tasks", [])
        ]

    report = handle.run(immediate_submit, budget=3)
    assert report["score"]["value"] < 0.5
    assert handle.report() == report  # persisted


def test_hint_lifecycle_errors_are_typed(live_server):
    endpoint, scenario = live_server
    client = connect(endpoint)
    handle = client.create(scenario_id=scenario.scenario_id)
    handle.hint(2, "skip ahead")
    with pytest.raises(ServerError) as err:
        handle.hint(1, "regressing")
    assert err.value.status_code == 409
    handle.finalize()
    with pytest.raises(ServerError):
        handle.act("TakeNote", {"text": "late"})
    with pytest.raises(ServerError):
        client.create(scenario_id="scn-missing")


def test_sdk_episode_replays_byte_equal_through_primary(live_server):
    endpoint, scenario = live_server
    # the oracle's action log, produced by the primary harness
    oracle_run = run_episode(OracleAgent(), scenario)
    log = action_log(oracle_run.trajectory)

    client = connect(endpoint)
    handle = client.create(scenario_id=scenario.scenario_id)
    for entry in log:
        handle.act(entry["tool_name"], entry["arguments"], step=entry["step"])
    sdk_report = handle.finalize()

    primary_report = replay(scenario, log)
    assert canonical_bytes(sdk_report) == canonical_bytes(primary_report)
    assert canonical_bytes(sdk_report) == canonical_bytes(oracle_run.report)
    print("[PASS] SDK equivalence: SDK-driven episode report byte-equal to primary replay")


def test_events_pagination(live_server):
    endpoint, scenario = live_server
    client = connect(endpoint)
    handle = client.create(scenario_id=scenario.scenario_id)
    handle.act("TakeNote", {"text": "one"})
    handle.act("TakeNote", {"text": "two"})
    first = handle.events(since=0)
    assert first["events"][0]["kind"] == "created"
    tail = handle.events(since=first["next"])
    assert tail["events"] == []
    handle.finalize()
    final = handle.events(since=first["next"])
    assert [e["kind"] for e in final["events"]][-1] == "finalized"
