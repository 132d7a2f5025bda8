"""Session lifecycle: the in-process engine behind the wire protocol.

One session = one episode of one scenario. All acts on a session are
serialized under its lock; distinct sessions are independent. Every step,
result, fired event, hint, and the final report goes onto the session's
ordered event log, which late subscribers can replay from the start.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction

from .compose import Benchmark, Scenario, initial_state
from .errors import ProtocolError
from .jsonio import format_clock
from .verify import display_score, evaluate, feedback, score
from .world import Action, initial_observation, transition

REPORT_VERSION = 1
MAX_HINT_TIER = 3


@dataclass
class Hint:
    tier: int
    text: str
    injected_at: datetime

    def to_dict(self) -> dict:
        return {"tier": self.tier, "text": self.text, "injected_at": format_clock(self.injected_at)}


@dataclass
class Session:
    session_id: str
    scenario: Scenario
    state: object
    trajectory: list[dict] = field(default_factory=list)
    hints: list[Hint] = field(default_factory=list)
    phase: str = "open"  # "open" | "finalized"
    events: list[dict] = field(default_factory=list)
    steps_seen: list[int] = field(default_factory=list)
    tool_calls: int = 0
    report: dict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    event_cond: threading.Condition = field(default_factory=threading.Condition, repr=False)

    def emit(self, kind: str, data: dict) -> None:
        with self.event_cond:
            self.events.append({"seq": len(self.events), "kind": kind, "data": data})
            self.event_cond.notify_all()


def build_report(scenario: Scenario, state, trajectory: list[dict], counters: dict) -> dict:
    """Assemble the canonical episode report (pure; used by finalize and replay)."""
    judged = evaluate(scenario, state, trajectory)
    by_task: dict[str, list] = {}
    for cp in judged:
        by_task.setdefault(cp.task_id, []).append(cp)
    tasks = []
    for task in scenario.tasks:
        cps = by_task.get(task.task_id, [])
        completed = sum(1 for cp in cps if cp.status == "completed")
        tasks.append(
            {
                "task_id": task.task_id,
                "rule_id": task.rule_id,
                "completed": completed == len(cps),
                "ratio": f"{completed}/{len(cps)}",
                "checkpoints": [
                    {
                        "checkpoint_id": cp.checkpoint_id,
                        "kind": cp.kind,
                        "description": cp.description,
                        "status": cp.status,
                    }
                    for cp in cps
                ],
            }
        )
    total = score(judged)
    bundle = feedback(judged, scenario.scenario_id)
    return {
        "version": REPORT_VERSION,
        "scenario_id": scenario.scenario_id,
        "tasks": tasks,
        "score": {"exact": str(total), "value": float(total), "display": display_score(total)},
        "counters": dict(counters),
        "feedback": [{"checkpoint": d, "feedback": f} for d, f in bundle.missed],
        "final_clock": format_clock(state.clock),
    }


class SessionService:
    """Create, drive, and finalize sessions over registered scenarios."""

    def __init__(self):
        self.scenarios: dict[str, Scenario] = {}
        self.benchmarks: dict[str, Benchmark] = {}
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._counter = 0

    # -- registry ---------------------------------------------------------

    def add_scenario(self, scenario: Scenario) -> None:
        self.scenarios[scenario.scenario_id] = scenario

    def add_benchmark(self, benchmark: Benchmark) -> None:
        self.benchmarks[benchmark.benchmark_id] = benchmark
        for scenario in benchmark.scenarios:
            self.add_scenario(scenario)

    def get_session(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise ProtocolError(f"unknown session '{session_id}'")
        return session

    # -- lifecycle --------------------------------------------------------

    def create_session(
        self,
        scenario_id: str | None = None,
        benchmark_id: str | None = None,
        index: int | None = None,
    ) -> tuple[str, dict]:
        if scenario_id is None:
            if benchmark_id is None or index is None:
                raise ProtocolError("create_session needs scenario_id or (benchmark_id, index)")
            benchmark = self.benchmarks.get(benchmark_id)
            if benchmark is None:
                raise ProtocolError(f"unknown benchmark '{benchmark_id}'")
            if not 0 <= index < len(benchmark.scenarios):
                raise ProtocolError(f"benchmark index {index} out of range")
            scenario = benchmark.scenarios[index]
        else:
            scenario = self.scenarios.get(scenario_id)
            if scenario is None:
                raise ProtocolError(f"unknown scenario '{scenario_id}'")
        with self._lock:
            self._counter += 1
            session_id = f"sess-{self._counter:06d}"
        session = Session(session_id=session_id, scenario=scenario, state=initial_state(scenario))
        self._sessions[session_id] = session
        obs = initial_observation(scenario).to_dict()
        session.emit("created", {"scenario_id": scenario.scenario_id, "observation": obs})
        return session_id, obs

    def observe(self, session_id: str) -> dict:
        session = self.get_session(session_id)
        with session.lock:
            state = session.state
            released = [
                t.public_view() for t in session.scenario.tasks if t.task_id in state.released_tasks
            ]
            return {
                "clock": format_clock(state.clock),
                "phase": session.phase,
                "tasks": released,
                "inbox_size": len(state.agent.inbox),
                "hints": [h.to_dict() for h in session.hints],
            }

    def act(self, session_id: str, tool_name: str, arguments: dict, step: int | None = None) -> dict:
        session = self.get_session(session_id)
        with session.lock:
            if session.phase != "open":
                raise ProtocolError(f"session '{session_id}' is finalized; no more actions")
            if step is None:
                step = (session.steps_seen[-1] + 1) if session.steps_seen else 1
            if not session.steps_seen or step != session.steps_seen[-1]:
                session.steps_seen.append(step)
            session.tool_calls += 1

            action = Action(tool_name=tool_name, arguments=dict(arguments))
            issued_at = session.state.clock
            new_state, obs = transition(session.state, action)
            session.state = new_state
            result = obs.result or {}
            entry = {
                "type": "action",
                "step": step,
                "clock": format_clock(issued_at),
                "tool_name": tool_name,
                "arguments": dict(arguments),
                "status": result.get("status", "error"),
                "payload": result.get("payload"),
            }
            session.trajectory.append(entry)
            session.emit("step", {"step": step, "tool_name": tool_name, "arguments": dict(arguments)})
            for fired in obs.events:
                session.emit("env_event", fired)
            session.emit(
                "tool_result",
                {"step": step, "status": entry["status"], "payload": entry["payload"], "observation": obs.to_dict()},
            )
            return {"result": {"status": entry["status"], "payload": entry["payload"]}, "observation": obs.to_dict()}

    def note_step(self, session_id: str, step: int) -> None:
        """Record a model turn that produced no executable call. Counts toward
        the step counter; tool-call counters are untouched."""
        session = self.get_session(session_id)
        with session.lock:
            if session.phase != "open":
                raise ProtocolError(f"session '{session_id}' is finalized")
            if not session.steps_seen or step != session.steps_seen[-1]:
                session.steps_seen.append(step)
            session.trajectory.append({"type": "thought", "step": step})
            session.emit("step", {"step": step, "tool_name": None, "arguments": {}})

    def inject_hint(self, session_id: str, tier: int, text: str) -> dict:
        session = self.get_session(session_id)
        with session.lock:
            if session.phase != "open":
                raise ProtocolError(f"session '{session_id}' is finalized; no more hints")
            if not 0 <= tier <= MAX_HINT_TIER:
                raise ProtocolError(f"hint tier must be 0..{MAX_HINT_TIER}, got {tier}")
            if session.hints and tier < session.hints[-1].tier:
                raise ProtocolError(
                    f"hint tiers must be non-decreasing (last {session.hints[-1].tier}, got {tier})"
                )
            state = session.state
            hint = Hint(tier=tier, text=text, injected_at=state.clock)
            session.hints.append(hint)
            message = {
                "sender": "Mentor",
                "recipient": "you",
                "content": text,
                "sent_at": format_clock(state.clock),
            }
            # Enqueued at the current clock: the next transition delivers it,
            # so the hint shows up in the agent's next observation.
            state.push_event(state.clock, "message_arrival", {"message": message})
            session.trajectory.append(
                {"type": "guidance", "tier": tier, "text": text, "clock": format_clock(state.clock)}
            )
            session.emit("hint", hint.to_dict())
            return {"ok": True, "tier": tier}

    def finalize(self, session_id: str) -> dict:
        session = self.get_session(session_id)
        with session.lock:
            if session.phase == "finalized":
                return session.report
            counters = {"steps": len(session.steps_seen), "tool_calls": session.tool_calls}
            if session.state.call_seq != session.tool_calls:
                raise ProtocolError(
                    "counter mismatch at finalize: "
                    f"environment executed {session.state.call_seq} calls, trajectory has {session.tool_calls}"
                )
            report = build_report(session.scenario, session.state, session.trajectory, counters)
            session.report = report
            session.phase = "finalized"
            for task in report["tasks"]:
                for cp in task["checkpoints"]:
                    session.emit("checkpoint_update", cp)
            session.emit("finalized", {"report": report})
            return report

    def events(self, session_id: str, since: int = 0) -> dict:
        session = self.get_session(session_id)
        with session.event_cond:
            tail = [e for e in session.events if e["seq"] >= since]
            return {"events": tail, "next": len(session.events)}

    def wait_events(self, session_id: str, since: int, timeout: float = 10.0) -> dict:
        """Blocking variant used by the streaming endpoint."""
        session = self.get_session(session_id)
        with session.event_cond:
            if len(session.events) <= since:
                session.event_cond.wait(timeout)
            tail = [e for e in session.events if e["seq"] >= since]
            return {"events": tail, "next": len(session.events)}


def action_log(trajectory: list[dict]) -> list[dict]:
    """The replayable action sequence of a trajectory (guidance excluded)."""
    return [
        {"step": e["step"], "tool_name": e["tool_name"], "arguments": e["arguments"]}
        for e in trajectory
        if e.get("type") == "action"
    ]


def replay(scenario: Scenario, log: list[dict]) -> dict:
    """Replay a logged action sequence against a fresh copy of the scenario;
    returns the episode report (byte-identical to the original run's)."""
    service = SessionService()
    service.add_scenario(scenario)
    session_id, _obs = service.create_session(scenario.scenario_id)
    for entry in log:
        service.act(session_id, entry["tool_name"], entry["arguments"], step=entry.get("step"))
    return service.finalize(session_id)


def scenario_score(report: dict) -> Fraction:
    return Fraction(report["score"]["exact"])
