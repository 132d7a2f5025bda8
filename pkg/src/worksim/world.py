"""Environment state and the single transition entry point.

All mutation of a running scenario flows through :func:`transition`. A
transition validates the tool call (via the gateway), executes it against a
*copy* of the state, advances the simulated clock by the tool's declared time
cost, fires every environment event that has come due, and returns the new
state together with the observation the agent sees.

Time is fully simulated at minute resolution; nothing here touches the wall
clock, the real filesystem, or the network.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from datetime import datetime, timedelta

from .errors import DecodeError
from .jsonio import canonical_bytes, canonical_dumps, canonical_loads, format_clock, parse_clock
from .npc import NPCState

STATE_VERSION = 1

EVENT_KINDS = ("meeting_start", "meeting_end", "task_release", "message_arrival", "deadline_passed")

# Reserved datastore table that collects SubmitResult payloads.
SUBMISSIONS_TABLE = "_submissions"


@dataclass
class Message:
    sender: str
    recipient: str
    content: str
    sent_at: datetime

    def to_dict(self) -> dict:
        return {
            "sender": self.sender,
            "recipient": self.recipient,
            "content": self.content,
            "sent_at": format_clock(self.sent_at),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Message":
        return cls(d["sender"], d["recipient"], d["content"], parse_clock(d["sent_at"]))


@dataclass
class Meeting:
    meeting_id: str
    title: str
    start: datetime
    end: datetime
    participants: list[str] = field(default_factory=list)
    location: str = ""

    def to_dict(self) -> dict:
        return {
            "meeting_id": self.meeting_id,
            "title": self.title,
            "start": format_clock(self.start),
            "end": format_clock(self.end),
            "participants": list(self.participants),
            "location": self.location,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Meeting":
        return cls(
            meeting_id=d["meeting_id"],
            title=d["title"],
            start=parse_clock(d["start"]),
            end=parse_clock(d["end"]),
            participants=list(d.get("participants", [])),
            location=d.get("location", ""),
        )


@dataclass
class EnvEvent:
    trigger_time: datetime
    kind: str
    payload: dict
    seq: int = 0  # insertion order; ties on trigger_time fire in this order

    def to_dict(self) -> dict:
        return {
            "trigger_time": format_clock(self.trigger_time),
            "kind": self.kind,
            "payload": self.payload,
            "seq": self.seq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnvEvent":
        return cls(parse_clock(d["trigger_time"]), d["kind"], d["payload"], d.get("seq", 0))


@dataclass
class Activity:
    kind: str = "idle"  # "idle" | "in_meeting" | "working"
    ref: str | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "ref": self.ref}

    @classmethod
    def from_dict(cls, d: dict) -> "Activity":
        return cls(d.get("kind", "idle"), d.get("ref"))


@dataclass
class AgentState:
    inbox: list[Message] = field(default_factory=list)
    current_activity: Activity = field(default_factory=Activity)
    notes: str = ""
    joined_meeting_at: datetime | None = None

    def to_dict(self) -> dict:
        return {
            "inbox": [m.to_dict() for m in self.inbox],
            "current_activity": self.current_activity.to_dict(),
            "notes": self.notes,
            "joined_meeting_at": format_clock(self.joined_meeting_at) if self.joined_meeting_at else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AgentState":
        joined = d.get("joined_meeting_at")
        return cls(
            inbox=[Message.from_dict(m) for m in d.get("inbox", [])],
            current_activity=Activity.from_dict(d.get("current_activity", {})),
            notes=d.get("notes", ""),
            joined_meeting_at=parse_clock(joined) if joined else None,
        )


@dataclass
class Action:
    tool_name: str
    arguments: dict
    issued_at: datetime | None = None

    def to_dict(self) -> dict:
        return {
            "tool_name": self.tool_name,
            "arguments": self.arguments,
            "issued_at": format_clock(self.issued_at) if self.issued_at else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Action":
        issued = d.get("issued_at")
        return cls(d["tool_name"], dict(d.get("arguments", {})), parse_clock(issued) if issued else None)


@dataclass
class Observation:
    """What the agent sees after a step (or at episode start)."""

    clock: datetime
    kind: str  # "initial" | "delta"
    tasks: list[dict] = field(default_factory=list)
    tools: list[dict] = field(default_factory=list)
    contacts: list[dict] = field(default_factory=list)
    result: dict | None = None
    messages: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    clues_revealed: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        doc = {"clock": format_clock(self.clock), "kind": self.kind}
        if self.tasks:
            doc["tasks"] = self.tasks
        if self.tools:
            doc["tools"] = self.tools
        if self.contacts:
            doc["contacts"] = self.contacts
        if self.result is not None:
            doc["result"] = self.result
        if self.messages:
            doc["messages"] = self.messages
        if self.events:
            doc["events"] = self.events
        if self.clues_revealed:
            doc["clues_revealed"] = self.clues_revealed
        return doc

    def to_json(self) -> str:
        return canonical_dumps(self.to_dict())


@dataclass
class WorldState:
    """The full simulated environment snapshot at one instant."""

    clock: datetime
    agent: AgentState = field(default_factory=AgentState)
    npcs: dict[str, NPCState] = field(default_factory=dict)
    files: dict[str, str] = field(default_factory=dict)
    datastore: dict[str, list[dict]] = field(default_factory=dict)
    calendar: list[Meeting] = field(default_factory=list)
    pending_events: list[EnvEvent] = field(default_factory=list)
    revealed_clues: set[str] = field(default_factory=set)
    message_log: list[Message] = field(default_factory=list)
    # Bookkeeping beyond the core snapshot: which tasks exist / are published,
    # events already fired, credited meeting minutes, and the custodian index
    # that maps file paths and data tables to the clue ids they hold.
    task_ids: list[str] = field(default_factory=list)
    released_tasks: set[str] = field(default_factory=set)
    fired_events: list[EnvEvent] = field(default_factory=list)
    meeting_minutes: dict[str, int] = field(default_factory=dict)
    clue_files: dict[str, list[str]] = field(default_factory=dict)
    clue_data: dict[str, list[str]] = field(default_factory=dict)
    event_seq: int = 0
    call_seq: int = 0

    def push_event(self, trigger_time: datetime, kind: str, payload: dict) -> None:
        event = EnvEvent(trigger_time, kind, payload, seq=self.event_seq)
        self.event_seq += 1
        self.pending_events.append(event)
        self.pending_events.sort(key=lambda e: (e.trigger_time, e.seq))

    def meeting(self, meeting_id: str) -> Meeting | None:
        for m in self.calendar:
            if m.meeting_id == meeting_id:
                return m
        return None

    def submissions(self, task_id: str | None = None) -> list[dict]:
        rows = self.datastore.get(SUBMISSIONS_TABLE, [])
        if task_id is None:
            return rows
        return [r for r in rows if r.get("task_id") == task_id]

    def to_dict(self) -> dict:
        return {
            "version": STATE_VERSION,
            "clock": format_clock(self.clock),
            "agent": self.agent.to_dict(),
            "npcs": {name: npc.to_dict() for name, npc in self.npcs.items()},
            "files": dict(self.files),
            "datastore": self.datastore,
            "calendar": [m.to_dict() for m in self.calendar],
            "pending_events": [e.to_dict() for e in self.pending_events],
            "revealed_clues": sorted(self.revealed_clues),
            "message_log": [m.to_dict() for m in self.message_log],
            "task_ids": list(self.task_ids),
            "released_tasks": sorted(self.released_tasks),
            "fired_events": [e.to_dict() for e in self.fired_events],
            "meeting_minutes": self.meeting_minutes,
            "clue_files": self.clue_files,
            "clue_data": self.clue_data,
            "event_seq": self.event_seq,
            "call_seq": self.call_seq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorldState":
        version = d.get("version")
        if version != STATE_VERSION:
            raise DecodeError(f"unsupported state version in field 'version': {version!r}")
        state = cls(clock=parse_clock(d["clock"]))
        state.agent = AgentState.from_dict(d["agent"])
        state.npcs = {name: NPCState.from_dict(npc) for name, npc in d["npcs"].items()}
        state.files = dict(d["files"])
        state.datastore = {t: [dict(r) for r in rows] for t, rows in d["datastore"].items()}
        state.calendar = [Meeting.from_dict(m) for m in d["calendar"]]
        state.pending_events = [EnvEvent.from_dict(e) for e in d["pending_events"]]
        state.revealed_clues = set(d["revealed_clues"])
        state.message_log = [Message.from_dict(m) for m in d["message_log"]]
        state.task_ids = list(d["task_ids"])
        state.released_tasks = set(d["released_tasks"])
        state.fired_events = [EnvEvent.from_dict(e) for e in d["fired_events"]]
        state.meeting_minutes = {k: int(v) for k, v in d["meeting_minutes"].items()}
        state.clue_files = {k: list(v) for k, v in d["clue_files"].items()}
        state.clue_data = {k: list(v) for k, v in d["clue_data"].items()}
        state.event_seq = int(d["event_seq"])
        state.call_seq = int(d.get("call_seq", 0))
        return state


def clone_state(state: WorldState) -> WorldState:
    return copy.deepcopy(state)


def _apply_event(state: WorldState, event: EnvEvent) -> None:
    payload = event.payload
    if event.kind == "meeting_end":
        activity = state.agent.current_activity
        if activity.kind == "in_meeting" and activity.ref == payload.get("meeting_id"):
            joined = state.agent.joined_meeting_at or event.trigger_time
            minutes = max(0, int((event.trigger_time - joined).total_seconds() // 60))
            mid = payload["meeting_id"]
            state.meeting_minutes[mid] = state.meeting_minutes.get(mid, 0) + minutes
            state.agent.current_activity = Activity("idle", None)
            state.agent.joined_meeting_at = None
    elif event.kind == "task_release":
        task_id = payload["task_id"]
        if task_id not in state.released_tasks:
            state.released_tasks.add(task_id)
            note = Message(
                sender=payload.get("announce_from", "Coordinator"),
                recipient="you",
                content=payload.get("announcement", f"New task assigned: {payload.get('description', task_id)}"),
                sent_at=event.trigger_time,
            )
            state.agent.inbox.append(note)
            state.message_log.append(note)
    elif event.kind == "message_arrival":
        message = Message.from_dict(payload["message"])
        state.agent.inbox.append(message)
        state.message_log.append(message)
    # meeting_start and deadline_passed only leave a record in fired_events.


def fire_due_events(state: WorldState) -> list[EnvEvent]:
    """Fire every pending event with trigger_time <= clock, in (time, seq) order."""
    fired = []
    while state.pending_events and state.pending_events[0].trigger_time <= state.clock:
        event = state.pending_events.pop(0)
        _apply_event(state, event)
        state.fired_events.append(event)
        fired.append(event)
    return fired


def advance_clock_inplace(state: WorldState, until: datetime) -> list[EnvEvent]:
    if until < state.clock:
        raise ValueError(f"cannot move the clock backwards: {format_clock(until)} < {format_clock(state.clock)}")
    state.clock = until
    return fire_due_events(state)


def advance_clock(state: WorldState, until: datetime) -> WorldState:
    """Pure variant: returns a new state with the clock at ``until``."""
    if until < state.clock:
        raise ValueError(f"cannot move the clock backwards: {format_clock(until)} < {format_clock(state.clock)}")
    new = clone_state(state)
    advance_clock_inplace(new, until)
    return new


def tick(state: WorldState, minutes: int) -> list[EnvEvent]:
    return advance_clock_inplace(state, state.clock + timedelta(minutes=minutes))


def transition(state: WorldState, action: Action):
    """The transition function: (state, action) -> (successor state, observation).

    The caller's state is never mutated. Unknown tools and argument errors
    come back as error observations; the clock still advances by the
    attempted call's time cost.
    """
    from .tools import get_gateway

    new = clone_state(state)
    inbox_before = len(new.agent.inbox)
    fired_before = len(new.fired_events)
    clues_before = set(new.revealed_clues)
    released_before = set(new.released_tasks)

    result = get_gateway().run(action, new)

    fired = new.fired_events[fired_before:]
    released = [
        _released_task_view(e)
        for e in fired
        if e.kind == "task_release" and e.payload["task_id"] not in released_before
    ]
    obs = Observation(
        clock=new.clock,
        kind="delta",
        result={"status": result.status, "payload": result.payload},
        messages=[m.to_dict() for m in new.agent.inbox[inbox_before:]],
        events=[{"kind": e.kind, "time": format_clock(e.trigger_time), **_public_event_view(e)} for e in fired],
        clues_revealed=sorted(new.revealed_clues - clues_before),
        tasks=released,
    )
    return new, obs


def _public_event_view(event: EnvEvent) -> dict:
    view = {}
    for key in ("meeting_id", "task_id", "title"):
        if key in event.payload:
            view[key] = event.payload[key]
    return view


def _released_task_view(event: EnvEvent) -> dict:
    p = event.payload
    return {
        "task_id": p["task_id"],
        "description": p.get("description", ""),
        "deadline": p.get("deadline"),
        "priority": p.get("priority", "normal"),
    }


def initial_observation(scenario) -> Observation:
    """Everything the agent knows at episode start. Hidden clues are absent
    by construction: this is built from the scenario's public view only."""
    from .tools import get_gateway

    released = [t.public_view() for t in scenario.tasks if t.reveal.kind == "at_start"]
    contacts = sorted(
        ({"name": c.profile.name, "role": c.profile.role, "department": c.profile.department}
         for c in scenario.npc_cast),
        key=lambda c: c["name"],
    )
    return Observation(
        clock=scenario.workday[0],
        kind="initial",
        tasks=released,
        tools=get_gateway().catalog_public(),
        contacts=contacts,
    )


def serialize_state(state: WorldState) -> bytes:
    """Canonical bytes: same state always gives identical bytes, on any host."""
    return canonical_bytes(state.to_dict())


def deserialize_state(data: bytes) -> WorldState:
    try:
        doc = canonical_loads(data)
    except Exception as exc:
        raise DecodeError(f"state document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DecodeError("state document must be a JSON object")
    try:
        return WorldState.from_dict(doc)
    except DecodeError:
        raise
    except KeyError as exc:
        raise DecodeError(f"state document is missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise DecodeError(f"state document has a malformed field: {exc}") from exc
