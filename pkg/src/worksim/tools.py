"""Tool catalog, call validation, and execution against the world state.

Every tool acts only on simulated state. No call, however malformed, raises:
failures come back as error results whose payload starts with "[Error]".
Several error strings are frozen because downstream log tooling matches on
them; do not reword without versioning the catalog.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime

from .jsonio import canonical_dumps, format_clock, parse_clock
from .npc import respond
from .world import (
    SUBMISSIONS_TABLE,
    Action,
    Activity,
    Meeting,
    Message,
    WorldState,
    advance_clock_inplace,
    tick,
)

CATALOG_VERSION = 1
DEFAULT_TIME_COST = 1  # simulated minutes

WEBSITES_TABLE = "_websites"

# Frozen error formats (matched verbatim by log consumers).
ERR_UNEXPECTED_KWARG = (
    "[Error] The following error occurred when you called the tool {tool}: "
    "{tool}.__call__() got an unexpected keyword argument '{name}'."
)
ERR_MISSING_ARG = (
    "[Error] The following error occurred when you called the tool {tool}: "
    "{tool}.__call__() missing a required argument: '{name}'."
)
ERR_UNKNOWN_RECEIVER = "[Error] Could not found receiver '{receiver}', Please ensure that the contact exists."


@dataclass
class ToolParam:
    name: str
    kind: str  # "string" | "list" | "any"
    required: bool = True
    description: str = ""


@dataclass
class ToolSpec:
    name: str
    params: list[ToolParam]
    description: str
    time_cost: int = DEFAULT_TIME_COST

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "time_cost": self.time_cost,
            "params": [
                {"name": p.name, "kind": p.kind, "required": p.required, "description": p.description}
                for p in self.params
            ],
        }


@dataclass
class ToolResult:
    call_id: str
    status: str  # "ok" | "error"
    payload: object  # str or JSON-serializable dict
    clock_after: datetime

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return {
            "call_id": self.call_id,
            "status": self.status,
            "payload": self.payload,
            "clock_after": format_clock(self.clock_after),
        }


def normalize_path(path: str) -> str:
    """Strip the cloud-disk prefix ('CloudDisk:' or 'CloudDisk://') and slashes."""
    text = str(path).strip()
    lowered = text.lower()
    for prefix in ("clouddisk://", "clouddisk:"):
        if lowered.startswith(prefix):
            text = text[len(prefix):]
            break
    return text.strip("/")


def _reveal_file_clues(state: WorldState, path: str) -> None:
    for clue_id in state.clue_files.get(path, []):
        state.revealed_clues.add(clue_id)


def _reveal_data_clues(state: WorldState, key: str) -> None:
    for clue_id in state.clue_data.get(key, []):
        state.revealed_clues.add(clue_id)


class ToolGateway:
    """Declares the catalog and routes validated calls to their handlers."""

    def __init__(self):
        self._specs: dict[str, ToolSpec] = {}
        self._handlers: dict[str, callable] = {}
        self._register_all()

    # -- catalog ---------------------------------------------------------

    def _add(self, spec: ToolSpec, handler) -> None:
        self._specs[spec.name] = spec
        self._handlers[spec.name] = handler

    def catalog(self) -> list[ToolSpec]:
        return list(self._specs.values())

    def catalog_public(self) -> list[dict]:
        return [spec.to_dict() for spec in self._specs.values()]

    def catalog_json(self) -> str:
        return canonical_dumps({"version": CATALOG_VERSION, "tools": self.catalog_public()})

    def spec(self, name: str) -> ToolSpec | None:
        return self._specs.get(name)

    # -- validation ------------------------------------------------------

    def validate(self, action: Action) -> str | None:
        """None when the call is well-formed, otherwise the error message."""
        spec = self._specs.get(action.tool_name)
        if spec is None:
            names = ", ".join(self._specs)
            return f"[Error] Unknown tool '{action.tool_name}'. Valid tools: {names}."
        known = {p.name: p for p in spec.params}
        for arg in action.arguments:
            if arg not in known:
                return ERR_UNEXPECTED_KWARG.format(tool=spec.name, name=arg)
        for p in spec.params:
            if p.required and p.name not in action.arguments:
                return ERR_MISSING_ARG.format(tool=spec.name, name=p.name)
            if p.name in action.arguments:
                value = action.arguments[p.name]
                if p.kind == "string" and not isinstance(value, str):
                    if isinstance(value, (int, float)):
                        action.arguments[p.name] = str(value)
                    else:
                        return (
                            f"[Error] Invalid value for argument '{p.name}' of {spec.name}: "
                            f"expected a string."
                        )
                if p.kind == "list" and not isinstance(value, list):
                    return f"[Error] Invalid value for argument '{p.name}' of {spec.name}: expected a list."
        return None

    # -- execution -------------------------------------------------------

    def run(self, action: Action, state: WorldState) -> ToolResult:
        """Validate and execute against ``state`` (mutated in place).

        The clock always advances by the attempted call's time cost, even for
        malformed calls, and due events fire before the result is returned.
        """
        call_id = f"call-{state.call_seq:04d}"
        state.call_seq += 1
        action.issued_at = state.clock

        error = self.validate(action)
        if error is not None:
            spec = self._specs.get(action.tool_name)
            tick(state, spec.time_cost if spec else DEFAULT_TIME_COST)
            return ToolResult(call_id, "error", error, state.clock)

        spec = self._specs[action.tool_name]
        payload, error, clock_handled = self._handlers[action.tool_name](state, action.arguments)
        if not clock_handled:
            tick(state, spec.time_cost)
        if error is not None:
            return ToolResult(call_id, "error", error, state.clock)
        return ToolResult(call_id, "ok", payload, state.clock)

    # -- handlers --------------------------------------------------------
    # Each returns (payload, error, clock_handled). ``clock_handled`` is True
    # only for WaitUntil, which moves the clock itself.

    def _register_all(self) -> None:
        self._add(
            ToolSpec(
                "OpenFolderInCloudDisk",
                [ToolParam("path", "string", required=False, description="Folder path; empty for the root")],
                "List the files and sub-folders inside a cloud-disk folder.",
            ),
            self._open_folder,
        )
        self._add(
            ToolSpec(
                "ReadFile",
                [ToolParam("path", "string", description="Full path of the file to read")],
                "Read a file from the cloud disk.",
            ),
            self._read_file,
        )
        self._add(
            ToolSpec(
                "WriteFile",
                [
                    ToolParam("path", "string", description="Destination path"),
                    ToolParam("content", "string", description="Text content to store"),
                ],
                "Create or overwrite a file on the cloud disk.",
            ),
            self._write_file,
        )
        self._add(
            ToolSpec(
                "SendMessage",
                [
                    ToolParam("receiver", "string", description="Exact contact name"),
                    ToolParam("message", "string", description="Message body"),
                ],
                "Send a one-way message to a contact.",
            ),
            self._send_message,
        )
        self._add(
            ToolSpec("ListContacts", [], "List every contact with their role and department."),
            self._list_contacts,
        )
        self._add(
            ToolSpec(
                "AskNPC",
                [
                    ToolParam("npc", "string", description="Exact contact name"),
                    ToolParam("message", "string", description="Your question"),
                ],
                "Ask a colleague a question and get their reply.",
            ),
            self._ask_npc,
        )
        self._add(
            ToolSpec("CheckCalendar", [], "Show today's meetings."),
            self._check_calendar,
        )
        self._add(
            ToolSpec(
                "ScheduleMeeting",
                [
                    ToolParam("title", "string"),
                    ToolParam("start", "string", description="YYYY-MM-DD HH:MM"),
                    ToolParam("end", "string", description="YYYY-MM-DD HH:MM"),
                    ToolParam("participants", "list", description="Contact names"),
                ],
                "Put a new meeting on the calendar.",
            ),
            self._schedule_meeting,
        )
        self._add(
            ToolSpec(
                "AttendMeeting",
                [ToolParam("meeting_id", "string")],
                "Join an ongoing meeting from the calendar.",
            ),
            self._attend_meeting,
        )
        self._add(
            ToolSpec("LeaveMeeting", [], "Leave the meeting you are currently in."),
            self._leave_meeting,
        )
        self._add(
            ToolSpec(
                "QueryDatabase",
                [
                    ToolParam("table", "string", required=False, description="Table name; empty lists tables"),
                    ToolParam("key", "string", required=False, description="Optional filter value"),
                ],
                "Query a table in the company database.",
            ),
            self._query_database,
        )
        self._add(
            ToolSpec(
                "BrowseWebsite",
                [ToolParam("url", "string")],
                "Open a website and read its current content.",
            ),
            self._browse_website,
        )
        self._add(
            ToolSpec(
                "WaitUntil",
                [ToolParam("time", "string", description="YYYY-MM-DD HH:MM or HH:MM (today)")],
                "Do nothing until the given time.",
                time_cost=0,
            ),
            self._wait_until,
        )
        self._add(
            ToolSpec(
                "SubmitResult",
                [
                    ToolParam("task_id", "string"),
                    ToolParam("content", "any", description="Your answer: text or a JSON object"),
                ],
                "Submit your final result for a task. Resubmitting replaces the earlier answer.",
            ),
            self._submit_result,
        )
        self._add(
            ToolSpec(
                "TakeNote",
                [ToolParam("text", "string")],
                "Append a private note to your scratchpad.",
            ),
            self._take_note,
        )

    def _open_folder(self, state: WorldState, args: dict):
        folder = normalize_path(args.get("path", ""))
        prefix = folder + "/" if folder else ""
        entries = set()
        for path in state.files:
            if not path.startswith(prefix):
                continue
            rest = path[len(prefix):]
            if not rest:
                continue
            head = rest.split("/", 1)
            entries.add(head[0] + "/" if len(head) > 1 else head[0])
        if not entries and folder:
            return None, f"[Error] Folder not found: '{args.get('path', '')}'.", False
        return {"path": folder or "/", "entries": sorted(entries)}, None, False

    def _read_file(self, state: WorldState, args: dict):
        path = normalize_path(args["path"])
        if path not in state.files:
            return None, f"[Error] File not found: '{args['path']}'.", False
        _reveal_file_clues(state, path)
        return {"path": path, "content": state.files[path]}, None, False

    def _write_file(self, state: WorldState, args: dict):
        path = normalize_path(args["path"])
        if not path:
            return None, "[Error] Cannot write to an empty path.", False
        state.files[path] = args["content"]
        return f"Saved '{path}'.", None, False

    def _send_message(self, state: WorldState, args: dict):
        receiver = args["receiver"]
        if receiver not in state.npcs and receiver != "Mentor":
            return None, ERR_UNKNOWN_RECEIVER.format(receiver=receiver), False
        message = Message(sender="you", recipient=receiver, content=args["message"], sent_at=state.clock)
        state.message_log.append(message)
        return f"Message sent to {receiver}.", None, False

    def _list_contacts(self, state: WorldState, args: dict):
        contacts = sorted(
            (npc.profile.to_dict() for npc in state.npcs.values()),
            key=lambda c: c["name"],
        )
        return {"contacts": contacts}, None, False

    def _ask_npc(self, state: WorldState, args: dict):
        name = args["npc"]
        npc = state.npcs.get(name)
        if npc is None:
            return None, f"[Error] Unknown contact '{name}'. Use ListContacts to see who is available.", False
        reply, _released = respond(npc, args["message"], state=state, agent_name="you")
        state.message_log.append(Message(sender=name, recipient="you", content=reply, sent_at=state.clock))
        return {"npc": name, "reply": reply}, None, False

    def _check_calendar(self, state: WorldState, args: dict):
        meetings = sorted(state.calendar, key=lambda m: (m.start, m.meeting_id))
        return {"meetings": [m.to_dict() for m in meetings]}, None, False

    def _schedule_meeting(self, state: WorldState, args: dict):
        try:
            start = parse_clock(args["start"])
            end = parse_clock(args["end"])
        except ValueError as exc:
            return None, f"[Error] {exc}", False
        if end <= start:
            return None, "[Error] Meeting end must be after its start.", False
        for person in args["participants"]:
            if person not in state.npcs:
                return None, ERR_UNKNOWN_RECEIVER.format(receiver=person), False
        meeting = Meeting(
            meeting_id=f"sched-{sum(1 for m in state.calendar if m.meeting_id.startswith('sched-')) + 1}",
            title=args["title"],
            start=start,
            end=end,
            participants=list(args["participants"]),
        )
        state.calendar.append(meeting)
        state.push_event(start, "meeting_start", {"meeting_id": meeting.meeting_id, "title": meeting.title})
        state.push_event(end, "meeting_end", {"meeting_id": meeting.meeting_id, "title": meeting.title})
        return meeting.to_dict(), None, False

    def _attend_meeting(self, state: WorldState, args: dict):
        meeting = state.meeting(args["meeting_id"])
        if meeting is None:
            return None, f"[Error] No meeting with id '{args['meeting_id']}' on the calendar.", False
        if state.agent.current_activity.kind == "in_meeting":
            return None, f"[Error] You are already in meeting '{state.agent.current_activity.ref}'. Leave it first.", False
        if state.clock < meeting.start:
            return None, f"[Error] Meeting '{meeting.meeting_id}' has not started yet (starts at {format_clock(meeting.start)}).", False
        if state.clock >= meeting.end:
            return None, f"[Error] Meeting '{meeting.meeting_id}' already ended at {format_clock(meeting.end)}.", False
        state.agent.current_activity = Activity("in_meeting", meeting.meeting_id)
        state.agent.joined_meeting_at = state.clock
        return f"You joined '{meeting.title}' ({meeting.meeting_id}).", None, False

    def _leave_meeting(self, state: WorldState, args: dict):
        activity = state.agent.current_activity
        if activity.kind != "in_meeting":
            return None, "[Error] You are not in a meeting.", False
        joined = state.agent.joined_meeting_at or state.clock
        minutes = max(0, int((state.clock - joined).total_seconds() // 60))
        state.meeting_minutes[activity.ref] = state.meeting_minutes.get(activity.ref, 0) + minutes
        meeting_id = activity.ref
        state.agent.current_activity = Activity("idle", None)
        state.agent.joined_meeting_at = None
        return f"You left meeting '{meeting_id}'.", None, False

    def _query_database(self, state: WorldState, args: dict):
        table = args.get("table", "")
        if not table:
            names = sorted(t for t in state.datastore if not t.startswith("_"))
            return {"tables": names}, None, False
        if table.startswith("_") or table not in state.datastore:
            return None, f"[Error] No table named '{table}'.", False
        rows = state.datastore[table]
        key = args.get("key", "")
        if key:
            rows = [r for r in rows if any(str(v) == key for v in r.values())]
        _reveal_data_clues(state, table)
        return {"table": table, "rows": rows}, None, False

    def _browse_website(self, state: WorldState, args: dict):
        url = args["url"].strip()
        for row in state.datastore.get(WEBSITES_TABLE, []):
            if row.get("url") == url:
                _reveal_data_clues(state, f"{WEBSITES_TABLE}\x1f{url}")
                return {"url": url, "content": row.get("content", "")}, None, False
        return None, f"[Error] Website unreachable: '{url}'.", False

    def _wait_until(self, state: WorldState, args: dict):
        raw = args["time"].strip()
        try:
            if ":" in raw and "-" not in raw and len(raw) <= 8:
                hh, mm = raw.split(":", 1)
                target = state.clock.replace(hour=int(hh), minute=int(mm))
            else:
                target = parse_clock(raw)
        except (ValueError, TypeError):
            tick(state, DEFAULT_TIME_COST)
            return None, f"[Error] Unrecognized time value: '{raw}'.", True
        if target < state.clock:
            tick(state, DEFAULT_TIME_COST)
            return None, f"[Error] Cannot wait until {format_clock(target)}; it is already {format_clock(state.clock)}.", True
        advance_clock_inplace(state, target)
        return f"[System Time] Current time is {state.clock.strftime('%Y-%m-%d %H:%M:%S')}.", None, True

    def _submit_result(self, state: WorldState, args: dict):
        task_id = args["task_id"]
        if task_id not in state.task_ids:
            return None, f"[Error] Unknown task id '{task_id}'.", False
        content = args["content"]
        if isinstance(content, str):
            stripped = content.strip()
            if stripped.startswith("{") and stripped.endswith("}"):
                try:
                    content = json.loads(stripped)
                except ValueError:
                    pass
        rows = state.datastore.setdefault(SUBMISSIONS_TABLE, [])
        rows.append({"task_id": task_id, "content": content, "submitted_at": format_clock(state.clock)})
        return f"Result recorded for task {task_id}.", None, False

    def _take_note(self, state: WorldState, args: dict):
        state.agent.notes += args["text"] + "\n"
        return "Noted.", None, False


_gateway: ToolGateway | None = None


def get_gateway() -> ToolGateway:
    global _gateway
    if _gateway is None:
        _gateway = ToolGateway()
    return _gateway


def validate(action: Action) -> str | None:
    return get_gateway().validate(action)


def execute(action: Action, state: WorldState) -> tuple[WorldState, ToolResult]:
    """Pure form: validate + execute on a copy of ``state``."""
    from .world import clone_state

    new = clone_state(state)
    result = get_gateway().run(action, new)
    return new, result


def catalog() -> list[ToolSpec]:
    return get_gateway().catalog()


def format_log_entry(actor: str, call_id: str, tool_name: str, arguments: dict, results: object) -> str:
    """Render one tool call the way episode text logs show it."""
    rendered = results if isinstance(results, str) else canonical_dumps(results)
    return (
        f"[{actor}] Tool Calls:\n"
        f"\n"
        f"ID: {call_id}\n"
        f"Tool Name: {tool_name}()\n"
        f"Arguments: {json.dumps(arguments, ensure_ascii=False)}\n"
        f"Execute Results:\n"
        f"{rendered}"
    )
