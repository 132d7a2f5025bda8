"""Tool validation, execution semantics, and the frozen error strings."""

from datetime import datetime

from worksim.compose import initial_state
from worksim.tools import ERR_UNKNOWN_RECEIVER, execute, format_log_entry, get_gateway, validate
from worksim.world import Action, Meeting, WorldState, transition


def _blank_state():
    return WorldState(clock=datetime(2025, 10, 1, 9))


def test_catalog_names_and_stability():
    names = [spec.name for spec in get_gateway().catalog()]
    expected = [
        "OpenFolderInCloudDisk", "ReadFile", "WriteFile", "SendMessage", "ListContacts",
        "AskNPC", "CheckCalendar", "ScheduleMeeting", "AttendMeeting", "LeaveMeeting",
        "QueryDatabase", "BrowseWebsite", "WaitUntil", "SubmitResult", "TakeNote",
    ]
    assert names == expected
    assert [spec.name for spec in get_gateway().catalog()] == names  # stable across calls
    assert all(spec.description for spec in get_gateway().catalog())


def test_unexpected_keyword_error_is_verbatim():
    err = validate(Action("OpenFolderInCloudDisk", {"command": "cat x.md"}))
    assert err == (
        "[Error] The following error occurred when you called the tool OpenFolderInCloudDisk: "
        "OpenFolderInCloudDisk.__call__() got an unexpected keyword argument 'command'."
    )


def test_missing_required_argument_is_named():
    err = validate(Action("SendMessage", {"message": "hello"}))
    assert "missing a required argument: 'receiver'" in err


def test_unknown_tool_lists_catalog():
    err = validate(Action("FaxDocument", {}))
    assert err.startswith("[Error] Unknown tool 'FaxDocument'")
    assert "SendMessage" in err


def test_well_formed_call_validates():
    assert validate(Action("ReadFile", {"path": "docs/x.md"})) is None


def test_unknown_receiver_error_is_verbatim():
    state = _blank_state()
    new, result = execute(Action("SendMessage", {"receiver": "marketing@knowledgex.com", "message": "hi"}), state)
    assert result.status == "error"
    assert result.payload == ERR_UNKNOWN_RECEIVER.format(receiver="marketing@knowledgex.com")
    assert new.message_log == []


def test_read_write_folder_cycle():
    state = _blank_state()
    state, result = execute(Action("WriteFile", {"path": "CloudDisk://notes/today.md", "content": "hello"}), state)
    assert result.status == "ok"
    state, result = execute(Action("OpenFolderInCloudDisk", {"path": "notes"}), state)
    assert result.payload["entries"] == ["today.md"]
    state, result = execute(Action("ReadFile", {"path": "CloudDisk:notes/today.md"}), state)
    assert result.payload["content"] == "hello"
    _, result = execute(Action("ReadFile", {"path": "notes/missing.md"}), state)
    assert result.status == "error" and "File not found" in result.payload


def test_clue_revealed_on_read(basic_scenario):
    state = initial_state(basic_scenario)
    clue = basic_scenario.tasks[0].clues[0]
    path = clue.custodian["path"]
    new, obs = transition(state, Action("ReadFile", {"path": path}))
    assert clue.clue_id in new.revealed_clues
    assert obs.clues_revealed == [clue.clue_id]
    # clue set only grows
    newer, _ = transition(new, Action("ReadFile", {"path": path}))
    assert newer.revealed_clues == new.revealed_clues


def test_meeting_attendance_window_and_minutes():
    state = _blank_state()
    meeting = Meeting("m-1", "sync", datetime(2025, 10, 1, 10), datetime(2025, 10, 1, 10, 30))
    state.calendar.append(meeting)
    state.push_event(meeting.start, "meeting_start", {"meeting_id": "m-1"})
    state.push_event(meeting.end, "meeting_end", {"meeting_id": "m-1"})

    _, result = execute(Action("AttendMeeting", {"meeting_id": "m-1"}), state)
    assert result.status == "error" and "not started" in result.payload

    state, _ = execute(Action("WaitUntil", {"time": "2025-10-01 10:00"}), state)
    state, result = execute(Action("AttendMeeting", {"meeting_id": "m-1"}), state)
    assert result.status == "ok"
    state, _ = execute(Action("WaitUntil", {"time": "2025-10-01 10:30"}), state)
    assert state.meeting_minutes["m-1"] == 30
    assert state.agent.current_activity.kind == "idle"

    _, result = execute(Action("AttendMeeting", {"meeting_id": "m-1"}), state)
    assert result.status == "error" and "already ended" in result.payload


def test_wait_until_semantics():
    state = _blank_state()
    new, result = execute(Action("WaitUntil", {"time": "13:00"}), state)
    assert result.status == "ok"
    assert result.payload == "[System Time] Current time is 2025-10-01 13:00:00."
    assert new.clock.hour == 13
    _, result = execute(Action("WaitUntil", {"time": "2025-10-01 08:00"}), new)
    assert result.status == "error" and "already" in result.payload


def test_time_accounting_matches_displacement():
    state = _blank_state()
    start = state.clock
    calls = [
        Action("TakeNote", {"text": "begin"}),
        Action("WaitUntil", {"time": "2025-10-01 09:30"}),
        Action("ListContacts", {}),
        Action("CheckCalendar", {}),
    ]
    elapsed = 0
    for call in calls:
        before = state.clock
        state, _ = execute(call, state)
        elapsed += int((state.clock - before).total_seconds() // 60)
    assert elapsed == int((state.clock - start).total_seconds() // 60)
    assert state.clock == datetime(2025, 10, 1, 9, 32)  # 1 + wait-to-09:30 + 1 + 1


def test_submit_result_records_and_replaces(basic_scenario):
    state = initial_state(basic_scenario)
    task_id = basic_scenario.tasks[0].task_id
    state, result = execute(Action("SubmitResult", {"task_id": task_id, "content": {"ids": ["TX-1"]}}), state)
    assert result.status == "ok"
    state, _ = execute(Action("SubmitResult", {"task_id": task_id, "content": "second answer"}), state)
    rows = state.submissions(task_id)
    assert len(rows) == 2 and rows[-1]["content"] == "second answer"
    _, result = execute(Action("SubmitResult", {"task_id": "nope", "content": "x"}), state)
    assert result.status == "error" and "Unknown task id" in result.payload


def test_submit_result_parses_json_strings(basic_scenario):
    state = initial_state(basic_scenario)
    task_id = basic_scenario.tasks[0].task_id
    state, _ = execute(Action("SubmitResult", {"task_id": task_id, "content": '{"ids": ["TX-7"]}'}), state)
    assert state.submissions(task_id)[-1]["content"] == {"ids": ["TX-7"]}


def test_query_database_listing_and_reserved_tables():
    state = _blank_state()
    state.datastore["inventory"] = [{"sku": "A", "count": 3}]
    state.datastore["_websites"] = [{"url": "https://x", "content": "hidden"}]
    state, result = execute(Action("QueryDatabase", {}), state)
    assert result.payload == {"tables": ["inventory"]}
    _, result = execute(Action("QueryDatabase", {"table": "_websites"}), state)
    assert result.status == "error"
    _, result = execute(Action("BrowseWebsite", {"url": "https://x"}), state)
    assert result.payload["content"] == "hidden"
    _, result = execute(Action("BrowseWebsite", {"url": "https://nope"}), state)
    assert result.status == "error" and "unreachable" in result.payload


def test_ask_npc_routes_and_logs(meeting_scenario):
    state = initial_state(meeting_scenario)
    hr = next(n for n in meeting_scenario.npc_cast if n.profile.role == "HR Specialist")
    topic_rule = hr.reply_rules[0]
    question = "Who handles " + " ".join(topic_rule.keywords) + "?"
    new, result = execute(Action("AskNPC", {"npc": hr.profile.name, "message": question}), state)
    assert result.status == "ok"
    assert result.payload["reply"] == topic_rule.reply
    assert new.npcs[hr.profile.name].dialogue_log
    _, result = execute(Action("AskNPC", {"npc": "Nobody Real", "message": "hi"}), state)
    assert result.status == "error" and "Unknown contact" in result.payload


def test_error_results_start_with_error_marker():
    state = _blank_state()
    bad_calls = [
        Action("ReadFile", {"path": "missing.md"}),
        Action("SendMessage", {"receiver": "ghost", "message": "x"}),
        Action("AttendMeeting", {"meeting_id": "m-?"}),
        Action("QueryDatabase", {"table": "none"}),
        Action("Bogus", {}),
    ]
    for call in bad_calls:
        _, result = execute(call, state)
        assert result.status == "error"
        assert str(result.payload).startswith("[Error]")


def test_every_spec_has_a_registered_handler():
    gateway = get_gateway()
    for spec in gateway.catalog():
        assert spec.name in gateway._handlers
        assert callable(gateway._handlers[spec.name])


def test_log_entry_format():
    text = format_log_entry("Alice Smith", "call-0001", "SendMessage", {"receiver": "Bob"}, "[Error] nope")
    assert "[Alice Smith] Tool Calls:" in text
    assert "Tool Name: SendMessage()" in text
    assert 'Arguments: {"receiver": "Bob"}' in text
    assert text.rstrip().endswith("[Error] nope")
