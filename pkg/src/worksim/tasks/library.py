"""The built-in meta-task rules.

Ten rules across the four domains. Each pairs a JSON manifest (the template
strings) with an env builder (seeded numbers and structures) and an assembler
(concretizes templates, wires checkpoints/clues, embeds the solution script).

The solution scripts double as the environment's solvability witness: for any
seed, replaying a rule's script completes all of its checkpoints.
"""

from __future__ import annotations

from ..npc import ReplyRule, normalize
from ..oracles import event_plan_opt, knapsack_opt
from ..rng import Stream
from ..verify import Checkpoint
from ..world import Meeting, Message
from .model import (
    Clue,
    MetaTaskRule,
    NPCSetup,
    RandomDraw,
    Reveal,
    TaskEnv,
    TaskInstance,
    WORKDAY_END_MIN,
    day_time,
    hhmm,
    load_manifest,
    register_rule,
    render,
)

_CODE_ALPHABET = "23456789ABCDEFGHJKMNPQRSTUVWXYZ"

REGIONS = ["North", "South", "East", "West", "Central"]
APPROVERS = ["K. Ito", "R. Alvarez", "M. Chen", "D. Okafor", "T. Nguyen"]
MEETING_TITLES = [
    "weekly sync",
    "quarterly planning review",
    "product roadmap review",
    "budget review",
    "customer feedback review",
]
ROOMS = ["A", "B", "2F", "3C"]
PURPOSES = ["project kickoff", "design review", "hiring debrief", "sprint retrospective"]
TOPICS = [
    "parking permits",
    "travel reimbursements",
    "security badges",
    "office supplies",
    "conference room bookings",
]
REQUESTS = ["the updated request form", "the current process summary", "this month's schedule"]
SITE_SLUGS = ["copperleaf", "northwind", "bluespire", "lakeshore"]
AUDIENCES = ["college students", "young professionals", "new parents", "daily commuters"]
CHANNEL_POOL = [
    "Metro Billboards",
    "Campus Posters",
    "Short-Video Ads",
    "Search Ads",
    "Social Feed Ads",
    "Podcast Spots",
    "Local Radio",
    "Email Newsletter",
    "Cinema Preroll",
    "Street Flyers",
]
VENUE_POOL = [
    "Riverside Park",
    "City Museum",
    "Bowling Hall",
    "Botanic Garden",
    "Escape Rooms",
    "Harbor Cruise",
]


def _code(stream: Stream, prefix: str, length: int = 4) -> str:
    body = "".join(_CODE_ALPHABET[stream.randbelow(len(_CODE_ALPHABET))] for _ in range(length))
    return f"{prefix}-{body}"


def _task_id(rule_id: str, seed: int) -> str:
    return f"{rule_id}-{seed:016x}"


def _persona_slots(rule: MetaTaskRule, draw: RandomDraw) -> dict:
    names = {}
    npc_slots = [s for s in rule.entity_slots if s["kind"] == "npc"]
    for slot, persona in zip(npc_slots, draw.personas):
        names[slot["name"]] = persona.name
    return names


def _npc_setups(rule: MetaTaskRule, draw: RandomDraw, rules_by_slot: dict[str, list[ReplyRule]]) -> list[NPCSetup]:
    setups = []
    npc_slots = [s for s in rule.entity_slots if s["kind"] == "npc"]
    for slot, persona in zip(npc_slots, draw.personas):
        setups.append(
            NPCSetup(
                slot=slot["name"],
                profile=persona,
                reply_rules=rules_by_slot.get(slot["name"], []),
                shared=slot.get("shared", False),
            )
        )
    return setups


def _checkpoints(rule: MetaTaskRule, task_id: str, slots: dict, specs: dict[str, tuple[str, dict]]) -> list[Checkpoint]:
    built = []
    for idx, cp in enumerate(rule.manifest["checkpoints"], start=1):
        kind, params = specs[cp["id"]]
        built.append(
            Checkpoint(
                checkpoint_id=f"{task_id}-c{idx}",
                task_id=task_id,
                kind=kind,
                params=params,
                description=render(cp["description"], slots),
                feedback_template=render(cp["feedback"], slots),
            )
        )
    return built


def _workday_end(env: dict):
    return day_time(env["date"], WORKDAY_END_MIN)


# ---------------------------------------------------------------------------
# meeting_attendance (time_management, easy)
# ---------------------------------------------------------------------------

def _env_meeting_attendance(stream: Stream) -> dict:
    return {
        "title": stream.choice(MEETING_TITLES),
        "meeting_start": stream.randint(20, 32) * 30,  # 10:00..16:00 on a 30-min grid
        "duration": stream.choice([30, 60]),
        "room": stream.choice(ROOMS),
    }


def _build_meeting_attendance(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    env = draw.env_data
    task_id = _task_id(rule.rule_id, draw.seed)
    start = day_time(env["date"], env["meeting_start"])
    end = day_time(env["date"], env["meeting_start"] + env["duration"])
    slots = {
        **_persona_slots(rule, draw),
        "title": env["title"],
        "start_t": hhmm(env["meeting_start"]),
        "end_t": hhmm(env["meeting_start"] + env["duration"]),
        "room": env["room"],
        "task_id": task_id,
    }
    meeting = Meeting(
        meeting_id=f"meet-{task_id}",
        title=env["title"],
        start=start,
        end=end,
        participants=[slots["organizer"]],
        location=f"room {env['room']}",
    )
    checkpoints = _checkpoints(
        rule,
        task_id,
        slots,
        {"attend": ("meeting_attended", {"meeting_id": meeting.meeting_id, "min_minutes": env["duration"]})},
    )
    return TaskInstance(
        task_id=task_id,
        rule_id=rule.rule_id,
        description=render(rule.manifest["description"], slots),
        checkpoints=checkpoints,
        clues=[],
        deadline=end,
        priority="time_critical",
        reveal=Reveal("at_start"),
        oracle=[],
        env=TaskEnv(npcs=_npc_setups(rule, draw, {}), meeting=meeting),
    )


# ---------------------------------------------------------------------------
# inbox_triage (time_management, easy)
# ---------------------------------------------------------------------------

def _env_inbox_triage(stream: Stream) -> dict:
    return {
        "dir": "it_support",
        "wifi_code": _code(stream, "GW"),
        "arrival": 9 * 60 + stream.randint(5, 30),
        "deadline": stream.randint(26, 32) * 30,  # 13:00..16:00
        "filler1": 9 * 60 + stream.randint(31, 55),
        "filler2": 10 * 60 + stream.randint(0, 30),
    }


def _build_inbox_triage(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    env = draw.env_data
    task_id = _task_id(rule.rule_id, draw.seed)
    directory = env["dir"]
    wifi_path = f"{directory}/guest_network.md"
    deadline = day_time(env["date"], env["deadline"])
    slots = {
        **_persona_slots(rule, draw),
        "dir": directory,
        "deadline_t": hhmm(env["deadline"]),
        "task_id": task_id,
    }
    wifi_content = (
        "Guest network notes\n\n"
        f"Guest Wi-Fi password: {env['wifi_code']}\n"
        "Please do not share it outside the building."
    )
    urgent = Message(
        sender=slots["requester"],
        recipient="you",
        content=(
            f"Hi! We have visitors arriving at {slots['deadline_t']}. Could you send me the guest"
            f" Wi-Fi password before then? IT keeps it in a file somewhere under CloudDisk://{directory}/."
        ),
        sent_at=day_time(env["date"], env["arrival"]),
    )
    fillers = [
        Message(
            sender=slots["colleague1"],
            recipient="you",
            content="Welcome aboard! Ping me if you ever need help with expense reports.",
            sent_at=day_time(env["date"], env["filler1"]),
        ),
        Message(
            sender=slots["colleague2"],
            recipient="you",
            content="Hey, we are collecting feedback on the new mockups next week. No rush.",
            sent_at=day_time(env["date"], env["filler2"]),
        ),
    ]
    checkpoints = _checkpoints(
        rule,
        task_id,
        slots,
        {
            "lookup": ("file_read", {"path": wifi_path}),
            "reply": ("message_sent", {"to": slots["requester"], "keywords": [env["wifi_code"]]}),
            "ontime": (
                "deadline_met",
                {
                    "by": deadline.strftime("%Y-%m-%d %H:%M"),
                    "evidence": {"tool": "SendMessage", "args": {"receiver": slots["requester"]}},
                },
            ),
        },
    )
    clue = Clue(
        clue_id=f"{task_id}-k1",
        content=wifi_content,
        custodian={"kind": "file", "path": wifi_path},
    )
    oracle = [
        {"wait_until": (day_time(env["date"], env["arrival"] + 1)).strftime("%Y-%m-%d %H:%M")},
        {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{wifi_path}"}},
        {
            "tool": "SendMessage",
            "arguments": {
                "receiver": slots["requester"],
                "message": f"Hi, the guest Wi-Fi password is {env['wifi_code']}.",
            },
        },
    ]
    inbox = sorted(
        [(urgent.sent_at, urgent), (fillers[0].sent_at, fillers[0]), (fillers[1].sent_at, fillers[1])],
        key=lambda pair: pair[0],
    )
    return TaskInstance(
        task_id=task_id,
        rule_id=rule.rule_id,
        description=render(rule.manifest["description"], slots),
        checkpoints=checkpoints,
        clues=[clue],
        deadline=deadline,
        priority="normal",
        reveal=Reveal("at_start"),
        oracle=oracle,
        env=TaskEnv(files={wifi_path: wifi_content}, npcs=_npc_setups(rule, draw, {}), inbox=inbox),
    )


# ---------------------------------------------------------------------------
# schedule_coordination (time_management, easy)
# ---------------------------------------------------------------------------

def _env_schedule_coordination(stream: Stream) -> dict:
    busy1 = sorted(stream.sample(list(range(9, 17)), 2))
    busy2 = sorted(stream.sample(list(range(9, 17)), 2))
    return {
        "table": "availability",
        "purpose": stream.choice(PURPOSES),
        "busy1": busy1,
        "busy2": busy2,
    }


def _build_schedule_coordination(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    env = draw.env_data
    task_id = _task_id(rule.rule_id, draw.seed)
    table = env["table"]
    blocked = set(env["busy1"]) | set(env["busy2"])
    answer_hour = next(h for h in range(9, 18) if h not in blocked)
    answer = f"{answer_hour:02d}:00"
    slots = {
        **_persona_slots(rule, draw),
        "purpose": env["purpose"],
        "table": table,
        "task_id": task_id,
    }

    def windows(hours):
        return ", ".join(f"{h:02d}:00-{h + 1:02d}:00" for h in hours)

    rows = [
        {"name": slots["p1"], "busy": windows(env["busy1"])},
        {"name": slots["p2"], "busy": windows(env["busy2"])},
    ]
    clue = Clue(
        clue_id=f"{task_id}-k1",
        content=f"Busy windows. {slots['p1']}: {windows(env['busy1'])}. {slots['p2']}: {windows(env['busy2'])}.",
        custodian={"kind": "data", "table": table, "key": None},
    )
    checkpoints = _checkpoints(
        rule,
        task_id,
        slots,
        {
            "consult": ("clue_revealed", {"clue": clue.clue_id}),
            "slot": ("submission_matches", {"matcher": {"kind": "contains", "value": answer}}),
            "ontime": ("deadline_met", {"by": _workday_end(env).strftime("%Y-%m-%d %H:%M")}),
        },
    )
    oracle = [
        {"tool": "QueryDatabase", "arguments": {"table": table}},
        {"tool": "SubmitResult", "arguments": {"task_id": task_id, "content": {"start": answer}}},
    ]
    return TaskInstance(
        task_id=task_id,
        rule_id=rule.rule_id,
        description=render(rule.manifest["description"], slots),
        checkpoints=checkpoints,
        clues=[clue],
        deadline=_workday_end(env),
        priority="normal",
        reveal=Reveal("at_start"),
        oracle=oracle,
        env=TaskEnv(tables={table: rows}, npcs=_npc_setups(rule, draw, {})),
    )


# ---------------------------------------------------------------------------
# transaction_auditing (info_synthesis, easy)
# ---------------------------------------------------------------------------

def _env_transaction_auditing(stream: Stream) -> dict:
    threshold = stream.choice([2500, 3000, 3500, 4000, 4500, 5000])
    n_rows = stream.randint(14, 20)
    n_violations = stream.randint(2, 4)
    violation_idx = set(stream.sample(list(range(n_rows)), n_violations))
    rows = []
    for i in range(n_rows):
        if i in violation_idx:
            amount = threshold + stream.randint(10, 400) * 10
            approver = ""
        elif stream.random() < 0.5:
            amount = stream.randint(10, threshold // 10) * 10
            approver = stream.choice(APPROVERS + [""])
        else:
            amount = threshold + stream.randint(10, 400) * 10
            approver = stream.choice(APPROVERS)
        rows.append({"id": f"TX-{1001 + i}", "amount": amount, "approver": approver})
    return {
        "dir": "finance_audit",
        "table": "transactions",
        "threshold": threshold,
        "rows": rows,
        "policy_code": _code(stream, "AP", 3),
    }


def _build_transaction_auditing(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    env = draw.env_data
    task_id = _task_id(rule.rule_id, draw.seed)
    directory, table = env["dir"], env["table"]
    policy_path = f"{directory}/audit_policy.md"
    policy_content = (
        f"Audit policy {env['policy_code']}\n\n"
        f"Flag every transaction over ${env['threshold']} that has no recorded approver.\n"
        f"Transactions at or under ${env['threshold']} do not need an approver."
    )
    anomalous = [r["id"] for r in env["rows"] if r["amount"] > env["threshold"] and not r["approver"]]
    slots = {
        **_persona_slots(rule, draw),
        "dir": directory,
        "table": table,
        "threshold": env["threshold"],
        "task_id": task_id,
    }
    clue = Clue(
        clue_id=f"{task_id}-k1",
        content=policy_content,
        custodian={"kind": "file", "path": policy_path},
    )
    checkpoints = _checkpoints(
        rule,
        task_id,
        slots,
        {
            "policy": ("file_read", {"path": policy_path}),
            "flags": (
                "submission_matches",
                {"matcher": {"kind": "id_set", "values": anomalous, "token_pattern": r"TX-\d+"}},
            ),
            "ontime": ("deadline_met", {"by": _workday_end(env).strftime("%Y-%m-%d %H:%M")}),
        },
    )
    oracle = [
        {"tool": "OpenFolderInCloudDisk", "arguments": {"path": directory}},
        {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{policy_path}"}},
        {"tool": "QueryDatabase", "arguments": {"table": table}},
        {"tool": "SubmitResult", "arguments": {"task_id": task_id, "content": {"ids": anomalous}}},
    ]
    return TaskInstance(
        task_id=task_id,
        rule_id=rule.rule_id,
        description=render(rule.manifest["description"], slots),
        checkpoints=checkpoints,
        clues=[clue],
        deadline=_workday_end(env),
        priority="normal",
        reveal=Reveal("at_start"),
        oracle=oracle,
        env=TaskEnv(
            files={policy_path: policy_content},
            tables={table: env["rows"]},
            npcs=_npc_setups(rule, draw, {}),
        ),
    )


# ---------------------------------------------------------------------------
# data_completion (info_synthesis, hard)
# ---------------------------------------------------------------------------

def _env_data_completion(stream: Stream) -> dict:
    values = [stream.randint(20, 99) * 1000 for _ in range(4)]
    return {
        "dir": "data_completion",
        "table": "quarterly_sales",
        "region": stream.choice(REGIONS),
        "values": values,
        "missing_q": stream.randbelow(4),
        "manual_code": _code(stream, "DC", 3),
    }


def _build_data_completion(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    env = draw.env_data
    task_id = _task_id(rule.rule_id, draw.seed)
    directory, table = env["dir"], env["table"]
    manual_path = f"{directory}/data_completion_manual.md"
    others_sum = sum(v for q, v in enumerate(env["values"]) if q != env["missing_q"])
    expected = (2 * others_sum + 3) // 6  # floor(sum/3 + 0.5): average of 3, rounded half up
    manual_content = (
        f"Data completion manual {env['manual_code']}\n\n"
        "When a quarterly revenue value is missing, fill it with the average of that region's"
        " other quarters in the same year, rounded half up to the nearest whole number."
    )
    rows = [
        {
            "quarter": f"Q{q + 1}",
            "region": env["region"],
            "revenue": None if q == env["missing_q"] else env["values"][q],
        }
        for q in range(4)
    ]
    slots = {
        **_persona_slots(rule, draw),
        "dir": directory,
        "table": table,
        "task_id": task_id,
    }
    ask_keywords = ["complete", "missing", "data"]
    reply_manifest = rule.manifest["npc_replies"][0]
    reply_text = render(reply_manifest["reply"], slots)
    pointer_clue = Clue(
        clue_id=f"{task_id}-k1",
        content=reply_text,
        custodian={"kind": "npc", "npc": slots["helper"], "trigger": ask_keywords},
    )
    manual_clue = Clue(
        clue_id=f"{task_id}-k2",
        content=manual_content,
        custodian={"kind": "file", "path": manual_path},
    )
    reply_rules = {
        "helper": [ReplyRule(keywords=ask_keywords, reply=reply_text, releases=pointer_clue.clue_id)]
    }
    checkpoints = _checkpoints(
        rule,
        task_id,
        slots,
        {
            "ask": ("npc_asked", {"npc": slots["helper"], "keywords": ask_keywords}),
            "manual": ("file_read", {"path": manual_path}),
            "value": ("submission_matches", {"matcher": {"kind": "number", "value": expected}}),
        },
    )
    oracle = [
        {
            "tool": "AskNPC",
            "arguments": {
                "npc": slots["helper"],
                "message": f"How should I complete the missing data in the {table} table?",
            },
        },
        {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{manual_path}"}},
        {"tool": "QueryDatabase", "arguments": {"table": table}},
        {"tool": "SubmitResult", "arguments": {"task_id": task_id, "content": {"value": expected}}},
    ]
    return TaskInstance(
        task_id=task_id,
        rule_id=rule.rule_id,
        description=render(rule.manifest["description"], slots),
        checkpoints=checkpoints,
        clues=[pointer_clue, manual_clue],
        deadline=_workday_end(env),
        priority="normal",
        reveal=Reveal("at_start"),
        oracle=oracle,
        env=TaskEnv(
            files={manual_path: manual_content},
            tables={table: rows},
            npcs=_npc_setups(rule, draw, reply_rules),
        ),
    )


# ---------------------------------------------------------------------------
# report_drafting (info_synthesis, easy)
# ---------------------------------------------------------------------------

def _env_report_drafting(stream: Stream) -> dict:
    return {
        "dir": "weekly_reports",
        "week": stream.randint(30, 45),
        "units": stream.randint(120, 980),
        "revenue": stream.randint(15, 95) * 1000,
        "top_region": stream.choice(REGIONS),
        "note_code": _code(stream, "WR", 3),
    }


def _build_report_drafting(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    env = draw.env_data
    task_id = _task_id(rule.rule_id, draw.seed)
    directory = env["dir"]
    notes_path = f"{directory}/raw_notes.md"
    notes_content = (
        f"Raw notes {env['note_code']} for week {env['week']}\n\n"
        f"- units sold: {env['units']}\n"
        f"- revenue: ${env['revenue']}\n"
        f"- top region: {env['top_region']}\n"
        "- misc: two demo requests pending"
    )
    slots = {
        **_persona_slots(rule, draw),
        "dir": directory,
        "task_id": task_id,
    }
    clue = Clue(
        clue_id=f"{task_id}-k1",
        content=notes_content,
        custodian={"kind": "file", "path": notes_path},
    )
    figures = [str(env["units"]), str(env["revenue"]), env["top_region"]]
    checkpoints = _checkpoints(
        rule,
        task_id,
        slots,
        {
            "notes": ("file_read", {"path": notes_path}),
            "figures": ("submission_matches", {"matcher": {"kind": "keywords", "values": figures}}),
            "ontime": ("deadline_met", {"by": _workday_end(env).strftime("%Y-%m-%d %H:%M")}),
        },
    )
    summary = (
        f"Weekly sales summary, week {env['week']}: units sold {env['units']},"
        f" revenue ${env['revenue']}, top region {env['top_region']}."
    )
    oracle = [
        {"tool": "OpenFolderInCloudDisk", "arguments": {"path": directory}},
        {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{notes_path}"}},
        {"tool": "SubmitResult", "arguments": {"task_id": task_id, "content": summary}},
    ]
    return TaskInstance(
        task_id=task_id,
        rule_id=rule.rule_id,
        description=render(rule.manifest["description"], slots),
        checkpoints=checkpoints,
        clues=[clue],
        deadline=_workday_end(env),
        priority="normal",
        reveal=Reveal("at_start"),
        oracle=oracle,
        env=TaskEnv(files={notes_path: notes_content}, npcs=_npc_setups(rule, draw, {})),
    )


# ---------------------------------------------------------------------------
# contact_lookup (proactive_inquiry, easy)
# ---------------------------------------------------------------------------

def _env_contact_lookup(stream: Stream) -> dict:
    return {"topic": stream.choice(TOPICS), "request": stream.choice(REQUESTS)}


def _request_phrase(request: str) -> str:
    for article in ("the ", "this "):
        if request.startswith(article):
            return request[len(article):]
    return request


def _build_contact_lookup(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    env = draw.env_data
    task_id = _task_id(rule.rule_id, draw.seed)
    topic = env["topic"]
    slots = {
        **_persona_slots(rule, draw),
        "topic": topic,
        "request": env["request"],
        "task_id": task_id,
    }
    topic_keywords = normalize(topic)
    reply_manifest = rule.manifest["npc_replies"][0]
    reply_text = render(reply_manifest["reply"], slots)
    clue = Clue(
        clue_id=f"{task_id}-k1",
        content=reply_text,
        custodian={"kind": "npc", "npc": slots["hr"], "trigger": topic_keywords},
    )
    reply_rules = {"hr": [ReplyRule(keywords=topic_keywords, reply=reply_text, releases=clue.clue_id)]}
    checkpoints = _checkpoints(
        rule,
        task_id,
        slots,
        {
            "ask": ("npc_asked", {"npc": slots["hr"], "keywords": topic_keywords}),
            "outreach": (
                "message_sent",
                {"to": slots["target"], "keywords": [_request_phrase(env["request"])]},
            ),
        },
    )
    oracle = [
        {"tool": "AskNPC", "arguments": {"npc": slots["hr"], "message": f"Who handles {topic}?"}},
        {
            "tool": "SendMessage",
            "arguments": {
                "receiver": slots["target"],
                "message": f"Hi, could you send me {env['request']}?",
            },
        },
    ]
    return TaskInstance(
        task_id=task_id,
        rule_id=rule.rule_id,
        description=render(rule.manifest["description"], slots),
        checkpoints=checkpoints,
        clues=[clue],
        deadline=_workday_end(env),
        priority="normal",
        reveal=Reveal("at_start"),
        oracle=oracle,
        env=TaskEnv(npcs=_npc_setups(rule, draw, reply_rules)),
    )


# ---------------------------------------------------------------------------
# website_monitoring (proactive_inquiry, hard)
# ---------------------------------------------------------------------------

def _env_website_monitoring(stream: Stream) -> dict:
    return {
        "slug": stream.choice(SITE_SLUGS),
        "auth": _code(stream, "AUTH"),
        "alert_code": _code(stream, "OPS", 3),
    }


def _build_website_monitoring(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    env = draw.env_data
    task_id = _task_id(rule.rule_id, draw.seed)
    url = f"https://status.{env['slug']}-corp.example.com"
    slots = {
        **_persona_slots(rule, draw),
        "url": url,
        "auth": env["auth"],
        "task_id": task_id,
    }
    site_content = (
        f"Status dashboard {env['alert_code']}\n\n"
        "WARNING: the website database is almost full (97% of quota used). Maintenance needed."
    )
    replies = rule.manifest["npc_replies"]
    hr_reply = render(replies[0]["reply"], slots)
    manager_reply = render(replies[1]["reply"], slots)
    alert_clue = Clue(
        clue_id=f"{task_id}-k1",
        content=site_content,
        custodian={"kind": "data", "table": "_websites", "key": url},
    )
    who_clue = Clue(
        clue_id=f"{task_id}-k2",
        content=hr_reply,
        custodian={"kind": "npc", "npc": slots["hr"], "trigger": list(replies[0]["keywords"])},
    )
    auth_clue = Clue(
        clue_id=f"{task_id}-k3",
        content=manager_reply,
        custodian={"kind": "npc", "npc": slots["manager"], "trigger": list(replies[1]["keywords"])},
    )
    reply_rules = {
        "hr": [ReplyRule(keywords=list(replies[0]["keywords"]), reply=hr_reply, releases=who_clue.clue_id)],
        "manager": [
            ReplyRule(keywords=list(replies[1]["keywords"]), reply=manager_reply, releases=auth_clue.clue_id)
        ],
    }
    checkpoints = _checkpoints(
        rule,
        task_id,
        slots,
        {
            "check": ("clue_revealed", {"clue": alert_clue.clue_id}),
            "who": ("npc_asked", {"npc": slots["hr"], "keywords": ["website", "maintenance"]}),
            "inform": ("message_sent", {"to": slots["maintainer"], "keywords": ["database", "full"]}),
            "authorize": ("npc_asked", {"npc": slots["manager"], "keywords": ["authorization"]}),
        },
    )
    oracle = [
        {"tool": "BrowseWebsite", "arguments": {"url": url}},
        {
            "tool": "AskNPC",
            "arguments": {"npc": slots["hr"], "message": "Who is in charge of website maintenance?"},
        },
        {
            "tool": "SendMessage",
            "arguments": {
                "receiver": slots["maintainer"],
                "message": (
                    "Heads up: during the website health check I saw that the website database"
                    " is almost full. Can you take a look?"
                ),
            },
        },
        {
            "tool": "AskNPC",
            "arguments": {
                "npc": slots["manager"],
                "message": "Could I get authorization for the website maintenance work?",
            },
        },
    ]
    return TaskInstance(
        task_id=task_id,
        rule_id=rule.rule_id,
        description=render(rule.manifest["description"], slots),
        checkpoints=checkpoints,
        clues=[alert_clue, who_clue, auth_clue],
        deadline=_workday_end(env),
        priority="normal",
        reveal=Reveal("at_start"),
        oracle=oracle,
        env=TaskEnv(
            websites=[{"url": url, "content": site_content}],
            npcs=_npc_setups(rule, draw, reply_rules),
        ),
    )


# ---------------------------------------------------------------------------
# advertising_campaign (strategic_modeling, hard)
# ---------------------------------------------------------------------------

def _env_advertising_campaign(stream: Stream) -> dict:
    budget = stream.randint(16, 30) * 500
    count = stream.randint(6, 9)
    names = stream.sample(CHANNEL_POOL, count)
    channels = []
    for name in names:
        cost = stream.randint(15, 70) * 100
        exposure = stream.randint(18, 190) * 50
        decoy = max(50, int(exposure * stream.uniform(0.6, 1.4)) // 50 * 50)
        channels.append({"name": name, "cost": cost, "exposure": exposure, "decoy": decoy})
    return {
        "dir": "ads_strategy",
        "budget": budget,
        "channels": channels,
        "audience": stream.choice(AUDIENCES),
        "handbook_code": _code(stream, "AS", 3),
    }


def _build_advertising_campaign(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    env = draw.env_data
    task_id = _task_id(rule.rule_id, draw.seed)
    directory = env["dir"]
    handbook_path = f"{directory}/ads_strategy_handbook.md"
    csv_path = f"{directory}/channels.csv"
    decoy_path = f"{directory}/audience_density_estimates.md"
    budget = env["budget"]
    channels = env["channels"]
    pairs = [(c["cost"], c["exposure"]) for c in channels]
    opt_idx, opt_exposure = knapsack_opt(budget, pairs)
    opt_names = [channels[i]["name"] for i in opt_idx]
    opt_cost = sum(channels[i]["cost"] for i in opt_idx)

    handbook_content = (
        f"Ads strategy handbook {env['handbook_code']}\n\n"
        "Campaign planning rules:\n"
        "- pick a subset of channels, each used at most once\n"
        "- the total cost must stay within the campaign budget\n"
        "- maximize total exposure\n"
        "- use the exact cost and exposure figures from channels.csv in this folder, not estimates\n"
        '- submit the plan as JSON: {"channels": [names], "total_cost": n, "total_exposure": n}'
    )
    csv_content = "channel,cost,exposure\n" + "\n".join(
        f"{c['name']},{c['cost']},{c['exposure']}" for c in channels
    )
    decoy_content = "Rough audience estimates (draft, unverified)\n\n" + "\n".join(
        f"- {c['name']}: cost ${c['cost']}, estimated exposure {c['decoy']}" for c in channels
    )
    slots = {
        **_persona_slots(rule, draw),
        "dir": directory,
        "budget": budget,
        "audience": env["audience"],
        "task_id": task_id,
    }
    reply_text = render(rule.manifest["npc_replies"][0]["reply"], slots)
    pointer_clue = Clue(
        clue_id=f"{task_id}-k1",
        content=reply_text,
        custodian={"kind": "npc", "npc": slots["helper"], "trigger": ["ads", "strategy"]},
    )
    handbook_clue = Clue(
        clue_id=f"{task_id}-k2",
        content=handbook_content,
        custodian={"kind": "file", "path": handbook_path},
    )
    data_clue = Clue(
        clue_id=f"{task_id}-k3",
        content=csv_content,
        custodian={"kind": "file", "path": csv_path},
    )
    reply_rules = {
        "helper": [ReplyRule(keywords=["ads", "strategy"], reply=reply_text, releases=pointer_clue.clue_id)]
    }
    channel_table = {c["name"]: [c["cost"], c["exposure"]] for c in channels}
    checkpoints = _checkpoints(
        rule,
        task_id,
        slots,
        {
            "handbook": ("file_read", {"path": handbook_path}),
            "data": ("file_read", {"path": csv_path}),
            "consistent": (
                "submission_matches",
                {"matcher": {"kind": "ads_plan", "channels": channel_table, "budget": budget}},
            ),
            "optimal": (
                "submission_optimal",
                {
                    "objective": {
                        "kind": "ads",
                        "channels": channel_table,
                        "budget": budget,
                        "optimal_exposure": opt_exposure,
                    }
                },
            ),
        },
    )
    oracle = [
        {"tool": "AskNPC", "arguments": {"npc": slots["helper"], "message": "How should I plan the ads strategy?"}},
        {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{handbook_path}"}},
        {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{csv_path}"}},
        {
            "tool": "SubmitResult",
            "arguments": {
                "task_id": task_id,
                "content": {
                    "channels": opt_names,
                    "total_cost": opt_cost,
                    "total_exposure": opt_exposure,
                },
            },
        },
    ]
    return TaskInstance(
        task_id=task_id,
        rule_id=rule.rule_id,
        description=render(rule.manifest["description"], slots),
        checkpoints=checkpoints,
        clues=[pointer_clue, handbook_clue, data_clue],
        deadline=_workday_end(env),
        priority="normal",
        reveal=Reveal("at_start"),
        oracle=oracle,
        env=TaskEnv(
            files={handbook_path: handbook_content, csv_path: csv_content, decoy_path: decoy_content},
            npcs=_npc_setups(rule, draw, reply_rules),
        ),
    )


# ---------------------------------------------------------------------------
# event_planning (strategic_modeling, hard)
# ---------------------------------------------------------------------------

def _env_event_planning(stream: Stream) -> dict:
    common_idx = stream.randbelow(5)
    person_avail = []
    for _ in range(3):
        others = [i for i in range(5) if i != common_idx]
        extra = stream.sample(others, stream.randint(2, 3))
        person_avail.append(sorted({common_idx, *extra}))
    venues = []
    for pos, name in enumerate(stream.sample(VENUE_POOL, 4)):
        value = stream.randint(8, 20) * 5
        if pos < 2:
            open_idx = list(range(5))
        else:
            open_idx = sorted(stream.sample(list(range(5)), stream.randint(2, 4)))
        venues.append({"name": name, "value": value, "open_idx": open_idx})
    node_order = ["Office"] + [v["name"] for v in venues]
    stream.shuffle(node_order)
    edges = []
    seen = set()
    for a, b in zip(node_order, node_order[1:]):
        edges.append([a, b, stream.randint(2, 12)])
        seen.add(frozenset((a, b)))
    nodes = ["Office"] + [v["name"] for v in venues]
    for _ in range(2):
        a, b = stream.sample(nodes, 2)
        if frozenset((a, b)) not in seen:
            edges.append([a, b, stream.randint(2, 12)])
            seen.add(frozenset((a, b)))
    return {
        "dir": "event_planning",
        "common_idx": common_idx,
        "person_avail": person_avail,
        "venues": venues,
        "edges": edges,
        "plan_code": _code(stream, "EV", 3),
    }


def _build_event_planning(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    from datetime import timedelta

    env = draw.env_data
    task_id = _task_id(rule.rule_id, draw.seed)
    directory = env["dir"]
    base = day_time(env["date"], 0)
    candidate_dates = [(base + timedelta(days=5 + i)).strftime("%Y-%m-%d") for i in range(5)]
    slots = {
        **_persona_slots(rule, draw),
        "dir": directory,
        "task_id": task_id,
    }
    people = [slots["p1"], slots["p2"], slots["p3"]]
    availability = {
        person: [candidate_dates[i] for i in idx_list]
        for person, idx_list in zip(people, env["person_avail"])
    }
    venues = [
        {
            "name": v["name"],
            "value": v["value"],
            "open_dates": [candidate_dates[i] for i in v["open_idx"]],
        }
        for v in env["venues"]
    ]
    venue_map = {"nodes": ["Office"] + [v["name"] for v in venues], "edges": env["edges"]}
    constraints = {"venues_required": 2, "start": "Office", "distance_penalty": 1}
    best_date, best_itinerary, best_score = event_plan_opt(availability, venues, constraints, venue_map)

    avail_path = f"{directory}/availability.md"
    venues_path = f"{directory}/venues.csv"
    map_path = f"{directory}/city_map.md"
    avail_content = f"Team availability {env['plan_code']}\n\n" + "\n".join(
        f"- {person}: {', '.join(dates)}" for person, dates in availability.items()
    )
    venues_content = (
        "# plan score = total venue value minus the total distance traveled from the Office"
        " through both venues (shortest routes)\n"
        "venue,value,open_dates\n"
        + "\n".join(f"{v['name']},{v['value']},{'|'.join(v['open_dates'])}" for v in venues)
    )
    map_content = f"City map {env['plan_code']}. Distances between stops:\n\n" + "\n".join(
        f"- {a} to {b}: {w}" for a, b, w in env["edges"]
    )
    clues = [
        Clue(f"{task_id}-k1", avail_content, {"kind": "file", "path": avail_path}),
        Clue(f"{task_id}-k2", venues_content, {"kind": "file", "path": venues_path}),
        Clue(f"{task_id}-k3", map_content, {"kind": "file", "path": map_path}),
    ]
    common_dates = sorted(set(candidate_dates[i] for i in range(5)).intersection(
        *[set(dates) for dates in availability.values()]
    ))
    plan_params = {
        "common_dates": common_dates,
        "venues": venues,
        "map": venue_map,
        "required": 2,
        "penalty": 1,
        "start": "Office",
    }
    checkpoints = _checkpoints(
        rule,
        task_id,
        slots,
        {
            "avail": ("file_read", {"path": avail_path}),
            "venues": ("file_read", {"path": venues_path}),
            "valid": ("submission_matches", {"matcher": {"kind": "event_plan", **plan_params}}),
            "optimal": (
                "submission_optimal",
                {"objective": {"kind": "event", **plan_params, "optimal_score": best_score}},
            ),
        },
    )
    oracle = [
        {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{avail_path}"}},
        {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{venues_path}"}},
        {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{map_path}"}},
        {
            "tool": "SubmitResult",
            "arguments": {
                "task_id": task_id,
                "content": {"date": best_date, "itinerary": list(best_itinerary), "score": best_score},
            },
        },
    ]
    return TaskInstance(
        task_id=task_id,
        rule_id=rule.rule_id,
        description=render(rule.manifest["description"], slots),
        checkpoints=checkpoints,
        clues=clues,
        deadline=_workday_end(env),
        priority="normal",
        reveal=Reveal("at_start"),
        oracle=oracle,
        env=TaskEnv(
            files={avail_path: avail_content, venues_path: venues_content, map_path: map_content},
            npcs=_npc_setups(rule, draw, {}),
        ),
    )


# ---------------------------------------------------------------------------

_BUILDERS = {
    "meeting_attendance": (_env_meeting_attendance, _build_meeting_attendance),
    "inbox_triage": (_env_inbox_triage, _build_inbox_triage),
    "schedule_coordination": (_env_schedule_coordination, _build_schedule_coordination),
    "transaction_auditing": (_env_transaction_auditing, _build_transaction_auditing),
    "data_completion": (_env_data_completion, _build_data_completion),
    "report_drafting": (_env_report_drafting, _build_report_drafting),
    "contact_lookup": (_env_contact_lookup, _build_contact_lookup),
    "website_monitoring": (_env_website_monitoring, _build_website_monitoring),
    "advertising_campaign": (_env_advertising_campaign, _build_advertising_campaign),
    "event_planning": (_env_event_planning, _build_event_planning),
}

_registered = False


def register_builtin_rules() -> None:
    global _registered
    if _registered:
        return
    for rule_id, (env_builder, assembler) in _BUILDERS.items():
        manifest = load_manifest(rule_id)
        register_rule(
            MetaTaskRule(
                rule_id=rule_id,
                domain=manifest["domain"],
                difficulty=manifest["difficulty"],
                entity_slots=manifest["entity_slots"],
                manifest=manifest,
                env_builder=env_builder,
                assembler=assembler,
            )
        )
    _registered = True
