"""Scenario and benchmark assembly.

A scenario is a seeded composition of 1..6 task instances on a shared
timeline: entity names made pairwise distinct, meeting intervals placed
without overlap, at most one reveal dependency installed, and the NPC casts
of all tasks merged (one person may hold clues for several tasks, with
provably disjoint triggers).

Everything here is a pure function of (rules, seed); composing the same
arguments twice yields byte-identical documents.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .errors import CompositionError, DecodeError
from .jsonio import canonical_bytes, canonical_loads, format_clock, parse_clock
from .npc import NPCState, normalize
from .rng import Stream, derive_seed
from .tasks import NPCSetup, Reveal, TaskInstance, instantiate, name_pool, rnd
from .tasks.model import (
    DEFAULT_DATE,
    MetaTaskRule,
    day_time,
    workday_bounds,
)
from .world import WorldState

SCENARIO_VERSION = 1
BENCHMARK_VERSION = 1

AGENT_NAME = "Alice Smith"
AGENT_PERSONA = f"{AGENT_NAME}, a new intern in the operations team"

_MAX_RESAMPLES = 32


@dataclass
class TimelineEntry:
    time: datetime
    kind: str
    payload: dict

    def to_dict(self) -> dict:
        return {"time": format_clock(self.time), "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_dict(cls, d: dict) -> "TimelineEntry":
        return cls(parse_clock(d["time"]), d["kind"], d["payload"])


@dataclass
class Scenario:
    scenario_id: str
    seed: int
    tasks: list[TaskInstance]
    npc_cast: list[NPCSetup]
    initial_files: dict[str, str]
    initial_data: dict[str, list[dict]]
    websites: list[dict]
    timeline: list[TimelineEntry]
    workday: tuple[datetime, datetime]
    agent_name: str = AGENT_NAME

    def task(self, task_id: str) -> TaskInstance:
        for t in self.tasks:
            if t.task_id == task_id:
                return t
        raise KeyError(task_id)

    def to_doc(self) -> dict:
        """Full document including the hidden section. Agent-facing
        serializers must use :meth:`agent_view` instead."""
        return {
            "version": SCENARIO_VERSION,
            "scenario_id": self.scenario_id,
            "seed": self.seed,
            "agent_name": self.agent_name,
            "workday": [format_clock(self.workday[0]), format_clock(self.workday[1])],
            "tasks": [t.public_view() | {"rule_id": t.rule_id, "reveal": t.reveal.to_dict()} for t in self.tasks],
            "contacts": [n.profile.to_dict() for n in self.npc_cast],
            "hidden": {
                "tasks": [t.to_dict() for t in self.tasks],
                "npc_cast": [n.to_dict() for n in self.npc_cast],
                "initial_files": self.initial_files,
                "initial_data": self.initial_data,
                "websites": self.websites,
                "timeline": [e.to_dict() for e in self.timeline],
            },
        }

    def agent_view(self) -> dict:
        """What may be shown to an agent before the episode starts: the
        hidden section (clues, checkpoints, scripts, world content) is absent,
        and so are tasks that have not been revealed yet."""
        return {
            "version": SCENARIO_VERSION,
            "scenario_id": self.scenario_id,
            "agent_name": self.agent_name,
            "workday": [format_clock(self.workday[0]), format_clock(self.workday[1])],
            "tasks": [t.public_view() for t in self.tasks if t.reveal.kind == "at_start"],
            "contacts": [n.profile.to_dict() for n in self.npc_cast],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Scenario":
        if doc.get("version") != SCENARIO_VERSION:
            raise DecodeError(f"unsupported scenario version: {doc.get('version')!r}")
        hidden = doc["hidden"]
        workday = (parse_clock(doc["workday"][0]), parse_clock(doc["workday"][1]))
        return cls(
            scenario_id=doc["scenario_id"],
            seed=doc["seed"],
            tasks=[TaskInstance.from_dict(t) for t in hidden["tasks"]],
            npc_cast=[NPCSetup.from_dict(n) for n in hidden["npc_cast"]],
            initial_files=dict(hidden["initial_files"]),
            initial_data={t: [dict(r) for r in rows] for t, rows in hidden["initial_data"].items()},
            websites=[dict(r) for r in hidden["websites"]],
            timeline=[TimelineEntry.from_dict(e) for e in hidden["timeline"]],
            workday=workday,
            agent_name=doc.get("agent_name", AGENT_NAME),
        )

    def to_bytes(self) -> bytes:
        return canonical_bytes(self.to_doc())


@dataclass
class Benchmark:
    benchmark_id: str
    seed: int
    scenarios: list[Scenario]

    def to_doc(self) -> dict:
        return {
            "version": BENCHMARK_VERSION,
            "benchmark_id": self.benchmark_id,
            "seed": self.seed,
            "scenarios": [s.to_doc() for s in self.scenarios],
        }

    def to_bytes(self) -> bytes:
        return canonical_bytes(self.to_doc())

    @classmethod
    def from_doc(cls, doc: dict) -> "Benchmark":
        if doc.get("version") != BENCHMARK_VERSION:
            raise DecodeError(f"unsupported benchmark version: {doc.get('version')!r}")
        return cls(
            benchmark_id=doc["benchmark_id"],
            seed=doc["seed"],
            scenarios=[Scenario.from_doc(s) for s in doc["scenarios"]],
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "Benchmark":
        return cls.from_doc(canonical_loads(data))


# -- trigger bookkeeping ------------------------------------------------------

def _prospective_triggers(rule_id: str, env: dict) -> dict[str, list[frozenset]]:
    """Keyword sets each NPC slot of a rule will carry, computable before
    instantiation (needed to decide whether a shared persona can be reused)."""
    if rule_id == "data_completion":
        return {"helper": [frozenset(["complete", "missing", "data"])]}
    if rule_id == "advertising_campaign":
        return {"helper": [frozenset(["ads", "strategy"])]}
    if rule_id == "website_monitoring":
        return {
            "hr": [frozenset(["website", "maintenance"])],
            "manager": [frozenset(["authorization"])],
        }
    if rule_id == "contact_lookup":
        return {"hr": [frozenset(normalize(env["topic"]))]}
    return {}


def merge_npc_rules(cast: list[NPCSetup]) -> list[NPCSetup]:
    """Merge setups that refer to the same person into one, concatenating
    their reply rules. Trigger keyword sets on one person must be pairwise
    disjoint; any overlap is a composition error (ambiguous custodianship)."""
    merged: dict[str, NPCSetup] = {}
    for setup in cast:
        name = setup.profile.name
        if name not in merged:
            merged[name] = NPCSetup(
                slot=setup.slot,
                profile=setup.profile,
                reply_rules=list(setup.reply_rules),
                shared=setup.shared,
            )
            continue
        existing = merged[name]
        for rule in setup.reply_rules:
            new_keys = frozenset(normalize(" ".join(rule.keywords)))
            for have in existing.reply_rules:
                have_keys = frozenset(normalize(" ".join(have.keywords)))
                clash = new_keys & have_keys
                if clash:
                    raise CompositionError(
                        f"NPC {name} would hold overlapping triggers: {sorted(clash)}"
                    )
            existing.reply_rules.append(rule)
        existing.shared = existing.shared or setup.shared
    return list(merged.values())


# -- scheduling ---------------------------------------------------------------

def _place_meetings(plans: list[dict], stream: Stream) -> None:
    """Assign pairwise-disjoint meeting intervals inside the workday, writing
    them back into each plan's env data before instantiation."""
    placed: list[tuple[int, int]] = []
    meeting_plans = [p for p in plans if p["rule"].rule_id == "meeting_attendance"]
    total = sum(p["draw"].env_data["duration"] for p in meeting_plans)
    if total > 7 * 60:
        raise CompositionError("workday too short to fit all meeting intervals")
    for plan in meeting_plans:
        duration = plan["draw"].env_data["duration"]
        start = None
        for _attempt in range(64):
            candidate = stream.randint(20, 32) * 30  # 10:00..16:00
            if candidate + duration > 17 * 60:
                continue
            if all(candidate + duration <= s or candidate >= s + d for s, d in placed):
                start = candidate
                break
        if start is None:
            # Deterministic fallback: earliest slot after the placed ones.
            cursor = 10 * 60
            while any(cursor < s + d and cursor + duration > s for s, d in placed):
                cursor += 30
            if cursor + duration > 17 * 60:
                raise CompositionError("workday too short to fit all meeting intervals")
            start = cursor
        placed.append((start, duration))
        plan["draw"].env_data["meeting_start"] = start


def schedule(tasks: list[TaskInstance], workday: tuple[datetime, datetime]) -> list[TimelineEntry]:
    """Build the scenario timeline from instantiated tasks: meeting intervals,
    reveal events, scheduled inbox messages, and deadlines."""
    entries: list[TimelineEntry] = []
    intervals: list[tuple[datetime, datetime]] = []
    meeting_start_by_task: dict[str, datetime] = {}
    for task in tasks:
        meeting = task.env.meeting
        if meeting is not None:
            for s, e in intervals:
                if meeting.start < e and s < meeting.end:
                    raise CompositionError(
                        f"time-critical intervals overlap: {meeting.meeting_id} vs [{s}, {e})"
                    )
            intervals.append((meeting.start, meeting.end))
            meeting_start_by_task[task.task_id] = meeting.start
            entries.append(
                TimelineEntry(
                    meeting.start,
                    "meeting_start",
                    {"meeting_id": meeting.meeting_id, "task_id": task.task_id, "title": meeting.title},
                )
            )
            entries.append(
                TimelineEntry(
                    meeting.end,
                    "meeting_end",
                    {"meeting_id": meeting.meeting_id, "task_id": task.task_id, "title": meeting.title},
                )
            )
    for task in tasks:
        if task.reveal.kind == "at_time":
            entries.append(
                TimelineEntry(
                    task.reveal.at,
                    "task_release",
                    {
                        "task_id": task.task_id,
                        "description": task.description,
                        "deadline": format_clock(task.deadline) if task.deadline else None,
                        "priority": task.priority,
                    },
                )
            )
        elif task.reveal.kind == "during_task":
            release_at = meeting_start_by_task[task.reveal.task]
            entries.append(
                TimelineEntry(
                    release_at,
                    "task_release",
                    {
                        "task_id": task.task_id,
                        "description": task.description,
                        "deadline": format_clock(task.deadline) if task.deadline else None,
                        "priority": task.priority,
                        "announce_from": "Coordinator",
                    },
                )
            )
        for at, message in task.env.inbox:
            entries.append(TimelineEntry(at, "message_arrival", {"message": message.to_dict()}))
        if task.deadline is not None:
            entries.append(TimelineEntry(task.deadline, "deadline_passed", {"task_id": task.task_id}))
    entries.sort(key=lambda e: e.time)
    return entries


# -- composition ---------------------------------------------------------------

def compose(
    rules: list[MetaTaskRule],
    seed: int,
    *,
    date: str = DEFAULT_DATE,
    dependency_probability: float = 0.5,
    at_time_probability: float = 0.25,
) -> Scenario:
    """Assemble the given rules (1..6, repeats allowed) into one scenario."""
    if not 1 <= len(rules) <= 6:
        raise CompositionError(f"a scenario holds 1..6 tasks, got {len(rules)}")

    plans = []
    for i, rule in enumerate(rules):
        sub_seed = derive_seed(seed, "task", i, rule.rule_id)
        draw = rnd(sub_seed, rule)
        draw.env_data["date"] = date
        plans.append({"rule": rule, "draw": draw, "index": i})

    _place_meetings(plans, Stream(derive_seed(seed, "schedule")))

    pool = name_pool()
    used_names = {AGENT_NAME}
    shared_cast: dict[tuple[str, str], dict] = {}  # (role, dept) -> {"profile", "triggers"}
    used_dirs: set[str] = set()
    used_tables: set[str] = set()
    used_titles: set[str] = set()
    used_topics: set[str] = set()

    for plan in plans:
        rule, draw, i = plan["rule"], plan["draw"], plan["index"]
        env = draw.env_data

        # contact_lookup topics must stay distinct so shared-HR triggers stay disjoint
        if rule.rule_id == "contact_lookup" and env["topic"] in used_topics:
            stream = Stream(derive_seed(seed, "topic-resample", i))
            fresh = [t for t in _topic_pool() if t not in used_topics]
            if not fresh:
                raise CompositionError("topic pool exhausted while resolving trigger conflicts")
            env["topic"] = stream.choice(fresh)
        if rule.rule_id == "contact_lookup":
            used_topics.add(env["topic"])

        # directory / table uniqueness (repeat rules get a numbered suffix)
        for key, used in (("dir", used_dirs), ("table", used_tables)):
            if key in env:
                base = env[key]
                candidate = base
                ordinal = 2
                while candidate in used:
                    candidate = f"{base}_{ordinal}"
                    ordinal += 1
                env[key] = candidate
                used.add(candidate)

        # meeting titles stay distinct for readability of calendars
        if "title" in env:
            base = env["title"]
            candidate = base
            ordinal = 2
            while candidate in used_titles:
                candidate = f"{base} #{ordinal}"
                ordinal += 1
            env["title"] = candidate
            used_titles.add(candidate)

        # persona uniqueness + shared-role unification
        triggers = _prospective_triggers(rule.rule_id, env)
        npc_slots = [s for s in rule.entity_slots if s["kind"] == "npc"]
        for slot_idx, slot in enumerate(npc_slots):
            slot_triggers = triggers.get(slot["name"], [])
            if slot.get("shared"):
                key = (slot["role"], slot["department"])
                if key in shared_cast:
                    existing = shared_cast[key]
                    if all(
                        not (t & have) for t in slot_triggers for have in existing["triggers"]
                    ):
                        draw.personas[slot_idx] = existing["profile"]
                        existing["triggers"].extend(slot_triggers)
                        continue
                    # Trigger overlap: fall back to a distinct person with the
                    # same role instead of risking ambiguous custodianship.
            persona = draw.personas[slot_idx]
            if persona.name in used_names:
                stream = Stream(derive_seed(seed, "name-resample", i, slot["name"]))
                for _attempt in range(_MAX_RESAMPLES):
                    fresh = stream.choice(pool)
                    if fresh not in used_names:
                        persona.name = fresh
                        break
                else:
                    raise CompositionError("name pool exhausted while resolving entity conflicts")
            used_names.add(persona.name)
            if slot.get("shared") and (slot["role"], slot["department"]) not in shared_cast:
                shared_cast[(slot["role"], slot["department"])] = {
                    "profile": persona,
                    "triggers": list(slot_triggers),
                }

    tasks = [instantiate(plan["rule"], plan["draw"]) for plan in plans]

    # reveal structure: at most one during_task edge, then maybe one at_time reveal
    dep_stream = Stream(derive_seed(seed, "dependency"))
    meeting_tasks = [t for t in tasks if t.env.meeting is not None]
    dependable = [
        t for t in tasks
        if t.env.meeting is None and t.rule_id != "inbox_triage"
    ]
    dependent_id = None
    if meeting_tasks and dependable and dep_stream.random() < dependency_probability:
        upstream = meeting_tasks[0]
        dependent = dependable[dep_stream.randbelow(len(dependable))]
        dependent.reveal = Reveal("during_task", task=upstream.task_id)
        dependent_id = dependent.task_id
    release_stream = Stream(derive_seed(seed, "release"))
    late_candidates = [t for t in dependable if t.task_id != dependent_id]
    if late_candidates and release_stream.random() < at_time_probability:
        chosen = late_candidates[release_stream.randbelow(len(late_candidates))]
        minutes = 9 * 60 + 30 + release_stream.randbelow(9) * 15  # 09:30..11:30
        chosen.reveal = Reveal("at_time", at=day_time(date, minutes))

    cast = merge_npc_rules([setup for task in tasks for setup in task.env.npcs])

    initial_files: dict[str, str] = {}
    initial_data: dict[str, list[dict]] = {}
    websites: list[dict] = []
    for task in tasks:
        for path, content in task.env.files.items():
            if path in initial_files:
                raise CompositionError(f"duplicate file path in composition: {path}")
            initial_files[path] = content
        for table, rows in task.env.tables.items():
            if table in initial_data:
                raise CompositionError(f"duplicate table in composition: {table}")
            initial_data[table] = rows
        websites.extend(task.env.websites)

    workday = workday_bounds(date)
    timeline = schedule(tasks, workday)
    return Scenario(
        scenario_id=f"scn-{seed:016x}",
        seed=seed,
        tasks=tasks,
        npc_cast=cast,
        initial_files=initial_files,
        initial_data=initial_data,
        websites=websites,
        timeline=timeline,
        workday=workday,
    )


def _topic_pool() -> list[str]:
    from .tasks.library import TOPICS

    return list(TOPICS)


def initial_state(scenario: Scenario) -> WorldState:
    """A fresh world at the start of the scenario's workday."""
    state = WorldState(clock=scenario.workday[0])
    for setup in scenario.npc_cast:
        state.npcs[setup.profile.name] = NPCState(profile=setup.profile, reply_rules=list(setup.reply_rules))
    state.files = dict(scenario.initial_files)
    state.datastore = {t: [dict(r) for r in rows] for t, rows in scenario.initial_data.items()}
    if scenario.websites:
        state.datastore["_websites"] = [dict(r) for r in scenario.websites]
    state.task_ids = [t.task_id for t in scenario.tasks]
    state.released_tasks = {t.task_id for t in scenario.tasks if t.reveal.kind == "at_start"}
    for task in scenario.tasks:
        if task.env.meeting is not None:
            state.calendar.append(task.env.meeting)
        for clue in task.clues:
            custodian = clue.custodian
            if custodian["kind"] == "file":
                state.clue_files.setdefault(custodian["path"], []).append(clue.clue_id)
            elif custodian["kind"] == "data":
                key = custodian["table"]
                if custodian.get("key"):
                    key = f"{custodian['table']}\x1f{custodian['key']}"
                state.clue_data.setdefault(key, []).append(clue.clue_id)
    for entry in scenario.timeline:
        state.push_event(entry.time, entry.kind, entry.payload)
    return state


# -- benchmarks -----------------------------------------------------------------

def sample_task_counts(seed: int, n: int, k_min: int = 2, k_max: int = 6) -> list[int]:
    """The task-count draws a benchmark build uses, exposed for distribution
    checks without paying for full composition."""
    return [
        Stream(derive_seed(seed, "scenario-k", i)).randint(k_min, k_max)
        for i in range(n)
    ]


def build_benchmark(
    ruleset: list[MetaTaskRule],
    n: int = 50,
    k_min: int = 2,
    k_max: int = 6,
    seed: int = 0,
    *,
    date: str = DEFAULT_DATE,
) -> Benchmark:
    """n scenarios; per scenario, k ~ uniform{k_min..k_max} rules sampled
    uniformly with replacement from the ruleset (distinct sub-seeds keep
    repeated rules distinct)."""
    if n <= 0:
        raise CompositionError(f"benchmark size must be positive, got {n}")
    if not ruleset:
        raise CompositionError("ruleset must not be empty")
    counts = sample_task_counts(seed, n, k_min, k_max)
    scenarios = []
    ordered = sorted(ruleset, key=lambda r: r.rule_id)
    for i in range(n):
        pick_stream = Stream(derive_seed(seed, "scenario-rules", i))
        rules = [ordered[pick_stream.randbelow(len(ordered))] for _ in range(counts[i])]
        scenario_seed = derive_seed(seed, "scenario", i)
        scenarios.append(compose(rules, scenario_seed, date=date))
    return Benchmark(benchmark_id=f"bench-{seed:016x}", seed=seed, scenarios=scenarios)
