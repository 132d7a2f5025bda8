"""Types and machinery for the rule library.

A rule is a manifest (JSON resource holding the natural-language templates)
plus two pieces of code: an env builder that turns a seeded stream into raw
numbers/structures, and an assembler that concretizes the templates and
builds the full task instance (checkpoints, clues, world content, and the
embedded solution script).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from importlib import resources
from typing import Callable

from ..errors import GenerationError, InstantiationError
from ..jsonio import format_clock, parse_clock
from ..npc import NPCProfile, ReplyRule
from ..rng import Stream, derive_seed
from ..verify import Checkpoint
from ..world import Meeting, Message

DOMAINS = ("info_synthesis", "time_management", "proactive_inquiry", "strategic_modeling")

DEFAULT_DATE = "2025-10-01"
WORKDAY_START_MIN = 9 * 60
WORKDAY_END_MIN = 18 * 60


def day_time(date_str: str, minutes: int) -> datetime:
    base = datetime.strptime(date_str, "%Y-%m-%d")
    return base + timedelta(minutes=minutes)


def hhmm(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def workday_bounds(date_str: str) -> tuple[datetime, datetime]:
    return day_time(date_str, WORKDAY_START_MIN), day_time(date_str, WORKDAY_END_MIN)


def render(template: str, slots: dict) -> str:
    try:
        return template.format(**slots)
    except KeyError as exc:
        raise InstantiationError(f"unresolved template slot '{exc.args[0]}'") from exc
    except IndexError as exc:
        raise InstantiationError(f"positional placeholder in template: {exc}") from exc


_name_pool: list[str] | None = None


def name_pool() -> list[str]:
    """The global persona name pool (one name per line, shipped as a resource)."""
    global _name_pool
    if _name_pool is None:
        text = resources.files("worksim").joinpath("resources/names.txt").read_text("utf-8")
        _name_pool = [line.strip() for line in text.splitlines() if line.strip()]
    return list(_name_pool)


def load_manifest(rule_id: str) -> dict:
    text = resources.files("worksim").joinpath(f"resources/rules/{rule_id}.json").read_text("utf-8")
    return json.loads(text)


@dataclass
class Clue:
    clue_id: str
    content: str
    custodian: dict  # {"kind":"npc","npc":...,"trigger":[...]} | {"kind":"file","path":...} | {"kind":"data","table":...,"key":...}

    def to_dict(self) -> dict:
        return {"clue_id": self.clue_id, "content": self.content, "custodian": self.custodian}

    @classmethod
    def from_dict(cls, d: dict) -> "Clue":
        return cls(d["clue_id"], d["content"], d["custodian"])


@dataclass
class Reveal:
    kind: str = "at_start"  # "at_start" | "at_time" | "during_task"
    at: datetime | None = None
    task: str | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "at": format_clock(self.at) if self.at else None,
            "task": self.task,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Reveal":
        at = d.get("at")
        return cls(d.get("kind", "at_start"), parse_clock(at) if at else None, d.get("task"))


@dataclass
class NPCSetup:
    slot: str
    profile: NPCProfile
    reply_rules: list[ReplyRule] = field(default_factory=list)
    shared: bool = False

    def to_dict(self) -> dict:
        return {
            "slot": self.slot,
            "profile": self.profile.to_dict(),
            "reply_rules": [r.to_dict() for r in self.reply_rules],
            "shared": self.shared,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NPCSetup":
        return cls(
            slot=d["slot"],
            profile=NPCProfile.from_dict(d["profile"]),
            reply_rules=[ReplyRule.from_dict(r) for r in d["reply_rules"]],
            shared=d.get("shared", False),
        )


@dataclass
class TaskEnv:
    """World content one task contributes to its scenario."""

    files: dict[str, str] = field(default_factory=dict)
    tables: dict[str, list[dict]] = field(default_factory=dict)
    websites: list[dict] = field(default_factory=list)
    npcs: list[NPCSetup] = field(default_factory=list)
    meeting: Meeting | None = None
    inbox: list[tuple[datetime, Message]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "files": dict(self.files),
            "tables": self.tables,
            "websites": self.websites,
            "npcs": [n.to_dict() for n in self.npcs],
            "meeting": self.meeting.to_dict() if self.meeting else None,
            "inbox": [{"at": format_clock(at), "message": m.to_dict()} for at, m in self.inbox],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskEnv":
        return cls(
            files=dict(d.get("files", {})),
            tables={t: [dict(r) for r in rows] for t, rows in d.get("tables", {}).items()},
            websites=[dict(r) for r in d.get("websites", [])],
            npcs=[NPCSetup.from_dict(n) for n in d.get("npcs", [])],
            meeting=Meeting.from_dict(d["meeting"]) if d.get("meeting") else None,
            inbox=[(parse_clock(e["at"]), Message.from_dict(e["message"])) for e in d.get("inbox", [])],
        )


@dataclass
class TaskInstance:
    task_id: str
    rule_id: str
    description: str
    checkpoints: list[Checkpoint]
    clues: list[Clue]
    deadline: datetime | None
    priority: str  # "normal" | "time_critical"
    reveal: Reveal
    oracle: list[dict]
    env: TaskEnv

    def public_view(self) -> dict:
        return {
            "task_id": self.task_id,
            "description": self.description,
            "deadline": format_clock(self.deadline) if self.deadline else None,
            "priority": self.priority,
        }

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "rule_id": self.rule_id,
            "description": self.description,
            "deadline": format_clock(self.deadline) if self.deadline else None,
            "priority": self.priority,
            "reveal": self.reveal.to_dict(),
            "checkpoints": [cp.to_dict() for cp in self.checkpoints],
            "clues": [c.to_dict() for c in self.clues],
            "oracle": self.oracle,
            "env": self.env.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskInstance":
        deadline = d.get("deadline")
        return cls(
            task_id=d["task_id"],
            rule_id=d["rule_id"],
            description=d["description"],
            checkpoints=[Checkpoint.from_dict(c) for c in d["checkpoints"]],
            clues=[Clue.from_dict(c) for c in d["clues"]],
            deadline=parse_clock(deadline) if deadline else None,
            priority=d.get("priority", "normal"),
            reveal=Reveal.from_dict(d.get("reveal", {})),
            oracle=d.get("oracle", []),
            env=TaskEnv.from_dict(d.get("env", {})),
        )


@dataclass
class MetaTaskRule:
    rule_id: str
    domain: str
    difficulty: str
    entity_slots: list[dict]
    manifest: dict
    env_builder: Callable[[Stream], dict]
    assembler: Callable[["MetaTaskRule", "RandomDraw"], TaskInstance]

    @property
    def checkpoint_templates(self) -> list[dict]:
        return self.manifest.get("checkpoints", [])

    @property
    def clue_templates(self) -> list[dict]:
        return self.manifest.get("npc_replies", [])


@dataclass
class RandomDraw:
    seed: int
    personas: list[NPCProfile]
    env_data: dict


_registry: dict[str, MetaTaskRule] = {}


def register_rule(rule: MetaTaskRule) -> None:
    if rule.domain not in DOMAINS:
        raise ValueError(f"rule {rule.rule_id} has unknown domain {rule.domain!r}")
    _registry[rule.rule_id] = rule


def get_rule(rule_id: str) -> MetaTaskRule:
    if rule_id not in _registry:
        raise KeyError(f"no rule registered under {rule_id!r}")
    return _registry[rule_id]


def list_rules(domain: str | None = None, difficulty: str | None = None) -> list[MetaTaskRule]:
    rules = sorted(_registry.values(), key=lambda r: r.rule_id)
    if domain is not None:
        rules = [r for r in rules if r.domain == domain]
    if difficulty is not None:
        rules = [r for r in rules if r.difficulty == difficulty]
    return rules


def rnd(seed: int, rule: MetaTaskRule) -> RandomDraw:
    """The randomization engine: seed -> (personas, environment data).

    Separate hash-derived sub-streams feed persona sampling and environment
    generation, so adding draws to one never shifts the other.
    """
    npc_slots = [s for s in rule.entity_slots if s["kind"] == "npc"]
    pool = name_pool()
    if len(pool) < len(npc_slots):
        raise GenerationError(
            f"name pool ({len(pool)}) cannot fill {len(npc_slots)} persona slots of {rule.rule_id}"
        )
    persona_stream = Stream(derive_seed(seed, rule.rule_id, "personas"))
    names = persona_stream.sample(pool, len(npc_slots))
    personas = [
        NPCProfile(name=name, role=slot["role"], department=slot["department"])
        for name, slot in zip(names, npc_slots)
    ]
    env_stream = Stream(derive_seed(seed, rule.rule_id, "env"))
    env_data = rule.env_builder(env_stream)
    env_data.setdefault("date", DEFAULT_DATE)
    return RandomDraw(seed=seed, personas=personas, env_data=env_data)


def instantiate(rule: MetaTaskRule, draw: RandomDraw) -> TaskInstance:
    """Concretize a rule with a draw into a full task instance."""
    return rule.assembler(rule, draw)


def oracle_solve(instance: TaskInstance) -> list[dict]:
    """The embedded solution script: an ordered action list that completes
    every checkpoint when replayed (meeting attendance is handled by the
    replaying agent's preemption policy, keyed off the instance's meeting)."""
    return [dict(step) for step in instance.oracle]
