"""Deterministic rule-matching NPC responder.

Every NPC carries an ordered list of reply rules. A rule fires when its
keyword trigger matches the normalized incoming message; the first match in
rule order wins, and may release a hidden clue. Composition guarantees that
the trigger keyword sets of a multi-clue NPC are pairwise disjoint, so at
most one rule is ever a sensible match for the probe messages solution
scripts use.

``model_backed`` mode exists for high-fidelity runs: the responder defers to
a registered free-form callable (e.g. a chat-model call) fed with the NPC's
rendered system prompt. Scripted mode is the default and the only mode the
test suite relies on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

DEFAULT_REPLY = "I'm not sure I can help with that — could you be more specific?"

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Optional hook for model_backed NPCs: fn(system_prompt, message) -> reply.
_model_responder: Optional[Callable[[str, str], str]] = None


def set_model_responder(fn: Optional[Callable[[str, str], str]]) -> None:
    global _model_responder
    _model_responder = fn


def normalize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on (any unicode) whitespace."""
    return _TOKEN_RE.findall(text.lower())


def phrase_in(tokens: list[str], phrase: str) -> bool:
    """True when the normalized phrase occurs contiguously in the tokens."""
    needle = normalize(phrase)
    if not needle:
        return False
    n = len(needle)
    return any(tokens[i : i + n] == needle for i in range(len(tokens) - n + 1))


@dataclass
class NPCProfile:
    name: str
    role: str
    department: str

    def to_dict(self) -> dict:
        return {"name": self.name, "role": self.role, "department": self.department}

    @classmethod
    def from_dict(cls, d: dict) -> "NPCProfile":
        return cls(name=d["name"], role=d["role"], department=d["department"])


@dataclass
class ReplyRule:
    keywords: list[str]
    reply: str
    policy: str = "all_of"  # "all_of" | "any_of"
    releases: str | None = None  # clue id

    def matches(self, tokens: list[str]) -> bool:
        if not self.keywords:
            return False
        hits = (phrase_in(tokens, kw) for kw in self.keywords)
        return all(hits) if self.policy == "all_of" else any(hits)

    def to_dict(self) -> dict:
        return {
            "keywords": list(self.keywords),
            "policy": self.policy,
            "releases": self.releases,
            "reply": self.reply,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReplyRule":
        return cls(
            keywords=list(d["keywords"]),
            reply=d["reply"],
            policy=d.get("policy", "all_of"),
            releases=d.get("releases"),
        )


@dataclass
class NPCState:
    profile: NPCProfile
    reply_rules: list[ReplyRule] = field(default_factory=list)
    dialogue_log: list[tuple[str, str]] = field(default_factory=list)
    mode: str = "scripted"  # "scripted" | "model_backed"

    def to_dict(self) -> dict:
        return {
            "profile": self.profile.to_dict(),
            "reply_rules": [r.to_dict() for r in self.reply_rules],
            "dialogue_log": [list(entry) for entry in self.dialogue_log],
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NPCState":
        return cls(
            profile=NPCProfile.from_dict(d["profile"]),
            reply_rules=[ReplyRule.from_dict(r) for r in d["reply_rules"]],
            dialogue_log=[tuple(entry) for entry in d.get("dialogue_log", [])],
            mode=d.get("mode", "scripted"),
        )


def system_prompt(npc: NPCState, agent_name: str) -> str:
    """Render the persona prompt used when an NPC is model-backed."""
    lines = [
        f"You are {npc.profile.name}, a {npc.profile.role} of department {npc.profile.department}.",
        "",
        f"{agent_name} is a new intern at your company. When they ask you for help,"
        " point them to the relevant manual or answer with the specific content below,"
        " depending on the situation. Do not volunteer unrelated information.",
        "",
        "Reply table:",
    ]
    for rule in npc.reply_rules:
        cond = " and ".join(f"'{kw}'" for kw in rule.keywords)
        lines.append(f"- If the message mentions {cond}, reply: \"{rule.reply}\"")
    return "\n".join(lines)


def respond(npc: NPCState, message: str, state=None, agent_name: str = "Agent") -> tuple[str, str | None]:
    """Route a message to an NPC; returns (reply, released clue id or None).

    When ``state`` is given, a fired rule's released clue is added to
    ``state.revealed_clues`` and the exchange is appended to the dialogue log.
    """
    released = None
    if npc.mode == "model_backed" and _model_responder is not None:
        reply = _model_responder(system_prompt(npc, agent_name), message)
    else:
        tokens = normalize(message)
        reply = DEFAULT_REPLY
        for rule in npc.reply_rules:
            if rule.matches(tokens):
                reply = rule.reply
                released = rule.releases
                break
    npc.dialogue_log.append((agent_name, message))
    npc.dialogue_log.append((npc.profile.name, reply))
    if released is not None and state is not None:
        state.revealed_clues.add(released)
    return reply, released
