"""Meta-task rule library: seeded draws, instantiation, and solution scripts."""

from .model import (
    Clue,
    MetaTaskRule,
    NPCSetup,
    RandomDraw,
    Reveal,
    TaskEnv,
    TaskInstance,
    get_rule,
    instantiate,
    list_rules,
    name_pool,
    oracle_solve,
    rnd,
)
from . import library as _library  # registers the built-in rules on import

_library.register_builtin_rules()

__all__ = [
    "Clue",
    "MetaTaskRule",
    "NPCSetup",
    "RandomDraw",
    "Reveal",
    "TaskEnv",
    "TaskInstance",
    "get_rule",
    "instantiate",
    "list_rules",
    "name_pool",
    "oracle_solve",
    "rnd",
]
