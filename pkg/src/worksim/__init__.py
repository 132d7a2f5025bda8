"""worksim: a deterministic, seed-driven workplace-simulation environment.

Rule-based meta-tasks instantiate into multi-task, deadline-constrained
scenarios with hidden clues; agents drive the world through a tool gateway;
checkpoints are verified mechanically and scored; feedback feeds
continual-learning and human-guidance loops.
"""

__version__ = "0.1.0"

from .compose import Benchmark, Scenario, build_benchmark, compose, initial_state
from .session import SessionService, action_log, replay
from .tasks import instantiate, list_rules, rnd
from .world import Action, WorldState, advance_clock, deserialize_state, serialize_state, transition

__all__ = [
    "Action",
    "Benchmark",
    "Scenario",
    "SessionService",
    "WorldState",
    "action_log",
    "advance_clock",
    "build_benchmark",
    "compose",
    "deserialize_state",
    "initial_state",
    "instantiate",
    "list_rules",
    "replay",
    "rnd",
    "serialize_state",
    "transition",
    "__version__",
]
