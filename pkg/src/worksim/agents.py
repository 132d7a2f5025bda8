"""Scripted agents: the environment's own witnesses.

OracleAgent replays each task's embedded solution script with meeting
preemption (suspend at a meeting's start, resume after it ends), which makes
it the solvability proof for composed scenarios. The others are controlled
contrasts used by the acceptance suite.
"""

from __future__ import annotations

from collections import deque
from datetime import datetime

from .compose import Scenario
from .jsonio import format_clock, parse_clock
from .oracles import knapsack_opt
from .rng import Stream, derive_seed
from .tasks import oracle_solve


def _wait(until: datetime) -> dict:
    return {"tool": "WaitUntil", "arguments": {"time": format_clock(until)}}


class OracleAgent:
    """Replays solution scripts; attends every meeting at its interval."""

    attend_meetings = True

    def __init__(self):
        self.queue: deque = deque()
        self.deferred: list[tuple[datetime, int, list[dict]]] = []
        self.meetings: list[tuple[datetime, datetime, str]] = []
        self.attended: set[str] = set()
        self.forced: deque = deque()

    def start(self, scenario: Scenario, observation: dict) -> None:
        for index, task in enumerate(scenario.tasks):
            script = oracle_solve(task)
            if task.env.meeting is not None:
                m = task.env.meeting
                self.meetings.append((m.start, m.end, m.meeting_id))
            release = None
            if task.reveal.kind == "at_time":
                release = task.reveal.at
            elif task.reveal.kind == "during_task":
                upstream = scenario.task(task.reveal.task)
                release = upstream.env.meeting.start
            if release is None:
                self.queue.extend(script)
            else:
                self.deferred.append((release, index, script))
        self.deferred.sort(key=lambda item: (item[0], item[1]))
        self.meetings.sort()

    def _release_due(self, clock: datetime) -> None:
        while self.deferred and self.deferred[0][0] <= clock:
            _release, _index, script = self.deferred.pop(0)
            self.queue.extend(script)

    def _next_meeting(self, clock: datetime):
        if not self.attend_meetings:
            return None
        for start, end, meeting_id in self.meetings:
            if meeting_id not in self.attended and clock < end:
                return start, end, meeting_id
        return None

    def next_actions(self, observation: dict):
        clock = parse_clock(observation["clock"])
        self._release_due(clock)
        if self.forced:
            return [self.forced.popleft()]

        meeting = self._next_meeting(clock)
        if meeting is not None:
            start, end, meeting_id = meeting
            if clock >= start:
                self.attended.add(meeting_id)
                self.forced.append(_wait(end))
                return [{"tool": "AttendMeeting", "arguments": {"meeting_id": meeting_id}}]

        # drop wait gates that have already passed
        while self.queue and "wait_until" in self.queue[0] and parse_clock(self.queue[0]["wait_until"]) <= clock:
            self.queue.popleft()

        if self.queue:
            head = self.queue[0]
            if "wait_until" in head:
                gate = parse_clock(head["wait_until"])
                if meeting is not None and clock < meeting[0] < gate:
                    return [_wait(meeting[0])]  # keep the gate; attend first
                self.queue.popleft()
                return [_wait(gate)]
            return [self.queue.popleft()]

        if self.deferred:
            target = self.deferred[0][0]
            if meeting is not None and clock < meeting[0] < target:
                target = meeting[0]
            return [_wait(target)]
        if meeting is not None and clock < meeting[0]:
            return [_wait(meeting[0])]
        return None


class NoShowAgent(OracleAgent):
    """Oracle minus meeting attendance: the preemption contrast."""

    attend_meetings = False


class ExperienceFollowingAgent(OracleAgent):
    """Oracle minus every NPC inquiry, unless its experiences tell it to ask.

    Day 1 (no experiences) it skips all AskNPC actions and misses exactly the
    inquiry checkpoints; given feedback-derived experiences that start with
    "You should ask", it stops skipping them.
    """

    def __init__(self, experiences=None):
        super().__init__()
        insights = [e.insight for e in (experiences or [])]
        self.include_asks = any(text.startswith("You should ask") for text in insights)

    def start(self, scenario: Scenario, observation: dict) -> None:
        super().start(scenario, observation)
        if not self.include_asks:
            self.queue = deque(a for a in self.queue if a.get("tool") != "AskNPC")
            self.deferred = [
                (release, index, [a for a in script if a.get("tool") != "AskNPC"])
                for release, index, script in self.deferred
            ]


class RandomAgent:
    """Schema-valid but content-blind: uniform tool choice, junk arguments."""

    PATHS = ["CloudDisk://docs/readme.md", "CloudDisk://shared/todo.md", "archive/q1.txt"]
    NAMES = ["Jordan Miles", "Casey Lee", "Riley Quinn"]
    WORDS = ["status", "update", "synergy", "note", "review", "ping", "asap", "draft"]
    TABLES = ["records", "inventory", "metrics"]

    def __init__(self, seed: int, max_steps: int = 40):
        self.stream = Stream(seed)
        self.max_steps = max_steps
        self._steps = 0
        self._task_ids: list[str] = []
        self._tools: list = []

    def start(self, scenario: Scenario, observation: dict) -> None:
        from .tools import catalog

        self._tools = catalog()
        self._task_ids = [t["task_id"] for t in observation.get("tasks", [])] or ["none"]

    def _value_for(self, tool_name: str, param) -> object:
        s = self.stream
        name = param.name
        if name in ("path", "url"):
            return s.choice(self.PATHS)
        if name in ("receiver", "npc"):
            return s.choice(self.NAMES)
        if name in ("message", "content", "text", "title"):
            return " ".join(s.choice(self.WORDS) for _ in range(s.randint(2, 5)))
        if name == "task_id":
            return s.choice(self._task_ids)
        if name == "table":
            return s.choice(self.TABLES)
        if name == "meeting_id":
            return f"m-{s.randint(1, 3)}"
        if name in ("time", "start", "end"):
            return f"{s.randint(9, 17):02d}:{s.choice([0, 15, 30, 45]):02d}"
        if name == "key":
            return s.choice(self.WORDS)
        if name == "participants":
            return [s.choice(self.NAMES)]
        return s.choice(self.WORDS)

    def next_actions(self, observation: dict):
        if self._steps >= self.max_steps:
            return None
        self._steps += 1
        spec = self._tools[self.stream.randbelow(len(self._tools))]
        arguments = {p.name: self._value_for(spec.name, p) for p in spec.params if p.required}
        return [{"tool": spec.name, "arguments": arguments}]


class HintFollowingAgent:
    """Scripted mirror of the tiered-guidance study on the campaign-planning
    task: behavior is keyed to the highest hint tier received.

    Tier 0: plans from the rough estimates file and misreports totals.
    Tier 1: uses the exact data but picks channels greedily by ratio.
    Tier 2: runs the optimizer, but on the rough estimates as input.
    Tier 3: exact data + optimizer = the solution script.
    """

    def __init__(self, tier: int):
        self.tier = tier
        self._script: deque = deque()

    def start(self, scenario: Scenario, observation: dict) -> None:
        task = next(t for t in scenario.tasks if t.rule_id == "advertising_campaign")
        env_files = task.env.files
        directory = next(p.split("/", 1)[0] for p in env_files)
        handbook = f"{directory}/ads_strategy_handbook.md"
        csv_path = f"{directory}/channels.csv"
        decoy_path = f"{directory}/audience_density_estimates.md"

        consistent_cp = next(cp for cp in task.checkpoints if cp.kind == "submission_matches")
        matcher = consistent_cp.params["matcher"]
        budget = matcher["budget"]
        channels = matcher["channels"]  # name -> [cost, exposure]
        names = list(channels)
        decoys = self._parse_decoys(env_files[decoy_path], names)

        def greedy(table: dict[str, tuple[int, int]]) -> list[str]:
            order = sorted(names, key=lambda n: (-(table[n][1] / table[n][0]), names.index(n)))
            chosen, total = [], 0
            for n in order:
                if total + table[n][0] <= budget:
                    chosen.append(n)
                    total += table[n][0]
            return chosen

        true_table = {n: (channels[n][0], channels[n][1]) for n in names}
        decoy_table = {n: (channels[n][0], decoys[n]) for n in names}

        if self.tier == 0:
            picked = greedy(decoy_table)
            submission = {
                "channels": picked,
                "total_cost": sum(decoy_table[n][0] for n in picked),
                "total_exposure": sum(decoy_table[n][1] for n in picked),  # decoy figures
            }
            self._script = deque([
                {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{decoy_path}"}},
                {"tool": "SubmitResult", "arguments": {"task_id": task.task_id, "content": submission}},
            ])
            return

        reads = [
            {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{handbook}"}},
            {"tool": "ReadFile", "arguments": {"path": f"CloudDisk://{csv_path}"}},
        ]
        if self.tier == 1:
            picked = greedy(true_table)
        elif self.tier == 2:
            idx, _ = knapsack_opt(budget, [decoy_table[n] for n in names])
            picked = [names[i] for i in idx]
        else:
            idx, _ = knapsack_opt(budget, [true_table[n] for n in names])
            picked = [names[i] for i in idx]
        submission = {
            "channels": picked,
            "total_cost": sum(true_table[n][0] for n in picked),
            "total_exposure": sum(true_table[n][1] for n in picked),
        }
        self._script = deque(
            reads + [{"tool": "SubmitResult", "arguments": {"task_id": task.task_id, "content": submission}}]
        )

    @staticmethod
    def _parse_decoys(text: str, names: list[str]) -> dict[str, int]:
        decoys = {}
        for line in text.splitlines():
            for name in names:
                if line.startswith(f"- {name}:"):
                    decoys[name] = int(line.rsplit("estimated exposure", 1)[1].strip())
        return decoys

    def next_actions(self, observation: dict):
        if not self._script:
            return None
        return [self._script.popleft()]


def hint_texts(scenario: Scenario) -> dict[int, str]:
    """The tiered guidance messages for a campaign-planning scenario."""
    task = next(t for t in scenario.tasks if t.rule_id == "advertising_campaign")
    directory = next(p.split("/", 1)[0] for p in task.env.files)
    data_hint = (
        f"Use the exact cost and exposure figures from CloudDisk://{directory}/channels.csv;"
        " do not work from the rough estimates file."
    )
    algo_hint = "Choose the channel subset with a 0/1 knapsack optimization under the budget."
    return {1: data_hint, 2: algo_hint, 3: data_hint + " " + algo_hint}


def random_agent_for(scenario: Scenario, benchmark_seed: int = 0, max_steps: int = 40) -> RandomAgent:
    return RandomAgent(seed=derive_seed(benchmark_seed, "random-agent", scenario.scenario_id), max_steps=max_steps)
