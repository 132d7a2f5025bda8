"""Reference agent loop and episode runners.

The loop mirrors the protocol's shape: build a system prompt from the initial
observation, keep a running history (compressed past a length threshold),
invoke a model backend, parse the structured tool-call blocks out of the
response, and act. The three customization points (prompt construction,
history maintenance, model invocation) are plain functions/objects that
callers can swap.

Scripted agents (see :mod:`worksim.agents`) bypass the model loop: the runner
asks them directly for the next actions.
"""

from __future__ import annotations

import json
import os
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import httpx

from .compose import AGENT_PERSONA, Benchmark, Scenario, compose
from .errors import WorksimError
from .jsonio import canonical_bytes, canonical_dumps, parse_clock
from .session import SessionService, scenario_score
from .tasks import get_rule, list_rules
from .verify import FeedbackBundle, metrics, stratify

DEFAULT_STEP_BUDGET = 200
DEFAULT_HISTORY_THRESHOLD = 4000  # token estimate: chars / 4

TOOL_CALL_RE = re.compile(r"<tool_call>(.*?)</tool_call>", re.DOTALL)

LESSONS_HEADER = "Lessons from previous days:"


@dataclass
class ExperienceRecord:
    rule_id: str
    day: int
    insight: str
    source_feedback: str  # the feedback line that produced this insight

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "day": self.day,
            "insight": self.insight,
            "source_feedback": self.source_feedback,
        }


@dataclass
class ModelExchange:
    request: dict
    response_text: str = ""
    parsed: list[dict] | None = None


@dataclass
class EpisodeResult:
    report: dict
    stop_reason: str
    trajectory: list[dict]
    system_prompt: str
    wasted_turns: int = 0

    @property
    def score(self) -> Fraction:
        return scenario_score(self.report)


# -- the three abstracted interfaces ------------------------------------------

def build_system_prompt(observation: dict, persona: str = AGENT_PERSONA,
                        experiences: list[ExperienceRecord] | None = None) -> str:
    """Deterministic system prompt: persona, released tasks, tool catalog,
    contacts, the call format, and (when present) lessons from prior days."""
    lines = [f"You are {persona}.", ""]
    lines.append("Today's tasks:")
    for task in observation.get("tasks", []):
        deadline = f" (deadline {task['deadline']})" if task.get("deadline") else ""
        priority = " [time critical]" if task.get("priority") == "time_critical" else ""
        lines.append(f"- {task['task_id']}: {task['description']}{deadline}{priority}")
    if not observation.get("tasks"):
        lines.append("- (none released yet; watch your inbox)")
    lines.append("")
    lines.append("Available tools:")
    for tool in observation.get("tools", []):
        params = ", ".join(p["name"] for p in tool.get("params", []))
        lines.append(f"- {tool['name']}({params}): {tool['description']}")
    lines.append("")
    lines.append("Contacts:")
    for contact in observation.get("contacts", []):
        lines.append(f"- {contact['name']} ({contact['role']}, {contact['department']})")
    lines.append("")
    lines.append(
        "Call tools with blocks like: "
        '<tool_call>{"tool": "ReadFile", "arguments": {"path": "CloudDisk://notes.md"}}</tool_call>'
    )
    if experiences:
        lines.append("")
        lines.append(LESSONS_HEADER)
        for exp in experiences:
            lines.append(f"- {exp.insight}")
    return "\n".join(lines)


def estimate_tokens(text: str) -> int:
    return len(text) // 4


def _entry_text(entry: dict) -> str:
    if entry["kind"] == "digest":
        return entry["text"]
    return entry.get("thought", "") + canonical_dumps(entry.get("actions", [])) + "".join(
        str(r) for r in entry.get("results", [])
    )


def _digest(entries: list[dict]) -> dict:
    """Fold history entries into one digest: per-task submission status,
    revealed clues, and the last three verbatim results."""
    submitted: list[str] = []
    clues: list[str] = []
    results: list[str] = []
    for entry in entries:
        if entry["kind"] == "digest":
            submitted.extend(t for t in entry["tasks"] if t not in submitted)
            clues.extend(c for c in entry["clues"] if c not in clues)
            continue
        for action in entry.get("actions", []):
            if action.get("tool") == "SubmitResult":
                task = action.get("arguments", {}).get("task_id", "?")
                if task not in submitted:
                    submitted.append(task)
        clues.extend(c for c in entry.get("clues", []) if c not in clues)
        results.extend(str(r)[:160] for r in entry.get("results", []))
    text_lines = ["Progress digest:"]
    text_lines.extend(f"task {t}: submitted" for t in submitted)
    text_lines.append("clues revealed: " + (", ".join(clues) if clues else "none"))
    text_lines.append("recent results:")
    text_lines.extend(results[-3:])
    return {"kind": "digest", "text": "\n".join(text_lines), "tasks": submitted, "clues": clues}


def maintain_history(history: list[dict], new_entry: dict | None,
                     threshold: int = DEFAULT_HISTORY_THRESHOLD) -> list[dict]:
    """Append the newest exchange; once the token estimate exceeds the
    threshold, replace the oldest half of the entries with a single digest.
    The newest exchanges always stay verbatim."""
    entries = list(history)
    if new_entry is not None:
        entries.append(new_entry)
    if len(entries) >= 2 and sum(estimate_tokens(_entry_text(e)) for e in entries) > threshold:
        half = max(1, len(entries) // 2)
        entries = [_digest(entries[:half])] + entries[half:]
    return entries


class ScriptedBackend:
    """Returns canned response texts in order; exhausted -> empty response."""

    def __init__(self, responses: list[str]):
        self._responses = list(responses)
        self._next = 0

    def complete(self, request: dict) -> str:
        if self._next >= len(self._responses):
            return ""
        text = self._responses[self._next]
        self._next += 1
        return text


class MockBackend:
    """Table lookup keyed on the last user message; misses produce a fixed
    think-only turn."""

    def __init__(self, table: dict[str, str]):
        self._table = dict(table)

    def complete(self, request: dict) -> str:
        messages = request.get("messages", [])
        key = messages[-1]["content"] if messages else ""
        return self._table.get(key, "Let me think about the next move.")


class RemoteBackend:
    """Chat-completion style call against a configured endpoint."""

    def __init__(self, endpoint: str | None = None, api_key: str | None = None,
                 model: str = "default", retries: int = 3, timeout: float = 60.0):
        self.endpoint = endpoint or os.environ.get("WORKSIM_MODEL_ENDPOINT", "")
        self.api_key = api_key or os.environ.get("WORKSIM_MODEL_KEY", "")
        self.model = model
        self.retries = retries
        self.timeout = timeout

    def complete(self, request: dict) -> str:
        if not self.endpoint:
            raise WorksimError("remote backend has no endpoint configured")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {"model": self.model, "messages": request.get("messages", [])}
        last_error: Exception | None = None
        for _attempt in range(self.retries):
            try:
                response = httpx.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
                response.raise_for_status()
                data = response.json()
                return data["choices"][0]["message"]["content"]
            except Exception as exc:  # transport errors are retryable
                last_error = exc
        raise WorksimError(f"remote model unreachable after {self.retries} attempts: {last_error}")


def invoke_model(request: dict, backend) -> ModelExchange:
    text = backend.complete(request)
    return ModelExchange(request=request, response_text=text, parsed=parse_tool_calls(text))


def parse_tool_calls(text: str):
    """Extract ordered tool calls from the documented block format; returns
    None when the response carries no valid call blocks (unparseable turn)."""
    blocks = TOOL_CALL_RE.findall(text or "")
    if not blocks:
        return None
    calls = []
    for block in blocks:
        try:
            doc = json.loads(block)
        except ValueError:
            return None
        if not isinstance(doc, dict) or "tool" not in doc:
            return None
        calls.append({"tool": doc["tool"], "arguments": dict(doc.get("arguments", {}))})
    return calls


# -- model-backed agent loop ---------------------------------------------------

class ModelAgent:
    """The reference prompt -> model -> parse loop behind a scripted-agent
    interface, so the same episode runner drives both kinds of agents."""

    def __init__(self, backend, history_threshold: int = DEFAULT_HISTORY_THRESHOLD,
                 persona: str = AGENT_PERSONA, experiences: list[ExperienceRecord] | None = None):
        self.backend = backend
        self.history_threshold = history_threshold
        self.persona = persona
        self.experiences = experiences or []
        self.system_prompt = ""
        self.history: list[dict] = []
        self.wasted_turns = 0
        self._reported_unparseable = False

    def start(self, scenario: Scenario, observation: dict) -> None:
        self.system_prompt = build_system_prompt(observation, self.persona, self.experiences)

    def next_actions(self, observation: dict):
        user_text = canonical_dumps(observation)
        messages = [{"role": "system", "content": self.system_prompt}]
        for entry in self.history:
            messages.append({"role": "assistant", "content": _entry_text(entry)})
        messages.append({"role": "user", "content": user_text})
        exchange = invoke_model({"messages": messages}, self.backend)
        if not exchange.response_text:
            return None  # backend exhausted -> explicit stop
        if exchange.parsed is None:
            self.wasted_turns += 1
            if not self._reported_unparseable:
                # one corrective nudge before the turn counts as wasted
                self._reported_unparseable = True
                self.history = maintain_history(
                    self.history,
                    {"kind": "exchange", "thought": "unparseable response; use <tool_call> blocks",
                     "actions": [], "results": [], "clues": []},
                    self.history_threshold,
                )
            return []
        self.history = maintain_history(
            self.history,
            {"kind": "exchange", "thought": exchange.response_text, "actions": exchange.parsed,
             "results": [], "clues": []},
            self.history_threshold,
        )
        return exchange.parsed

    def record_results(self, results: list, observation: dict) -> None:
        if self.history and self.history[-1]["kind"] == "exchange":
            self.history[-1]["results"] = [r for r in results]
            self.history[-1]["clues"] = list(observation.get("clues_revealed", []))


# -- episode runners -----------------------------------------------------------

def run_episode(agent, scenario: Scenario, *, service: SessionService | None = None,
                budget: int = DEFAULT_STEP_BUDGET,
                hints: list[tuple[int, str]] | None = None) -> EpisodeResult:
    """Drive one agent through one scenario and finalize.

    Stops on: agent returning None (explicit stop), every released task
    submitted (for scenarios where every task takes a submission), the step
    budget, or the end of the workday.
    """
    service = service or SessionService()
    if scenario.scenario_id not in service.scenarios:
        service.add_scenario(scenario)
    session_id, observation = service.create_session(scenario.scenario_id)
    for tier, text in hints or []:
        service.inject_hint(session_id, tier, text)
    agent.start(scenario, observation)
    system_prompt = getattr(agent, "system_prompt", "") or build_system_prompt(observation)

    submission_tasks = {
        t.task_id for t in scenario.tasks
        if any(cp.kind in ("submission_matches", "submission_optimal") for cp in t.checkpoints)
    }
    workday_end = scenario.workday[1]
    stop_reason = "budget"
    step = 0
    while step < budget:
        step += 1
        actions = agent.next_actions(observation)
        if actions is None:
            stop_reason = "script_end"
            break
        if not actions:
            service.note_step(session_id, step)
            continue
        results = []
        for call in actions:
            outcome = service.act(session_id, call["tool"], call.get("arguments", {}), step=step)
            observation = outcome["observation"]
            results.append(outcome["result"]["payload"])
        if hasattr(agent, "record_results"):
            agent.record_results(results, observation)
        state = service.get_session(session_id).state
        if submission_tasks and submission_tasks <= {r["task_id"] for r in state.submissions()}:
            lacking = [t for t in scenario.tasks if t.task_id not in submission_tasks]
            if not lacking:
                stop_reason = "all_submitted"
                break
        if parse_clock(observation["clock"]) >= workday_end:
            stop_reason = "workday_end"
            break
    session = service.get_session(session_id)
    report = service.finalize(session_id)
    return EpisodeResult(
        report=report,
        stop_reason=stop_reason,
        trajectory=list(session.trajectory),
        system_prompt=system_prompt,
        wasted_turns=getattr(agent, "wasted_turns", 0),
    )


def verbatim_reflector(report: dict, bundle: FeedbackBundle, trajectory: list[dict],
                       day: int = 1) -> list[ExperienceRecord]:
    """The baseline reflector: one experience per feedback line, verbatim."""
    rule_by_checkpoint: dict[str, str] = {}
    for task in report["tasks"]:
        for cp in task["checkpoints"]:
            rule_by_checkpoint[cp["description"]] = task["rule_id"]
    return [
        ExperienceRecord(
            rule_id=rule_by_checkpoint.get(description, "unknown"),
            day=day,
            insight=line,
            source_feedback=line,
        )
        for description, line in bundle.missed
    ]


@dataclass
class TwoDayResult:
    day1: EpisodeResult
    day2: EpisodeResult
    delta: float
    experiences: list[ExperienceRecord]
    day2_system_prompt: str


def run_two_day(rule_ids: list[str], seeds: tuple[int, int], agent_factory,
                reflector=verbatim_reflector, *, budget: int = DEFAULT_STEP_BUDGET) -> TwoDayResult:
    """Two-phase continual-learning run: same rule sequence both days, fresh
    draws each day; day-1 feedback becomes day-2 experiences."""
    s1, s2 = seeds
    if s1 == s2:
        raise WorksimError("two-day runs need distinct seeds per day")
    rules = [get_rule(rid) for rid in rule_ids]
    scenario1 = compose(rules, s1, date="2025-10-01", dependency_probability=0.0, at_time_probability=0.0)
    scenario2 = compose(rules, s2, date="2025-10-02", dependency_probability=0.0, at_time_probability=0.0)

    day1 = run_episode(agent_factory(1, []), scenario1, budget=budget)
    bundle = FeedbackBundle(
        scenario_id=scenario1.scenario_id,
        day=1,
        missed=[(f["checkpoint"], f["feedback"]) for f in day1.report["feedback"]],
    )
    experiences = reflector(day1.report, bundle, day1.trajectory, day=1)

    day2_agent = agent_factory(2, experiences)
    day2 = run_episode(day2_agent, scenario2, budget=budget)
    from .world import initial_observation

    day2_prompt = build_system_prompt(
        initial_observation(scenario2).to_dict(), AGENT_PERSONA, experiences
    )
    delta = float(day2.score - day1.score)
    return TwoDayResult(day1=day1, day2=day2, delta=delta, experiences=experiences,
                        day2_system_prompt=day2_prompt)


def run_benchmark(benchmark: Benchmark, agent_factory, parallelism: int = 1,
                  *, budget: int = DEFAULT_STEP_BUDGET, out_dir: str | None = None) -> dict:
    """Run every scenario of the benchmark (optionally in parallel) and
    aggregate. Per-episode failures are recorded, not raised."""
    results: list[EpisodeResult | None] = [None] * len(benchmark.scenarios)
    failures: list[dict] = []
    failure_lock = threading.Lock()

    def _run(i: int) -> None:
        scenario = benchmark.scenarios[i]
        try:
            results[i] = run_episode(agent_factory(scenario), scenario, budget=budget)
        except Exception as exc:
            with failure_lock:
                failures.append({"scenario_id": scenario.scenario_id, "error": str(exc)})

    if parallelism <= 1:
        for i in range(len(benchmark.scenarios)):
            _run(i)
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            list(pool.map(_run, range(len(benchmark.scenarios))))

    completed = [r for r in results if r is not None]
    done = [r.report for r in completed]
    if not done:
        raise WorksimError("no episode of the benchmark completed")
    aggregate = metrics(done)
    strata = stratify(done, {r.rule_id: r.difficulty for r in list_rules()})
    doc = {
        "version": 1,
        "benchmark_id": benchmark.benchmark_id,
        "episodes": len(done),
        "failures": failures,
        "metrics": aggregate.to_dict(),
        "strata": {k: (v.to_dict() if v else None) for k, v in strata.items()},
        "per_scenario": [
            {
                "scenario_id": r["scenario_id"],
                "score": r["score"]["display"],
                "counters": r["counters"],
                "tasks_completed": sum(1 for t in r["tasks"] if t["completed"]),
                "tasks_total": len(r["tasks"]),
            }
            for r in done
        ],
    }
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        for result in completed:
            scenario_id = result.report["scenario_id"]
            with open(os.path.join(out_dir, f"episode-{scenario_id}.json"), "wb") as fh:
                fh.write(canonical_bytes(result.report))
            write_episode_log(os.path.join(out_dir, f"log-{scenario_id}.jsonl"), result)
        with open(os.path.join(out_dir, "benchmark-report.json"), "wb") as fh:
            fh.write(canonical_bytes(doc))
    return doc


def write_episode_log(path: str, result: EpisodeResult, agent_name: str = "Alice Smith") -> None:
    """JSONL episode log, one record per step, in the tool-call log shape."""
    by_step: dict[int, list[dict]] = {}
    for entry in result.trajectory:
        if entry.get("type") != "action":
            continue
        by_step.setdefault(entry["step"], []).append(entry)
    with open(path, "w", encoding="utf-8") as fh:
        for step in sorted(by_step):
            calls = by_step[step]
            record = {
                "step": step,
                "system_time": f"Current time is {calls[0]['clock']}:00.",
                "agent": agent_name,
                "tool_calls": [
                    {
                        "tool_name": f"{c['tool_name']}()",
                        "arguments": c["arguments"],
                        "execute_results": c["payload"],
                    }
                    for c in calls
                ],
            }
            fh.write(canonical_dumps(record) + "\n")
