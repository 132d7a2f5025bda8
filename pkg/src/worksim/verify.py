"""Checkpoint evaluation, scenario scoring, metrics, and feedback bundles.

Checkpoints are judged once, at episode finalization, against the cumulative
evidence of the whole episode (final state + trajectory). Every predicate is
mechanical; there is no model-graded judging anywhere in here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .jsonio import canonical_dumps, parse_clock
from .npc import normalize, phrase_in
from .oracles import _distance_table, plan_score


@dataclass
class Checkpoint:
    checkpoint_id: str
    task_id: str
    kind: str
    params: dict
    description: str
    feedback_template: str
    status: str = "pending"  # "pending" | "completed" | "missed"

    def to_dict(self) -> dict:
        return {
            "checkpoint_id": self.checkpoint_id,
            "task_id": self.task_id,
            "kind": self.kind,
            "params": self.params,
            "description": self.description,
            "feedback": self.feedback_template,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Checkpoint":
        return cls(
            checkpoint_id=d["checkpoint_id"],
            task_id=d["task_id"],
            kind=d["kind"],
            params=d["params"],
            description=d["description"],
            feedback_template=d["feedback"],
            status=d.get("status", "pending"),
        )


@dataclass
class FeedbackBundle:
    scenario_id: str
    day: int
    missed: list[tuple[str, str]] = field(default_factory=list)  # (description, feedback line)

    @property
    def lines(self) -> list[str]:
        return [line for _desc, line in self.missed]

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "day": self.day,
            "missed": [{"checkpoint": d, "feedback": f} for d, f in self.missed],
        }


@dataclass
class Metrics:
    success_rate: float
    checkpoint_score: float
    avg_steps: float
    avg_tool_calls: float

    def to_dict(self) -> dict:
        return {
            "success_rate": round(self.success_rate, 4),
            "checkpoint_score": round(self.checkpoint_score, 4),
            "avg_steps": round(self.avg_steps, 2),
            "avg_tool_calls": round(self.avg_tool_calls, 2),
        }


_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")


def _stringify(content) -> str:
    return content if isinstance(content, str) else canonical_dumps(content)


def _numbers_in(content) -> list[float]:
    if isinstance(content, dict):
        found: list[float] = []
        for value in content.values():
            found.extend(_numbers_in(value))
        return found
    if isinstance(content, list):
        found = []
        for value in content:
            found.extend(_numbers_in(value))
        return found
    if isinstance(content, bool):
        return []
    if isinstance(content, (int, float)):
        return [float(content)]
    if isinstance(content, str):
        cleaned = content.replace(",", "").replace("$", " ")
        return [float(m) for m in _NUMBER_RE.findall(cleaned)]
    return []


def _latest_submission(state, task_id: str) -> dict | None:
    rows = state.submissions(task_id)
    return rows[-1] if rows else None


def _action_entries(trajectory) -> list[dict]:
    return [e for e in trajectory if e.get("type", "action") == "action"]


def _match_args(entry_args: dict, wanted: dict) -> bool:
    return all(entry_args.get(k) == v for k, v in wanted.items())


# -- matcher kinds ---------------------------------------------------------

def _match_submission(matcher: dict, content) -> bool:
    kind = matcher["kind"]
    if kind == "contains":
        return str(matcher["value"]).lower() in _stringify(content).lower()
    if kind == "keywords":
        text = _stringify(content).lower()
        return all(str(v).lower() in text for v in matcher["values"])
    if kind == "number":
        target = float(matcher["value"])
        return any(abs(n - target) < 1e-9 for n in _numbers_in(content))
    if kind == "id_set":
        wanted = set(matcher["values"])
        if isinstance(content, dict) and isinstance(content.get("ids"), list):
            return set(map(str, content["ids"])) == wanted
        if isinstance(content, list):
            return set(map(str, content)) == wanted
        pattern = matcher.get("token_pattern", r"[A-Za-z]+-\d+")
        return set(re.findall(pattern, _stringify(content))) == wanted
    if kind == "ads_plan":
        return _ads_plan_totals(matcher, content) is not None
    if kind == "event_plan":
        return _event_plan_value(matcher, content, check_reported=True) is not None
    raise ValueError(f"unknown submission matcher kind: {kind!r}")


def _ads_plan_totals(params: dict, content):
    """(true cost, true exposure) of a submitted channel plan, or None when the
    plan is malformed, overlaps, overspends, or misreports its totals."""
    if not isinstance(content, dict):
        return None
    names = content.get("channels")
    if not isinstance(names, list) or len(set(names)) != len(names):
        return None
    table = params["channels"]
    if any(name not in table for name in names):
        return None
    cost = sum(table[name][0] for name in names)
    exposure = sum(table[name][1] for name in names)
    if cost > params["budget"]:
        return None
    if content.get("total_cost") != cost or content.get("total_exposure") != exposure:
        return None
    return cost, exposure


def _event_plan_value(params: dict, content, check_reported: bool):
    """Recomputed score of a submitted event plan, or None when infeasible."""
    if not isinstance(content, dict):
        return None
    date = content.get("date")
    itinerary = content.get("itinerary")
    if date not in params["common_dates"] or not isinstance(itinerary, list):
        return None
    constraints = {
        "venues_required": params["required"],
        "start": params.get("start", "Office"),
        "distance_penalty": params.get("penalty", 1),
    }
    dist = _distance_table(params["map"])
    value = plan_score(tuple(itinerary), date, params["venues"], constraints, dist)
    if value is None:
        return None
    if check_reported and content.get("score") != value:
        return None
    return value


def _objective_met(objective: dict, content) -> bool:
    kind = objective["kind"]
    if kind == "ads":
        # Reported totals are irrelevant for optimality; recompute from truth.
        if not isinstance(content, dict):
            return False
        names = content.get("channels")
        if not isinstance(names, list) or len(set(names)) != len(names):
            return False
        table = objective["channels"]
        if any(name not in table for name in names):
            return False
        cost = sum(table[name][0] for name in names)
        exposure = sum(table[name][1] for name in names)
        return cost <= objective["budget"] and exposure == objective["optimal_exposure"]
    if kind == "event":
        value = _event_plan_value(objective, content, check_reported=False)
        if value is None:
            return False
        optimal = objective["optimal_score"]
        if isinstance(optimal, int) and isinstance(value, int):
            return value == optimal
        return abs(value - optimal) <= 1e-6 * max(1.0, abs(optimal))
    raise ValueError(f"unknown optimality objective kind: {kind!r}")


# -- predicate evaluation ----------------------------------------------------

def _check(cp: Checkpoint, task, state, actions: list[dict]) -> bool:
    p = cp.params
    if cp.kind == "npc_asked":
        for e in actions:
            if e["tool_name"] == "AskNPC" and e["status"] == "ok" and e["arguments"].get("npc") == p["npc"]:
                tokens = normalize(e["arguments"].get("message", ""))
                if all(phrase_in(tokens, kw) for kw in p["keywords"]):
                    return True
        return False
    if cp.kind == "message_sent":
        for e in actions:
            if e["tool_name"] == "SendMessage" and e["status"] == "ok" and e["arguments"].get("receiver") == p["to"]:
                tokens = normalize(e["arguments"].get("message", ""))
                if all(phrase_in(tokens, kw) for kw in p["keywords"]):
                    return True
        return False
    if cp.kind == "file_read":
        from .tools import normalize_path

        return any(
            e["tool_name"] == "ReadFile" and e["status"] == "ok"
            and normalize_path(e["arguments"].get("path", "")) == p["path"]
            for e in actions
        )
    if cp.kind == "clue_revealed":
        return p["clue"] in state.revealed_clues
    if cp.kind == "meeting_attended":
        return state.meeting_minutes.get(p["meeting_id"], 0) >= p["min_minutes"]
    if cp.kind == "deadline_met":
        by = parse_clock(p["by"])
        evidence = p.get("evidence")
        if evidence is None:
            # On time means the *qualifying* work landed before the deadline:
            # when the task judges submissions, only a submission that passes
            # the task's matcher counts.
            matcher = None
            if task is not None:
                for sibling in task.checkpoints:
                    if sibling.kind == "submission_matches":
                        matcher = sibling.params["matcher"]
                        break
            for row in state.submissions(cp.task_id):
                if parse_clock(row["submitted_at"]) > by:
                    continue
                if matcher is None or _match_submission(matcher, row["content"]):
                    return True
            return False
        for e in actions:
            if e["tool_name"] != evidence["tool"] or e["status"] != "ok":
                continue
            if not _match_args(e["arguments"], evidence.get("args", {})):
                continue
            if parse_clock(e["clock"]) <= by:
                return True
        return False
    if cp.kind == "submission_matches":
        row = _latest_submission(state, cp.task_id)
        return row is not None and _match_submission(p["matcher"], row["content"])
    if cp.kind == "submission_optimal":
        row = _latest_submission(state, cp.task_id)
        return row is not None and _objective_met(p["objective"], row["content"])
    raise ValueError(f"unknown checkpoint kind: {cp.kind!r}")


def evaluate(scenario, final_state, trajectory) -> list[Checkpoint]:
    """Judge every checkpoint of the scenario once; returns copies with a
    final status of either 'completed' or 'missed'."""
    actions = _action_entries(trajectory)
    judged = []
    for task in scenario.tasks:
        for cp in task.checkpoints:
            done = _check(cp, task, final_state, actions)
            judged.append(replace(cp, status="completed" if done else "missed"))
    return judged


def score(checkpoints: list[Checkpoint]) -> Fraction:
    """Scenario score: mean over tasks of each task's completed-checkpoint ratio."""
    by_task: dict[str, list[Checkpoint]] = {}
    for cp in checkpoints:
        by_task.setdefault(cp.task_id, []).append(cp)
    if not by_task:
        raise ValueError("cannot score a scenario with no tasks")
    total = Fraction(0)
    for task_id, cps in by_task.items():
        if not cps:
            raise ValueError(f"task {task_id} has no checkpoints; scenario construction bug")
        completed = sum(1 for cp in cps if cp.status == "completed")
        total += Fraction(completed, len(cps))
    return total / len(by_task)


def display_score(value: Fraction) -> str:
    return f"{float(value):.2f}"


def feedback(checkpoints: list[Checkpoint], scenario_id: str, day: int = 1) -> FeedbackBundle:
    """One feedback line per missed checkpoint, in checkpoint order."""
    missed = [(cp.description, cp.feedback_template) for cp in checkpoints if cp.status == "missed"]
    return FeedbackBundle(scenario_id=scenario_id, day=day, missed=missed)


# -- aggregate metrics -------------------------------------------------------

def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def metrics(reports: list[dict]) -> Metrics:
    """Aggregate episode reports: task-level success rate, mean scenario score,
    and per-scenario step / tool-call averages."""
    if not reports:
        raise ValueError("metrics() needs at least one episode report")
    total_tasks = sum(len(r["tasks"]) for r in reports)
    completed = sum(1 for r in reports for t in r["tasks"] if t["completed"])
    scores = [Fraction(r["score"]["exact"]) for r in reports]
    return Metrics(
        success_rate=completed / total_tasks if total_tasks else 0.0,
        checkpoint_score=float(sum(scores) / len(scores)),
        avg_steps=_mean([float(r["counters"]["steps"]) for r in reports]),
        avg_tool_calls=_mean([float(r["counters"]["tool_calls"]) for r in reports]),
    )


def stratify(reports: list[dict], difficulty_by_rule: dict[str, str]) -> dict[str, Metrics | None]:
    """Recompute the same metrics per difficulty stratum. A stratum with no
    tasks anywhere reports as absent (None)."""
    out: dict[str, Metrics | None] = {}
    for level in ("easy", "hard"):
        task_total = 0
        task_completed = 0
        scenario_scores: list[Fraction] = []
        steps: list[float] = []
        calls: list[float] = []
        for report in reports:
            stratum_tasks = [
                t for t in report["tasks"] if difficulty_by_rule.get(t["rule_id"]) == level
            ]
            if not stratum_tasks:
                continue
            task_total += len(stratum_tasks)
            task_completed += sum(1 for t in stratum_tasks if t["completed"])
            ratio = sum(Fraction(t["ratio"]) for t in stratum_tasks) / len(stratum_tasks)
            scenario_scores.append(ratio)
            steps.append(float(report["counters"]["steps"]))
            calls.append(float(report["counters"]["tool_calls"]))
        if task_total == 0:
            out[level] = None
            continue
        out[level] = Metrics(
            success_rate=task_completed / task_total,
            checkpoint_score=float(sum(scenario_scores) / len(scenario_scores)),
            avg_steps=_mean(steps),
            avg_tool_calls=_mean(calls),
        )
    return out
