"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every test prints a single [PASS]/[FAIL] line (run with ``pytest -s`` to see
them inline; they also appear in captured output on failure).
"""

import os
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from worksim.compose import build_benchmark, compose
from worksim.harness import (
    LESSONS_HEADER,
    build_system_prompt,
    run_benchmark,
    run_episode,
    run_two_day,
)
from worksim.agents import (
    ExperienceFollowingAgent,
    HintFollowingAgent,
    NoShowAgent,
    OracleAgent,
    hint_texts,
    random_agent_for,
)
from worksim.jsonio import canonical_bytes
from worksim.rng import Stream, derive_seed
from worksim.session import action_log, replay
from worksim.tasks import get_rule, instantiate, list_rules, rnd
from worksim.verify import score as eq_score
from worksim.world import initial_observation

from test_oracles import brute_force_event_plan, brute_force_knapsack, _fixture as event_fixture
from test_verify import _cp, brute_force_score

DEFAULT_SEED = 42


def _verdict(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def default_benchmark():
    return build_benchmark(list_rules(), n=50, seed=DEFAULT_SEED)


def test_acceptance_determinism(tmp_path):
    started = time.monotonic()
    outs = []
    for hash_seed, sub in (("1", "h1"), ("98765", "h2")):
        out = tmp_path / sub
        env = dict(os.environ, PYTHONHASHSEED=hash_seed)
        proc = subprocess.run(
            [sys.executable, "-m", "worksim.cli", "gen", "--n", "50", "--seed", str(DEFAULT_SEED),
             "--out", str(out)],
            capture_output=True, text=True, env=env, timeout=60,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append((out / "benchmark.json").read_bytes())
    elapsed = time.monotonic() - started

    from worksim.compose import Benchmark

    bench = Benchmark.from_bytes(outs[0])
    ks = [len(s.tasks) for s in bench.scenarios]
    ok = outs[0] == outs[1] and all(2 <= k <= 6 for k in ks) and len(ks) == 50 and elapsed < 10
    _verdict("determinism: gen --n 50 --seed 42 byte-identical across hosts, k in [2,6]", ok,
             f"{elapsed:.1f}s")


def test_acceptance_uniqueness():
    started = time.monotonic()
    rules = list_rules()
    duplicates = 0
    for seed in range(1000):
        pick = Stream(derive_seed("uniqueness", seed))
        k = pick.randint(2, 6)
        chosen = [rules[pick.randbelow(len(rules))] for _ in range(k)]
        scenario = compose(chosen, seed)
        names = [n.profile.name for n in scenario.npc_cast]
        if len(names) != len(set(names)):
            duplicates += 1
        by_dir: dict[str, list[str]] = {}
        for path in scenario.initial_files:
            folder, _, base = path.rpartition("/")
            by_dir.setdefault(folder, []).append(base)
        if any(len(v) != len(set(v)) for v in by_dir.values()):
            duplicates += 1
        tables = list(scenario.initial_data)
        if len(tables) != len(set(tables)):
            duplicates += 1
    elapsed = time.monotonic() - started
    _verdict("uniqueness: zero duplicate entity names over 1000 composition seeds",
             duplicates == 0 and elapsed < 60, f"{elapsed:.1f}s")


def test_acceptance_partial_observability():
    rules = list_rules()
    leaks = 0
    for seed in range(100):
        pick = Stream(derive_seed("observability", seed))
        k = pick.randint(2, 6)
        scenario = compose([rules[pick.randbelow(len(rules))] for _ in range(k)], seed)
        obs = initial_observation(scenario)
        obs_text = obs.to_json()
        prompt = build_system_prompt(obs.to_dict())
        for task in scenario.tasks:
            for clue in task.clues:
                if clue.content in obs_text or clue.content in prompt:
                    leaks += 1
    _verdict("partial observability: no clue content in initial observation or system prompt over 100 seeds",
             leaks == 0)


def test_acceptance_solvability_oracle(default_benchmark):
    started = time.monotonic()
    has_meeting = any(t.env.meeting for s in default_benchmark.scenarios for t in s.tasks)
    has_during = any(
        t.reveal.kind == "during_task" for s in default_benchmark.scenarios for t in s.tasks
    )
    doc = run_benchmark(default_benchmark, lambda s: OracleAgent(), parallelism=8)
    elapsed = time.monotonic() - started
    ok = (
        doc["metrics"]["success_rate"] == 1.0
        and doc["metrics"]["checkpoint_score"] == 1.0
        and has_meeting
        and has_during
        and not doc["failures"]
        and elapsed < 120
    )
    _verdict("solvability: OracleAgent SR=1.00 CS=1.00 on the default 50-scenario benchmark", ok,
             f"{elapsed:.1f}s, meetings={has_meeting}, during-task reveals={has_during}")


def test_acceptance_separation(default_benchmark):
    started = time.monotonic()
    doc = run_benchmark(default_benchmark, lambda s: random_agent_for(s, DEFAULT_SEED), parallelism=8)
    elapsed = time.monotonic() - started
    cs = doc["metrics"]["checkpoint_score"]
    _verdict("separation: seeded RandomAgent CS < 0.05 over the benchmark",
             cs < 0.05 and elapsed < 300, f"CS={cs:.4f}, {elapsed:.1f}s")


def test_acceptance_preemption_contrast():
    rules = [get_rule("meeting_attendance"), get_rule("contact_lookup"), get_rule("report_drafting")]
    scenario = compose(rules, 7001, dependency_probability=0.0, at_time_probability=0.0)
    result = run_episode(NoShowAgent(), scenario)
    wrong = []
    for task in result.report["tasks"]:
        for cp in task["checkpoints"]:
            expected = "missed" if cp["kind"] == "meeting_attended" else "completed"
            if cp["status"] != expected:
                wrong.append(cp)
    _verdict("preemption contrast: NoShowAgent misses exactly the meeting checkpoints", not wrong)


def test_acceptance_score_correctness():
    hand = [_cp("t1", "completed", f"c{i}") for i in range(2)]
    hand += [_cp("t1", "missed", f"c{i}") for i in range(2, 4)]
    hand += [_cp("t2", "completed", f"c{i}") for i in range(3)]
    hand_ok = eq_score(hand) == Fraction(3, 4)

    stream = Stream(20_25)
    mismatches = 0
    for _ in range(1000):
        cps = []
        for t in range(stream.randint(1, 6)):
            for c in range(stream.randint(1, 5)):
                cps.append(_cp(f"t{t}", "completed" if stream.random() < 0.5 else "missed", f"c{c}"))
        if eq_score(cps) != brute_force_score(cps):
            mismatches += 1
    _verdict("score correctness: formula equals brute force on 1000 assignments, hand case 0.75",
             hand_ok and mismatches == 0)


def test_acceptance_optimization_oracles():
    from worksim.errors import NoFeasiblePlan
    from worksim.oracles import event_plan_opt, knapsack_opt

    started = time.monotonic()
    stream = Stream(880)
    knapsack_ok = True
    for _ in range(200):
        n = stream.randint(1, 15)
        channels = [(stream.randint(1, 30), stream.randint(0, 90)) for _ in range(n)]
        budget = stream.randint(0, 80)
        if knapsack_opt(budget, channels) != brute_force_knapsack(budget, channels):
            knapsack_ok = False
            break

    event_ok = True
    checked = 0
    seed = 0
    while checked < 50:
        seed += 1
        people, venues, constraints, venue_map = event_fixture(seed)
        expected = brute_force_event_plan(people, venues, constraints, venue_map)
        if expected is None:
            try:
                event_plan_opt(people, venues, constraints, venue_map)
                event_ok = False
                break
            except NoFeasiblePlan:
                continue
        if event_plan_opt(people, venues, constraints, venue_map) != expected:
            event_ok = False
            break
        checked += 1
    elapsed = time.monotonic() - started
    _verdict("optimization oracles: knapsack (200 instances) and event plan (50 fixtures) exact",
             knapsack_ok and event_ok and elapsed < 30, f"{elapsed:.1f}s")


EXPECTED_FEEDBACK = [
    "You should ask HR for the one who is responsible for maintaning the company website. "
    "Then he/she will help you solve the problem.",
    "You should inform the one who is mantaining the company website of the problem you "
    "discovered clearly, such as the website database is almost full.",
    "You should seek authorization from the Engineering Managers.",
]


class _BrowseOnlyAgent:
    """Checks the site, then stops: misses exactly the three follow-ups."""

    def start(self, scenario, observation):
        url = scenario.websites[0]["url"]
        self._script = [{"tool": "BrowseWebsite", "arguments": {"url": url}}]

    def next_actions(self, observation):
        return [self._script.pop(0)] if self._script else None


def test_acceptance_feedback_fidelity():
    scenario = compose([get_rule("website_monitoring")], 5150,
                       dependency_probability=0.0, at_time_probability=0.0)
    result = run_episode(_BrowseOnlyAgent(), scenario)
    lines = [f["feedback"] for f in result.report["feedback"]]
    _verdict("feedback fidelity: the three missed-checkpoint lines verbatim",
             lines == EXPECTED_FEEDBACK, f"got {len(lines)} lines")


def test_acceptance_continual_learning_loop():
    out = run_two_day(["contact_lookup", "data_completion"], (301, 302),
                      lambda day, exps: ExperienceFollowingAgent(exps))
    improved = out.delta > 0

    perfect = run_two_day(["contact_lookup"], (11, 12), lambda day, exps: OracleAgent())
    clean_prompt = LESSONS_HEADER not in perfect.day2_system_prompt
    _verdict("continual learning: experience-following agent gains dCS > 0; perfect day 1 leaves no lessons",
             improved and clean_prompt, f"dCS={out.delta:+.3f}")


def _find_hintable_ads_seed() -> int:
    # need an instance where greedy-on-true and optimal-on-estimates are both
    # suboptimal, so tiers 1 and 2 stay strictly below tier 3
    from worksim.oracles import knapsack_opt

    rule = get_rule("advertising_campaign")
    for seed in range(500):
        instance = instantiate(rule, rnd(derive_seed(seed, "task", 0, rule.rule_id), rule))
        objective = instance.checkpoints[-1].params["objective"]
        budget, table = objective["budget"], objective["channels"]
        names = list(table)
        order = sorted(names, key=lambda n: (-(table[n][1] / table[n][0]), names.index(n)))
        chosen, total = [], 0
        for n in order:
            if total + table[n][0] <= budget:
                chosen.append(n)
                total += table[n][0]
        greedy_exp = sum(table[n][1] for n in chosen)
        decoys = {}
        for task_path, content in instance.env.files.items():
            if task_path.endswith("audience_density_estimates.md"):
                for line in content.splitlines():
                    for n in names:
                        if line.startswith(f"- {n}:"):
                            decoys[n] = int(line.rsplit("estimated exposure", 1)[1].strip())
        idx, _ = knapsack_opt(budget, [(table[n][0], decoys[n]) for n in names])
        decoy_exp = sum(table[names[i]][1] for i in idx)
        optimal = objective["optimal_exposure"]
        if greedy_exp < optimal and decoy_exp < optimal:
            return seed
    raise AssertionError("no suitable campaign instance found in 500 seeds")


def test_acceptance_tiered_hints():
    started = time.monotonic()
    seed = _find_hintable_ads_seed()
    scenario = compose([get_rule("advertising_campaign")], seed,
                       dependency_probability=0.0, at_time_probability=0.0)
    texts = hint_texts(scenario)
    scores = []
    for tier in range(4):
        hints = [(tier, texts[tier])] if tier > 0 else []
        result = run_episode(HintFollowingAgent(tier), scenario, hints=hints)
        scores.append(float(result.score))
    elapsed = time.monotonic() - started
    monotone = all(a <= b for a, b in zip(scores, scores[1:]))
    _verdict("tiered hints: CS non-decreasing across tiers 0..3, reaching 1.00",
             monotone and scores[-1] == 1.0 and elapsed < 30,
             "scores=" + "/".join(f"{s:.2f}" for s in scores))


def test_acceptance_replay_and_parallelism(default_benchmark):
    scenario = default_benchmark.scenarios[0]
    episode = run_episode(OracleAgent(), scenario)
    replayed = replay(scenario, action_log(episode.trajectory))
    replay_ok = canonical_bytes(replayed) == canonical_bytes(episode.report)

    serial = run_benchmark(default_benchmark, lambda s: OracleAgent(), parallelism=1)
    parallel = run_benchmark(default_benchmark, lambda s: OracleAgent(), parallelism=8)
    agg_ok = canonical_bytes(serial) == canonical_bytes(parallel)
    _verdict("replay & parallelism: logs replay byte-exactly; parallelism 1 vs 8 aggregate identical",
             replay_ok and agg_ok)
