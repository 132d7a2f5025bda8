"""Rule library: deterministic draws, instantiation, and solution scripts."""

from collections import Counter

import pytest

from worksim.compose import compose, initial_state
from worksim.errors import InstantiationError
from worksim.harness import run_episode
from worksim.agents import OracleAgent
from worksim.tasks import get_rule, instantiate, list_rules, name_pool, oracle_solve, rnd
from worksim.tasks.model import render


def test_catalog_covers_all_domains():
    rules = list_rules()
    assert len(rules) >= 10
    assert {r.domain for r in rules} == {
        "info_synthesis", "time_management", "proactive_inquiry", "strategic_modeling",
    }
    assert [r.rule_id for r in rules] == sorted(r.rule_id for r in rules)


def test_filters():
    strategic = list_rules(domain="strategic_modeling")
    assert {r.rule_id for r in strategic} == {"advertising_campaign", "event_planning"}
    assert list_rules(domain="strategic_modeling", difficulty="easy") == []
    assert all(r.difficulty == "hard" for r in strategic)


def test_rnd_is_deterministic():
    rule = get_rule("advertising_campaign")
    a, b = rnd(123, rule), rnd(123, rule)
    assert [p.name for p in a.personas] == [p.name for p in b.personas]
    assert a.env_data == b.env_data


def test_rnd_substream_independence():
    # Perturbing the persona pool must leave environment numerics unchanged.
    import worksim.tasks.model as model

    rule = get_rule("advertising_campaign")
    baseline = rnd(5, rule).env_data
    original = model._name_pool
    try:
        model._name_pool = list(reversed(name_pool()))
        assert rnd(5, rule).env_data == baseline
    finally:
        model._name_pool = original


def test_persona_tuples_vary_across_seeds():
    # Collision scan: over 10^4 seeds, at least 99% of seed pairs draw
    # different persona tuples (the pool is finite, so exact distinctness
    # over 10^4 draws is not attainable for single-slot rules).
    for rule_id in ("data_completion", "website_monitoring"):
        rule = get_rule(rule_id)
        counts = Counter(tuple(p.name for p in rnd(seed, rule).personas) for seed in range(10_000))
        same_pairs = sum(c * (c - 1) // 2 for c in counts.values())
        total_pairs = 10_000 * 9_999 // 2
        assert 1 - same_pairs / total_pairs >= 0.99


def test_instantiation_concretizes_and_varies():
    rule = get_rule("contact_lookup")
    one = instantiate(rule, rnd(1, rule))
    two = instantiate(rule, rnd(2, rule))
    assert one.description != two.description
    assert "{" not in one.description


def test_data_completion_manual_is_a_file_clue():
    rule = get_rule("data_completion")
    instance = instantiate(rule, rnd(7, rule))
    file_clues = [c for c in instance.clues if c.custodian["kind"] == "file"]
    assert file_clues[0].custodian["path"] == "data_completion/data_completion_manual.md"
    assert "data_completion/data_completion_manual.md" in instance.env.files


def test_ads_instance_checkpoints_cover_handbook_math_and_optimality():
    rule = get_rule("advertising_campaign")
    instance = instantiate(rule, rnd(3, rule))
    kinds = [cp.kind for cp in instance.checkpoints]
    assert kinds == ["file_read", "file_read", "submission_matches", "submission_optimal"]
    objective = instance.checkpoints[-1].params["objective"]
    assert objective["kind"] == "ads" and objective["optimal_exposure"] > 0


def test_descriptions_never_contain_clue_content():
    for rule in list_rules():
        for seed in range(40):
            instance = instantiate(rule, rnd(seed, rule))
            for clue in instance.clues:
                assert clue.content not in instance.description


def test_render_names_unresolved_slot():
    with pytest.raises(InstantiationError, match="missing_slot"):
        render("hello {missing_slot}", {"other": 1})


def test_zero_slot_draw_still_seeds_env():
    rule = get_rule("meeting_attendance")
    draw = rnd(11, rule)
    assert len(draw.personas) == 1  # organizer slot only
    assert draw.env_data["meeting_start"] > 0


@pytest.mark.parametrize("rule_id", [r.rule_id for r in list_rules()])
def test_oracle_script_completes_every_checkpoint(rule_id):
    # 20 seeds per rule here; the acceptance suite runs the wider sweep.
    rule = get_rule(rule_id)
    for seed in range(20):
        scenario = compose([rule], seed, dependency_probability=0.0, at_time_probability=0.0)
        result = run_episode(OracleAgent(), scenario)
        assert result.report["score"]["display"] == "1.00", (rule_id, seed, result.report)


def test_oracle_solve_returns_copies():
    rule = get_rule("transaction_auditing")
    instance = instantiate(rule, rnd(4, rule))
    script = oracle_solve(instance)
    script[0]["tool"] = "Tampered"
    assert instance.oracle[0]["tool"] != "Tampered"


def test_npc_held_clue_released_by_script_trigger():
    rule = get_rule("contact_lookup")
    scenario = compose([rule], 12, dependency_probability=0.0, at_time_probability=0.0)
    instance = scenario.tasks[0]
    ask = next(a for a in instance.oracle if a["tool"] == "AskNPC")
    state = initial_state(scenario)
    from worksim.world import Action, transition

    new, obs = transition(state, Action(ask["tool"], ask["arguments"]))
    npc_clues = [c.clue_id for c in instance.clues if c.custodian["kind"] == "npc"]
    assert set(npc_clues) <= new.revealed_clues
