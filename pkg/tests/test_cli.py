"""End-to-end command line checks (fresh interpreter per invocation)."""

import os
import subprocess
import sys


def _run(args, **env_overrides):
    env = dict(os.environ, **env_overrides)
    return subprocess.run(
        [sys.executable, "-m", "worksim.cli", *args],
        capture_output=True,
        text=True,
        env=env,
        timeout=300,
    )


def test_gen_is_byte_identical_across_processes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    # different hash seeds stand in for different hosts
    r1 = _run(["gen", "--n", "5", "--seed", "42", "--out", str(a)], PYTHONHASHSEED="1")
    r2 = _run(["gen", "--n", "5", "--seed", "42", "--out", str(b)], PYTHONHASHSEED="31337")
    assert r1.returncode == 0 and r2.returncode == 0, r1.stderr + r2.stderr
    assert (a / "benchmark.json").read_bytes() == (b / "benchmark.json").read_bytes()


def test_gen_respects_rule_filter(tmp_path):
    r = _run(["gen", "--rules", "contact_lookup,report_drafting", "--n", "3", "--seed", "1",
              "--out", str(tmp_path)])
    assert r.returncode == 0, r.stderr
    data = (tmp_path / "benchmark.json").read_text()
    assert "contact_lookup" in data and "advertising_campaign" not in data


def test_run_score_report_cycle(tmp_path):
    gen = _run(["gen", "--n", "3", "--seed", "7", "--out", str(tmp_path)])
    assert gen.returncode == 0, gen.stderr
    out = tmp_path / "episodes"
    run = _run(["run", "--benchmark", str(tmp_path / "benchmark.json"), "--agent", "oracle",
                "--parallelism", "2", "--out", str(out)])
    assert run.returncode == 0, run.stderr
    assert '"success_rate": 1.0' in run.stdout

    score = _run(["score", str(out)])
    assert score.returncode == 0, score.stderr
    assert '"checkpoint_score": 1.0' in score.stdout

    report = _run(["report", str(out / "benchmark-report.json")])
    assert report.returncode == 0, report.stderr
    assert "success rate     1.00" in report.stdout
