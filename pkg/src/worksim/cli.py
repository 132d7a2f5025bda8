"""Command line entry points: gen / serve / run / score / report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .compose import Benchmark, build_benchmark
from .jsonio import canonical_loads
from .tasks import get_rule, list_rules
from .verify import metrics


def _cmd_gen(args) -> int:
    if args.rules == "all":
        rules = list_rules()
    elif Path(args.rules).is_file():
        manifest = json.loads(Path(args.rules).read_text("utf-8"))
        rules = [get_rule(rule_id) for rule_id in manifest["rules"]]
    else:
        rules = [get_rule(rule_id.strip()) for rule_id in args.rules.split(",") if rule_id.strip()]
    benchmark = build_benchmark(rules, n=args.n, k_min=args.k_min, k_max=args.k_max, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "benchmark.json"
    path.write_bytes(benchmark.to_bytes())
    print(f"wrote {path} ({len(benchmark.scenarios)} scenarios, seed {args.seed})")
    return 0


def _cmd_serve(args) -> int:
    from .server import serve

    serve(host=args.host, port=args.port, data_dir=args.data)
    return 0


def _agent_factory(config: dict):
    from .agents import OracleAgent, NoShowAgent, random_agent_for

    kind = config.get("backend", "oracle")
    seed = config.get("seed", 0)
    max_steps = config.get("max_steps", 40)
    if kind == "oracle":
        return lambda scenario: OracleAgent()
    if kind == "noshow":
        return lambda scenario: NoShowAgent()
    if kind == "random":
        return lambda scenario: random_agent_for(scenario, seed, max_steps=max_steps)
    raise SystemExit(f"unknown agent backend: {kind!r} (use oracle, noshow, or random)")


def _cmd_run(args) -> int:
    from .harness import run_benchmark

    benchmark = Benchmark.from_bytes(Path(args.benchmark).read_bytes())
    if args.agent and Path(args.agent).exists():
        config = json.loads(Path(args.agent).read_text("utf-8"))
    else:
        config = {"backend": args.agent or "oracle"}
    factory = _agent_factory(config)
    doc = run_benchmark(
        benchmark,
        factory,
        parallelism=args.parallelism,
        budget=config.get("budget", 200),
        out_dir=args.out,
    )
    print(json.dumps(doc["metrics"], indent=2))
    if args.out:
        print(f"episode reports written to {args.out}")
    return 0


def _cmd_score(args) -> int:
    reports = []
    for path in sorted(Path(args.episodes).glob("episode-*.json")):
        reports.append(canonical_loads(path.read_bytes()))
    if not reports:
        print(f"no episode reports under {args.episodes}", file=sys.stderr)
        return 1
    aggregate = metrics(reports)
    print(json.dumps(aggregate.to_dict(), indent=2))
    return 0


def _cmd_report(args) -> int:
    doc = canonical_loads(Path(args.report).read_bytes())
    m = doc["metrics"]
    print(f"benchmark {doc['benchmark_id']}  episodes={doc['episodes']}")
    print(f"  success rate     {m['success_rate']:.2f}")
    print(f"  checkpoint score {m['checkpoint_score']:.2f}")
    print(f"  avg steps        {m['avg_steps']:.1f}")
    print(f"  avg tool calls   {m['avg_tool_calls']:.1f}")
    for level, values in (doc.get("strata") or {}).items():
        if values:
            print(f"  [{level}] SR {values['success_rate']:.2f}  CS {values['checkpoint_score']:.2f}")
    if doc.get("failures"):
        print(f"  failures: {len(doc['failures'])}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="worksim", description="workplace-simulation benchmark environment")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark file")
    p.add_argument(
        "--rules",
        default="all",
        help="'all', comma-separated rule ids, or a JSON manifest file with {\"rules\": [ids]}",
    )
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("serve", help="run the environment server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8800)
    p.add_argument("--data", default=None, help="directory of benchmark/scenario JSON files")
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("run", help="run an agent over a benchmark file")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--agent", default="oracle", help="agent config JSON path, or oracle|noshow|random")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("score", help="aggregate stored episode reports")
    p.add_argument("episodes", help="directory holding episode-*.json files")
    p.set_defaults(fn=_cmd_score)

    p = sub.add_parser("report", help="pretty-print a benchmark report")
    p.add_argument("report", help="path to benchmark-report.json")
    p.set_defaults(fn=_cmd_report)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
