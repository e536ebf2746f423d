"""Command-line entry point: ``proofloop {index,generate,verify,bench}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .agent.llm import ChatClient, LLMError, Sampling, ScriptedLLM
from .agent.loop import ABLATIONS, MAX_PHASE_A, MAX_PHASE_B, AgentConfig, dumps, run_agent
from .bench import BenchConfig, BenchError, ExternalProver, LLMSpec, load_cases, new_run_dir, run_trials, write_run
from .candidate import ExtractionError, load_assertions
from .design import Design
from .kb import KnowledgeBase
from .rtl.diagnostics import RTLError
from .solver.checker import Budget, prove
from .solver.external import emit_external_job

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _ablations(text: str) -> tuple:
    names = tuple(a.strip() for a in text.split(",") if a.strip())
    bad = [a for a in names if a not in ABLATIONS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown ablation {bad[0]!r}; choose from {', '.join(ABLATIONS)}")
    return names


def _add_design(p: argparse.ArgumentParser) -> None:
    p.add_argument("--design", nargs="+", metavar="PATH", help="RTL files or directories (.sv/.v)")
    p.add_argument("--top", help="top module name")


def _add_budget(p: argparse.ArgumentParser) -> None:
    p.add_argument("--depth", type=int, default=32, help="bounded proof depth in cycles (default 32)")
    p.add_argument("--path-budget", type=int, default=1 << 16,
                   help="max explored states before a proof is undetermined (default 65536)")
    p.add_argument("--random-runs", type=int, default=1000,
                   help="random simulations tried when the budget runs out (default 1000)")
    p.add_argument("--wall-time", type=float, default=30.0, help="seconds per property (default 30)")
    p.add_argument("--backend", choices=("builtin", "external"), default="builtin",
                   help="built-in bounded checker or an external formal tool")
    p.add_argument("--backend-cmd", metavar="TEMPLATE",
                   help="external tool command with {script}, {log} and {workdir} placeholders")


def _add_agent(p: argparse.ArgumentParser) -> None:
    p.add_argument("--llm-replay", metavar="FILE", help="replay a scripted trajectory (JSON lines) instead of a live model")
    p.add_argument("--llm-url", help="chat-completions endpoint (default: $PROOFLOOP_LLM_URL)")
    p.add_argument("--llm-model", help="model name (default: $PROOFLOOP_LLM_MODEL)")
    p.add_argument("--ablate", type=_ablations, default=(), metavar="NAMES",
                   help=f"comma-separated capabilities to remove: {', '.join(ABLATIONS)}")
    p.add_argument("--phase-a-rounds", type=int, default=MAX_PHASE_A, help="context-gathering turns (default 6)")
    p.add_argument("--phase-b-rounds", type=int, default=MAX_PHASE_B, help="verify/repair rounds (default 3)")
    p.add_argument("--seed", type=int, default=0, help="sampling and random-simulation seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proofloop", description="SVA generation with a solver in the loop.")
    parser.add_argument("--config", metavar="FILE", help="JSON file of option defaults; command-line flags win")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("index", help="build and save the knowledge base and design graph")
    _add_design(p)
    p.add_argument("--out", default="index", help="output directory (default ./index)")

    p = sub.add_parser("generate", help="run the agent for one specification")
    _add_design(p)
    p.add_argument("--spec", help="natural-language specification file")
    p.add_argument("--index", metavar="DIR", help="prebuilt index directory from 'proofloop index'")
    p.add_argument("--out", help="directory for transcript.json, report.json and round files")
    _add_agent(p)
    _add_budget(p)

    p = sub.add_parser("verify", help="check an assertion file against a design (no model involved)")
    _add_design(p)
    p.add_argument("--sva", help="assertion file (labeled statements, optionally fenced)")
    p.add_argument("--json", metavar="FILE", help="also write the ProofResult as JSON")
    p.add_argument("--traces", action="store_true", help="print counterexample tables")
    p.add_argument("--emit-job", metavar="FILE", help="write the external-tool batch script and exit")
    p.add_argument("--seed", type=int, default=0, help="random-simulation seed")
    _add_budget(p)

    p = sub.add_parser("bench", help="run the benchmark harness over a case suite")
    p.add_argument("--suite", help="directory of case folders (design/*.sv, spec.txt, case.json)")
    p.add_argument("--trials", type=int, default=5, help="trials per case (default 5)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes (default 1)")
    p.add_argument("--out", default="runs", help="base directory for run folders (default ./runs)")
    p.add_argument("--greedy", action="store_true", help="temperature 0 instead of nucleus sampling")
    p.add_argument("--lenient-func", action="store_true", help="count vacuous proofs as Func successes")
    _add_agent(p)
    _add_budget(p)
    return parser


def _merge_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    """Parse once to find --config and the subcommand, load the file as defaults, parse again."""
    pre, _ = parser.parse_known_args(argv)
    if pre.config and pre.command:
        try:
            cfg = json.loads(Path(pre.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {pre.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        subparser = _subparsers(parser)[pre.command]
        known = {a.dest for a in subparser._actions}
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config keys for '{pre.command}': {', '.join(unknown)}")
        if "ablate" in cfg and isinstance(cfg["ablate"], (str, list)):
            text = cfg["ablate"] if isinstance(cfg["ablate"], str) else ",".join(cfg["ablate"])
            cfg["ablate"] = _ablations(text)
        subparser.set_defaults(**cfg)
    return parser.parse_args(argv)


def _subparsers(parser: argparse.ArgumentParser) -> dict:
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices
    return {}


def _require(args, *names) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if not getattr(args, n, None)]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")


def _design(args) -> Design:
    _require(args, "design", "top")
    try:
        return Design.from_paths(args.design, args.top)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def _budget(args) -> Budget:
    return Budget(args.depth, args.path_budget, args.random_runs, args.wall_time, args.seed)


def _prover(args):
    if args.backend == "external":
        if not args.backend_cmd:
            raise UsageError("--backend external needs --backend-cmd")
        return ExternalProver(args.backend_cmd)
    if args.backend_cmd:
        raise UsageError("--backend-cmd is only valid with --backend external")
    return prove


def _llm_spec(args) -> LLMSpec:
    url = args.llm_url or os.environ.get("PROOFLOOP_LLM_URL")
    model = args.llm_model or os.environ.get("PROOFLOOP_LLM_MODEL")
    if args.llm_replay and (args.llm_url or args.llm_model):
        raise UsageError("choose either --llm-replay or a live endpoint, not both")
    if args.llm_replay:
        if not Path(args.llm_replay).is_file():
            raise UsageError(f"trajectory file not found: {args.llm_replay}")
        return LLMSpec("scripted", args.llm_replay)
    if url and model:
        return LLMSpec("live", None, url, model, os.environ.get("PROOFLOOP_LLM_API_KEY"))
    return LLMSpec("scripted", None)


def cmd_index(args) -> int:
    design = _design(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kb = design.knowledge_base()
    kb.save(out / "kb.jsonl")
    (out / "graph.json").write_text(dumps(design.graph.to_json()), encoding="utf-8")
    (out / "design.json").write_text(dumps({"top": design.top, "files": [n for n, _ in design.sources]}),
                                     encoding="utf-8")
    print(f"indexed {len(kb)} chunks, {len(design.graph.nodes)} signals, {len(design.graph.flops)} flops -> {out}")
    return EXIT_OK


def cmd_generate(args) -> int:
    design = _design(args)
    _require(args, "spec")
    spec_path = Path(args.spec)
    if not spec_path.is_file():
        raise UsageError(f"spec file not found: {args.spec}")
    llm_spec = _llm_spec(args)
    if llm_spec.mode == "scripted" and not llm_spec.replay:
        raise UsageError("no model configured: pass --llm-replay or set PROOFLOOP_LLM_URL and PROOFLOOP_LLM_MODEL")
    llm = (ScriptedLLM.from_file(llm_spec.replay) if llm_spec.mode == "scripted"
           else ChatClient(llm_spec.url, llm_spec.model, llm_spec.api_key))
    kb = None
    if "baseline" not in args.ablate:
        kb = KnowledgeBase.load(Path(args.index) / "kb.jsonl") if args.index else design.knowledge_base()
    config = AgentConfig(args.phase_a_rounds, args.phase_b_rounds, tuple(args.ablate), _budget(args),
                         Sampling(seed=args.seed))
    start = time.perf_counter()
    res = run_agent(spec_path.read_text(encoding="utf-8"), design, kb, llm, config, _prover(args))
    elapsed = time.perf_counter() - start
    if args.out:
        out = Path(args.out)
        (out / "rounds").mkdir(parents=True, exist_ok=True)
        (out / "transcript.json").write_text(dumps(res.transcript_json()), encoding="utf-8")
        (out / "report.json").write_text(dumps(res.to_json()), encoding="utf-8")
        (out / "timing.json").write_text(dumps({"seconds": elapsed}), encoding="utf-8")
        for r in res.rounds:
            (out / "rounds" / f"{r.index}.json").write_text(dumps(r.to_json()), encoding="utf-8")
    print(f"phase A: {res.rounds_used_phase_a} rounds, {len(res.tool_call_log)} tool calls; "
          f"phase B: {res.rounds_used_phase_b} rounds ({res.termination_reason}); best round {res.best_round}")
    if res.candidate is not None:
        print(res.candidate.render())
    print(res.result.verdict_table())
    return EXIT_OK if res.candidate is not None else EXIT_FAIL


def cmd_verify(args) -> int:
    design = _design(args)
    _require(args, "sva")
    try:
        text = Path(args.sva).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.sva}: {exc}") from None
    try:
        cand = load_assertions(text, design.top)
    except ExtractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    budget = _budget(args)
    if args.emit_job:
        Path(args.emit_job).write_text(emit_external_job(design, cand, budget, args.sva), encoding="utf-8")
        print(f"wrote {args.emit_job}")
        return EXIT_OK
    result = _prover(args)(design, cand, budget)
    print(result.verdict_table())
    if args.traces:
        for p in result.per_property:
            if p.counterexample is not None:
                print(f"\ncounterexample for {p.label}:\n{p.counterexample.table()}")
    if args.json:
        Path(args.json).write_text(dumps(result.to_json()), encoding="utf-8")
    ok = result.compile_ok and result.falsified == 0
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bench(args) -> int:
    _require(args, "suite")
    try:
        cases, skipped = load_cases(args.suite)
    except BenchError as exc:
        raise UsageError(str(exc)) from None
    for name, reason in skipped:
        print(f"skipped {name}: {reason}", file=sys.stderr)
    if not cases:
        raise UsageError("no usable cases in the suite")
    if args.trials < 1 or args.jobs < 1:
        raise UsageError("--trials and --jobs must be at least 1")
    backend_cmd = args.backend_cmd if args.backend == "external" else None
    _prover(args)
    config = BenchConfig(args.trials, tuple(args.ablate), _budget(args), _llm_spec(args), not args.greedy,
                         args.seed, args.jobs, backend_cmd, args.phase_a_rounds, args.phase_b_rounds,
                         not args.lenient_func)
    outputs = run_trials(cases, config)
    run_dir = new_run_dir(args.out)
    doc = write_run(run_dir, outputs, config, skipped)
    m = doc["metrics"]
    print(f"run: {run_dir}")
    print(f"config {doc['label']}: syntax {m['syntax']:.1f}%  functionality {m['functionality']:.1f}%  "
          f"proven {m['proven']}  falsified {m['falsified']}  undetermined {m['undetermined']}  "
          f"func@1 {_pct(m['func@1'])}  func@5 {_pct(m['func@5'])}")
    for line in doc["audit"]:
        print(f"audit: {line}", file=sys.stderr)
    errors = [o.report for o in outputs if o.report.error]
    for r in errors:
        print(f"case {r.case_id} trial {r.trial_index} failed: {r.error}", file=sys.stderr)
    return EXIT_OK


def _pct(x: Optional[float]) -> str:
    return "n/a" if x is None else f"{x:.1f}%"


COMMANDS = {"index": cmd_index, "generate": cmd_generate, "verify": cmd_verify, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _merge_config(parser, argv)
    except SystemExit as exc:  # argparse already printed usage
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    except (UsageError, argparse.ArgumentTypeError) as exc:
        print(f"proofloop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"proofloop {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RTLError, LLMError) as exc:
        print(f"proofloop {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
