"""Benchmark harness: case loading, trial execution, run artifacts and metrics."""

from __future__ import annotations

import csv
import json
import math
import tempfile
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .agent.llm import ChatClient, LLMError, Sampling, ScriptedLLM
from .agent.loop import AgentConfig, dumps, run_agent
from .agent.tools import RAG_TOOLS, STRUCTURAL_TOOLS
from .design import Design
from .rtl.diagnostics import RTLError
from .solver.checker import DEFAULT_BUDGET, Budget, prove
from .solver.external import run_external
from .solver.result import ProofResult

CATEGORIES = ("pipeline", "fsm", "other")
TRAJECTORY = "trajectory.jsonl"


class BenchError(Exception):
    pass


@dataclass(frozen=True)
class BenchCase:
    case_id: str
    root: Path
    design_files: tuple
    top_module: str
    nl_spec: str
    category: str

    def design(self) -> Design:
        return Design.from_paths(self.design_files, self.top_module)

    def trajectory(self, trial: int) -> Optional[Path]:
        """Per-trial trajectory ``trajectory.<t>.jsonl`` if present, else the shared one."""
        for name in (f"trajectory.{trial}.jsonl", TRAJECTORY):
            p = self.root / name
            if p.is_file():
                return p
        return None


def load_cases(root) -> tuple[list[BenchCase], list[tuple[str, str]]]:
    """Load every case below ``root``; returns (cases sorted by id, [(dir, reason)] for skipped ones)."""
    root = Path(root)
    if not root.is_dir():
        raise BenchError(f"suite root '{root}' is not a directory")
    dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not dirs:
        raise BenchError(f"suite root '{root}' contains no case directories")
    cases: dict[str, BenchCase] = {}
    skipped = []
    for d in dirs:
        manifest = d / "case.json"
        if not manifest.is_file():
            skipped.append((d.name, "missing case.json"))
            continue
        try:
            meta = json.loads(manifest.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise BenchError(f"unreadable manifest {manifest}: {exc}") from None
        if not isinstance(meta, dict) or "top" not in meta:
            skipped.append((d.name, "case.json has no 'top'"))
            continue
        spec_path = d / "spec.txt"
        if not spec_path.is_file():
            skipped.append((d.name, "missing spec.txt"))
            continue
        spec = spec_path.read_text(encoding="utf-8").strip()
        if not spec:
            skipped.append((d.name, "empty spec.txt"))
            continue
        files = tuple(sorted((d / "design").glob("*.sv")))
        if not files:
            skipped.append((d.name, "no design/*.sv files"))
            continue
        category = meta.get("category", "other")
        if category not in CATEGORIES:
            skipped.append((d.name, f"unknown category '{category}'"))
            continue
        try:
            Design.from_paths(files, meta["top"])
        except (RTLError, KeyError) as exc:
            skipped.append((d.name, f"design does not parse: {str(exc).splitlines()[0]}"))
            continue
        case_id = str(meta.get("id", d.name))
        if case_id in cases:
            raise BenchError(f"duplicate case_id '{case_id}' ({cases[case_id].root} and {d})")
        cases[case_id] = BenchCase(case_id, d, files, meta["top"], spec, category)
    return [cases[k] for k in sorted(cases)], skipped


# trial execution

@dataclass(frozen=True)
class LLMSpec:
    """How each trial obtains a client. Picklable so trials can run in worker processes."""

    mode: str = "scripted"  # scripted | live
    replay: Optional[str] = None  # scripted: a file shared by all cases; None uses each case's trajectory
    url: Optional[str] = None
    model: Optional[str] = None
    api_key: Optional[str] = None

    def client(self, case: BenchCase, trial: int):
        if self.mode == "live":
            if not self.url or not self.model:
                raise LLMError("live mode needs an endpoint url and a model")
            return ChatClient(self.url, self.model, self.api_key)
        path = Path(self.replay) if self.replay else case.trajectory(trial)
        if path is None:
            raise LLMError(f"case '{case.case_id}' has no trajectory file")
        return ScriptedLLM.from_file(path)


@dataclass(frozen=True)
class ExternalProver:
    command: str

    def __call__(self, design, candidate, budget):
        with tempfile.TemporaryDirectory(prefix="proofloop-job-") as work:
            return run_external(design, candidate, budget, self.command, work)


@dataclass
class BenchConfig:
    trials: int = 5
    ablations: tuple = ()
    budget: Budget = DEFAULT_BUDGET
    llm: LLMSpec = LLMSpec()
    nucleus: bool = True
    seed: int = 0
    jobs: int = 1
    backend_cmd: Optional[str] = None  # external backend command template; None selects the built-in checker
    max_phase_a: int = 6
    max_phase_b: int = 3
    strict_func: bool = True  # Func success also requires no vacuous proof

    def to_json(self) -> dict:
        return {"trials": self.trials, "ablations": list(self.ablations), "budget": self.budget.to_json(),
                "llm_mode": self.llm.mode, "nucleus": self.nucleus, "seed": self.seed,
                "backend": "external" if self.backend_cmd else "builtin", "max_phase_a": self.max_phase_a,
                "max_phase_b": self.max_phase_b, "strict_func": self.strict_func}

    def trial_seed(self, trial: int) -> int:
        return self.seed * 1000 + trial


@dataclass
class CaseReport:
    case_id: str
    trial_index: int
    seed: int
    rounds: list  # ProofResult per Phase B round
    syntax_score: int
    functionality: float
    proven: int
    falsified: int
    undetermined: int
    vacuous: int
    total: int
    tool_calls: dict  # tool name -> count
    rounds_phase_a: int
    rounds_phase_b: int
    ablations: tuple = ()
    termination_reason: str = ""
    func_success: bool = False
    error: Optional[str] = None
    timing: float = 0.0

    @property
    def tool_call_count(self) -> int:
        return sum(self.tool_calls.values())

    def to_json(self) -> dict:
        """Deterministic part of the report; timing is written separately."""
        return {
            "case_id": self.case_id, "trial_index": self.trial_index, "seed": self.seed,
            "rounds": [r.to_json() for r in self.rounds], "syntax_score": self.syntax_score,
            "functionality": self.functionality, "proven": self.proven, "falsified": self.falsified,
            "undetermined": self.undetermined, "vacuous": self.vacuous, "total": self.total,
            "tool_calls": dict(sorted(self.tool_calls.items())), "rounds_phase_a": self.rounds_phase_a,
            "rounds_phase_b": self.rounds_phase_b, "ablations": list(self.ablations),
            "termination_reason": self.termination_reason, "func_success": self.func_success, "error": self.error,
        }

    @classmethod
    def from_json(cls, d: dict, timing: float = 0.0) -> "CaseReport":
        return cls(d["case_id"], d["trial_index"], d["seed"], [ProofResult.from_json(r) for r in d["rounds"]],
                   d["syntax_score"], d["functionality"], d["proven"], d["falsified"], d["undetermined"],
                   d["vacuous"], d["total"], dict(d["tool_calls"]), d["rounds_phase_a"], d["rounds_phase_b"],
                   tuple(d["ablations"]), d["termination_reason"], d["func_success"], d["error"], timing)


def score(result: ProofResult, n_assertions: int, strict: bool = True) -> dict:
    """Per-trial scores. The functionality denominator counts every assertion, undetermined included."""
    total = len(result.per_property) if result.compile_ok else n_assertions
    proven = result.proven if result.compile_ok else 0
    func = proven / total if total else 0.0
    success = bool(result.compile_ok and total and proven == total and (not strict or result.vacuous == 0))
    return {"syntax_score": int(result.compile_ok), "functionality": func, "proven": proven,
            "falsified": result.falsified, "undetermined": result.undetermined, "vacuous": result.vacuous,
            "total": total, "func_success": success}


@dataclass
class TrialOutput:
    report: CaseReport
    transcript: dict = field(default_factory=dict)
    round_docs: list = field(default_factory=list)


def run_one(case: BenchCase, trial: int, config: BenchConfig) -> TrialOutput:
    """One agent session; any failure is captured in the report instead of propagating."""
    start = time.perf_counter()
    seed = config.trial_seed(trial)
    try:
        design = case.design()
        kb = None if "baseline" in config.ablations else design.knowledge_base()
        sampling = Sampling.nucleus(seed) if config.nucleus else Sampling(seed=seed)
        agent_cfg = AgentConfig(config.max_phase_a, config.max_phase_b, tuple(config.ablations), config.budget,
                                sampling)
        prover = ExternalProver(config.backend_cmd) if config.backend_cmd else prove
        res = run_agent(case.nl_spec, design, kb, config.llm.client(case, trial), agent_cfg, prover)
    except Exception as exc:  # isolate the case: one crash never aborts a run
        rep = CaseReport(case.case_id, trial, seed, [], 0, 0.0, 0, 0, 0, 0, 0, {}, 0, 0, tuple(config.ablations),
                         "error", False, f"{type(exc).__name__}: {exc}", time.perf_counter() - start)
        return TrialOutput(rep)
    n = len(res.candidate.assertions) if res.candidate else 0
    s = score(res.result, n, config.strict_func)
    calls = Counter(c.name for _, c, _ in res.tool_call_log)
    rep = CaseReport(case.case_id, trial, seed, [r.result for r in res.rounds], s["syntax_score"],
                     s["functionality"], s["proven"], s["falsified"], s["undetermined"], s["vacuous"], s["total"],
                     dict(calls), res.rounds_used_phase_a, res.rounds_used_phase_b, tuple(config.ablations),
                     res.termination_reason, s["func_success"], None, time.perf_counter() - start)
    return TrialOutput(rep, res.transcript_json(), [r.to_json() for r in res.rounds])


def _run_job(args) -> TrialOutput:
    return run_one(*args)


def run_trials(cases: Sequence[BenchCase], config: BenchConfig) -> list[TrialOutput]:
    """cases x trials sessions, ordered by (case, trial) regardless of worker scheduling."""
    jobs = [(c, t, config) for c in cases for t in range(config.trials)]
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(j) for j in jobs]


# metrics

def func_at_k(outcomes: Sequence[bool], k: int) -> float:
    """Unbiased estimate of P(at least one of k samples succeeds) from n trials."""
    n = len(outcomes)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of trials n={n}")
    c = sum(1 for o in outcomes if o)
    return float(1 - Fraction(math.comb(n - c, k), math.comb(n, k)))


def aggregate_metrics(reports: Sequence[CaseReport], ks: Sequence[int] = (1, 5)) -> dict:
    """Run-level summary. Sums use fsum so the result does not depend on report order."""
    if not reports:
        raise ValueError("no reports to aggregate")
    n = len(reports)
    summary = {
        "reports": n,
        "syntax": 100.0 * math.fsum(r.syntax_score for r in reports) / n,
        "functionality": 100.0 * math.fsum(r.functionality for r in reports) / n,
        "proven": sum(r.proven for r in reports),
        "falsified": sum(r.falsified for r in reports),
        "undetermined": sum(r.undetermined for r in reports),
        "vacuous": sum(r.vacuous for r in reports),
        "errors": sum(1 for r in reports if r.error),
        "tool_calls": sum(r.tool_call_count for r in reports),
    }
    by_case: dict[str, list] = {}
    for r in reports:
        by_case.setdefault(r.case_id, []).append(r)
    for k in ks:
        vals = [func_at_k([r.func_success for r in rs], k) for rs in by_case.values() if len(rs) >= k]
        summary[f"func@{k}"] = 100.0 * math.fsum(vals) / len(vals) if vals else None
    return summary


def ablation_audit(reports: Sequence[CaseReport], ablations: Sequence[str]) -> list[str]:
    """Check that each removed capability left no trace in the artifacts; returns violations."""
    bad = []
    for r in reports:
        if r.error:
            continue
        names = set(r.tool_calls)
        where = f"{r.case_id}/{r.trial_index}"
        if "no-rag" in ablations and names & set(RAG_TOOLS):
            bad.append(f"{where}: RAG tool calls under no-rag: {sorted(names & set(RAG_TOOLS))}")
        if "no-structural" in ablations and names & set(STRUCTURAL_TOOLS):
            bad.append(f"{where}: structural calls under no-structural: {sorted(names & set(STRUCTURAL_TOOLS))}")
        if ("no-verify-loop" in ablations or "baseline" in ablations) and r.rounds_phase_b != 1:
            bad.append(f"{where}: {r.rounds_phase_b} verify rounds, expected 1")
        if "baseline" in ablations and (r.tool_call_count or r.rounds_phase_a):
            bad.append(f"{where}: tool use under baseline")
    return bad


# run directory

CSV_COLUMNS = ("Config", "Syntax", "Functionality", "Proven", "Falsified", "Undetermined", "Func@1", "Func@5")


def config_label(ablations: Sequence[str]) -> str:
    return "full" if not ablations else "-" + ",-".join(ablations)


def new_run_dir(base) -> Path:
    base = Path(base)
    stamp = datetime.now().strftime("%Y%m%dT%H%M%S")
    path = base / stamp
    n = 1
    while path.exists():
        path = base / f"{stamp}-{n}"
        n += 1
    path.mkdir(parents=True)
    return path


def write_run(run_dir, outputs: Sequence[TrialOutput], config: BenchConfig, skipped=()) -> dict:
    """Write per-trial artifacts, summary.json and the CSV tables; returns the summary."""
    run_dir = Path(run_dir)
    for out in outputs:
        r = out.report
        d = run_dir / r.case_id / str(r.trial_index)
        (d / "rounds").mkdir(parents=True, exist_ok=True)
        (d / "report.json").write_text(dumps(r.to_json()), encoding="utf-8")
        (d / "transcript.json").write_text(dumps(out.transcript), encoding="utf-8")
        (d / "timing.json").write_text(dumps({"seconds": r.timing}), encoding="utf-8")
        for i, doc in enumerate(out.round_docs, 1):
            (d / "rounds" / f"{i}.json").write_text(dumps(doc), encoding="utf-8")
    reports = [o.report for o in outputs]
    summary = aggregate_metrics(reports)
    doc = {"config": config.to_json(), "label": config_label(config.ablations), "metrics": summary,
           "cases": sorted({r.case_id for r in reports}), "skipped": [list(s) for s in skipped],
           "audit": ablation_audit(reports, config.ablations)}
    (run_dir / "summary.json").write_text(dumps(doc), encoding="utf-8")
    with (run_dir / "summary.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        w.writerow([doc["label"], _fmt(summary["syntax"]), _fmt(summary["functionality"]), summary["proven"],
                    summary["falsified"], summary["undetermined"], _fmt(summary["func@1"]),
                    _fmt(summary["func@5"])])
    with (run_dir / "cases.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("Case", "Trial", "Syntax", "Functionality", "Proven", "Falsified", "Undetermined", "Vacuous",
                    "ToolCalls", "RoundsA", "RoundsB", "Error"))
        for r in reports:
            w.writerow((r.case_id, r.trial_index, r.syntax_score, f"{r.functionality:.4f}", r.proven, r.falsified,
                        r.undetermined, r.vacuous, r.tool_call_count, r.rounds_phase_a, r.rounds_phase_b,
                        r.error or ""))
    return doc


def _fmt(x) -> str:
    return "" if x is None else f"{x:.1f}"
