import json
import random
import shutil

import pytest
from hypothesis import given, strategies as st

import generators as gen
from helpers import CORPUS
from oracles import func_at_k_enum, metrics_agree, recompute_metrics
from proofloop.bench import (BenchConfig, BenchError, CaseReport, aggregate_metrics, ablation_audit, func_at_k,
                             load_cases, new_run_dir, run_trials, score, write_run)
from proofloop.solver.checker import Budget
from proofloop.solver.result import ProofResult, PropertyResult, Trace

BUDGET = Budget(depth=12)


def report(case="c", trial=0, ok=True, proven=1, total=1, success=False, **kw):
    base = dict(case_id=case, trial_index=trial, seed=trial, rounds=[], syntax_score=int(ok),
                functionality=proven / total if ok else 0.0, proven=proven, falsified=0, undetermined=0, vacuous=0,
                total=total, tool_calls={}, rounds_phase_a=0, rounds_phase_b=1, func_success=success)
    base.update(kw)
    return CaseReport(**base)


@pytest.fixture(scope="module")
def full_run():
    cases, _ = load_cases(CORPUS)
    return run_trials(cases, BenchConfig(trials=5, budget=BUDGET))


class TestLoad:
    def test_bundled_corpus(self):
        cases, skipped = load_cases(CORPUS)
        assert len(cases) == 8 and skipped == []
        assert [c.case_id for c in cases] == sorted(c.case_id for c in cases)
        assert {c.category for c in cases} == {"pipeline", "fsm", "other"}

    def _copy(self, tmp_path, names):
        for n in names:
            shutil.copytree(CORPUS / n, tmp_path / n)

    def test_missing_spec_is_skipped(self, tmp_path):
        self._copy(tmp_path, ["pipe_stall", "fsm_traffic"])
        (tmp_path / "fsm_traffic" / "spec.txt").unlink()
        cases, skipped = load_cases(tmp_path)
        assert [c.case_id for c in cases] == ["pipe_stall"]
        assert skipped == [("fsm_traffic", "missing spec.txt")]

    def test_broken_design_is_skipped(self, tmp_path):
        self._copy(tmp_path, ["pipe_stall"])
        (tmp_path / "pipe_stall" / "design" / "pipe_stall.sv").write_text("module oops(;\n")
        cases, skipped = load_cases(tmp_path)
        assert cases == [] and skipped[0][1].startswith("design does not parse")

    def test_duplicate_id(self, tmp_path):
        self._copy(tmp_path, ["pipe_stall", "fsm_traffic"])
        manifest = tmp_path / "fsm_traffic" / "case.json"
        meta = json.loads(manifest.read_text())
        meta["id"] = "pipe_stall"
        manifest.write_text(json.dumps(meta))
        with pytest.raises(BenchError, match="duplicate"):
            load_cases(tmp_path)

    def test_empty_root(self, tmp_path):
        with pytest.raises(BenchError):
            load_cases(tmp_path)

    def test_unreadable_manifest(self, tmp_path):
        self._copy(tmp_path, ["pipe_stall"])
        (tmp_path / "pipe_stall" / "case.json").write_text("{not json")
        with pytest.raises(BenchError, match="unreadable"):
            load_cases(tmp_path)


class TestRun:
    def test_forty_reports(self, full_run):
        assert len(full_run) == 40
        assert all(o.report.error is None for o in full_run)
        assert len({(o.report.case_id, o.report.trial_index) for o in full_run}) == 40

    def test_seeds_recorded(self, full_run):
        assert sorted({o.report.seed for o in full_run}) == [0, 1, 2, 3, 4]

    def test_parallel_matches_serial(self):
        cases, _ = load_cases(CORPUS)
        cfg = BenchConfig(trials=2, budget=BUDGET)
        serial = [o.report.to_json() for o in run_trials(cases[:3], cfg)]
        cfg.jobs = 2
        assert [o.report.to_json() for o in run_trials(cases[:3], cfg)] == serial

    @pytest.mark.parametrize("abl", [("no-verify-loop",), ("baseline",), ("no-rag",), ("no-structural",)])
    def test_ablation_audit_clean(self, abl):
        cases, _ = load_cases(CORPUS)
        outs = run_trials(cases, BenchConfig(trials=1, ablations=abl, budget=BUDGET))
        reports = [o.report for o in outs]
        assert ablation_audit(reports, abl) == []
        if "baseline" in abl:
            assert all(r.tool_call_count == 0 for r in reports)
        if "no-verify-loop" in abl:
            assert all(r.rounds_phase_b == 1 for r in reports)

    def test_audit_catches_violations(self):
        reps = [report(tool_calls={"get_flop_info": 2}, rounds_phase_b=2)]
        assert len(ablation_audit(reps, ("no-structural",))) == 1
        assert len(ablation_audit(reps, ("baseline",))) == 2

    def test_crash_is_isolated(self, tmp_path):
        shutil.copytree(CORPUS / "pipe_stall", tmp_path / "pipe_stall")
        (tmp_path / "pipe_stall" / "trajectory.jsonl").write_text("{broken\n")
        shutil.copytree(CORPUS / "fsm_traffic", tmp_path / "fsm_traffic")
        cases, _ = load_cases(tmp_path)
        outs = run_trials(cases, BenchConfig(trials=1, budget=BUDGET))
        by_id = {o.report.case_id: o.report for o in outs}
        assert by_id["pipe_stall"].error and by_id["fsm_traffic"].error is None

    def test_run_directory(self, tmp_path, full_run):
        run = new_run_dir(tmp_path)
        assert new_run_dir(tmp_path) != run
        doc = write_run(run, full_run, BenchConfig(trials=5, budget=BUDGET))
        trial = run / "pipe_stall" / "0"
        assert {p.name for p in trial.iterdir()} == {"report.json", "transcript.json", "timing.json", "rounds"}
        assert "timing" not in json.loads((trial / "report.json").read_text())
        assert (run / "summary.json").is_file() and (run / "summary.csv").is_file()
        assert doc["metrics"]["reports"] == 40 and doc["audit"] == []
        header = (run / "summary.csv").read_text().splitlines()[0]
        assert header == "Config,Syntax,Functionality,Proven,Falsified,Undetermined,Func@1,Func@5"


class TestMetrics:
    def test_syntax_three_of_four(self):
        reps = [report(trial=i, ok=i != 3) for i in range(4)]
        assert aggregate_metrics(reps)["syntax"] == 75.0

    def test_functionality_counts_undetermined(self):
        tr = Trace(["a"], [{"a": 0}], 0)
        per = [PropertyResult(f"p{i}", "proven", "non_vacuous") for i in range(3)]
        res = ProofResult(True, [], per + [PropertyResult("f", "falsified", counterexample=tr)])
        assert score(res, 4)["functionality"] == 0.75
        res = ProofResult(True, [], per + [PropertyResult("u", "undetermined", "unknown")])
        assert score(res, 4)["functionality"] == 0.75

    def test_func_success_strict(self):
        res = ProofResult(True, [], [PropertyResult("p", "proven", "vacuous")])
        assert not score(res, 1)["func_success"]
        assert score(res, 1, strict=False)["func_success"]

    def test_compile_failure_scores_zero(self):
        s = score(ProofResult(False), 3)
        assert (s["syntax_score"], s["functionality"], s["total"]) == (0, 0.0, 3)

    @pytest.mark.parametrize("outcomes,k,want", [
        ([True] * 5, 1, 1.0), ([False] * 5, 3, 0.0), ([True, True, False, False, False], 1, 0.4),
        ([True, True, False, False, False], 3, 0.9),
    ])
    def test_func_at_k_examples(self, outcomes, k, want):
        assert func_at_k(outcomes, k) == pytest.approx(want, abs=1e-12)

    def test_func_at_k_bounds(self):
        with pytest.raises(ValueError):
            func_at_k([True, False], 3)
        with pytest.raises(ValueError):
            func_at_k([True], 0)

    @given(st.lists(st.booleans(), min_size=1, max_size=8), st.data())
    def test_func_at_k_matches_enumeration(self, outcomes, data):
        k = data.draw(st.integers(1, len(outcomes)))
        assert abs(func_at_k(outcomes, k) - func_at_k_enum(outcomes, k)) <= 1e-12

    def test_func_at_k_none_when_too_few_trials(self):
        m = aggregate_metrics([report(trial=i, success=True) for i in range(2)])
        assert m["func@1"] == 100.0 and m["func@5"] is None

    @given(st.integers(0, 10 ** 6))
    def test_permutation_idempotent(self, seed):
        rng = random.Random(seed)
        reps = gen.random_reports(rng)
        shuffled = list(reps)
        rng.shuffle(shuffled)
        assert aggregate_metrics(reps) == aggregate_metrics(shuffled)

    def test_empty(self):
        with pytest.raises(ValueError):
            aggregate_metrics([])

    def test_report_json_round_trip(self, full_run):
        r = full_run[0].report
        assert CaseReport.from_json(r.to_json()).to_json() == r.to_json()


def test_aggregate_matches_recomputation():
    rng = random.Random(7)
    for _ in range(50):
        reps = gen.random_reports(rng)
        got, want = aggregate_metrics(reps), recompute_metrics(reps)
        assert metrics_agree(got, want), (got, want)
