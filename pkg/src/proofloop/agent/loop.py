"""The two-phase agent: tool-driven context gathering, then generate-prove-repair."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from ..candidate import ExtractionError, SvaCandidate, extract_candidate
from ..kb import KnowledgeBase
from ..rtl.diagnostics import Diagnostic
from ..solver.checker import DEFAULT_BUDGET, Budget, prove
from ..solver.result import ProofResult, PropertyResult
from . import prompts
from .llm import LLMError, Message, Sampling, ToolCall
from .tools import ALL_TOOLS, OBSERVATION_CAP, RAG_TOOLS, STRUCTURAL_TOOLS, Observation, ToolRegistry, truncate

MAX_PHASE_A = 6
MAX_PHASE_B = 3

ABLATIONS = ("no-rag", "no-structural", "no-verify-loop", "baseline")


class TranscriptError(Exception):
    pass


@dataclass
class Conversation:
    messages: list = field(default_factory=list)
    budget: Optional[int] = None  # max total characters of tool observations
    used: int = 0

    def _pending(self) -> set:
        pending: set = set()
        for m in self.messages:
            if m.role == "assistant":
                pending = {c.call_id for c in m.tool_calls}
            elif m.role == "tool":
                pending.discard(m.tool_call_id)
        return pending

    def append(self, msg: Message) -> None:
        if msg.role not in ("system", "user", "assistant", "tool"):
            raise TranscriptError(f"invalid role '{msg.role}'")
        pending = self._pending()
        if msg.role == "tool":
            if msg.tool_call_id not in pending:
                raise TranscriptError(f"tool message answers no open call ({msg.tool_call_id})")
            if self.budget is not None:
                room = max(self.budget - self.used, len("…[truncated]"))
                msg = Message("tool", truncate(msg.content, room), tool_call_id=msg.tool_call_id)
            self.used += len(msg.content)
        elif pending:
            raise TranscriptError(f"calls {sorted(pending)} are still unanswered")
        if msg.role == "system" and self.messages:
            raise TranscriptError("system message must come first")
        self.messages.append(msg)

    def to_json(self) -> list:
        return [m.to_json() for m in self.messages]


@dataclass
class RoundRecord:
    index: int
    candidate: SvaCandidate
    result: ProofResult

    def to_json(self) -> dict:
        return {"round": self.index, "candidate": self.candidate.to_json(), "result": self.result.to_json()}


@dataclass
class AgentConfig:
    max_phase_a: int = MAX_PHASE_A
    max_phase_b: int = MAX_PHASE_B
    ablations: tuple = ()
    budget: Budget = DEFAULT_BUDGET
    sampling: Sampling = Sampling()
    observation_cap: int = OBSERVATION_CAP
    system_prompt: str = prompts.SYSTEM_PROMPT

    def __post_init__(self) -> None:
        bad = [a for a in self.ablations if a not in ABLATIONS]
        if bad:
            raise ValueError(f"unknown ablation(s): {bad}; choose from {ABLATIONS}")

    @property
    def enabled_tools(self) -> tuple:
        if "baseline" in self.ablations:
            return ()
        tools = ALL_TOOLS
        if "no-rag" in self.ablations:
            tools = tuple(t for t in tools if t not in RAG_TOOLS)
        if "no-structural" in self.ablations:
            tools = tuple(t for t in tools if t not in STRUCTURAL_TOOLS)
        return tools

    @property
    def verify_rounds(self) -> int:
        if "baseline" in self.ablations or "no-verify-loop" in self.ablations:
            return 1
        return self.max_phase_b


@dataclass
class AgentResult:
    candidate: Optional[SvaCandidate]
    result: ProofResult
    rounds_used_phase_a: int
    rounds_used_phase_b: int
    tool_call_log: list  # [(round, ToolCall, Observation)]
    termination_reason: str
    rounds: list = field(default_factory=list)
    best_round: Optional[int] = None
    conversation: Conversation = field(default_factory=Conversation)
    rejected_calls: list = field(default_factory=list)  # calls to tools that were not offered
    advertised_tools: tuple = ()

    def transcript_json(self) -> dict:
        return {"messages": self.conversation.to_json(), "advertised_tools": list(self.advertised_tools)}

    def to_json(self) -> dict:
        return {
            "candidate": None if self.candidate is None else self.candidate.to_json(),
            "result": self.result.to_json(),
            "rounds_used_phase_a": self.rounds_used_phase_a,
            "rounds_used_phase_b": self.rounds_used_phase_b,
            "termination_reason": self.termination_reason,
            "best_round": self.best_round,
            "tool_call_log": [{"round": r, "name": c.name, "arguments": c.arguments, "call_id": c.call_id,
                               "status": o.status} for r, c, o in self.tool_call_log],
            "rejected_calls": [{"round": r, "name": c.name, "call_id": c.call_id} for r, c in self.rejected_calls],
            "rounds": [r.to_json() for r in self.rounds],
        }


def dispatch_tool(call: ToolCall, registry: ToolRegistry) -> Observation:
    return registry.dispatch(call)


def run_phase_a(conv: Conversation, llm, registry: ToolRegistry, max_rounds: int = MAX_PHASE_A,
                sampling: Sampling = Sampling(), cap: int = OBSERVATION_CAP):
    """Thought/Action/Observation loop; returns (tool rounds, call log, rejected calls, stop reason)."""
    log, rejected = [], []
    tools = registry.schemas()
    rounds = 0
    reason = "round_cap"
    for turn in range(1, max_rounds + 1):
        try:
            msg = llm.chat(conv.messages, tools, sampling, purpose="gather")
        except LLMError as exc:
            reason = f"llm_error: {exc}"
            break
        conv.append(msg)
        if not msg.tool_calls:
            reason = "no_tool_calls"
            break
        rounds += 1
        for call in msg.tool_calls:
            obs = registry.dispatch(call)
            if registry.is_enabled(call.name):
                log.append((turn, call, obs))
            else:
                rejected.append((turn, call))
            conv.append(Message("tool", obs.render(cap), tool_call_id=call.call_id))
    return rounds, log, rejected, reason


def _ask_for_candidate(conv: Conversation, llm, purpose: str, top: str, round_index: int,
                       sampling: Sampling) -> SvaCandidate:
    """One model turn that must yield assertions; re-asks once on extraction failure."""
    for attempt in range(2):
        msg = llm.chat(conv.messages, [], sampling, purpose=purpose)
        conv.append(Message("assistant", msg.content))
        try:
            return extract_candidate(msg.content, top, round_index)
        except ExtractionError:
            if attempt:
                raise
            conv.append(Message("user", prompts.REASK_PROMPT))
    raise AssertionError("unreachable")


def generate_candidate(conv: Conversation, llm, top: str, sampling: Sampling = Sampling()) -> SvaCandidate:
    conv.append(Message("user", prompts.GENERATE_PROMPT.format(top=top)))
    return _ask_for_candidate(conv, llm, "generate", top, 1, sampling)


def restore_proven(new: SvaCandidate, old: SvaCandidate, result: ProofResult) -> SvaCandidate:
    """Put back the exact text of every assertion that was proven last round."""
    if not result.compile_ok:
        return new
    proven = [p.label for p in result.per_property if p.status == "proven"]
    items = list(new.assertions)
    labels = [lab for lab, _ in items]
    for label in proven:
        text = old.text_of(label)
        if label in labels:
            items[labels.index(label)] = (label, text)
        else:
            items.append((label, text))
            labels.append(label)
    return SvaCandidate(items, new.bind_target, new.raw_llm_text, new.round_index)


def round_score(r: RoundRecord) -> tuple:
    return (r.result.proven, -r.result.falsified, -r.index)


def select_best(rounds: list) -> RoundRecord:
    """Most proven, then fewest falsified, then earliest."""
    return max(rounds, key=round_score)


def _safe_prove(design, cand: SvaCandidate, budget: Budget, prover) -> ProofResult:
    try:
        return prover(design, cand, budget)
    except Exception as exc:  # a crashing solver must not end the session
        msg = f"solver error: {exc}"
        return ProofResult(True, [Diagnostic("<solver>", 0, 0, "error", msg)],
                           [PropertyResult(lab, "undetermined", "unknown", message=msg) for lab in cand.labels], 0)


def run_phase_b(candidate: SvaCandidate, design, conv: Conversation, llm, max_rounds: int = MAX_PHASE_B,
                budget: Budget = DEFAULT_BUDGET, sampling: Sampling = Sampling(), prover=prove):
    """Prove, and on failure ask for a localized repair; returns (rounds, termination reason)."""
    rounds: list = []
    cand = candidate
    reason = "round_cap"
    for index in range(1, max_rounds + 1):
        cand = SvaCandidate(cand.assertions, cand.bind_target, cand.raw_llm_text, index)
        result = _safe_prove(design, cand, budget, prover)
        rounds.append(RoundRecord(index, cand, result))
        if result.all_passed():
            reason = "passed"
            break
        if index == max_rounds:
            break
        conv.append(Message("user", prompts.build_repair_prompt(cand, result)))
        try:
            new = _ask_for_candidate(conv, llm, "repair", design.top, index + 1, sampling)
        except (LLMError, ExtractionError) as exc:
            reason = f"llm_error: {exc}"
            break
        cand = restore_proven(new, cand, result)
    return rounds, reason


def run_agent(spec: str, design, kb: Optional[KnowledgeBase], llm, config: AgentConfig = AgentConfig(),
              prover=prove) -> AgentResult:
    baseline = "baseline" in config.ablations
    registry = ToolRegistry(design, kb, config.enabled_tools)
    conv = Conversation()
    conv.append(Message("system", config.system_prompt))
    if baseline or kb is None:
        context = prompts.raw_rtl_context(design)
    else:
        context = prompts.design_context(design, kb)
    conv.append(Message("user", prompts.task_message(spec, context)))

    rounds_a, log, rejected = 0, [], []
    if registry.enabled:
        rounds_a, log, rejected, _ = run_phase_a(conv, llm, registry, config.max_phase_a, config.sampling,
                                                 config.observation_cap)
    advertised = registry.enabled
    try:
        cand = generate_candidate(conv, llm, design.top, config.sampling)
    except (LLMError, ExtractionError) as exc:
        res = ProofResult(False, [Diagnostic("<agent>", 0, 0, "error", f"no assertions generated: {exc}")], [], 0)
        return AgentResult(None, res, rounds_a, 0, log, f"generation_failed: {exc}", [], None, conv, rejected,
                           advertised)
    rounds, reason = run_phase_b(cand, design, conv, llm, config.verify_rounds, config.budget, config.sampling,
                                 prover)
    best = rounds[-1] if reason == "passed" else select_best(rounds)
    return AgentResult(best.candidate, best.result, rounds_a, len(rounds), log, reason, rounds, best.index, conv,
                       rejected, advertised)


def dumps(obj) -> str:
    """Canonical JSON used for every persisted artifact (stable across runs)."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
