"""Random instance generators shared by the property tests and the acceptance suite.

Every generator takes a ``random.Random`` so that runs are reproducible from a seed,
and every generator that produces a design also returns its ground truth computed
from the generation parameters (never from the code under test).
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from proofloop.bench import CaseReport
from proofloop.rtl.diagnostics import Diagnostic
from proofloop.solver.result import ProofResult, PropertyResult, Trace

# random assign netlists


def random_digraph(rng: random.Random, n: int, p: float) -> dict:
    """Successor sets over nodes s0..s{n-1}; self loops excluded, cycles allowed."""
    succ = {f"s{i}": set() for i in range(n)}
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p:
                succ[f"s{i}"].add(f"s{j}")
    return succ


def netlist_rtl(succ: dict, name: str = "g") -> str:
    """A module with one continuous assignment per driven node, reading its predecessors."""
    preds = {v: sorted(u for u in succ if v in succ[u]) for v in succ}
    inputs = [v for v in sorted(succ) if not preds[v]]
    ports = ["input logic clk"] + [f"input logic {v}" for v in inputs]
    lines = [f"module {name}({', '.join(ports)});"]
    for v in sorted(succ):
        if preds[v]:
            lines.append(f"  logic {v};")
    for v in sorted(succ):
        if preds[v]:
            lines.append(f"  assign {v} = {' ^ '.join(preds[v])};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


# flop fuzz corpus


@dataclass
class FlopVariant:
    rtl: str
    reg: str
    expected: dict  # FlopInfo JSON as the generator intends it


_DATA = ["d", "~d", "d & e", "d | e", "d ^ e", "e ? d : q", "q + d", "{q[6:0], d}"]


def _reset_form(rng: random.Random, sig: str, active_high: bool) -> str:
    if active_high:
        return rng.choice([sig, f"{sig} == 1'b1", f"{sig} != 1'b0", f"{sig} === 1", f"{sig} == 1"])
    return rng.choice([f"!{sig}", f"~{sig}", f"{sig} == 1'b0", f"{sig} != 1'b1", f"{sig} == 0", f"{sig} !== 1"])


def flop_variant(rng: random.Random, index: int) -> FlopVariant:
    edge = rng.choice(["pos", "neg"])
    kind = rng.choice(["sync", "async", None])
    active_high = rng.random() < 0.5
    rst = "rst" if active_high else "rst_n"
    value = rng.randrange(256)
    data = rng.choice(_DATA)
    reg = rng.choice(["q", "state_r", "cnt"])
    data = data.replace("q", reg)
    clk = rng.choice(["clk", "clk_i", "aclk"])
    sens = [f"{'posedge' if edge == 'pos' else 'negedge'} {clk}"]
    if kind == "async":
        sens.append(f"{'posedge' if active_high else 'negedge'} {rst}")
        if rng.random() < 0.5:
            sens.reverse()
    kw = rng.choice(["always_ff", "always"])
    if kind is None:
        body = f"    {reg} <= {data};"
    else:
        cond = _reset_form(rng, rst, active_high)
        lit = rng.choice([f"8'd{value}", f"8'h{value:x}", str(value)])
        body = (f"    if ({cond}) {reg} <= {lit};\n"
                f"    else {reg} <= {data};")
    rtl = (f"module f{index}(input logic {clk}, input logic rst, input logic rst_n, input logic d,\n"
           f"           input logic e, output logic [7:0] {reg});\n"
           f"  {kw} @({' or '.join(sens)}) begin\n{body}\n  end\nendmodule\n")
    reset = None
    if kind is not None:
        reset = {"signal": rst, "polarity": "active-high" if active_high else "active-low", "kind": kind,
                 "value": value}
    expected = {"reg": reg, "clock": {"signal": clk, "edge": edge}, "reset": reset, "data_input": data}
    return FlopVariant(rtl, reg, expected)


def flop_corpus(seed: int, n: int) -> list:
    rng = random.Random(seed)
    return [flop_variant(rng, i) for i in range(n)]


# random proof results

_MSG_CHARS = string.ascii_letters + string.digits + " :_-()[]{}|#'\"\\\n\r\t=<>!~$.,;"


def _ident(rng: random.Random, prefix: str = "") -> str:
    return prefix + "".join(rng.choice(string.ascii_lowercase + "_") for _ in range(rng.randint(1, 6))) \
        + str(rng.randrange(100))


def _message(rng: random.Random) -> str:
    return "".join(rng.choice(_MSG_CHARS) for _ in range(rng.randint(0, 30)))


def _trace(rng: random.Random) -> Trace:
    sigs = sorted({_ident(rng) for _ in range(rng.randint(1, 5))})
    length = rng.randint(1, 6)
    rows = [{s: rng.randrange(1 << rng.choice([1, 4, 16, 64])) for s in sigs} for _ in range(length)]
    inputs = [s for s in sigs if rng.random() < 0.4]
    return Trace(sigs, rows, rng.randrange(length), inputs)


def random_proof_result(rng: random.Random) -> ProofResult:
    compile_ok = rng.random() < 0.8
    diags = []
    for _ in range(rng.randint(0, 3) if compile_ok else rng.randint(1, 3)):
        sev = "warning" if compile_ok else rng.choice(["error", "warning"])
        f = rng.choice(["top.sv", "assertions.sva", "rtl/sub_mod.sv", "/tmp/x y.sv"])
        diags.append(Diagnostic(f, rng.randint(1, 400), rng.randint(0, 80), sev, _message(rng)))
    if not compile_ok and all(d.severity != "error" for d in diags):
        diags[0] = Diagnostic(diags[0].file, diags[0].line, diags[0].col, "error", diags[0].message)
    per = []
    if compile_ok:
        labels = []
        for _ in range(rng.randint(0, 6)):
            lab = _ident(rng, "p_")
            if lab not in labels:
                labels.append(lab)
        for lab in labels:
            status = rng.choice(["proven", "falsified", "undetermined"])
            cex = _trace(rng) if status == "falsified" else None
            vac = None if status == "falsified" else rng.choice([None, "vacuous", "non_vacuous", "unknown"])
            wit = _trace(rng) if status != "falsified" and rng.random() < 0.5 else None
            bound = rng.choice([None, rng.randint(1, 64)])
            per.append(PropertyResult(lab, status, vac, cex, _message(rng), wit, bound))
    return ProofResult(compile_ok, diags, per, rng.randint(0, 64))


# fuzzed agent trajectories over the toggle design

PROPERTY_POOL = [
    "q |-> ##1 !q",  # proven
    "q |-> ##1 q",  # falsified
    "!q |-> ##1 q",  # falsified (rst is free)
    "1'b0 |-> q",  # proven, vacuous
    "rst |=> !q",  # proven
    "q |-> ##[1:2] !q",  # proven
    "q |-> nope",  # compile error
    "!q |=> !q",  # falsified
]

_TOOL_CALLS = [
    ("get_flop_info", {"reg": "q"}),
    ("get_flop_info", {"reg": "missing"}),
    ("get_signal_cone", {"signal": "q", "direction": "fanin"}),
    ("search_design", {"query": "toggle register", "k": 2}),
    ("search_design", {"query": ""}),
    ("get_hierarchy", {}),
    ("get_module_interface", {"module": "m"}),
    ("resolve_parameter", {"module": "m"}),
    ("get_always_blocks_for_signal", {"signal": "q"}),
    ("no_such_tool", {"x": 1}),
]


def _fence(rng: random.Random) -> str:
    picks = rng.sample(range(len(PROPERTY_POOL)), rng.randint(1, 4))
    body = "\n".join(f"a{i}: assert property (@(posedge clk) {PROPERTY_POOL[i]});" for i in picks)
    return f"```systemverilog\n{body}\n```"


def random_trajectory(rng: random.Random) -> list:
    lines = []
    for _ in range(rng.randint(0, 10)):
        calls = [dict(zip(("name", "arguments"), rng.choice(_TOOL_CALLS))) for _ in range(rng.randint(0, 4))]
        lines.append({"phase": "gather", "content": "Thought.", "tool_calls": calls})
    for phase in ["generate"] + ["repair"] * rng.randint(0, 5):
        if rng.random() < 0.1:
            lines.append({"phase": phase, "content": "I forgot the code block."})
        lines.append({"phase": phase, "content": _fence(rng)})
    return lines


# synthetic report sets


def random_reports(rng: random.Random) -> list:
    out = []
    for c in range(rng.randint(1, 6)):
        for t in range(rng.randint(1, 6)):
            ok = rng.random() < 0.8
            total = rng.randint(1, 8)
            proven = rng.randint(0, total) if ok else 0
            falsified = rng.randint(0, total - proven) if ok else 0
            undetermined = total - proven - falsified if ok else 0
            vacuous = rng.randint(0, proven)
            calls = {n: rng.randint(1, 5) for n, _ in rng.sample(_TOOL_CALLS, rng.randint(0, 3))}
            out.append(CaseReport(
                case_id=f"case{c}", trial_index=t, seed=t, rounds=[], syntax_score=int(ok),
                functionality=proven / total if ok else 0.0, proven=proven, falsified=falsified,
                undetermined=undetermined, vacuous=vacuous, total=total, tool_calls=calls,
                rounds_phase_a=rng.randint(0, 6), rounds_phase_b=rng.randint(1, 3),
                func_success=ok and proven == total and vacuous == 0,
                error=None if rng.random() < 0.9 else "boom"))
    rng.shuffle(out)
    return out
