"""The monitor automaton against the naive trace evaluator."""

import pytest

from helpers import design
from oracles import NaiveProp, RefModel, always, enumerate_traces, fires, first_violation, sig
from proofloop.solver.checker import PropertyChecker
from proofloop.solver.sva import compile_assertions
from proofloop.candidate import SvaCandidate

ABC = """
module m(input logic clk, input logic a, input logic b, input logic c, output logic q);
  always_ff @(posedge clk) q <= a ^ b ^ c;
endmodule
"""

MODEL = RefModel(
    inputs=[("a", 1), ("b", 1), ("c", 1)], reset={}, init={"q": 0},
    sample=lambda s, i: {**i, "q": s["q"]},
    step=lambda s, i: {"q": i["a"] ^ i["b"] ^ i["c"]},
)


def checker(sva):
    d = design(ABC, "m")
    props, diags = compile_assertions(d, SvaCandidate([("p", f"assert property ({sva});")], "m"))
    assert not diags
    return PropertyChecker(d, props[0][1])


def drive(pc, trace):
    inputs = [tuple(row[p] for p in pc.inputs) for row in trace.inputs]
    _, violation, fired = pc.replay(inputs)
    return violation, fired


CASES = [
    ("a |-> ##[1:2] b", NaiveProp([(1, 2, sig("b"))], always(sig("a")))),
    ("a |-> b", NaiveProp(always(sig("b")), always(sig("a")))),
    ("a |=> b", NaiveProp(always(sig("b")), always(sig("a")), overlapped=False)),
    ("disable iff (c) a |-> ##[1:2] b", NaiveProp([(1, 2, sig("b"))], always(sig("a")), disable=sig("c"))),
    ("a ##1 b |-> ##[0:1] c", NaiveProp([(0, 1, sig("c"))], [(0, 0, sig("a")), (1, 1, sig("b"))])),
]


@pytest.mark.parametrize("sva,prop", CASES, ids=[c[0] for c in CASES])
def test_all_length_four_traces(sva, prop):
    pc = checker(sva)
    n = 0
    for tr in enumerate_traces(MODEL, 4):
        n += 1
        assert drive(pc, tr)[0] == first_violation(prop, tr), tr.inputs
        assert (drive(pc, tr)[1] is not None) == fires(prop, tr)
    assert n == 2 ** 12


def test_overlapped_rejects_exactly_where_a_and_not_b():
    pc = checker("a |-> b")
    for tr in enumerate_traces(MODEL, 3):
        ms = pc.start()[1]
        state = pc.start()[0]
        for t, row in enumerate(tr.inputs):
            v = pc.sim.load(state, pc.full_inputs(tuple(row[p] for p in pc.inputs)))
            ms, violated, _ = pc.monitor.step(ms, v)
            assert violated == bool(row["a"] and not row["b"])
            state = pc.sim.clock(v)


def test_window_keeps_at_most_width_threads():
    pc = checker("a |-> ##[1:3] b")
    state, ms = pc.start()
    for _ in range(6):
        v = pc.sim.load(state, pc.full_inputs((1, 0, 0)))
        ms, _, _ = pc.monitor.step(ms, v)
        for ob in ms[1]:
            assert len(ob) <= 3
        state = pc.sim.clock(v)
