import pytest

from helpers import CASE_STUDY, TOGGLE_RTL, candidate, design
from proofloop.design import Design
from proofloop.rtl.diagnostics import RTLError
from proofloop.solver.sva import check_syntax, compile_assertions, parse_property, seq_str

HS = """
module m(input logic clk, input logic rst, input logic req, output logic ack);
  always_ff @(posedge clk) begin
    if (rst) ack <= 1'b0;
    else ack <= req;
  end
endmodule
"""


def first_error(d, *texts):
    ok, diags = check_syntax(d, candidate(*texts))
    assert not ok
    return diags[0]


class TestParse:
    def test_full_statement(self):
        p = parse_property("assert property (@(posedge clk) disable iff (rst) req ##1 req |=> ##[1:3] ack);")
        assert p.clock == ("pos", "clk")
        assert p.kind == "|=>"
        assert [(s.lo, s.hi) for s in p.antecedent] == [(0, 0), (1, 1)]
        assert [(s.lo, s.hi) for s in p.consequent] == [(1, 3)]

    def test_bare_expression(self):
        p = parse_property("a == b")
        assert p.antecedent is None and p.kind is None and p.clock is None

    def test_non_overlapped_shifts_first_step(self):
        ante, cons = parse_property("a |=> ##[1:2] b").monitor_form()
        assert (cons[0].lo, cons[0].hi) == (2, 3)

    def test_seq_str(self):
        p = parse_property("a ##2 b |-> ##[0:1] c")
        assert seq_str(p.antecedent) == "a ##2 b"
        assert seq_str(p.consequent) == "##[0:1] c"

    def test_reversed_range(self):
        with pytest.raises(RTLError, match=r"m > n"):
            parse_property("a |-> ##[3:1] b")

    def test_unbounded_range_unsupported(self):
        with pytest.raises(RTLError, match="unbounded"):
            parse_property("a |-> ##[1:$] b")

    def test_trailing_garbage(self):
        with pytest.raises(RTLError, match="after property"):
            parse_property("a |-> b c;")


class TestSyntax:
    def test_ok(self):
        ok, diags = check_syntax(design(HS, "m"), candidate("@(posedge clk) req |-> ##1 ack"))
        assert ok and diags == []

    def test_default_clock_from_design(self):
        props, diags = compile_assertions(design(HS, "m"), candidate("req |=> ack"))
        assert not diags and props[0][1].clock == ("pos", "clk")

    def test_no_clock_in_combinational_design(self):
        d = design("module m(input logic a, output logic y); assign y = a; endmodule", "m")
        assert "no clocking event" in first_error(d, "a |-> y").message

    def test_undeclared_with_suggestions(self):
        msg = first_error(design(HS, "m"), "@(posedge clk) request |-> ack").message
        assert "undeclared signal 'request'" in msg
        assert "did you mean" in msg and "'req'" in msg

    def test_array_slice_is_rejected(self):
        d = Design.from_paths([CASE_STUDY / "design"], "ctrl_top")
        msg = first_error(d, "@(posedge clk) !rst_n |=> ready[1:3] == 'd0").message
        assert "unsupported construct" in msg and "ready" in msg

    def test_array_element_is_fine(self):
        d = Design.from_paths([CASE_STUDY / "design"], "ctrl_top")
        ok, _ = check_syntax(d, candidate("@(posedge clk) !rst_n |=> ready[1] == 1'b0"))
        assert ok

    def test_past_depth_cap(self):
        d = design(HS, "m")
        assert "history cap" in first_error(d, "ack |-> $past(req, 17)").message
        assert "at least 1" in first_error(d, "ack |-> $past(req, 0)").message
        assert check_syntax(d, candidate("ack |-> $past(req, 16)"))[0]

    def test_unknown_system_function(self):
        assert "$fancy" in first_error(design(HS, "m"), "ack |-> $fancy(req)").message

    def test_diagnostic_lines_follow_assertion_order(self):
        d = design(HS, "m")
        _, diags = compile_assertions(d, candidate("req |-> ack", "req |-> bogus", "req |-> nope"))
        assert [x.line for x in diags] == [2, 3]

    def test_one_bad_assertion_fails_the_set(self):
        ok, _ = check_syntax(design(TOGGLE_RTL, "m"), candidate("q |-> ##1 !q", "q |-> zz"))
        assert not ok
