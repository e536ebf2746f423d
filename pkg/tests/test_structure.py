import pytest

from helpers import CASE_STUDY, CHAIN_RTL, design
from proofloop.design import Design
from proofloop.structure import StructureError, cone, flop_properties

HIER = """
module leaf(input logic clk, input logic rst_n, input logic d, output logic q);
  always_ff @(posedge clk or negedge rst_n) begin
    if (!rst_n) q <= 1'b0;
    else q <= d;
  end
endmodule

module top(input logic clk, input logic rst_n, input logic a, output logic y);
  logic mid;
  leaf u0 (.clk(clk), .rst_n(rst_n), .d(a), .q(mid));
  leaf u1 (.clk(clk), .rst_n(rst_n), .d(mid), .q(y));
endmodule
"""

FORMS = """
module f(input logic clk, input logic rst, input logic rst_n, input logic a, input logic b,
         output logic r1, output logic r2, output logic r3, output logic r4, output logic t);
  always_ff @(posedge clk) begin
    if (rst) r1 <= 1'b1;
    else r1 <= ~r1;
  end
  always_ff @(negedge clk or posedge rst) begin
    if (rst == 1'b1) r2 <= 1'b0;
    else if (a) r2 <= b;
  end
  always_ff @(posedge clk) r3 <= a & b;
  always_ff @(posedge clk or negedge rst_n) begin
    if (!rst_n) r4 <= 1'b0;
    else r4 <= a;
  end
  assign t = a | b;
endmodule
"""


class TestGraph:
    def test_chain_cones(self):
        g = design(CHAIN_RTL, "m").graph
        assert cone(g, "c", "fanin") == ["a", "b"]
        assert cone(g, "a", "fanout") == ["b", "c"]
        assert cone(g, "c", "fanin", depth=1) == ["b"]
        assert cone(g, "c", "fanin", depth=0) == []

    def test_edge_origins(self):
        g = design(HIER, "top").graph
        origins = {(e.src, e.dst): e.origin for e in g.edges}
        assert origins[("u0.d", "u0.q")] == "always"
        assert origins[("a", "u0.d")] == "port-connection"
        assert origins[("u0.q", "mid")] == "port-connection"

    def test_hierarchical_cone_crosses_instances(self):
        g = design(HIER, "top").graph
        assert "a" in cone(g, "y", "fanin")
        assert "u0.q" in cone(g, "u1.q", "fanin")

    def test_guard_reads_are_edges(self):
        g = design(FORMS, "f").graph
        assert "a" in cone(g, "r2", "fanin", depth=1)
        assert "rst" in cone(g, "r2", "fanin", depth=1)

    def test_lookup(self):
        g = design(HIER, "top").graph
        assert g.lookup("mid") == "mid"
        with pytest.raises(StructureError) as exc:
            g.lookup("q")
        assert exc.value.code == "ambiguous_signal"
        with pytest.raises(StructureError) as exc:
            cone(g, "nope", "fanin")
        assert exc.value.code == "unknown_signal"

    def test_to_json_is_sorted(self):
        doc = design(HIER, "top").graph.to_json()
        assert [n["path"] for n in doc["nodes"]] == sorted(n["path"] for n in doc["nodes"])


class TestFlops:
    def test_sync_active_high(self):
        info = flop_properties(design(FORMS, "f").graph, "r1")
        assert info.to_json() == {"reg": "r1", "clock": {"signal": "clk", "edge": "pos"},
                                  "reset": {"signal": "rst", "polarity": "active-high", "kind": "sync", "value": 1},
                                  "data_input": "~r1"}

    def test_async_on_negedge_clock(self):
        info = flop_properties(design(FORMS, "f").graph, "r2")
        assert (info.clock, info.clock_edge) == ("clk", "neg")
        assert info.reset.kind == "async" and info.reset.polarity == "active-high"
        assert info.data_input == "b"

    def test_no_reset(self):
        info = flop_properties(design(FORMS, "f").graph, "r3")
        assert info.reset is None and info.data_input == "a & b"

    def test_async_active_low(self):
        info = flop_properties(design(FORMS, "f").graph, "r4")
        assert info.reset.to_json() == {"signal": "rst_n", "polarity": "active-low", "kind": "async", "value": 0}

    def test_combinational_is_not_a_flop(self):
        with pytest.raises(StructureError) as exc:
            flop_properties(design(FORMS, "f").graph, "t")
        assert exc.value.code == "not_a_flop"

    def test_multi_driver(self):
        rtl = """
module m(input logic clk, input logic a, output logic q);
  always_ff @(posedge clk) q <= a;
  always_ff @(negedge clk) q <= ~a;
endmodule
"""
        with pytest.raises(StructureError) as exc:
            flop_properties(design(rtl, "m").graph, "q")
        assert exc.value.code == "multi_driver"

    def test_case_study_stages(self):
        g = Design.from_paths([CASE_STUDY / "design"], "ctrl_top").graph
        kinds = [flop_properties(g, f"u_rdy{i}.ready").reset.kind for i in range(5)]
        assert kinds == ["async", "sync", "sync", "sync", "async"]
