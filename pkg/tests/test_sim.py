from helpers import TOGGLE_RTL, design

LATCHY = """
module m(input logic clk, input logic en, input logic d, output logic q, output logic y);
  always_comb begin
    if (en) q = d;
  end
  assign y = q;
endmodule
"""

ORDER = """
module m(input logic clk, input logic a, output logic z);
  logic x, y;
  assign z = y;
  assign y = ~x;
  assign x = a;
endmodule
"""

ASYNC = """
module m(input logic clk, input logic rst_n, input logic d, output logic q);
  always_ff @(posedge clk or negedge rst_n) begin
    if (!rst_n) q <= 1'b0;
    else q <= d;
  end
endmodule
"""


def run(sim, state, seq):
    out = []
    for inp in seq:
        if isinstance(inp, dict):
            inp = tuple(inp.get(n, 0) for n in sim.free_inputs)
        v = sim.load(state, inp)
        out.append(sim.snapshot(v))
        state = sim.clock(v)
    return out


def test_toggle_orbit():
    sim = design(TOGGLE_RTL, "m").sim
    assert sim.free_inputs == ["rst"]
    assert sim.reset_levels == {"rst": 1}
    rows = run(sim, sim.initial_state(), [(0,)] * 4)
    assert [r["q"] for r in rows] == [0, 1, 0, 1]


def test_comb_settles_regardless_of_source_order():
    sim = design(ORDER, "m").sim
    for a in (0, 1):
        assert sim.free_inputs == ["clk", "a"]  # clk drives no flop here
        v = sim.load(sim.initial_state(), (0, a))
        assert sim.snapshot(v)["z"] == 1 - a


def test_incomplete_comb_assignment_holds_value():
    sim = design(LATCHY, "m").sim
    state = sim.initial_state()
    rows = run(sim, state, [dict(en=1, d=1), dict(en=0, d=0), dict(en=0, d=1), dict(en=1, d=0)])
    assert [r["q"] for r in rows] == [1, 1, 1, 0]


def test_async_reset_acts_within_the_cycle():
    sim = design(ASYNC, "m").sim
    state = sim.initial_state()
    rows = run(sim, state, [(1, 1), (0, 1), (1, 1)])
    assert [r["q"] for r in rows] == [0, 0, 0]
    rows = run(sim, state, [(1, 1), (1, 0), (0, 1)])
    assert [r["q"] for r in rows] == [0, 1, 0]
