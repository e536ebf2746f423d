"""Hand-built (design, property) pairs with independent reference models."""

from __future__ import annotations

from dataclasses import dataclass

from oracles import NaiveProp, RefModel, always, sig


@dataclass
class Pair:
    name: str
    design: str
    sva: str
    prop: NaiveProp
    depth: int


TOGGLE_RTL = """
module toggle(input logic clk, input logic rst, output logic q);
  always_ff @(posedge clk) begin
    if (rst) q <= 1'b0;
    else q <= ~q;
  end
endmodule
"""

TOGGLE = RefModel(
    inputs=[("rst", 1)], reset={"rst": 1}, init={"q": 0},
    sample=lambda s, i: {"rst": i["rst"], "q": s["q"]},
    step=lambda s, i: {"q": 0 if i["rst"] else 1 - s["q"]},
)

CNT_RTL = """
module cnt4(input logic clk, input logic rst_n, input logic en, output logic [1:0] cnt);
  always_ff @(posedge clk) begin
    if (!rst_n) cnt <= 2'd0;
    else if (en) cnt <= cnt + 2'd1;
  end
endmodule
"""

CNT = RefModel(
    inputs=[("rst_n", 1), ("en", 1)], reset={"rst_n": 0}, init={"cnt": 0},
    sample=lambda s, i: {"rst_n": i["rst_n"], "en": i["en"], "cnt": s["cnt"]},
    step=lambda s, i: {"cnt": 0 if not i["rst_n"] else (s["cnt"] + i["en"]) % 4},
)

HS_RTL = """
module hs(input logic clk, input logic rst, input logic req, output logic ack);
  always_ff @(posedge clk) begin
    if (rst) ack <= 1'b0;
    else ack <= req;
  end
endmodule
"""

HS = RefModel(
    inputs=[("rst", 1), ("req", 1)], reset={"rst": 1}, init={"ack": 0},
    sample=lambda s, i: {"rst": i["rst"], "req": i["req"], "ack": s["ack"]},
    step=lambda s, i: {"ack": 0 if i["rst"] else i["req"]},
)

SHIFT_RTL = """
module shift3(input logic clk, input logic din, output logic s2);
  logic s0, s1;
  always_ff @(posedge clk) begin
    s0 <= din;
    s1 <= s0;
    s2 <= s1;
  end
endmodule
"""

SHIFT = RefModel(
    inputs=[("din", 1)], reset={}, init={"s0": 0, "s1": 0, "s2": 0},
    sample=lambda s, i: {"din": i["din"], **s},
    step=lambda s, i: {"s0": i["din"], "s1": s["s0"], "s2": s["s1"]},
)

FSM_RTL = """
module fsm3(input logic clk, input logic rst, input logic go, output logic done);
  logic [1:0] st;
  always_ff @(posedge clk) begin
    if (rst) st <= 2'd0;
    else begin
      case (st)
        2'd0: if (go) st <= 2'd1;
        2'd1: st <= 2'd2;
        2'd2: st <= 2'd0;
        default: st <= 2'd0;
      endcase
    end
  end
  assign done = (st == 2'd2);
endmodule
"""


def _fsm_next(s, i):
    if i["rst"]:
        return {"st": 0}
    st = s["st"]
    return {"st": {0: 1 if i["go"] else 0, 1: 2, 2: 0}.get(st, 0)}


FSM = RefModel(
    inputs=[("rst", 1), ("go", 1)], reset={"rst": 1}, init={"st": 0},
    sample=lambda s, i: {"rst": i["rst"], "go": i["go"], "st": s["st"], "done": int(s["st"] == 2)},
    step=_fsm_next,
)

MUX_RTL = """
module mux2(input logic clk, input logic sel, input logic a, input logic b, output logic y, output logic yq);
  assign y = sel ? a : b;
  always_ff @(posedge clk) yq <= y;
endmodule
"""

MUX = RefModel(
    inputs=[("sel", 1), ("a", 1), ("b", 1)], reset={}, init={"yq": 0},
    sample=lambda s, i: {**i, "y": i["a"] if i["sel"] else i["b"], "yq": s["yq"]},
    step=lambda s, i: {"yq": i["a"] if i["sel"] else i["b"]},
)

DESIGNS = {
    "toggle": (TOGGLE_RTL, TOGGLE),
    "cnt4": (CNT_RTL, CNT),
    "hs": (HS_RTL, HS),
    "shift3": (SHIFT_RTL, SHIFT),
    "fsm3": (FSM_RTL, FSM),
    "mux2": (MUX_RTL, MUX),
}

CLK = "@(posedge clk)"


def _not(name):
    return lambda tr, t: tr.val(name, t) == 0


def _stable(name):
    return lambda tr, t: tr.val(name, t) == tr.past(name, t)


rst_hi = sig("rst")
rst_lo = _not("rst_n")

PAIRS = [
    Pair("toggle_next_low", "toggle", f"{CLK} q |-> ##1 !q",
         NaiveProp([(1, 1, _not("q"))], always(sig("q"))), 8),
    Pair("toggle_next_high", "toggle", f"{CLK} q |-> ##1 q",
         NaiveProp([(1, 1, sig("q"))], always(sig("q"))), 8),
    Pair("toggle_nonoverlap", "toggle", f"{CLK} !q |=> q",
         NaiveProp(always(sig("q")), always(_not("q")), overlapped=False), 8),
    Pair("toggle_disabled", "toggle", f"{CLK} disable iff (rst) !q |=> q",
         NaiveProp(always(sig("q")), always(_not("q")), overlapped=False, disable=rst_hi), 8),
    Pair("toggle_window", "toggle", f"{CLK} q |-> ##[1:2] q",
         NaiveProp([(1, 2, sig("q"))], always(sig("q"))), 8),

    Pair("cnt_increment", "cnt4", f"{CLK} disable iff (!rst_n) en |=> cnt == $past(cnt) + 2'd1",
         NaiveProp(always(lambda tr, t: tr.val("cnt", t) == (tr.past("cnt", t) + 1) % 4), always(sig("en")),
                   overlapped=False, disable=rst_lo), 6),
    Pair("cnt_hold_undisabled", "cnt4", f"{CLK} !en |=> $stable(cnt)",
         NaiveProp(always(_stable("cnt")), always(_not("en")), overlapped=False), 6),
    Pair("cnt_hold", "cnt4", f"{CLK} disable iff (!rst_n) !en |=> $stable(cnt)",
         NaiveProp(always(_stable("cnt")), always(_not("en")), overlapped=False, disable=rst_lo), 6),
    Pair("cnt_never_three", "cnt4", f"{CLK} cnt != 2'd3",
         NaiveProp(always(lambda tr, t: tr.val("cnt", t) != 3)), 6),
    Pair("cnt_rose_msb", "cnt4", f"{CLK} $rose(cnt[1]) |-> cnt == 2'd2",
         NaiveProp(always(sig("cnt", 2)),
                   always(lambda tr, t: (tr.val("cnt", t) >> 1) == 1 and (tr.past("cnt", t) >> 1) == 0)), 6),

    Pair("hs_window_undisabled", "hs", f"{CLK} req |-> ##[1:2] ack",
         NaiveProp([(1, 2, sig("ack"))], always(sig("req"))), 6),
    Pair("hs_window", "hs", f"{CLK} disable iff (rst) req |-> ##[1:2] ack",
         NaiveProp([(1, 2, sig("ack"))], always(sig("req")), disable=rst_hi), 6),
    Pair("hs_late", "hs", f"{CLK} disable iff (rst) req |-> ##2 ack",
         NaiveProp([(2, 2, sig("ack"))], always(sig("req")), disable=rst_hi), 6),
    Pair("hs_past", "hs", f"{CLK} ack |-> $past(req)",
         NaiveProp(always(lambda tr, t: tr.past("req", t) == 1), always(sig("ack"))), 6),

    Pair("shift_three", "shift3", f"{CLK} din |-> ##3 s2",
         NaiveProp([(3, 3, sig("s2"))], always(sig("din"))), 8),
    Pair("shift_two", "shift3", f"{CLK} din |-> ##2 s2",
         NaiveProp([(2, 2, sig("s2"))], always(sig("din"))), 8),
    Pair("shift_past", "shift3", f"{CLK} s2 |-> $past(din, 3)",
         NaiveProp(always(lambda tr, t: tr.past("din", t, 3) == 1), always(sig("s2"))), 8),
    Pair("shift_seq", "shift3", f"{CLK} din ##1 din |=> s1",
         NaiveProp(always(sig("s1")), [(0, 0, sig("din")), (1, 1, sig("din"))], overlapped=False), 8),

    Pair("fsm_unreachable", "fsm3", f"{CLK} st == 2'd3 |-> done",
         NaiveProp(always(sig("done")), always(sig("st", 3))), 6),
    Pair("fsm_progress", "fsm3", f"{CLK} disable iff (rst) st == 2'd1 |=> done",
         NaiveProp(always(sig("done")), always(sig("st", 1)), overlapped=False, disable=rst_hi), 6),
    Pair("fsm_go", "fsm3", f"{CLK} go |=> st == 2'd1",
         NaiveProp(always(sig("st", 1)), always(sig("go")), overlapped=False), 6),
    Pair("fsm_return", "fsm3", f"{CLK} done |=> st == 2'd0",
         NaiveProp(always(sig("st", 0)), always(sig("done")), overlapped=False), 6),

    Pair("mux_select", "mux2", f"{CLK} sel |-> y == a",
         NaiveProp(always(lambda tr, t: tr.val("y", t) == tr.val("a", t)), always(sig("sel"))), 5),
    Pair("mux_wrong", "mux2", f"{CLK} y |-> a",
         NaiveProp(always(sig("a")), always(sig("y"))), 5),
    Pair("mux_registered", "mux2", f"{CLK} y |=> yq",
         NaiveProp(always(sig("yq")), always(sig("y")), overlapped=False), 5),
]
