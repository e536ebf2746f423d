from __future__ import annotations

from importlib import resources
from pathlib import Path

from proofloop.candidate import SvaCandidate
from proofloop.design import Design

CORPUS = Path(str(resources.files("proofloop") / "data" / "corpus"))
CASE_STUDY = CORPUS / "fsm_ready_ctrl"


def design(rtl: str, top: str) -> Design:
    return Design.from_sources([(f"{top}.sv", rtl)], top)


def candidate(*texts: str, top: str = "m") -> SvaCandidate:
    items = []
    for i, t in enumerate(texts, 1):
        body = t if t.startswith("assert") else f"assert property ({t});"
        items.append((f"p{i}", body))
    return SvaCandidate(items, top, "", 1)


CHAIN_RTL = """
module m(input logic clk, input logic a, output logic c);
  logic b;
  assign b = a;
  assign c = b;
endmodule
"""

TOGGLE_RTL = """
module m(input logic clk, input logic rst, output logic q);
  always_ff @(posedge clk) begin
    if (rst) q <= 1'b0;
    else q <= ~q;
  end
endmodule
"""
