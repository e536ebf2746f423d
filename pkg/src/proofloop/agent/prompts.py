"""Prompt text. The defaults are plain configuration; callers may substitute their own."""

from __future__ import annotations

from ..kb import KnowledgeBase, interface_query
from ..rtl.elab import hierarchy_summary, hierarchy_tree
from ..solver.result import ProofResult

SYSTEM_PROMPT = """You are a hardware verification engineer writing SystemVerilog Assertions (SVA).
You are given a natural-language specification and access to a design through tools.
Work in Thought -> Action -> Observation steps: call tools to learn signal names, module
interfaces, clocking, reset behavior and dependencies. When you have enough context, reply
without tool calls.

Assertions are bound to the top module. Refer to signals inside instances with dotted paths
such as u0.q. Use the form
  label: assert property (@(posedge clk) [disable iff (cond)] antecedent |-> consequent);
Supported temporal operators: ##n, ##[m:n], |->, |=>, $past, $rose, $fell, $stable.
Do not use part-selects on unpacked arrays; compare elements individually."""

GENERATE_PROMPT = """Write the assertions for the specification now, bound to module `{top}`.
Return them in a single ```systemverilog fenced block, one labeled assertion per line."""

REPAIR_INSTRUCTION = """Edit only the failing assertions listed above. Keep every other assertion exactly as it
is, character for character. Return the complete assertion set in a single ```systemverilog
fenced block, one labeled assertion per line."""

REASK_PROMPT = """Your previous reply contained no fenced code block with assertions. Reply with the
assertions in a single ```systemverilog fenced block."""


def design_context(design, kb: KnowledgeBase) -> str:
    """Top interface plus a hierarchy summary: the minimal grounding before any tool call."""
    iface = interface_query(kb, design.top).canonical_text
    tree = hierarchy_summary(hierarchy_tree(design.unit, design.top))
    return f"Top module interface:\n{iface}\n\nInstance hierarchy:\n{tree}"


def raw_rtl_context(design) -> str:
    parts = []
    for name, text in design.sources:
        parts.append(f"// file: {name}\n{text.rstrip()}")
    return "Design RTL:\n" + "\n\n".join(parts)


def task_message(spec: str, context: str) -> str:
    return f"Specification:\n{spec.strip()}\n\n{context}"


def build_repair_prompt(candidate, result: ProofResult) -> str:
    """Feedback for one failed round: failing assertions verbatim with the solver's evidence."""
    lines_by_label = {}
    line = 1
    for label, text in candidate.assertions:
        lines_by_label[line] = label
        line += text.count("\n") + 1
    out = ["The formal checker reported problems with your assertions.", ""]
    keep = []
    if not result.compile_ok:
        out.append("Compilation failed:")
        failing = []
        for d in result.diagnostics:
            out.append(f"  {d}")
            label = lines_by_label.get(d.line)
            if label is not None and label not in failing:
                failing.append(label)
        out.append("")
        if not failing:
            failing = list(candidate.labels)
        for label in failing:
            out.append(f"Failing assertion {label}:")
            out.append(f"  {candidate.text_of(label)}")
        out.append("")
        keep = [lab for lab in candidate.labels if lab not in failing]
    else:
        for p in result.per_property:
            if p.status == "proven":
                keep.append(p.label)
                continue
            if p.status == "undetermined":
                continue
            out.append(f"Failing assertion {p.label} (falsified):")
            out.append(f"  {candidate.text_of(p.label)}")
            out.append(f"  {p.message}")
            out.append("  Counterexample (cycle-by-cycle):")
            out.extend("    " + row for row in p.counterexample.table().splitlines())
            out.append("")
    if keep:
        what = "passed" if result.compile_ok else "compiled without errors"
        out.append(f"These assertions {what} and must be preserved verbatim:")
        for label in keep:
            out.append(f"  {label}: {candidate.text_of(label)}")
        out.append("")
    out.append(REPAIR_INSTRUCTION)
    return "\n".join(out)
