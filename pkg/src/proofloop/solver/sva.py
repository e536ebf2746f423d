"""Concurrent-assertion subset: parsing, name resolution and syntax checking.

Grammar (one statement)::

    [label ':'] ['assert' 'property' '('] [clock] ['disable' 'iff' '(' expr ')'] seq
        [('|->' | '|=>') seq] [')'] ';'
    clock := '@' '(' ('posedge' | 'negedge') name ')'
    seq   := [delay] expr { delay expr }
    delay := '##' N | '##' '[' M ':' N ']'

Expressions are the RTL expression language plus $past, $rose, $fell, $stable,
$changed, $onehot, $onehot0, $countones and $isunknown. Hierarchical names
(``u0.q``) refer into instances below the bind target.
"""

from __future__ import annotations

import dataclasses
import difflib
from dataclasses import dataclass
from typing import Optional

from ..rtl import ast as A
from ..rtl.diagnostics import Diagnostic, RTLError
from ..rtl.elab import ParameterError, const_eval
from ..rtl.lexer import tokenize
from ..rtl.parser import Parser
from ..rtl.unparse import expr_str

HISTORY_CAP = 16
SYSTEM_FUNCS = {
    "$past": (1, 2), "$rose": (1, 1), "$fell": (1, 1), "$stable": (1, 1), "$changed": (1, 1),
    "$onehot": (1, 1), "$onehot0": (1, 1), "$countones": (1, 1), "$isunknown": (1, 1),
}


@dataclass(frozen=True)
class SeqStep:
    lo: int  # cycles to wait after the previous step (0 for the first step = same cycle)
    hi: int
    expr: A.Expr


@dataclass(frozen=True)
class PropertyAst:
    clock: Optional[tuple]  # (edge, signal)
    disable_iff: Optional[A.Expr]
    antecedent: Optional[tuple]  # tuple of SeqStep
    kind: Optional[str]  # "|->" | "|=>" | None
    consequent: tuple

    def monitor_form(self) -> tuple:
        """(antecedent, consequent) with `|=>` rewritten as `|->` plus one cycle."""
        ante = self.antecedent or (SeqStep(0, 0, A.Number(1, 1, "b")),)
        cons = self.consequent
        if self.kind == "|=>":
            first = cons[0]
            cons = (SeqStep(first.lo + 1, first.hi + 1, first.expr),) + tuple(cons[1:])
        return ante, cons

    def exprs(self):
        if self.disable_iff is not None:
            yield self.disable_iff
        for s in (self.antecedent or ()) + tuple(self.consequent):
            yield s.expr

    def __str__(self) -> str:
        parts = []
        if self.clock:
            parts.append(f"@({'posedge' if self.clock[0] == 'pos' else 'negedge'} {self.clock[1]})")
        if self.disable_iff is not None:
            parts.append(f"disable iff ({expr_str(self.disable_iff)})")
        if self.antecedent:
            parts.append(seq_str(self.antecedent))
            parts.append(self.kind)
        parts.append(seq_str(self.consequent))
        return " ".join(parts)


def seq_str(steps) -> str:
    out = []
    for i, s in enumerate(steps):
        if i or s.hi:
            out.append(f"##{s.lo}" if s.lo == s.hi else f"##[{s.lo}:{s.hi}]")
        out.append(expr_str(s.expr))
    return " ".join(out)


class _SvaParser(Parser):
    def parse_statement(self) -> PropertyAst:
        wrapped = False
        if self.tok.is_kw("assert"):
            self.advance()
            self.expect_kw("property")
            self.expect_op("(")
            wrapped = True
        clock = None
        if self.tok.is_op("@"):
            self.advance()
            self.expect_op("(")
            if not self.tok.is_kw("posedge", "negedge"):
                raise self.error(f"syntax error: expected posedge or negedge but found {self.describe(self.tok)}")
            edge = "pos" if self.advance().text == "posedge" else "neg"
            clock = (edge, self.expect_id().text)
            self.expect_op(")")
        dis = None
        if self.tok.is_kw("disable"):
            self.advance()
            self.expect_kw("iff")
            self.expect_op("(")
            dis = self.parse_expr()
            self.expect_op(")")
        first = self.parse_sequence()
        kind = None
        cons = first
        ante = None
        if self.tok.is_op("|->", "|=>"):
            kind = self.advance().text
            ante = first
            cons = self.parse_sequence()
        if wrapped:
            self.expect_op(")")
        if self.tok.is_op(";"):
            self.advance()
        if self.tok.kind != "eof":
            raise self.error(f"syntax error: unexpected {self.describe(self.tok)} after property")
        return PropertyAst(clock, dis, None if ante is None else tuple(ante), kind, tuple(cons))

    def parse_delay(self) -> tuple[int, int]:
        t = self.expect_op("##")
        if self.tok.is_op("["):
            self.advance()
            lo = self._delay_number()
            self.expect_op(":")
            if self.tok.is_op("$"):
                raise self.unsupported("unbounded delay range ##[m:$]")
            hi = self._delay_number()
            self.expect_op("]")
            if lo > hi:
                raise self.error(f"delay range ##[{lo}:{hi}] has m > n", t)
            return lo, hi
        n = self._delay_number()
        return n, n

    def _delay_number(self) -> int:
        t = self.tok
        if t.kind != "num":
            raise self.error(f"syntax error: expected a delay count but found {self.describe(t)}")
        self.advance()
        return t.value[0]

    def parse_sequence(self) -> list:
        steps = []
        lo = hi = 0
        if self.tok.is_op("##"):
            lo, hi = self.parse_delay()
        steps.append(SeqStep(lo, hi, self.parse_expr()))
        while self.tok.is_op("##"):
            lo, hi = self.parse_delay()
            steps.append(SeqStep(lo, hi, self.parse_expr()))
        return steps


def parse_property(text: str, filename: str = "<sva>", line_offset: int = 0,
                   unpacked: Optional[set] = None) -> PropertyAst:
    toks = tokenize(text, filename)
    if line_offset:
        toks = [dataclasses.replace(t, line=t.line + line_offset) for t in toks]
    p = _SvaParser(toks, filename, assertion_mode=True, unpacked=unpacked)
    return p.parse_statement()


# name resolution and static checks

def _diag(file: str, e, msg: str, line: int) -> Diagnostic:
    sp = getattr(e, "span", None)
    if sp is not None and sp.line:
        return Diagnostic(file, sp.line, sp.col, "error", msg)
    return Diagnostic(file, line, 1, "error", msg)


def resolve_property(prop: PropertyAst, design, filename: str, line: int) -> list[Diagnostic]:
    """Check names, widths and system-function usage against the bind target."""
    signals = design.flat.signals
    diags: list[Diagnostic] = []
    known = sorted(signals)

    def unknown(name: str, node) -> None:
        close = difflib.get_close_matches(name, known, n=3, cutoff=0.5)
        hint = f"; did you mean {', '.join(repr(c) for c in close)}?" if close else ""
        diags.append(_diag(filename, node, f"undeclared signal '{name}' in module '{design.top}'{hint}", line))

    if prop.clock is not None and prop.clock[1] not in signals:
        unknown(prop.clock[1], None)

    def check(e: A.Expr) -> None:
        for x in A.iter_expr(e):
            if isinstance(x, A.Ident):
                if x.name not in signals:
                    unknown(x.name, x)
            elif isinstance(x, A.Call):
                if x.name not in SYSTEM_FUNCS:
                    diags.append(_diag(filename, x, f"unsupported system function {x.name}", line))
                    continue
                lo, hi = SYSTEM_FUNCS[x.name]
                if not lo <= len(x.args) <= hi:
                    diags.append(_diag(filename, x, f"{x.name} takes {lo}-{hi} arguments", line))
                    continue
                if x.name == "$past" and len(x.args) == 2:
                    try:
                        d = const_eval(x.args[1], {})
                    except ParameterError:
                        diags.append(_diag(filename, x, "$past depth must be a constant", line))
                        continue
                    if d < 1:
                        diags.append(_diag(filename, x, "$past depth must be at least 1", line))
                    elif d > HISTORY_CAP:
                        diags.append(_diag(filename, x, f"$past depth {d} exceeds the history cap "
                                                        f"of {HISTORY_CAP}", line))
        if diags:
            return
        for x in A.iter_expr(e):
            if isinstance(x, A.Ident) and signals[x.name].is_array:
                parent_ok = False
                for y in A.iter_expr(e):
                    if isinstance(y, A.Index) and y.base is x:
                        parent_ok = True
                if not parent_ok:
                    diags.append(_diag(filename, x, f"unpacked array '{x.name}' used without an element index",
                                       line))

    for e in prop.exprs():
        check(e)
    return diags


def compile_assertions(design, candidate, filename: str = "assertions.sva"):
    """Parse and resolve every assertion; returns ([(label, PropertyAst)], diagnostics)."""
    unpacked = design.unpacked_names()
    props, diags = [], []
    line = 1
    for label, text in candidate.assertions:
        try:
            prop = parse_property(text, filename, line_offset=line - 1, unpacked=unpacked)
        except RTLError as exc:
            diags.extend(exc.diagnostics)
        else:
            if prop.clock is None:
                clocks = sorted(design.sim.clock_inputs)
                if len(clocks) == 1:
                    prop = dataclasses.replace(prop, clock=("pos", clocks[0]))
                else:
                    diags.append(Diagnostic(filename, line, 1, "error",
                                            f"property '{label}' has no clocking event"))
            found = resolve_property(prop, design, filename, line)
            if found:
                diags.extend(found)
            else:
                try:
                    from .monitor import MonitorAutomaton

                    MonitorAutomaton(prop, design)
                except Exception as exc:  # width or select problems surface here
                    diags.append(Diagnostic(filename, line, 1, "error", f"in '{label}': {exc}"))
                else:
                    props.append((label, prop))
        line += text.count("\n") + 1
    return props, diags


def check_syntax(design, candidate, filename: str = "assertions.sva") -> tuple[bool, list[Diagnostic]]:
    _, diags = compile_assertions(design, candidate, filename)
    return not diags, diags
